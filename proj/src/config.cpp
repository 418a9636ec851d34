#include "ridepool/config.h"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace ridepool {

namespace {

[[noreturn]] void keyError(const std::string& key, const std::string& message) {
    throw std::runtime_error("config key '" + key + "': " + message);
}

long long parseNumber(const std::string& key, const std::string& value) {
    size_t pos = 0;
    long long parsed = 0;
    try {
        parsed = std::stoll(value, &pos);
    } catch (const std::exception&) {
        keyError(key, "expected a number, got '" + value + "'");
    }
    if (pos != value.size()) keyError(key, "expected a number, got '" + value + "'");
    return parsed;
}

long long parseAtLeast(const std::string& key, const std::string& value, long long min) {
    const long long parsed = parseNumber(key, value);
    if (parsed < min) keyError(key, "must be at least " + std::to_string(min));
    return parsed;
}

bool parseOnOff(const std::string& key, const std::string& value) {
    if (value == "on") return true;
    if (value == "off") return false;
    keyError(key, "expected on or off, got '" + value + "'");
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string requirePath(const std::string& path, const std::string& name) {
    if (path.empty()) throw std::runtime_error("missing required path: " + name);
    return path;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t hash = 1469598103934665603ull;
    for (const unsigned char c : s) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string hashHex(uint64_t hash) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << hash;
    return out.str();
}

}  // namespace

LastStopStrategy parseStrategy(const std::string& name) {
    if (name == "dijkstra") return LastStopStrategy::Dijkstra;
    if (name == "individual-bch") return LastStopStrategy::IndividualBch;
    if (name == "collective-bch") return LastStopStrategy::CollectiveBch;
    throw std::runtime_error("unknown strategy '" + name +
                             "', expected dijkstra, individual-bch, or collective-bch");
}

const char* strategyName(LastStopStrategy strategy) {
    switch (strategy) {
        case LastStopStrategy::Dijkstra: return "dijkstra";
        case LastStopStrategy::IndividualBch: return "individual-bch";
        case LastStopStrategy::CollectiveBch: return "collective-bch";
    }
    return "";
}

void applyConfigKey(RunConfig& config, const std::string& key, const std::string& value) {
    CostParameters& params = config.sim.params;
    PruningConfig& pruning = config.sim.pruning;
    if (key == "network") {
        config.networkPath = value;
    } else if (key == "vehicles") {
        config.vehiclesPath = value;
    } else if (key == "requests") {
        config.requestsPath = value;
    } else if (key == "ch-cache") {
        config.chCachePath = value;
    } else if (key == "out") {
        config.outPath = value;
    } else if (key == "radius") {
        params.walkRadius = parseAtLeast(key, value, 0);
    } else if (key == "strategy-pals") {
        config.sim.palsStrategy = parseStrategy(value);
    } else if (key == "strategy-dals") {
        config.sim.dalsStrategy = parseStrategy(value);
    } else if (key == "k-elliptic") {
        config.sim.kElliptic = static_cast<int>(parseAtLeast(key, value, 1));
    } else if (key == "k-pd") {
        config.sim.kPd = static_cast<int>(parseAtLeast(key, value, 1));
    } else if (key == "k-laststop") {
        config.sim.kLastStop = static_cast<int>(parseAtLeast(key, value, 0));
    } else if (key == "sorted-buckets") {
        config.sim.sortedBuckets = parseOnOff(key, value);
    } else if (key == "verify-oracle") {
        config.sim.verifyOracle = parseOnOff(key, value);
    } else if (key == "counters") {
        config.counters = parseOnOff(key, value);
    } else if (key == "max-wait") {
        params.maxWaitTime = parseAtLeast(key, value, 0);
    } else if (key == "stop-time") {
        params.stopTime = parseAtLeast(key, value, 0);
    } else if (key == "wait-penalty") {
        params.waitPenaltyWeight = parseAtLeast(key, value, 0);
    } else if (key == "trip-penalty") {
        params.tripPenaltyWeight = parseAtLeast(key, value, 0);
    } else if (key == "trip-weight") {
        params.tripWeight = parseAtLeast(key, value, 0);
    } else if (key == "walk-weight") {
        params.walkWeight = parseAtLeast(key, value, 0);
    } else if (key == "trip-factor") {
        params.tripFactorThousandths = parseAtLeast(key, value, 0);
    } else if (key == "trip-offset") {
        params.tripOffset = parseAtLeast(key, value, 0);
    } else if (key == "prune-elliptic-leeway") {
        pruning.ellipticLeeway = parseOnOff(key, value);
    } else if (key == "prune-sorted-early-stop") {
        pruning.sortedEarlyStop = parseOnOff(key, value);
    } else if (key == "prune-max-pd-radius") {
        pruning.maxPdRadius = parseOnOff(key, value);
    } else if (key == "prune-cost-scans") {
        pruning.costScans = parseOnOff(key, value);
    } else if (key == "prune-domination") {
        pruning.domination = parseOnOff(key, value);
    } else {
        throw std::runtime_error("unknown config key '" + key + "'");
    }
}

void loadConfigFile(RunConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineNo) +
                                     ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::runtime_error(path + ":" + std::to_string(lineNo) +
                                     ": expected key = value");
        try {
            applyConfigKey(config, key, value);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineNo) + ": " + e.what());
        }
    }
}

LoadedInstance loadInstance(const RunConfig& config) {
    LoadedInstance inst;
    inst.network = loadNetworkPair(requirePath(config.networkPath, "network"));
    bool cached = false;
    if (!config.chCachePath.empty()) {
        if (std::ifstream in(config.chCachePath, std::ios::binary); in) {
            try {
                inst.chVeh = ContractionHierarchy::load(in, inst.network.veh);
                inst.chPsg = ContractionHierarchy::load(in, inst.network.psg);
                cached = true;
            } catch (const std::exception&) {
                cached = false;  // stale or foreign cache, rebuild below
            }
        }
    }
    if (!cached) {
        inst.chVeh = ContractionHierarchy::build(inst.network.veh);
        inst.chPsg = ContractionHierarchy::build(inst.network.psg);
    }
    inst.vehicles = loadVehicles(requirePath(config.vehiclesPath, "vehicles"),
                                 inst.network.vertexCount);
    inst.requests = loadRequests(requirePath(config.requestsPath, "requests"),
                                 inst.network.vertexCount);
    return inst;
}

void writeStatsCsv(std::ostream& out, const SimulationStats& stats) {
    out << "metric,value\n";
    out << "requests," << stats.requests << '\n';
    out << "served," << stats.served << '\n';
    out << "walked," << stats.walked << '\n';
    out << "unserved," << stats.unserved << '\n';
    out << "rider_mean_wait," << stats.meanWait << '\n';
    out << "rider_p95_wait," << stats.p95Wait << '\n';
    out << "rider_mean_ride," << stats.meanRide << '\n';
    out << "rider_mean_trip," << stats.meanTrip << '\n';
    out << "fleet_mean_empty_drive," << stats.meanEmptyDrive << '\n';
    out << "fleet_mean_occupied_drive," << stats.meanOccupiedDrive << '\n';
    out << "fleet_mean_stop_time," << stats.meanStopTime << '\n';
    out << "fleet_mean_operation_time," << stats.meanOperationTime << '\n';
}

void writeCounterTotals(std::ostream& out, const std::vector<DispatchOutcome>& outcomes) {
    for (int p = 0; p < kNumPhases; ++p) {
        SearchStats total;
        int64_t micros = 0;
        for (const DispatchOutcome& o : outcomes) {
            total += o.phases.search[static_cast<size_t>(p)];
            micros += o.phases.micros[static_cast<size_t>(p)];
        }
        const char* name = phaseName(static_cast<Phase>(p));
        out << name << "_vertices_settled," << total.verticesSettled << '\n';
        out << name << "_edges_relaxed," << total.edgesRelaxed << '\n';
        out << name << "_entries_scanned," << total.entriesScanned << '\n';
        out << name << "_micros," << micros << '\n';
    }
}

int runCommand(const RunConfig& config) {
    const LoadedInstance inst = loadInstance(config);
    const SimulationResult result = runSimulation(inst.network, inst.chVeh, inst.chPsg,
                                                  inst.vehicles, inst.requests, config.sim);
    if (!config.outPath.empty()) {
        std::ofstream out(config.outPath);
        if (!out) throw std::runtime_error("cannot write outcome log " + config.outPath);
        for (const DispatchOutcome& o : result.outcomes) out << outcomeLogLine(o) << '\n';
    }
    writeStatsCsv(std::cout, result.stats);
    if (config.counters) writeCounterTotals(std::cout, result.outcomes);
    return 0;
}

int benchCommand(const RunConfig& config) {
    const LoadedInstance inst = loadInstance(config);

    std::vector<std::pair<std::string, SimConfig>> variants;
    variants.emplace_back("base", config.sim);
    {
        SimConfig flipped = config.sim;
        flipped.sortedBuckets = !flipped.sortedBuckets;
        variants.emplace_back(flipped.sortedBuckets ? "sorted-buckets" : "unsorted-buckets",
                              flipped);
    }
    for (const LastStopStrategy s : {LastStopStrategy::Dijkstra, LastStopStrategy::IndividualBch,
                                     LastStopStrategy::CollectiveBch}) {
        if (s != config.sim.palsStrategy) {
            SimConfig v = config.sim;
            v.palsStrategy = s;
            variants.emplace_back(std::string("pals-") + strategyName(s), v);
        }
        if (s != config.sim.dalsStrategy) {
            SimConfig v = config.sim;
            v.dalsStrategy = s;
            variants.emplace_back(std::string("dals-") + strategyName(s), v);
        }
    }

    std::ostringstream csv;
    csv << "variant,requests,outcome_hash,total_micros_mean";
    for (int p = 0; p < kNumPhases; ++p) csv << ',' << phaseName(static_cast<Phase>(p)) << "_micros_mean";
    if (config.counters) {
        for (int p = 0; p < kNumPhases; ++p) {
            const char* name = phaseName(static_cast<Phase>(p));
            csv << ',' << name << "_settled_mean" << ',' << name << "_relaxed_mean" << ',' << name
                << "_scanned_mean";
        }
    }
    csv << '\n';

    std::string baseHash;
    bool mismatch = false;
    for (const auto& [name, sim] : variants) {
        const SimulationResult result =
            runSimulation(inst.network, inst.chVeh, inst.chPsg, inst.vehicles, inst.requests, sim);
        std::string log;
        for (const DispatchOutcome& o : result.outcomes) {
            log += outcomeLogLine(o);
            log += '\n';
        }
        const std::string hash = hashHex(fnv1a(log));
        if (baseHash.empty()) baseHash = hash;
        if (hash != baseHash) {
            mismatch = true;
            std::cerr << "variant " << name << " produced a diverging outcome log\n";
        }

        const int64_t n = std::max<int64_t>(1, static_cast<int64_t>(result.outcomes.size()));
        std::array<SearchStats, kNumPhases> search{};
        std::array<int64_t, kNumPhases> micros{};
        int64_t totalMicros = 0;
        for (const DispatchOutcome& o : result.outcomes) {
            totalMicros += o.totalMicros;
            for (int p = 0; p < kNumPhases; ++p) {
                search[static_cast<size_t>(p)] += o.phases.search[static_cast<size_t>(p)];
                micros[static_cast<size_t>(p)] += o.phases.micros[static_cast<size_t>(p)];
            }
        }
        csv << name << ',' << result.outcomes.size() << ',' << hash << ',' << totalMicros / n;
        for (int p = 0; p < kNumPhases; ++p) csv << ',' << micros[static_cast<size_t>(p)] / n;
        if (config.counters) {
            for (int p = 0; p < kNumPhases; ++p) {
                const SearchStats& s = search[static_cast<size_t>(p)];
                csv << ',' << s.verticesSettled / n << ',' << s.edgesRelaxed / n << ','
                    << s.entriesScanned / n;
            }
        }
        csv << '\n';
    }

    if (!config.outPath.empty()) {
        std::ofstream out(config.outPath);
        if (!out) throw std::runtime_error("cannot write bench report " + config.outPath);
        out << csv.str();
    } else {
        std::cout << csv.str();
    }
    return mismatch ? 1 : 0;
}

int prepCommand(const RunConfig& config) {
    const RoadNetworkPair network = loadNetworkPair(requirePath(config.networkPath, "network"));
    const ContractionHierarchy chVeh = ContractionHierarchy::build(network.veh);
    const ContractionHierarchy chPsg = ContractionHierarchy::build(network.psg);
    const std::string path = requirePath(config.chCachePath, "ch-cache");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write CH cache " + path);
    chVeh.save(out);
    chPsg.save(out);
    if (!out) throw std::runtime_error("failed writing CH cache " + path);
    std::cout << "cached both hierarchies for " << network.vertexCount << " vertices to " << path
              << '\n';
    return 0;
}

}  // namespace ridepool
