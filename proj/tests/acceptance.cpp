#include <chrono>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.h"
#include "ridepool/config.h"
#include "ridepool/oracle.h"

using namespace ridepool;

namespace {

int failures = 0;

class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void report(int num, const std::string& name, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    std::cout << (ok ? "PASS" : "FAIL") << " " << num << " " << name << " (" << detail << ")\n";
}

struct Instance {
    RoadNetworkPair net;
    ContractionHierarchy chVeh;
    ContractionHierarchy chPsg;
    std::vector<Vehicle> vehicles;
    std::vector<Request> requests;
    SimConfig config;
};

std::vector<Instance> makeOracleInstances() {
    std::mt19937 rng(9001);
    std::vector<Instance> instances;
    const Dist radii[3] = {0, 300, 900};
    for (int i = 0; i < 54; ++i) {
        Instance inst;
        const int n = 10 + (i * 17) % 41;
        auto net = fixtures::randomNetwork(rng, n, n + 4);
        inst.chVeh = ContractionHierarchy::build(net.veh);
        inst.chPsg = ContractionHierarchy::build(net.psg);
        inst.vehicles = fixtures::randomVehicles(rng, 1 + i % 5, n);
        inst.requests = fixtures::randomRequests(rng, 15 + (i * 7) % 26, n);
        inst.config.params.walkRadius = radii[i % 3];
        inst.config.params.stopTime = i % 2 == 0 ? 60 : 600;
        inst.config.params.maxWaitTime = i % 4 < 2 ? 400 : 6000;
        inst.net = std::move(net);
        instances.push_back(std::move(inst));
    }
    return instances;
}

std::string logFor(const Instance& inst, const SimConfig& config) {
    const SimulationResult result =
        runSimulation(inst.net, inst.chVeh, inst.chPsg, inst.vehicles, inst.requests, config);
    std::string log;
    for (const DispatchOutcome& o : result.outcomes) {
        log += outcomeLogLine(o);
        log += '\n';
    }
    return log;
}

int64_t scannedFor(const Instance& inst, const SimConfig& config) {
    const SimulationResult result =
        runSimulation(inst.net, inst.chVeh, inst.chPsg, inst.vehicles, inst.requests, config);
    int64_t scanned = 0;
    for (const DispatchOutcome& o : result.outcomes)
        for (const SearchStats& s : o.phases.search) scanned += s.entriesScanned;
    return scanned;
}

struct DistCache {
    const Graph* g;
    std::map<Vertex, std::vector<Dist>> rows;

    const std::vector<Dist>& from(Vertex s) {
        auto [it, fresh] = rows.try_emplace(s);
        if (fresh) it->second = fixtures::refDistances(*g, s);
        return it->second;
    }

    Dist at(Vertex s, Vertex t) { return from(s)[static_cast<size_t>(t)]; }
};

// Replays requests through the brute-force dispatcher so the fleet reaches a
// realistic mid-simulation state.
void replayOracle(const RoadNetworkPair& net, FleetState& fleet, const std::vector<Request>& requests,
                  const CostParameters& params, Dist walkRadius) {
    std::vector<StopView> buffer;
    for (const Request& r : requests) {
        fleet.advanceTo(r.reqTime);
        fleet.advanceIdleDepartures();
        auto best = oracleDispatchBest(net, snapshotFleet(fleet), r, walkRadius, params);
        if (!best.found() || best.insertion.vehicleId < 0) continue;
        const Time maxTrip = oracleMaxTrip(net, r, params);
        auto eval = evaluateInsertion(fleet.fillContext(best.insertion.vehicleId, buffer), r,
                                      best.insertion, params, maxTrip);
        if (!eval.feasible) throw std::runtime_error("replay produced an infeasible winner");
        fleet.apply(r, best.insertion, eval, maxTrip);
    }
}

void criterionRoutingExactness() {
    Stopwatch watch;
    std::mt19937 rng(501);
    CostParameters params;
    params.stopTime = 60;
    int64_t checked = 0;
    std::string firstBad;

    auto expect = [&](bool ok, const std::string& what, int graph) {
        ++checked;
        if (!ok && firstBad.empty())
            firstBad = what + " on graph " + std::to_string(graph);
    };

    for (int g = 0; g < 100 && firstBad.empty(); ++g) {
        const int n = 20 + (g * 13) % 81;
        auto net = fixtures::randomNetwork(rng, n, n + 8);
        auto ch = ContractionHierarchy::build(net.veh);
        DistCache dist{&net.veh, {}};
        std::uniform_int_distribution<Vertex> vertex(0, n - 1);

        for (int s = 0; s < 2; ++s) {
            const Vertex source = vertex(rng);
            const auto& row = dist.from(source);
            for (Vertex t = 0; t < n; ++t)
                expect(ch.query(source, t) == row[static_cast<size_t>(t)], "ch query", g);
        }

        const Request probe = fixtures::makeRequest(900, vertex(rng), vertex(rng), 0);
        auto pd = findPdLocations(net, probe, 300);
        if (!pd.usable()) continue;
        auto matrix = pdDistanceSearch(ch, pd, kInf, 8);
        for (size_t p = 0; p < pd.pickups.size(); ++p)
            for (size_t d = 0; d < pd.dropoffs.size(); ++d)
                expect(matrix.at(static_cast<int>(p), static_cast<int>(d)) ==
                           dist.at(pd.pickups[p].vertex, pd.dropoffs[d].vertex),
                       "pd matrix", g);

        FleetState fleet(ch, fixtures::randomVehicles(rng, 2, n), params);
        auto warmup = fixtures::randomRequests(rng, 6, n);
        replayOracle(net, fleet, warmup, params, 0);

        EllipticBuckets elliptic(ch, params.stopTime, 16, true, PruningConfig{});
        elliptic.sync(fleet);
        for (const auto& [side, pds] :
             {std::pair{elliptic.query(pd.pickups), pd.pickups},
              std::pair{elliptic.query(pd.dropoffs), pd.dropoffs}})
            for (const auto& [startStopId, cands] : side.byLeg) {
                const auto [veh, pos] = fleet.locateStop(startStopId);
                const auto& stops = fleet.stops(veh);
                const Vertex start = stops[static_cast<size_t>(pos)].location;
                const Vertex end = stops[static_cast<size_t>(pos) + 1].location;
                for (const auto& c : cands) {
                    const Vertex v = pds[static_cast<size_t>(c.pdIdx)].vertex;
                    expect(c.toPd == dist.at(start, v), "elliptic toPd", g);
                    expect(c.fromPd == dist.at(v, end), "elliptic fromPd", g);
                }
            }

        const Request r = fixtures::makeRequest(901, vertex(rng), vertex(rng), fleet.now());
        auto rpd = findPdLocations(net, r, 300);
        if (!rpd.usable()) continue;
        auto rmatrix = pdDistanceSearch(ch, rpd, kInf, 8);
        const Time maxTrip = oracleMaxTrip(net, r, params);
        LastStopBuckets buckets(ch, true);
        buckets.sync(fleet);
        BestAssignment best;
        SearchStats stats;
        palsSearch(net, ch, buckets, fleet, r, params, maxTrip, rpd, rmatrix,
                   LastStopStrategy::IndividualBch, 8, PruningConfig{}, best, stats);
        if (best.found()) {
            const Insertion& ins = best.insertion;
            const Vertex last = fleet.stops(ins.vehicleId).back().location;
            expect(ins.distToPickup == dist.at(last, ins.pickup.vertex), "pals distToPickup", g);
            expect(ins.distFromPickup == dist.at(ins.pickup.vertex, ins.dropoff.vertex),
                   "pals pd distance", g);
        }
        auto pickupSide = elliptic.query(rpd.pickups);
        auto dropoffSide = elliptic.query(rpd.dropoffs);
        auto byVehicle = groupByVehicle(fleet, pickupSide, dropoffSide);
        CurrentLocationBuckets clBuckets(ch, 8);
        BestAssignment dalsBest;
        dalsSearch(net, ch, buckets, fleet, r, params, maxTrip, rpd, rmatrix, byVehicle, clBuckets,
                   LastStopStrategy::IndividualBch, 8, PruningConfig{}, dalsBest, stats);
        if (dalsBest.found()) {
            const Insertion& ins = dalsBest.insertion;
            const Vertex last = fleet.stops(ins.vehicleId).back().location;
            expect(ins.distToDropoff == dist.at(last, ins.dropoff.vertex), "dals distToDropoff", g);
        }
    }

    const double elapsed = watch.seconds();
    std::ostringstream detail;
    detail << "100 graphs, " << checked << " distances, " << elapsed << "s";
    if (!firstBad.empty()) detail << ", first mismatch: " << firstBad;
    report(1, "routing exactness", firstBad.empty() && elapsed < 60.0, detail.str());
}

void criterionGlobalOracle(const std::vector<Instance>& instances) {
    Stopwatch watch;
    std::string error;
    int64_t served = 0;
    for (size_t i = 0; i < instances.size() && error.empty(); ++i) {
        const Instance& inst = instances[i];
        SimConfig config = inst.config;
        config.verifyOracle = true;
        try {
            const SimulationResult result = runSimulation(inst.net, inst.chVeh, inst.chPsg,
                                                          inst.vehicles, inst.requests, config);
            served += result.stats.served;
        } catch (const std::exception& e) {
            error = "instance " + std::to_string(i) + ": " + e.what();
        }
    }
    const double elapsed = watch.seconds();
    std::ostringstream detail;
    detail << instances.size() << " instances, " << served << " served, " << elapsed << "s";
    if (!error.empty()) detail << ", " << error;
    report(2, "global dispatch oracle", error.empty() && served > 0 && elapsed < 300.0,
           detail.str());
}

void criterionStrategyEquivalence(const std::vector<Instance>& instances) {
    Stopwatch watch;
    std::string error;
    const LastStopStrategy strategies[] = {LastStopStrategy::Dijkstra,
                                           LastStopStrategy::IndividualBch,
                                           LastStopStrategy::CollectiveBch};
    int runs = 0;
    for (size_t i = 0; i < instances.size() && error.empty(); ++i) {
        const Instance& inst = instances[i];
        std::string baseLog;
        for (const LastStopStrategy s : strategies) {
            for (const bool sorted : {true, false}) {
                for (const int k : {1, 8, 16, 32, 64}) {
                    SimConfig config = inst.config;
                    config.palsStrategy = s;
                    config.dalsStrategy = s;
                    config.sortedBuckets = sorted;
                    config.kElliptic = k;
                    config.kPd = k;
                    config.kLastStop = k;
                    const std::string log = logFor(inst, config);
                    ++runs;
                    if (baseLog.empty()) baseLog = log;
                    if (log != baseLog) {
                        error = "instance " + std::to_string(i) + ", strategy " +
                                strategyName(s) + " sorted=" + (sorted ? "on" : "off") +
                                " k=" + std::to_string(k) + " diverged";
                        break;
                    }
                }
                if (!error.empty()) break;
            }
            if (!error.empty()) break;
        }
    }
    std::ostringstream detail;
    detail << runs << " paired runs, " << watch.seconds() << "s";
    if (!error.empty()) detail << ", " << error;
    report(3, "strategy equivalence", error.empty(), detail.str());
}

void criterionWorkedExample() {
    namespace f2 = fixtures::fig2;
    auto params = f2::params();
    std::vector<StopView> buffer;
    auto ctx = f2::context(buffer);
    auto r = f2::request();

    CostBreakdown eval[3][3];
    bool feasible = true;
    for (int k = 1; k <= 2; ++k)
        for (int l = 1; l <= 2; ++l) {
            eval[k][l] = evaluateInsertion(ctx, r, f2::insertion(k, l), params, f2::kMaxTrip);
            feasible = feasible && eval[k][l].feasible;
        }
    const bool trips = eval[1][1].tripTime == 9 && eval[1][2].tripTime == 8 &&
                       eval[2][1].tripTime == 12 && eval[2][2].tripTime == 11;
    const bool diffs = eval[1][1].total - eval[1][2].total == -1 &&
                       eval[2][1].total - eval[2][2].total == 9;
    const bool pareto =
        !dalsDominates(params, f2::kVehBD1, f2::kWalkD1Dest, f2::kVehBD2, f2::kWalkD2Dest) &&
        !dalsDominates(params, f2::kVehBD2, f2::kWalkD2Dest, f2::kVehBD1, f2::kWalkD1Dest);

    std::ostringstream detail;
    detail << "trip times " << eval[1][1].tripTime << "/" << eval[1][2].tripTime << "/"
           << eval[2][1].tripTime << "/" << eval[2][2].tripTime << ", diffs "
           << eval[1][1].total - eval[1][2].total << "/" << eval[2][1].total - eval[2][2].total
           << ", both dropoffs survive: " << (pareto ? "yes" : "no");
    report(4, "worked example", feasible && trips && diffs && pareto, detail.str());
}

void criterionDeltaCMaxAdmissible() {
    Stopwatch watch;
    std::mt19937 rng(601);
    std::uniform_int_distribution<Dist> dist(0, 2000);
    std::uniform_int_distribution<Dist> walk(0, 500);
    std::uniform_int_distribution<Cost> weight(0, 5);
    std::uniform_int_distribution<Time> cap(0, 4000);
    int64_t pairs = 0;
    int64_t comparisons = 0;
    std::string firstBad;

    for (int trial = 0; trial < 12000; ++trial) {
        CostParameters params;
        params.stopTime = 60;
        params.waitPenaltyWeight = weight(rng);
        params.tripPenaltyWeight = weight(rng) * 4;
        params.tripWeight = weight(rng);
        params.walkWeight = weight(rng);

        PalsLabelView l1{dist(rng), dist(rng), walk(rng), walk(rng)};
        PalsLabelView l2{dist(rng), dist(rng), walk(rng), walk(rng)};
        const Time maxTrip = cap(rng);
        const Request r = fixtures::makeRequest(0, 0, 1, 0);
        const Cost delta = palsDeltaCMax(params, l1, l2);
        ++pairs;

        for (const Dist t : {0, 1, 7, 100, 1000, 10000}) {
            for (const Time depTime : {0, 500, 5000}) {
                const Cost c1 = palsCost(r, params, maxTrip, depTime, kInf, t + l1.distDown, l1.pd,
                                         l1.walkP, l1.walkD, false)
                                    .total;
                const Cost c2 = palsCost(r, params, maxTrip, depTime, kInf, t + l2.distDown, l2.pd,
                                         l2.walkP, l2.walkD, false)
                                    .total;
                ++comparisons;
                if (c1 - c2 > delta && firstBad.empty()) {
                    std::ostringstream bad;
                    bad << "trial " << trial << " t=" << t << " dep=" << depTime << ": " << c1
                        << "-" << c2 << " > " << delta;
                    firstBad = bad.str();
                }
            }
        }
    }

    std::ostringstream detail;
    detail << pairs << " label pairs, " << comparisons << " completions, " << watch.seconds()
           << "s";
    if (!firstBad.empty()) detail << ", " << firstBad;
    report(5, "delta-c-max admissibility", firstBad.empty() && pairs >= 10000, detail.str());
}

void criterionPruningLossless(const std::vector<Instance>& instances) {
    Stopwatch watch;
    std::string error;
    for (size_t i = 0; i < instances.size() && error.empty(); ++i) {
        const Instance& inst = instances[i];
        const std::string baseLog = logFor(inst, inst.config);

        const char* names[5] = {"elliptic-leeway", "sorted-early-stop", "max-pd-radius",
                                "cost-scans", "domination"};
        for (int toggle = 0; toggle < 5; ++toggle) {
            SimConfig config = inst.config;
            switch (toggle) {
                case 0: config.pruning.ellipticLeeway = false; break;
                case 1: config.pruning.sortedEarlyStop = false; break;
                case 2: config.pruning.maxPdRadius = false; break;
                case 3: config.pruning.costScans = false; break;
                case 4: config.pruning.domination = false; break;
            }
            if (logFor(inst, config) != baseLog) {
                error = "instance " + std::to_string(i) + ": disabling " + names[toggle] +
                        " changed the outcomes";
                break;
            }
        }
        if (!error.empty()) break;

        SimConfig sortedConfig = inst.config;
        sortedConfig.sortedBuckets = true;
        SimConfig unsortedConfig = inst.config;
        unsortedConfig.sortedBuckets = false;
        const int64_t sorted = scannedFor(inst, sortedConfig);
        const int64_t unsorted = scannedFor(inst, unsortedConfig);
        if (sorted > unsorted)
            error = "instance " + std::to_string(i) + ": sorted buckets scanned " +
                    std::to_string(sorted) + " > unsorted " + std::to_string(unsorted);
    }
    std::ostringstream detail;
    detail << instances.size() << " instances x 5 toggles, " << watch.seconds() << "s";
    if (!error.empty()) detail << ", " << error;
    report(6, "pruning losslessness", error.empty(), detail.str());
}

void criterionObjectiveReduction(const std::vector<Instance>& instances) {
    Stopwatch watch;
    std::string error;
    int64_t checkedInsertions = 0;
    std::vector<StopView> buffer;

    for (size_t i = 0; i < instances.size() && error.empty(); ++i) {
        const Instance& inst = instances[i];
        CostParameters params = inst.config.params;
        params.tripWeight = 0;
        params.walkWeight = 0;
        params.walkRadius = 0;

        DistCache dist{&inst.net.veh, {}};
        FleetState fleet(inst.chVeh, inst.vehicles, params);
        for (const Request& r : inst.requests) {
            fleet.advanceTo(r.reqTime);
            fleet.advanceIdleDepartures();
            const Time maxTrip = oracleMaxTrip(inst.net, r, params);

            const Dist walkOD = fixtures::refDistance(inst.net.psg, r.origin, r.destination);
            const CostBreakdown walk = pseudoCost(r, walkOD, params, maxTrip);
            if (walk.feasible && walk.total != walk.tripViolation) {
                error = "instance " + std::to_string(i) + ": pseudo total " +
                        std::to_string(walk.total) + " != penalties";
                break;
            }

            for (int veh = 0; veh < fleet.numVehicles() && error.empty(); ++veh) {
                const auto ctx = fleet.fillContext(veh, buffer);
                const int n = static_cast<int>(fleet.stops(veh).size()) - 1;
                const Vertex cur = fleet.currentLocation(veh).vertex;
                for (int pi = 0; pi <= n && error.empty(); ++pi)
                    for (int dj = pi; dj <= n; ++dj) {
                        Insertion ins;
                        ins.vehicleId = veh;
                        ins.pickupPos = pi;
                        ins.dropoffPos = dj;
                        ins.pickup = {r.origin, 0};
                        ins.dropoff = {r.destination, 0};
                        const auto& stops = fleet.stops(veh);
                        const Vertex from =
                            pi == 0 ? cur : stops[static_cast<size_t>(pi)].location;
                        ins.distToPickup = dist.at(from, r.origin);
                        ins.distFromPickup =
                            pi == dj ? dist.at(r.origin, r.destination)
                                     : dist.at(r.origin,
                                               stops[static_cast<size_t>(pi) + 1].location);
                        ins.distToDropoff =
                            pi == dj ? ins.distFromPickup
                                     : dist.at(stops[static_cast<size_t>(dj)].location,
                                               r.destination);
                        ins.distFromDropoff =
                            dj == n ? 0
                                    : dist.at(r.destination,
                                              stops[static_cast<size_t>(dj) + 1].location);
                        const CostBreakdown e = evaluateInsertion(ctx, r, ins, params, maxTrip);
                        if (!e.feasible) continue;
                        ++checkedInsertions;
                        if (e.total != e.detour + e.waitViolation + e.tripViolation) {
                            error = "instance " + std::to_string(i) + " request " +
                                    std::to_string(r.id) + ": total " + std::to_string(e.total) +
                                    " != detour " + std::to_string(e.detour) + " + penalties";
                            break;
                        }
                    }
            }
            if (!error.empty()) break;

            auto best = oracleDispatchBest(inst.net, snapshotFleet(fleet), r, 0, params);
            if (!best.found() || best.insertion.vehicleId < 0) continue;
            auto eval = evaluateInsertion(fleet.fillContext(best.insertion.vehicleId, buffer), r,
                                          best.insertion, params, maxTrip);
            if (!eval.feasible) {
                error = "instance " + std::to_string(i) + ": winner infeasible on re-evaluation";
                break;
            }
            fleet.apply(r, best.insertion, eval, maxTrip);
        }
    }

    std::ostringstream detail;
    detail << checkedInsertions << " feasible insertions, " << watch.seconds() << "s";
    if (!error.empty()) detail << ", " << error;
    report(7, "objective reduction", error.empty() && checkedInsertions > 0, detail.str());
}

void criterionDeterminism(const std::vector<Instance>& instances) {
    Stopwatch watch;
    std::string error;
    for (size_t i = 0; i < instances.size() && error.empty(); ++i) {
        const Instance& inst = instances[i];
        if (logFor(inst, inst.config) != logFor(inst, inst.config))
            error = "instance " + std::to_string(i) + " diverged under the default config";
        SimConfig alt = inst.config;
        alt.palsStrategy = LastStopStrategy::Dijkstra;
        alt.dalsStrategy = LastStopStrategy::IndividualBch;
        alt.sortedBuckets = false;
        alt.kElliptic = 1;
        if (error.empty() && logFor(inst, alt) != logFor(inst, alt))
            error = "instance " + std::to_string(i) + " diverged under the alternate config";
    }
    std::ostringstream detail;
    detail << instances.size() << " instances x 2 configs, " << watch.seconds() << "s";
    if (!error.empty()) detail << ", " << error;
    report(8, "determinism", error.empty(), detail.str());
}

}  // namespace

int main() {
    const std::vector<Instance> instances = makeOracleInstances();

    criterionRoutingExactness();
    criterionGlobalOracle(instances);
    criterionStrategyEquivalence(instances);
    criterionWorkedExample();
    criterionDeltaCMaxAdmissible();
    criterionPruningLossless(instances);
    criterionObjectiveReduction(instances);
    criterionDeterminism(instances);

    if (failures > 0) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all 8 criteria passed\n";
    return 0;
}
