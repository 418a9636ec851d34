#include "ridepool/sim.h"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"
#include "ridepool/oracle.h"

namespace ridepool {

namespace {

[[noreturn]] void parseError(const std::string& name, int lineNo, const std::string& message) {
    throw std::runtime_error(name + ":" + std::to_string(lineNo) + ": " + message);
}

class PhaseTimer {
  public:
    explicit PhaseTimer(int64_t& sink) : sink_(&sink), start_(std::chrono::steady_clock::now()) {}
    ~PhaseTimer() {
        *sink_ += std::chrono::duration_cast<std::chrono::microseconds>(
                      std::chrono::steady_clock::now() - start_)
                      .count();
    }
    PhaseTimer(const PhaseTimer&) = delete;
    PhaseTimer& operator=(const PhaseTimer&) = delete;

  private:
    int64_t* sink_;
    std::chrono::steady_clock::time_point start_;
};

Time meanOf(const std::vector<Time>& values) {
    if (values.empty()) return 0;
    const int64_t sum = std::accumulate(values.begin(), values.end(), int64_t{0});
    return sum / static_cast<int64_t>(values.size());
}

Time p95Of(std::vector<Time> values) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    const size_t rank = (19 * n + 19) / 20;  // ceil(0.95 n), nearest-rank
    return values[rank - 1];
}

}  // namespace

std::vector<Request> parseRequests(std::istream& in, const std::string& name, int numVertices) {
    std::vector<Request> requests;
    std::unordered_set<int32_t> seenIds;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        std::string tag;
        if (!(row >> tag)) continue;
        if (tag != "request") parseError(name, lineNo, "expected a request line, got '" + tag + "'");
        long long id = 0, origin = 0, dest = 0, reqTime = 0;
        if (!(row >> id >> origin >> dest >> reqTime))
            parseError(name, lineNo, "expected: request <id> <origin> <dest> <t_req>");
        if (std::string extra; row >> extra)
            parseError(name, lineNo, "unexpected trailing token '" + extra + "'");
        if (id < 0) parseError(name, lineNo, "request id must be non-negative");
        if (!seenIds.insert(static_cast<int32_t>(id)).second)
            parseError(name, lineNo, "duplicate request id " + std::to_string(id));
        if (origin < 0 || origin >= numVertices)
            parseError(name, lineNo, "request origin " + std::to_string(origin) + " out of range");
        if (dest < 0 || dest >= numVertices)
            parseError(name, lineNo, "request destination " + std::to_string(dest) + " out of range");
        if (reqTime < 0) parseError(name, lineNo, "request time must be non-negative");
        requests.push_back({static_cast<int32_t>(id), static_cast<Vertex>(origin),
                            static_cast<Vertex>(dest), static_cast<Time>(reqTime)});
    }
    std::stable_sort(requests.begin(), requests.end(),
                     [](const Request& a, const Request& b) { return a.reqTime < b.reqTime; });
    return requests;
}

std::vector<Request> loadRequests(const std::string& path, int numVertices) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open request file " + path);
    return parseRequests(in, path, numVertices);
}

const char* phaseName(Phase phase) {
    switch (phase) {
        case Phase::Sync: return "sync";
        case Phase::PdDistances: return "pd_distances";
        case Phase::Elliptic: return "elliptic";
        case Phase::Ordinary: return "ordinary";
        case Phase::Pbns: return "pbns";
        case Phase::Pals: return "pals";
        case Phase::Dals: return "dals";
    }
    return "";
}

const char* outcomeKindName(OutcomeKind kind) {
    switch (kind) {
        case OutcomeKind::Ordinary: return "ordinary";
        case OutcomeKind::Pbns: return "pbns";
        case OutcomeKind::Pals: return "pals";
        case OutcomeKind::Dals: return "dals";
        case OutcomeKind::Pseudo: return "pseudo";
        case OutcomeKind::Unserved: return "unserved";
    }
    return "";
}

std::string outcomeLogLine(const DispatchOutcome& outcome) {
    nlohmann::json j;
    j["request"] = outcome.requestId;
    j["type"] = outcomeKindName(outcome.kind);
    if (outcome.kind == OutcomeKind::Unserved) return j.dump();
    j["cost"] = outcome.cost.total;
    j["detour"] = outcome.cost.detour;
    j["trip_time"] = outcome.cost.tripTime;
    j["added_trip_time"] = outcome.cost.addedTripTime;
    j["walk_time"] = outcome.cost.walkTime;
    j["wait_violation"] = outcome.cost.waitViolation;
    j["trip_violation"] = outcome.cost.tripViolation;
    j["dep_pickup"] = outcome.cost.depAtPickup;
    j["arr_dropoff"] = outcome.cost.arrAtDropoff;
    j["vehicle"] = outcome.vehicleFileId;
    const bool pseudo = outcome.kind == OutcomeKind::Pseudo;
    j["pickup_pos"] = pseudo ? -1 : outcome.insertion.pickupPos;
    j["dropoff_pos"] = pseudo ? -1 : outcome.insertion.dropoffPos;
    j["pickup_vertex"] = outcome.insertion.pickup.vertex;
    j["pickup_walk"] = outcome.insertion.pickup.walk;
    j["dropoff_vertex"] = outcome.insertion.dropoff.vertex;
    j["dropoff_walk"] = outcome.insertion.dropoff.walk;
    return j.dump();
}

Engine::Engine(const RoadNetworkPair& net, const ContractionHierarchy& chVeh,
               const ContractionHierarchy& chPsg, std::vector<Vehicle> vehicles, SimConfig config)
    : net_(&net),
      chVeh_(&chVeh),
      chPsg_(&chPsg),
      config_(config),
      fleet_(chVeh, std::move(vehicles), config.params),
      elliptic_(chVeh, config.params.stopTime, config.kElliptic, config.sortedBuckets,
                config.pruning),
      lastStop_(chVeh, config.sortedBuckets),
      clBuckets_(chVeh, config.kElliptic) {
    assert(config_.kElliptic >= 1 && config_.kPd >= 1 && config_.kLastStop >= 0);
}

Time Engine::maxTripFor(const Request& r) const {
    Dist direct = chVeh_->query(r.origin, r.destination);
    if (isInf(direct)) direct = chPsg_->query(r.origin, r.destination);
    if (isInf(direct)) direct = 0;
    return config_.params.maxTripTime(direct);
}

int Engine::lanesFor(LastStopStrategy strategy) const {
    if (config_.kLastStop > 0) return config_.kLastStop;
    return strategy == LastStopStrategy::Dijkstra ? 64 : 8;
}

void Engine::consumeEvents() {
    for (const StopEvent& e : events_) {
        for (int32_t rider : e.riders) {
            auto it = riders_.find(rider);
            assert(it != riders_.end());
            RiderRecord& rec = it->second;
            if (e.kind == StopEvent::Kind::Depart) {
                assert(e.time >= rec.reqTime);
                waits_.push_back(e.time - rec.reqTime);
                rec.boardTime = e.time;
            } else {
                assert(rec.boardTime >= 0);
                rides_.push_back(e.time - rec.boardTime);
                trips_.push_back(e.time + rec.walkToDest - rec.reqTime);
            }
        }
    }
    events_.clear();
}

void Engine::advanceTo(Time t) {
    assert(t >= fleet_.now());
    fleet_.advanceTo(t, &events_);
    consumeEvents();
}

DispatchOutcome Engine::dispatch(const Request& r) {
    assert(!finished_);
    assert(r.reqTime >= fleet_.now());
    const auto dispatchStart = std::chrono::steady_clock::now();
    DispatchOutcome out;
    out.requestId = r.id;
    ++requests_;

    advanceTo(r.reqTime);
    fleet_.advanceIdleDepartures();
    {
        PhaseTimer timer(out.phases.micros[static_cast<size_t>(Phase::Sync)]);
        elliptic_.sync(fleet_);
        lastStop_.sync(fleet_);
    }

    const Time maxTrip = maxTripFor(r);
    BestAssignment best;
    {
        const Dist walkOD = chPsg_->query(r.origin, r.destination);
        const CostBreakdown walk = pseudoCost(r, walkOD, config_.params, maxTrip);
        if (walk.feasible) best.update(walk.total, pseudoInsertion(r, walkOD));
    }

    const PdSets pd = findPdLocations(*net_, r, config_.params.walkRadius);
    if (pd.usable() && fleet_.numVehicles() > 0) {
        PdMatrix matrix;
        {
            PhaseTimer timer(out.phases.micros[static_cast<size_t>(Phase::PdDistances)]);
            const Dist cap = config_.pruning.maxPdRadius
                                 ? maxPdDist(*net_, *chVeh_, r, pd, &out.phases[Phase::PdDistances])
                                 : kInf;
            matrix =
                pdDistanceSearch(*chVeh_, pd, cap, config_.kPd, &out.phases[Phase::PdDistances]);
        }
        EllipticDistances pickupSide, dropoffSide;
        {
            PhaseTimer timer(out.phases.micros[static_cast<size_t>(Phase::Elliptic)]);
            pickupSide = elliptic_.query(pd.pickups, &out.phases[Phase::Elliptic]);
            dropoffSide = elliptic_.query(pd.dropoffs, &out.phases[Phase::Elliptic]);
        }
        const std::vector<VehicleElliptic> byVehicle =
            groupByVehicle(fleet_, pickupSide, dropoffSide);
        {
            PhaseTimer timer(out.phases.micros[static_cast<size_t>(Phase::Ordinary)]);
            enumerateOrdinary(fleet_, byVehicle, pd, matrix, r, config_.params, maxTrip, best);
        }
        clBuckets_.clear();
        {
            PhaseTimer timer(out.phases.micros[static_cast<size_t>(Phase::Pbns)]);
            enumeratePbns(fleet_, byVehicle, pd, matrix, r, config_.params, maxTrip, clBuckets_,
                          best, &out.phases[Phase::Pbns]);
        }
        {
            PhaseTimer timer(out.phases.micros[static_cast<size_t>(Phase::Pals)]);
            palsSearch(*net_, *chVeh_, lastStop_, fleet_, r, config_.params, maxTrip, pd, matrix,
                       config_.palsStrategy, lanesFor(config_.palsStrategy), config_.pruning, best,
                       out.phases[Phase::Pals]);
        }
        {
            PhaseTimer timer(out.phases.micros[static_cast<size_t>(Phase::Dals)]);
            dalsSearch(*net_, *chVeh_, lastStop_, fleet_, r, config_.params, maxTrip, pd, matrix,
                       byVehicle, clBuckets_, config_.dalsStrategy, lanesFor(config_.dalsStrategy),
                       config_.pruning, best, out.phases[Phase::Dals]);
        }
    }

    std::vector<OracleVehicle> snapshot;
    if (config_.verifyOracle) snapshot = snapshotFleet(fleet_);

    if (!best.found()) {
        out.kind = OutcomeKind::Unserved;
        ++unserved_;
    } else if (best.insertion.vehicleId < 0) {
        out.kind = OutcomeKind::Pseudo;
        out.insertion = best.insertion;
        out.cost = pseudoCost(r, best.insertion.pickup.walk, config_.params, maxTrip);
        assert(out.cost.feasible && out.cost.total == best.cost);
        ++walked_;
        waits_.push_back(0);
        rides_.push_back(0);
        trips_.push_back(best.insertion.pickup.walk);
    } else {
        const Insertion& ins = best.insertion;
        const int veh = ins.vehicleId;
        const int n = static_cast<int>(fleet_.stops(veh).size()) - 1;
        if (ins.pickupPos == n) {
            out.kind = OutcomeKind::Pals;
        } else if (ins.dropoffPos == n) {
            out.kind = OutcomeKind::Dals;
        } else if (ins.pickupPos == 0) {
            out.kind = OutcomeKind::Pbns;
        } else {
            out.kind = OutcomeKind::Ordinary;
        }
        out.insertion = ins;
        out.vehicleFileId = fleet_.vehicle(veh).id;
        std::vector<StopView> buffer;
        const VehicleContext ctx = fleet_.fillContext(veh, buffer);
        out.cost = evaluateInsertion(ctx, r, ins, config_.params, maxTrip);
        assert(out.cost.feasible && out.cost.total == best.cost);
        fleet_.apply(r, ins, out.cost, maxTrip);
        assert(fleet_.scheduleFeasible(veh));
        riders_.emplace(r.id, RiderRecord{r.reqTime, ins.dropoff.walk, -1});
        ++served_;
    }

    if (config_.verifyOracle) checkAgainstOracle(r, snapshot, best.cost);

    out.totalMicros = std::chrono::duration_cast<std::chrono::microseconds>(
                          std::chrono::steady_clock::now() - dispatchStart)
                          .count();
    return out;
}

void Engine::checkAgainstOracle(const Request& r, const std::vector<OracleVehicle>& snapshot,
                                Cost chosenCost) const {
    const OracleBest reference =
        oracleDispatchBest(*net_, snapshot, r, config_.params.walkRadius, config_.params);
    if (reference.cost != chosenCost)
        throw std::runtime_error("oracle mismatch on request " + std::to_string(r.id) +
                                 ": engine cost " + std::to_string(chosenCost) + ", oracle cost " +
                                 std::to_string(reference.cost));
    const OracleBest zeroRadius = oracleDispatchBest(*net_, snapshot, r, 0, config_.params);
    if (chosenCost > zeroRadius.cost)
        throw std::runtime_error("walk radius raised the cost of request " + std::to_string(r.id) +
                                 ": chose " + std::to_string(chosenCost) +
                                 ", zero-radius option costs " + std::to_string(zeroRadius.cost));
}

void Engine::finish() {
    assert(!finished_);
    Time horizon = fleet_.now();
    for (int veh = 0; veh < fleet_.numVehicles(); ++veh)
        horizon = std::max(horizon, fleet_.stops(veh).back().minDep);
    advanceTo(horizon);
    finished_ = true;
}

SimulationStats Engine::stats() const {
    assert(finished_);
    SimulationStats s;
    s.requests = requests_;
    s.served = served_;
    s.walked = walked_;
    s.unserved = unserved_;
    assert(static_cast<int64_t>(waits_.size()) == served_ + walked_);
    assert(rides_.size() == waits_.size() && trips_.size() == waits_.size());
    s.meanWait = meanOf(waits_);
    s.p95Wait = p95Of(waits_);
    s.meanRide = meanOf(rides_);
    s.meanTrip = meanOf(trips_);

    if (fleet_.numVehicles() > 0) {
        int64_t sumEmpty = 0, sumOccupied = 0, sumStop = 0, sumOperation = 0;
        for (int veh = 0; veh < fleet_.numVehicles(); ++veh) {
            const VehicleOps& ops = fleet_.ops(veh);
            Time operation = 0;
            Time stopTime = 0;
            if (ops.firstDeparture >= 0) {
                assert(ops.lastArrival >= ops.firstDeparture);
                operation = ops.lastArrival - ops.firstDeparture;
                stopTime = operation - ops.emptyDrive - ops.occupiedDrive;
                assert(stopTime >= 0);
            } else {
                assert(ops.emptyDrive == 0 && ops.occupiedDrive == 0);
            }
            sumEmpty += ops.emptyDrive;
            sumOccupied += ops.occupiedDrive;
            sumStop += stopTime;
            sumOperation += operation;
        }
        const int64_t n = fleet_.numVehicles();
        s.meanEmptyDrive = sumEmpty / n;
        s.meanOccupiedDrive = sumOccupied / n;
        s.meanStopTime = sumStop / n;
        s.meanOperationTime = sumOperation / n;
    }
    return s;
}

SimulationResult runSimulation(const RoadNetworkPair& net, const ContractionHierarchy& chVeh,
                               const ContractionHierarchy& chPsg, std::vector<Vehicle> vehicles,
                               const std::vector<Request>& requests, const SimConfig& config) {
    Engine engine(net, chVeh, chPsg, std::move(vehicles), config);
    SimulationResult result;
    result.outcomes.reserve(requests.size());
    for (const Request& r : requests) result.outcomes.push_back(engine.dispatch(r));
    engine.finish();
    result.stats = engine.stats();
    return result;
}

}  // namespace ridepool
