#include "ridepool/fleet_state.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace ridepool {

namespace {

[[noreturn]] void parseError(const std::string& name, int lineNo, const std::string& message) {
    throw std::runtime_error(name + ":" + std::to_string(lineNo) + ": " + message);
}

}  // namespace

std::vector<Vehicle> parseVehicles(std::istream& in, const std::string& name, int numVertices) {
    std::vector<Vehicle> vehicles;
    std::unordered_set<int32_t> seenIds;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        std::string tag;
        if (!(row >> tag)) continue;
        if (tag != "vehicle") parseError(name, lineNo, "expected a vehicle line, got '" + tag + "'");
        long long id = 0, loc = 0, cap = 0, start = 0, end = 0;
        if (!(row >> id >> loc >> cap >> start >> end))
            parseError(name, lineNo, "expected: vehicle <id> <location> <capacity> <start> <end>");
        if (std::string extra; row >> extra)
            parseError(name, lineNo, "unexpected trailing token '" + extra + "'");
        if (id < 0) parseError(name, lineNo, "vehicle id must be non-negative");
        if (!seenIds.insert(static_cast<int32_t>(id)).second)
            parseError(name, lineNo, "duplicate vehicle id " + std::to_string(id));
        if (loc < 0 || loc >= numVertices)
            parseError(name, lineNo, "vehicle location " + std::to_string(loc) + " out of range");
        if (cap < 1) parseError(name, lineNo, "vehicle capacity must be at least 1");
        if (start < 0 || end <= start) parseError(name, lineNo, "empty service window");
        vehicles.push_back({static_cast<int32_t>(id), static_cast<Vertex>(loc),
                            static_cast<int>(cap), static_cast<Time>(start),
                            static_cast<Time>(end)});
    }
    return vehicles;
}

std::vector<Vehicle> loadVehicles(const std::string& path, int numVertices) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vehicle file " + path);
    return parseVehicles(in, path, numVertices);
}

FleetState::FleetState(const ContractionHierarchy& chVeh, std::vector<Vehicle> vehicles,
                       const CostParameters& params)
    : ch_(&chVeh), vehicles_(std::move(vehicles)), params_(params) {
    routes_.resize(vehicles_.size());
    for (size_t v = 0; v < vehicles_.size(); ++v) {
        const Vehicle& vehicle = vehicles_[v];
        routes_[v].stops.push_back(
            makeStop(vehicle.home, vehicle.serviceStart, vehicle.serviceStart));
        refreshDeadlines(static_cast<int>(v));
    }
}

Stop FleetState::makeStop(Vertex location, Time arr, Time dep) {
    Stop s;
    s.stopId = nextStopId_++;
    s.location = location;
    s.minArr = arr;
    s.minDep = dep;
    stopIndexDirty_ = true;
    return s;
}

void FleetState::refreshDeadlines(int veh) {
    auto& stops = routes_[static_cast<size_t>(veh)].stops;
    // Latest arrival at the stop below that still meets everything after it;
    // seeded with the service end, which binds the final arrival.
    Time chained = vehicles_[static_cast<size_t>(veh)].serviceEnd;
    for (int a = static_cast<int>(stops.size()) - 1; a >= 0; --a) {
        Stop& s = stops[a];
        Time deadline = std::min(chained, s.maxArrPromise);
        if (!isInf(s.maxDepPromise)) deadline = std::min(deadline, s.maxDepPromise - params_.stopTime);
        s.deadline = deadline;
        if (a > 0) {
            chained = isInf(deadline) ? kInf : deadline - stops[a - 1].distToNext - params_.stopTime;
        }
    }
}

void FleetState::advanceTo(Time t, std::vector<StopEvent>* events) {
    assert(t >= now_);
    now_ = t;
    for (int veh = 0; veh < numVehicles(); ++veh) {
        auto& route = routes_[static_cast<size_t>(veh)];
        while (route.stops.size() > 1) {
            if (!route.departed) {
                if (route.stops[0].minDep > t) break;
                fireDepart(veh, events);
            } else {
                if (route.stops[1].minArr > t) break;
                fireArrive(veh, events);
            }
        }
    }
}

void FleetState::fireDepart(int veh, std::vector<StopEvent>* events) {
    auto& route = routes_[static_cast<size_t>(veh)];
    const Stop& front = route.stops.front();
    route.departed = true;
    if (route.ops.firstDeparture < 0) route.ops.firstDeparture = front.minDep;
    if (events)
        events->push_back(
            {StopEvent::Kind::Depart, veh, front.minDep, front.location, front.pickups});
}

void FleetState::fireArrive(int veh, std::vector<StopEvent>* events) {
    auto& route = routes_[static_cast<size_t>(veh)];
    auto& stops = route.stops;
    const Stop& from = stops[0];
    const Stop& to = stops[1];
    assert(to.minArr == from.minDep + from.distToNext);
    if (from.occupancyAfter > 0)
        route.ops.occupiedDrive += from.distToNext;
    else
        route.ops.emptyDrive += from.distToNext;
    route.ops.lastArrival = to.minArr;
    route.departed = false;
    if (events)
        events->push_back({StopEvent::Kind::Arrive, veh, to.minArr, to.location, to.dropoffs});
    stops.erase(stops.begin());
    stopIndexDirty_ = true;
    // Completing the route releases the vehicle at its final stop.
    if (events && stops.size() == 1)
        events->push_back(
            {StopEvent::Kind::Depart, veh, stops.front().minArr, stops.front().location, {}});
}

void FleetState::advanceIdleDepartures() {
    for (auto& route : routes_) {
        if (route.stops.size() != 1) continue;
        Stop& s = route.stops.front();
        if (s.minDep < now_) s.minDep = now_;
    }
}

CurrentLocation FleetState::currentLocation(int veh) {
    auto& route = routes_[static_cast<size_t>(veh)];
    const auto& stops = route.stops;

    // Collapse events that are due but not yet fired so the answer does not
    // depend on whether advanceTo ran since the last apply.
    size_t k = 0;
    bool departed = route.departed;
    while (k + 1 < stops.size()) {
        if (!departed) {
            if (stops[k].minDep > now_) break;
            departed = true;
        } else {
            if (stops[k + 1].minArr > now_) break;
            ++k;
            departed = false;
        }
    }
    const Stop& front = stops[k];
    if (!departed) return {front.location, front.minDep};

    auto& cache = route.legPath;
    if (cache.stopId != front.stopId) {
        cache.stopId = front.stopId;
        cache.path = ch_->queryPath(front.location, stops[k + 1].location);
        assert(!cache.path.empty() && cache.path.back().second == front.distToNext);
    }
    const Time elapsed = now_ - front.minDep;
    assert(elapsed >= 0 && elapsed < front.distToNext);
    for (const auto& [vertex, cum] : cache.path) {
        if (cum >= elapsed) return {vertex, front.minDep + cum};
    }
    assert(false);
    return {stops[k + 1].location, front.minDep + front.distToNext};
}

VehicleContext FleetState::fillContext(int veh, std::vector<StopView>& buffer) {
    const auto& stops = routes_[static_cast<size_t>(veh)].stops;
    buffer.clear();
    buffer.reserve(stops.size());
    for (const Stop& s : stops) {
        StopView view;
        view.location = s.location;
        view.minArr = s.minArr;
        view.minDep = s.minDep;
        view.maxDep = s.maxDepPromise;
        view.maxArr = s.maxArrPromise;
        view.distToNext = s.distToNext;
        view.occupancyAfter = s.occupancyAfter;
        view.dropoffsHere = static_cast<int>(s.dropoffs.size());
        buffer.push_back(view);
    }
    VehicleContext ctx;
    ctx.vehicleId = veh;
    ctx.stops = buffer;
    ctx.depAtPrevEquivalent = currentLocation(veh).depEquivalent;
    ctx.serviceEnd = vehicles_[static_cast<size_t>(veh)].serviceEnd;
    ctx.capacity = vehicles_[static_cast<size_t>(veh)].capacity;
    return ctx;
}

Dist FleetState::leewayAfter(int veh, int pos) const {
    const auto& stops = routes_[static_cast<size_t>(veh)].stops;
    assert(pos >= 0 && pos + 1 < static_cast<int>(stops.size()));
    const Time deadline = stops[static_cast<size_t>(pos) + 1].deadline;
    if (isInf(deadline)) return kInf;
    const Dist leeway = deadline - stops[static_cast<size_t>(pos)].minDep;
    assert(leeway >= stops[static_cast<size_t>(pos)].distToNext);
    return leeway;
}

void FleetState::apply(const Request& r, const Insertion& ins, const CostBreakdown& eval,
                       Time maxTrip) {
    assert(ins.vehicleId >= 0 && eval.feasible);
    auto& route = routes_[static_cast<size_t>(ins.vehicleId)];
    auto& stops = route.stops;
    const int i = ins.pickupPos;
    const int j = ins.dropoffPos;
    const int n = static_cast<int>(stops.size()) - 1;
    assert(0 <= i && i <= j && j <= n);

    // A pickup before the next stop of a moving vehicle re-roots the route at
    // the next committed vertex; the part already driven stays fixed.
    if (i == 0 && route.departed) {
        const CurrentLocation loc = currentLocation(ins.vehicleId);
        Stop virt = makeStop(loc.vertex, loc.depEquivalent, loc.depEquivalent);
        virt.occupancyAfter = stops[0].occupancyAfter;
        stops[0] = std::move(virt);
        route.departed = false;
    }

    const bool pickupMerged = i >= 1 && ins.pickup.vertex == stops[static_cast<size_t>(i)].location;
    const bool dropoffMerged =
        j >= 1 && i < j && ins.dropoff.vertex == stops[static_cast<size_t>(j)].location;
    const int occAfterI = stops[static_cast<size_t>(i)].occupancyAfter;
    const int occAfterJ = stops[static_cast<size_t>(j)].occupancyAfter;

    const Time pickupPromise = std::max(r.reqTime + params_.maxWaitTime, eval.depAtPickup);
    const Time dropoffPromise = std::max(r.reqTime + maxTrip - ins.dropoff.walk, eval.arrAtDropoff);

    std::vector<Stop> next;
    next.reserve(stops.size() + 2);
    for (int a = 0; a <= i; ++a) next.push_back(std::move(stops[static_cast<size_t>(a)]));

    int pickupAt;
    if (pickupMerged) {
        pickupAt = static_cast<int>(next.size()) - 1;
        Stop& s = next.back();
        if (i == j)
            s.distToNext = ins.distFromPickup;
        else
            assert(s.distToNext == ins.distFromPickup);
        s.minDep = eval.depAtPickup;
        s.maxDepPromise = std::min(s.maxDepPromise, pickupPromise);
        s.pickups.push_back(r.id);
    } else {
        Stop p = makeStop(ins.pickup.vertex, next.back().minDep + ins.distToPickup,
                          eval.depAtPickup);
        p.maxDepPromise = pickupPromise;
        p.pickups.push_back(r.id);
        p.occupancyAfter = occAfterI;
        p.distToNext = ins.distFromPickup;
        next.back().distToNext = ins.distToPickup;
        pickupAt = static_cast<int>(next.size());
        next.push_back(std::move(p));
    }

    const int dropAt = pickupAt + (j - i) + (dropoffMerged ? 0 : 1);
    if (i == j) {
        Stop d = makeStop(ins.dropoff.vertex, eval.arrAtDropoff,
                          eval.arrAtDropoff + params_.stopTime);
        d.maxArrPromise = dropoffPromise;
        d.dropoffs.push_back(r.id);
        d.occupancyAfter = occAfterI;
        d.distToNext = j == n ? kInf : ins.distFromDropoff;
        next.push_back(std::move(d));
        for (int a = i + 1; a <= n; ++a) next.push_back(std::move(stops[static_cast<size_t>(a)]));
    } else {
        for (int a = i + 1; a <= j; ++a) next.push_back(std::move(stops[static_cast<size_t>(a)]));
        if (dropoffMerged) {
            Stop& s = next.back();
            s.maxArrPromise = std::min(s.maxArrPromise, dropoffPromise);
            s.dropoffs.push_back(r.id);
        } else {
            next.back().distToNext = ins.distToDropoff;
            Stop d = makeStop(ins.dropoff.vertex, eval.arrAtDropoff,
                              eval.arrAtDropoff + params_.stopTime);
            d.maxArrPromise = dropoffPromise;
            d.dropoffs.push_back(r.id);
            d.occupancyAfter = occAfterJ;
            d.distToNext = j == n ? kInf : ins.distFromDropoff;
            next.push_back(std::move(d));
        }
        for (int a = j + 1; a <= n; ++a) next.push_back(std::move(stops[static_cast<size_t>(a)]));
    }

    for (int a = pickupAt; a < dropAt; ++a) next[static_cast<size_t>(a)].occupancyAfter += 1;

    // Reschedule everything downstream of the pickup; existing departure
    // floors are kept so wait buffers stay in place.
    for (size_t a = static_cast<size_t>(pickupAt) + 1; a < next.size(); ++a) {
        const Stop& prev = next[a - 1];
        Stop& cur = next[a];
        cur.minArr = prev.minDep + prev.distToNext;
        cur.minDep = std::max(cur.minArr + params_.stopTime, cur.minDep);
    }
    assert(next[static_cast<size_t>(pickupAt)].minDep == eval.depAtPickup);
    assert(next[static_cast<size_t>(dropAt)].minArr == eval.arrAtDropoff);

    stops = std::move(next);
    stopIndexDirty_ = true;
    refreshDeadlines(ins.vehicleId);
}

std::pair<int, int> FleetState::locateStop(int32_t stopId) const {
    if (stopIndexDirty_) {
        stopIndex_.assign(static_cast<size_t>(nextStopId_), {-1, -1});
        for (int veh = 0; veh < numVehicles(); ++veh) {
            const auto& stops = routes_[static_cast<size_t>(veh)].stops;
            for (size_t pos = 0; pos < stops.size(); ++pos)
                stopIndex_[static_cast<size_t>(stops[pos].stopId)] = {veh, static_cast<int>(pos)};
        }
        stopIndexDirty_ = false;
    }
    if (stopId < 0 || stopId >= nextStopId_) return {-1, -1};
    return stopIndex_[static_cast<size_t>(stopId)];
}

bool FleetState::scheduleFeasible(int veh) const {
    const Vehicle& vehicle = vehicles_[static_cast<size_t>(veh)];
    const auto& stops = routes_[static_cast<size_t>(veh)].stops;
    if (stops.empty()) return false;
    for (size_t a = 0; a < stops.size(); ++a) {
        const Stop& s = stops[a];
        if (s.occupancyAfter < 0 || s.occupancyAfter > vehicle.capacity) return false;
        if (s.minDep > s.maxDepPromise || s.minArr > s.maxArrPromise) return false;
        if ((!s.pickups.empty() || !s.dropoffs.empty()) && s.minDep < s.minArr + params_.stopTime)
            return false;
        if (a + 1 < stops.size()) {
            if (isInf(s.distToNext)) return false;
            if (stops[a + 1].minArr != s.minDep + s.distToNext) return false;
            if (stops[a + 1].occupancyAfter !=
                s.occupancyAfter + static_cast<int>(stops[a + 1].pickups.size()) -
                    static_cast<int>(stops[a + 1].dropoffs.size()))
                return false;
        }
    }
    if (stops.size() > 1 && stops.back().minArr > vehicle.serviceEnd) return false;
    if (stops.back().occupancyAfter != 0) return false;
    return true;
}

}  // namespace ridepool
