#include "ridepool/oracle.h"

#include <algorithm>
#include <cassert>

namespace ridepool {

std::vector<OracleVehicle> snapshotFleet(FleetState& fleet) {
    std::vector<OracleVehicle> out;
    out.reserve(fleet.numVehicles());
    for (int veh = 0; veh < fleet.numVehicles(); ++veh) {
        OracleVehicle ov;
        ov.vehIdx = veh;
        for (const Stop& s : fleet.stops(veh)) {
            OracleStop os;
            os.location = s.location;
            os.minArr = s.minArr;
            os.minDep = s.minDep;
            os.maxDep = s.maxDepPromise;
            os.maxArr = s.maxArrPromise;
            os.distToNext = s.distToNext;
            os.occupancyAfter = s.occupancyAfter;
            os.dropoffsHere = static_cast<int>(s.dropoffs.size());
            ov.stops.push_back(os);
        }
        const CurrentLocation loc = fleet.currentLocation(veh);
        ov.curVertex = loc.vertex;
        ov.depEquivalent = loc.depEquivalent;
        ov.serviceEnd = fleet.vehicle(veh).serviceEnd;
        ov.capacity = fleet.vehicle(veh).capacity;
        out.push_back(std::move(ov));
    }
    return out;
}

OracleEval oracleEvaluate(const OracleVehicle& veh, const Request& r, const Insertion& ins,
                          const CostParameters& params, Time maxTrip) {
    OracleEval out;
    const auto& stops = veh.stops;
    const int n = static_cast<int>(stops.size()) - 1;
    const int i = ins.pickupPos;
    const int j = ins.dropoffPos;
    if (n < 0 || i < 0 || i > j || j > n) return out;
    if (isInf(ins.distToPickup) || isInf(ins.distFromPickup)) return out;
    if (i < j && isInf(ins.distToDropoff)) return out;
    if (j < n && isInf(ins.distFromDropoff)) return out;

    const Time stopTime = params.stopTime;
    const bool pickupMerged = i >= 1 && ins.pickup.vertex == stops[i].location;
    const bool dropoffMerged = j >= 1 && i < j && ins.dropoff.vertex == stops[j].location;

    const int lastSharedLeg = dropoffMerged ? j - 1 : std::min(j, n - 1);
    for (int a = i; a <= lastSharedLeg; ++a)
        if (stops[a].occupancyAfter + 1 > veh.capacity) return out;

    // Rebuild the timetable of the spliced route row by row from the pickup
    // on. Rows carry the leg distance into them, a departure floor, and the
    // promises of the riders already scheduled there.
    struct Row {
        Dist legIn = kInf;
        Time floorDep = 0;
        Time maxDep = kInf;
        Time maxArr = kInf;
        int oldIdx = -1;
    };
    std::vector<Row> rows;
    rows.reserve(static_cast<size_t>(n - i) + 2);

    auto pushOld = [&](int a, Dist legIn) {
        const OracleStop& s = stops[a];
        rows.push_back({legIn, s.minDep, s.maxDep, s.maxArr, a});
    };

    const Time board = r.reqTime + ins.pickup.walk;
    const Time depBase = i == 0 ? veh.depEquivalent : stops[i].minDep;
    Time depAtPickup = 0;
    if (pickupMerged) {
        depAtPickup = std::max(depBase, board);
        if (depAtPickup > stops[i].maxDep) return out;
    } else {
        rows.push_back({ins.distToPickup, board, kInf, kInf, -1});
    }
    const int pickupRow = pickupMerged ? -1 : 0;

    int dropoffRow;
    if (i == j) {
        rows.push_back({ins.distFromPickup, 0, kInf, kInf, -1});
        dropoffRow = static_cast<int>(rows.size()) - 1;
        if (j < n) pushOld(j + 1, ins.distFromDropoff);
    } else {
        for (int a = i + 1; a <= j; ++a)
            pushOld(a, a == i + 1 ? ins.distFromPickup : stops[a - 1].distToNext);
        if (dropoffMerged) {
            dropoffRow = static_cast<int>(rows.size()) - 1;
            if (j < n) pushOld(j + 1, stops[j].distToNext);
        } else {
            rows.push_back({ins.distToDropoff, 0, kInf, kInf, -1});
            dropoffRow = static_cast<int>(rows.size()) - 1;
            if (j < n) pushOld(j + 1, ins.distFromDropoff);
        }
    }
    for (int a = j + 2; a <= n; ++a) pushOld(a, stops[a - 1].distToNext);
    assert(!rows.empty() && dropoffRow >= 0);

    Time arrAtDropoff = 0;
    Time tripPlus = 0;
    Time deltaAtLastOld = 0;
    Time prevDep = pickupMerged ? depAtPickup : depBase;
    Time finalArr = 0;
    for (int k = 0; k < static_cast<int>(rows.size()); ++k) {
        const Row& row = rows[k];
        const Time arr = prevDep + row.legIn;
        if (arr > row.maxArr) return out;
        if (row.oldIdx >= 0) {
            const Time delta = arr - stops[row.oldIdx].minArr;
            assert(delta >= 0);
            tripPlus += static_cast<Time>(stops[row.oldIdx].dropoffsHere) * delta;
            if (row.oldIdx == n) deltaAtLastOld = delta;
        }
        if (k == dropoffRow) arrAtDropoff = arr;
        if (k == static_cast<int>(rows.size()) - 1) {
            finalArr = arr;
            break;
        }
        const Time dep = std::max(arr + stopTime, row.floorDep);
        if (dep > row.maxDep) return out;
        if (k == pickupRow) depAtPickup = dep;
        prevDep = dep;
    }
    if (finalArr > veh.serviceEnd) return out;

    Time detour;
    if (i == j && j == n) {
        detour = (depAtPickup - depBase) + ins.distFromPickup + stopTime;
    } else if (j == n && !dropoffMerged) {
        detour = deltaAtLastOld + ins.distToDropoff + stopTime;
    } else {
        detour = deltaAtLastOld;
    }

    const Time tripTime = arrAtDropoff + ins.dropoff.walk - r.reqTime;
    out.feasible = true;
    out.cost = detour + params.tripWeight * (tripTime + tripPlus) +
               params.walkWeight * (ins.pickup.walk + ins.dropoff.walk) +
               params.waitPenaltyWeight * maxZero(depAtPickup - r.reqTime - params.maxWaitTime) +
               params.tripPenaltyWeight * maxZero(tripTime - maxTrip);
    return out;
}

namespace {

struct OraclePdSet {
    std::vector<PdLoc> locs;
    std::vector<std::vector<Dist>> distTo;    // [idx][v] = d_veh(v, loc)
    std::vector<std::vector<Dist>> distFrom;  // [idx][v] = d_veh(loc, v)
};

OraclePdSet collectPdSet(const RoadNetworkPair& net, const std::vector<Dist>& walk, Dist radius) {
    OraclePdSet set;
    for (Vertex v = 0; v < static_cast<Vertex>(walk.size()); ++v)
        if (walk[v] <= radius && net.isBoardable(v)) set.locs.push_back({v, walk[v]});
    std::sort(set.locs.begin(), set.locs.end(), [](const PdLoc& a, const PdLoc& b) {
        return a.walk != b.walk ? a.walk < b.walk : a.vertex < b.vertex;
    });
    for (const PdLoc& loc : set.locs) {
        set.distTo.push_back(net.vehReversed.distancesFrom(loc.vertex));
        set.distFrom.push_back(net.veh.distancesFrom(loc.vertex));
    }
    return set;
}

}  // namespace

OracleBest oracleDispatchBest(const RoadNetworkPair& network,
                              const std::vector<OracleVehicle>& fleet, const Request& r,
                              Dist walkRadius, const CostParameters& params) {
    const Time maxTrip = oracleMaxTrip(network, r, params);
    const auto walkFromOrigin = network.psg.distancesFrom(r.origin);
    const auto walkToDest = network.psgReversed.distancesFrom(r.destination);

    BestAssignment best;
    const Dist walkOD = walkFromOrigin[r.destination];
    if (!isInf(walkOD)) {
        const Cost c = params.tripWeight * walkOD + params.walkWeight * walkOD +
                       params.tripPenaltyWeight * maxZero(walkOD - maxTrip);
        best.update(c, pseudoInsertion(r, walkOD));
    }

    const OraclePdSet pickups = collectPdSet(network, walkFromOrigin, walkRadius);
    const OraclePdSet dropoffs = collectPdSet(network, walkToDest, walkRadius);
    if (!pickups.locs.empty() && !dropoffs.locs.empty()) {
        for (const OracleVehicle& veh : fleet) {
            const int n = static_cast<int>(veh.stops.size()) - 1;
            for (int i = 0; i <= n; ++i) {
                const Vertex from = i == 0 ? veh.curVertex : veh.stops[i].location;
                for (int j = i; j <= n; ++j) {
                    for (int p = 0; p < static_cast<int>(pickups.locs.size()); ++p) {
                        for (int d = 0; d < static_cast<int>(dropoffs.locs.size()); ++d) {
                            Insertion ins;
                            ins.vehicleId = veh.vehIdx;
                            ins.pickupPos = i;
                            ins.dropoffPos = j;
                            ins.pickup = pickups.locs[p];
                            ins.dropoff = dropoffs.locs[d];
                            ins.pickupIdx = p;
                            ins.dropoffIdx = d;
                            ins.distToPickup = pickups.distTo[p][from];
                            ins.distFromPickup =
                                i == j ? pickups.distFrom[p][ins.dropoff.vertex]
                                       : pickups.distFrom[p][veh.stops[i + 1].location];
                            ins.distToDropoff =
                                i < j ? dropoffs.distTo[d][veh.stops[j].location]
                                      : ins.distFromPickup;
                            ins.distFromDropoff =
                                j < n ? dropoffs.distFrom[d][veh.stops[j + 1].location] : 0;
                            const OracleEval eval =
                                oracleEvaluate(veh, r, ins, params, maxTrip);
                            if (eval.feasible) best.update(eval.cost, ins);
                        }
                    }
                }
            }
        }
    }

    OracleBest out;
    out.cost = best.cost;
    out.insertion = best.insertion;
    return out;
}

Time oracleMaxTrip(const RoadNetworkPair& network, const Request& r,
                   const CostParameters& params) {
    Dist dist = network.veh.distancesFrom(r.origin)[r.destination];
    if (isInf(dist)) dist = network.psg.distancesFrom(r.origin)[r.destination];
    if (isInf(dist)) dist = 0;
    return params.maxTripTime(dist);
}

}  // namespace ridepool
