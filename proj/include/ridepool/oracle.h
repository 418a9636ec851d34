#pragma once

#include <vector>

#include "ridepool/cost_model.h"
#include "ridepool/fleet_state.h"
#include "ridepool/insertion.h"
#include "ridepool/road_network.h"

namespace ridepool {

// Reference implementation used to cross-check dispatches: brute-force
// enumeration over all insertions with plain Dijkstra distances and a
// from-scratch timetable re-simulation per candidate. Deliberately shares no
// search or evaluation code with the engine.

struct OracleStop {
    Vertex location = kInvalidVertex;
    Time minArr = 0;
    Time minDep = 0;
    Time maxDep = kInf;
    Time maxArr = kInf;
    Dist distToNext = kInf;
    int occupancyAfter = 0;
    int dropoffsHere = 0;
};

struct OracleVehicle {
    int vehIdx = -1;
    std::vector<OracleStop> stops;
    Vertex curVertex = kInvalidVertex;  // next committed vertex
    Time depEquivalent = 0;
    Time serviceEnd = 0;
    int capacity = 0;
};

std::vector<OracleVehicle> snapshotFleet(FleetState& fleet);

struct OracleEval {
    bool feasible = false;
    Cost cost = kInf;
};

// Re-simulates the vehicle's full timetable with the insertion spliced in and
// prices it from the rebuilt schedule.
OracleEval oracleEvaluate(const OracleVehicle& veh, const Request& r, const Insertion& ins,
                          const CostParameters& params, Time maxTrip);

struct OracleBest {
    Cost cost = kInf;
    Insertion insertion;
    bool found() const { return !isInf(cost); }
};

// Minimum-cost option over every (vehicle, i, j, pickup, dropoff) insertion
// plus the pseudo-insertion, under the engine's tie-break order.
OracleBest oracleDispatchBest(const RoadNetworkPair& network,
                              const std::vector<OracleVehicle>& fleet, const Request& r,
                              Dist walkRadius, const CostParameters& params);

// The request's trip-time cap, derived the same way the engine derives it.
Time oracleMaxTrip(const RoadNetworkPair& network, const Request& r,
                   const CostParameters& params);

}  // namespace ridepool
