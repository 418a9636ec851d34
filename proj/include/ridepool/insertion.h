#pragma once

#include <tuple>

#include "ridepool/types.h"

namespace ridepool {

struct Request {
    int32_t id = kInvalidId;
    Vertex origin = kInvalidVertex;
    Vertex destination = kInvalidVertex;
    Time reqTime = 0;
};

// Candidate pickup or dropoff spot with its walking time from the origin
// (resp. to the destination).
struct PdLoc {
    Vertex vertex = kInvalidVertex;
    Dist walk = 0;
};

// A concrete insertion of a request into one vehicle's route: pickup after
// stop i, dropoff after stop j, with all vehicle distances resolved by the
// caller. vehicleId -1 marks the pseudo-insertion (the rider walks).
struct Insertion {
    int32_t vehicleId = kInvalidId;
    int pickupPos = 0;   // i
    int dropoffPos = 0;  // j
    PdLoc pickup;
    PdLoc dropoff;
    int pickupIdx = 0;   // positions within the request's PD sets
    int dropoffIdx = 0;
    Dist distToPickup = 0;     // d(s_i, p); d(l_c, p) when i == 0
    Dist distFromPickup = 0;   // d(p, s_{i+1}); d(p, d) when i == j
    Dist distToDropoff = 0;    // d(s_j, d); equals distFromPickup when i == j
    Dist distFromDropoff = 0;  // d(d, s_{j+1}); meaningless when j == n
};

inline Insertion pseudoInsertion(const Request& r, Dist walkDist) {
    Insertion ins;
    ins.pickup = {r.origin, walkDist};
    ins.dropoff = {r.destination, 0};
    return ins;
}

// Deterministic preference order among equal-cost candidates. The pseudo-
// insertion's vehicle id -1 sorts first, so it wins exact ties.
inline auto candidateKey(Cost cost, const Insertion& ins) {
    return std::make_tuple(cost, ins.vehicleId, ins.pickupPos, ins.dropoffPos, ins.pickupIdx,
                           ins.dropoffIdx);
}

struct BestAssignment {
    Cost cost = kInf;
    Insertion insertion;

    bool found() const { return !isInf(cost); }

    // Adopts the candidate when it is strictly better under the global order.
    bool update(Cost candidateCost, const Insertion& candidate) {
        if (isInf(candidateCost)) return false;
        if (found() && candidateKey(cost, insertion) <= candidateKey(candidateCost, candidate))
            return false;
        cost = candidateCost;
        insertion = candidate;
        return true;
    }
};

}  // namespace ridepool
