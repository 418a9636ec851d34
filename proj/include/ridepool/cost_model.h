#pragma once

#include <span>

#include "ridepool/insertion.h"
#include "ridepool/types.h"

namespace ridepool {

struct CostParameters {
    Time maxWaitTime = 6000;  // latest tolerated wait until departure at the pickup
    Time stopTime = 600;      // minimum dwell time at any stop
    Cost waitPenaltyWeight = 1;
    Cost tripPenaltyWeight = 10;
    Cost tripWeight = 1;
    Cost walkWeight = 0;
    int64_t tripFactorThousandths = 1700;  // scales the direct distance of the trip-time cap
    Time tripOffset = 1200;                // constant part of the trip-time cap
    Dist walkRadius = 0;

    Time maxTripTime(Dist directDist) const {
        assert(directDist >= 0 && !isInf(directDist));
        return tripFactorThousandths * directDist / 1000 + tripOffset;
    }
};

// Snapshot of one scheduled stop with everything the evaluator checks.
struct StopView {
    Vertex location = kInvalidVertex;
    Time minArr = 0;
    Time minDep = 0;
    Time maxDep = kInf;      // latest departure honoring pickup promises made here
    Time maxArr = kInf;      // latest arrival honoring dropoff promises made here
    Dist distToNext = kInf;  // scheduled travel time to the next stop
    int occupancyAfter = 0;
    int dropoffsHere = 0;
};

struct VehicleContext {
    int32_t vehicleId = kInvalidId;
    std::span<const StopView> stops;  // s_0 .. s_n
    // Departure-time equivalent at the vehicle's current location; stands in
    // for the departure at s_0 when evaluating insertions with i == 0.
    Time depAtPrevEquivalent = 0;
    Time serviceEnd = kInf;
    int capacity = 0;
};

struct CostBreakdown {
    bool feasible = false;
    Cost total = kInf;
    Time detour = 0;
    Time tripTime = 0;
    Time addedTripTime = 0;  // summed arrival delays imposed on already assigned riders
    Time walkTime = 0;
    Cost waitViolation = 0;
    Cost tripViolation = 0;
    Time depAtPickup = 0;
    Time arrAtDropoff = 0;
};

// Exact cost and feasibility of inserting the request into the vehicle's
// route, with every hard constraint of the existing riders, the service end,
// and the capacity enforced. maxTrip is the request's trip-time cap.
CostBreakdown evaluateInsertion(const VehicleContext& ctx, const Request& r, const Insertion& ins,
                                const CostParameters& params, Time maxTrip);

// Cost of serving the request entirely on foot.
CostBreakdown pseudoCost(const Request& r, Dist walkDist, const CostParameters& params,
                         Time maxTrip);

// Closed form of evaluateInsertion for a pickup-and-dropoff-after-last-stop
// insertion. depTime is the earliest departure at the last stop, distToPickup
// the travel time from there to the pickup.
CostBreakdown palsCost(const Request& r, const CostParameters& params, Time maxTrip, Time depTime,
                       Time serviceEnd, Dist distToPickup, Dist pdDist, Dist walkP, Dist walkD,
                       bool pickupMerged);

// Lower bound on every pickup-after-last-stop insertion whose distance from
// the last stop to the pickup is at least x. Monotone in x, so sorted bucket
// scans and label queues may stop once it exceeds the current best. Admits
// pickups merged into the last stop. Pass the minimal PD distance and zero
// dropoff walk when the dropoff is still open.
Cost palsLowerBound(const CostParameters& params, Time maxTrip, Dist x, Dist pd, Dist walkP,
                    Dist walkD);

// Same for dropoff-after-last-stop insertions with last-stop distance >= x.
Cost dalsLowerBound(const CostParameters& params, Time maxTrip, Dist x, Dist walkD);

struct PalsLabelView {
    Dist distDown = 0;  // distance from the shared vertex to the pickup
    Dist pd = 0;        // pickup-to-dropoff travel time
    Dist walkP = 0;
    Dist walkD = 0;
};

// Upper bound on cost(l1 completion) - cost(l2 completion) over all vehicles
// and arrival times completing both labels identically above the shared
// vertex, assuming neither pickup merges into a last stop. Negative means l1
// always beats l2 on cost.
Cost palsDeltaCMax(const CostParameters& params, const PalsLabelView& l1, const PalsLabelView& l2);

// Whether l1's dropoff arrival is never later than l2's under any shared
// completion, so domination can never trade a feasible insertion for an
// infeasible one.
bool palsArrivalNoLater(const CostParameters& params, const PalsLabelView& l1,
                        const PalsLabelView& l2);

// Whether dropoff 1 yields a cheaper insertion than dropoff 2 for every
// completion, both with and without an active trip-time penalty, assuming
// neither dropoff merges into a last stop.
bool dalsDominates(const CostParameters& params, Dist x1, Dist walkD1, Dist x2, Dist walkD2);

}  // namespace ridepool
