#include "ridepool/cost_model.h"

#include <algorithm>

namespace ridepool {

namespace {

Cost totalCost(const CostParameters& params, const CostBreakdown& b) {
    return b.detour + params.tripWeight * (b.tripTime + b.addedTripTime) +
           params.walkWeight * b.walkTime + b.waitViolation + b.tripViolation;
}

}  // namespace

CostBreakdown evaluateInsertion(const VehicleContext& ctx, const Request& r, const Insertion& ins,
                                const CostParameters& params, Time maxTrip) {
    CostBreakdown out;
    const auto& stops = ctx.stops;
    const int n = static_cast<int>(stops.size()) - 1;
    const int i = ins.pickupPos;
    const int j = ins.dropoffPos;
    assert(n >= 0 && 0 <= i && i <= j && j <= n);
    const Time stopTime = params.stopTime;
    const bool pickupMerged = i >= 1 && ins.pickup.vertex == stops[i].location;
    const bool dropoffMerged = j >= 1 && i < j && ins.dropoff.vertex == stops[j].location;

    if (isInf(ins.distToPickup) || isInf(ins.distFromPickup)) return out;
    if (i < j && !dropoffMerged && isInf(ins.distToDropoff)) return out;
    if (j < n && !dropoffMerged && isInf(ins.distFromDropoff)) return out;

    // The new rider needs a seat on every leg it shares with the vehicle.
    const int lastSharedLeg = dropoffMerged ? j - 1 : std::min(j, n - 1);
    for (int a = i; a <= lastSharedLeg; ++a)
        if (stops[a].occupancyAfter + 1 > ctx.capacity) return out;

    const Time depBase = i == 0 ? ctx.depAtPrevEquivalent : stops[i].minDep;
    const Time earliestBoard = r.reqTime + ins.pickup.walk;
    Time depAtPickup;
    if (pickupMerged) {
        depAtPickup = std::max(depBase, earliestBoard);
        if (depAtPickup > stops[i].maxDep) return out;
    } else {
        depAtPickup = std::max(depBase + ins.distToPickup + stopTime, earliestBoard);
    }

    Time arrAtDropoff = 0;
    Time detour = 0;
    Time tripPlus = 0;

    // Applies an arrival delay from stop `first` on, checking the promises of
    // the riders already scheduled there; returns the delay at s_n or -1 on a
    // violated constraint.
    auto propagate = [&](int first, Time delta) -> Time {
        for (int a = first; a <= n; ++a) {
            if (delta == 0) return 0;
            const Time newArr = stops[a].minArr + delta;
            if (newArr > stops[a].maxArr) return -1;
            tripPlus += static_cast<Time>(stops[a].dropoffsHere) * delta;
            if (a == n) {
                if (newArr > ctx.serviceEnd) return -1;
                return delta;
            }
            const Time newDep = std::max(newArr + stopTime, stops[a].minDep);
            if (newDep > stops[a].maxDep) return -1;
            delta = newDep - stops[a].minDep;
        }
        return 0;
    };

    if (i == j) {
        arrAtDropoff = depAtPickup + ins.distFromPickup;  // distFromPickup = d(p, d)
        const Time deltaInit = (depAtPickup - depBase) + ins.distFromPickup + stopTime;
        if (j == n) {
            if (arrAtDropoff > ctx.serviceEnd) return out;
            detour = deltaInit;
        } else {
            const Time delta =
                arrAtDropoff + stopTime + ins.distFromDropoff - stops[j + 1].minArr;
            assert(delta >= 0);
            detour = propagate(j + 1, delta);
            if (detour < 0) return out;
        }
    } else {
        // Pickup delay reaching s_{i+1}, then stop-by-stop to s_j.
        Time delta = depAtPickup + ins.distFromPickup - stops[i + 1].minArr;
        assert(delta >= 0);
        Time arrAtJ = 0;
        Time depAtJ = 0;
        for (int a = i + 1; a <= j; ++a) {
            arrAtJ = stops[a].minArr + delta;
            if (arrAtJ > stops[a].maxArr) return out;
            if (a == n && arrAtJ > ctx.serviceEnd) return out;
            tripPlus += static_cast<Time>(stops[a].dropoffsHere) * delta;
            depAtJ = std::max(arrAtJ + stopTime, stops[a].minDep);
            if (depAtJ > stops[a].maxDep) return out;
            delta = depAtJ - stops[a].minDep;
        }
        if (dropoffMerged) {
            arrAtDropoff = arrAtJ;
            if (j == n) {
                detour = arrAtJ - stops[n].minArr;
            } else {
                detour = propagate(j + 1, delta);
                if (detour < 0) return out;
            }
        } else {
            arrAtDropoff = depAtJ + ins.distToDropoff;
            if (j == n) {
                if (arrAtDropoff > ctx.serviceEnd) return out;
                detour = (arrAtJ - stops[n].minArr) + ins.distToDropoff + stopTime;
            } else {
                const Time next =
                    arrAtDropoff + stopTime + ins.distFromDropoff - stops[j + 1].minArr;
                assert(next >= 0);
                detour = propagate(j + 1, next);
                if (detour < 0) return out;
            }
        }
    }

    out.feasible = true;
    out.detour = detour;
    out.tripTime = arrAtDropoff + ins.dropoff.walk - r.reqTime;
    out.addedTripTime = tripPlus;
    out.walkTime = ins.pickup.walk + ins.dropoff.walk;
    out.waitViolation =
        params.waitPenaltyWeight * maxZero(depAtPickup - r.reqTime - params.maxWaitTime);
    out.tripViolation = params.tripPenaltyWeight * maxZero(out.tripTime - maxTrip);
    out.depAtPickup = depAtPickup;
    out.arrAtDropoff = arrAtDropoff;
    out.total = totalCost(params, out);
    return out;
}

CostBreakdown pseudoCost(const Request& r, Dist walkDist, const CostParameters& params,
                         Time maxTrip) {
    CostBreakdown out;
    if (isInf(walkDist)) return out;
    out.feasible = true;
    out.tripTime = walkDist;
    out.walkTime = walkDist;
    out.tripViolation = params.tripPenaltyWeight * maxZero(walkDist - maxTrip);
    out.depAtPickup = r.reqTime;
    out.arrAtDropoff = r.reqTime + walkDist;
    out.total = totalCost(params, out);
    return out;
}

CostBreakdown palsCost(const Request& r, const CostParameters& params, Time maxTrip, Time depTime,
                       Time serviceEnd, Dist distToPickup, Dist pdDist, Dist walkP, Dist walkD,
                       bool pickupMerged) {
    CostBreakdown out;
    if (isInf(distToPickup) || isInf(pdDist)) return out;
    const Time earliestBoard = r.reqTime + walkP;
    const Time dep = pickupMerged
                         ? std::max(depTime, earliestBoard)
                         : std::max(depTime + distToPickup + params.stopTime, earliestBoard);
    const Time arrAtDropoff = dep + pdDist;
    if (arrAtDropoff > serviceEnd) return out;
    out.feasible = true;
    out.detour = (dep - depTime) + pdDist + params.stopTime;
    out.tripTime = arrAtDropoff + walkD - r.reqTime;
    out.walkTime = walkP + walkD;
    out.waitViolation = params.waitPenaltyWeight * maxZero(dep - r.reqTime - params.maxWaitTime);
    out.tripViolation = params.tripPenaltyWeight * maxZero(out.tripTime - maxTrip);
    out.depAtPickup = dep;
    out.arrAtDropoff = arrAtDropoff;
    out.total = totalCost(params, out);
    return out;
}

Cost palsLowerBound(const CostParameters& params, Time maxTrip, Dist x, Dist pd, Dist walkP,
                    Dist walkD) {
    if (isInf(x) || isInf(pd)) return kInf;
    // The pickup's own stop time is left out so the bound also covers pickups
    // merged into the last stop.
    const Time depLb = std::max(x, walkP);  // lower bounds dep - t_req
    const Time detourLb = x + params.stopTime + pd;
    const Time tripLb = depLb + pd + walkD;
    return detourLb + params.tripWeight * tripLb + params.walkWeight * (walkP + walkD) +
           params.waitPenaltyWeight * maxZero(depLb - params.maxWaitTime) +
           params.tripPenaltyWeight * maxZero(tripLb - maxTrip);
}

Cost dalsLowerBound(const CostParameters& params, Time maxTrip, Dist x, Dist walkD) {
    if (isInf(x)) return kInf;
    // No stop time: the dropoff may merge into the last stop.
    const Time tripLb = x + walkD;
    return x + params.tripWeight * tripLb + params.walkWeight * walkD +
           params.tripPenaltyWeight * maxZero(tripLb - maxTrip);
}

Cost palsDeltaCMax(const CostParameters& params, const PalsLabelView& l1,
                   const PalsLabelView& l2) {
    const Time depMax1 = std::max(l1.distDown + params.stopTime, l1.walkP);
    const Time depMin2 = l2.distDown + params.stopTime;
    const Time arrMax1 = depMax1 + l1.pd;
    const Time arrMin2 = depMin2 + l2.pd;
    const Time dDetour = arrMax1 - arrMin2;
    const Time dTrip = (arrMax1 + l1.walkD) - (arrMin2 + l2.walkD);
    const Time dWalk = (l1.walkP + l1.walkD) - (l2.walkP + l2.walkD);
    return dDetour + params.tripWeight * dTrip + params.walkWeight * dWalk +
           params.waitPenaltyWeight * maxZero(depMax1 - depMin2) +
           params.tripPenaltyWeight * maxZero(dTrip);
}

bool palsArrivalNoLater(const CostParameters& params, const PalsLabelView& l1,
                        const PalsLabelView& l2) {
    const Time depMax1 = std::max(l1.distDown + params.stopTime, l1.walkP);
    const Time depMin2 = l2.distDown + params.stopTime;
    return depMax1 + l1.pd <= depMin2 + l2.pd;
}

bool dalsDominates(const CostParameters& params, Dist x1, Dist walkD1, Dist x2, Dist walkD2) {
    if (x1 > x2) return false;  // keeps every feasible insertion reachable
    const Time dDetour = x1 - x2;
    const Time dTrip = (x1 + walkD1) - (x2 + walkD2);
    const Cost walkTerm = params.walkWeight * (walkD1 - walkD2);
    return dDetour + params.tripWeight * dTrip + walkTerm < 0 &&
           dDetour + (params.tripWeight + params.tripPenaltyWeight) * dTrip + walkTerm < 0;
}

}  // namespace ridepool
