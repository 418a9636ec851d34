#pragma once

#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "ridepool/ch.h"
#include "ridepool/cost_model.h"
#include "ridepool/fleet_state.h"
#include "ridepool/insertion.h"
#include "ridepool/pd_locations.h"
#include "ridepool/search_core.h"

namespace ridepool {

// Individually lossless pruning rules, toggled one at a time by the
// equivalence tests.
struct PruningConfig {
    bool ellipticLeeway = true;   // truncate leg entries and scans at the leg's leeway
    bool sortedEarlyStop = true;  // stop sorted bucket scans at the first useless entry
    bool maxPdRadius = true;      // truncate PD matrix searches at the all-pairs bound
    bool costScans = true;        // cut last-stop scans by the running cost bound
    bool domination = true;       // label and candidate domination in last-stop searches
};

// Distances through one PD location x relative to a route leg (s_a, s_a+1):
// toPd = dist(s_a, x) and fromPd = dist(x, s_a+1).
struct LegPdDistance {
    int pdIdx = -1;
    Dist toPd = kInf;
    Dist fromPd = kInf;
};

// Per leg (keyed by the id of the stop starting it): every PD location whose
// detour fits the leg's leeway, pdIdx ascending, both distances exact.
struct EllipticDistances {
    std::unordered_map<int32_t, std::vector<LegPdDistance>> byLeg;
};

// Bucket entries over the vehicle hierarchy for every route leg, kept in sync
// incrementally. One query resolves stop<->PD-location distances for all legs
// of all vehicles at once.
class EllipticBuckets {
  public:
    EllipticBuckets(const ContractionHierarchy& ch, Time stopTime, int k, bool sorted,
                    PruningConfig pruning);

    // Regenerates entries for legs whose end stop or leeway changed and drops
    // entries of legs that no longer exist.
    void sync(const FleetState& fleet);

    EllipticDistances query(std::span<const PdLoc> pds, SearchStats* stats = nullptr) const;

    int64_t totalEntries() const { return source_.totalEntries() + target_.totalEntries(); }
    const BucketStore<ScanByKeyDescending>& sourceStore() const { return source_; }
    const BucketStore<ScanByKeyDescending>& targetStore() const { return target_; }
    // Leeway of the registered leg starting at the stop, kInf when unknown.
    Dist legLeeway(int32_t startStopId) const;

  private:
    struct LegRecord {
        int32_t endStopId = kInvalidId;
        Dist lambda = 0;
        Vertex startLoc = kInvalidVertex;
        Vertex endLoc = kInvalidVertex;
    };

    Dist entryRadius(Dist lambda) const;
    void generate(int32_t startStopId, const LegRecord& rec);
    void removeEntries(int32_t startStopId, const LegRecord& rec);

    const ContractionHierarchy* ch_;
    Time stopTime_;
    int k_;
    PruningConfig pruning_;
    BucketStore<ScanByKeyDescending> source_;
    BucketStore<ScanByKeyDescending> target_;
    std::map<int32_t, LegRecord> legs_;
    Dist maxLeeway_ = 0;
};

// Exact distances from vehicles' current locations to the pickup candidates,
// resolved lazily through transient bucket entries. Serves the second phase
// of the pickup-before-next-stop enumeration and the i = 0 case of the
// dropoff-after-last-stop search; cleared between requests.
class CurrentLocationBuckets {
  public:
    CurrentLocationBuckets(const ContractionHierarchy& ch, int k);

    void clear() { rows_.clear(); }

    // Resolves a distance row for every listed vehicle that has none yet.
    void ensure(FleetState& fleet, std::span<const int> vehicles, std::span<const PdLoc> pickups,
                SearchStats* stats = nullptr);

    std::span<const Dist> distances(int veh) const { return rows_.at(veh); }

  private:
    const ContractionHierarchy* ch_;
    int k_;
    std::unordered_map<int, std::vector<Dist>> rows_;
};

// One vehicle's elliptic query results, (position, candidates) ascending.
struct VehicleElliptic {
    std::vector<std::pair<int, const std::vector<LegPdDistance>*>> pickupLegs;
    std::vector<std::pair<int, const std::vector<LegPdDistance>*>> dropoffLegs;
};

std::vector<VehicleElliptic> groupByVehicle(const FleetState& fleet,
                                            const EllipticDistances& pickupSide,
                                            const EllipticDistances& dropoffSide);

// Ordinary insertions: pickup and dropoff both between existing stops,
// 0 < i <= j < n, including both on the same leg.
void enumerateOrdinary(FleetState& fleet, const std::vector<VehicleElliptic>& byVehicle,
                       const PdSets& pd, const PdMatrix& matrix, const Request& r,
                       const CostParameters& params, Time maxTrip, BestAssignment& best);

// Pickup-before-next-stop insertions: i = 0 <= j < n. Candidates of departed
// vehicles are filtered with a lower bound that stands the distance from s_0
// in for the unknown distance from the current location; survivors are then
// priced exactly via clBuckets.
void enumeratePbns(FleetState& fleet, const std::vector<VehicleElliptic>& byVehicle,
                   const PdSets& pd, const PdMatrix& matrix, const Request& r,
                   const CostParameters& params, Time maxTrip, CurrentLocationBuckets& clBuckets,
                   BestAssignment& best, SearchStats* stats = nullptr);

}  // namespace ridepool
