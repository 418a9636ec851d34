#pragma once

#include <span>
#include <vector>

#include "ridepool/ch.h"
#include "ridepool/cost_model.h"
#include "ridepool/elliptic.h"
#include "ridepool/fleet_state.h"
#include "ridepool/insertion.h"
#include "ridepool/pd_locations.h"
#include "ridepool/road_network.h"
#include "ridepool/search_core.h"

namespace ridepool {

enum class LastStopStrategy { Dijkstra, IndividualBch, CollectiveBch };

// Bucket entries over the vehicle hierarchy for every vehicle's last stop,
// owner = vehicle index, full upward search space, kept in sync incrementally.
class LastStopBuckets {
  public:
    LastStopBuckets(const ContractionHierarchy& ch, bool sorted);

    // Exchanges entries of vehicles whose last stop changed.
    void sync(const FleetState& fleet);

    std::span<const BucketEntry> entries(Vertex v) const { return store_.entries(v); }
    bool sorted() const { return store_.sorted(); }
    int64_t totalEntries() const { return store_.totalEntries(); }

  private:
    struct LastStop {
        int32_t stopId = kInvalidId;
        Vertex location = kInvalidVertex;
    };

    const ContractionHierarchy* ch_;
    BucketStore<ScanByDistAscending> store_;
    std::vector<LastStop> registry_;
};

// Pickup-and-dropoff-after-last-stop insertions. Resolves last-stop-to-pickup
// distances with the chosen strategy, tightens a local cost bound from
// tentative candidates, and evaluates every surviving pair exactly. The
// collective strategy returns its single best pair directly and falls back to
// the individual search when that pair violates a hard constraint.
void palsSearch(const RoadNetworkPair& net, const ContractionHierarchy& chVeh,
                const LastStopBuckets& buckets, FleetState& fleet, const Request& r,
                const CostParameters& params, Time maxTrip, const PdSets& pd,
                const PdMatrix& matrix, LastStopStrategy strategy, int laneCount,
                const PruningConfig& pruning, BestAssignment& best, SearchStats& stats);

// Dropoff-after-last-stop insertions. Resolves last-stop-to-dropoff distances
// (a pareto set per vehicle under the collective strategy, full sets
// otherwise), then enumerates them against the elliptic pickup candidates of
// every leg, handling pickups before the next stop like the PBNS search.
void dalsSearch(const RoadNetworkPair& net, const ContractionHierarchy& chVeh,
                const LastStopBuckets& buckets, FleetState& fleet, const Request& r,
                const CostParameters& params, Time maxTrip, const PdSets& pd,
                const PdMatrix& matrix, const std::vector<VehicleElliptic>& byVehicle,
                CurrentLocationBuckets& clBuckets, LastStopStrategy strategy, int laneCount,
                const PruningConfig& pruning, BestAssignment& best, SearchStats& stats);

}  // namespace ridepool
