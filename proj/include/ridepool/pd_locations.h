#pragma once

#include <vector>

#include "ridepool/ch.h"
#include "ridepool/insertion.h"
#include "ridepool/road_network.h"
#include "ridepool/search_core.h"

namespace ridepool {

// Candidate pickup and dropoff spots of one request, sorted by (walk, vertex).
struct PdSets {
    std::vector<PdLoc> pickups;
    std::vector<PdLoc> dropoffs;

    bool usable() const { return !pickups.empty() && !dropoffs.empty(); }
};

// Boardable vertices within walking radius of the origin (forward search) and
// of the destination (reverse search) in the pedestrian graph.
PdSets findPdLocations(const RoadNetworkPair& network, const Request& r, Dist radius);

// Upper bound on every pickup-to-dropoff vehicle distance:
// max_p d(p, o) + d(o, dest) + max_d d(dest, d). Any unreachable term makes
// the bound infinite, which disables radius pruning downstream.
Dist maxPdDist(const RoadNetworkPair& network, const ContractionHierarchy& chVeh,
               const Request& r, const PdSets& pd, SearchStats* stats = nullptr);

// All-pairs pickup-to-dropoff vehicle distances, row-major over (pickup,
// dropoff) indices of the PdSets ordering.
struct PdMatrix {
    int numPickups = 0;
    int numDropoffs = 0;
    std::vector<Dist> dist;
    Dist minEntry = kInf;

    Dist at(int p, int d) const {
        assert(p >= 0 && p < numPickups && d >= 0 && d < numDropoffs);
        return dist[static_cast<size_t>(p) * static_cast<size_t>(numDropoffs) +
                    static_cast<size_t>(d)];
    }
};

// BCH-based all-pairs search: transient bucket entries over the dropoffs'
// reverse-downward spaces, scanned by bundled upward searches from batches of
// k pickups. Both sides are truncated at maxDist.
PdMatrix pdDistanceSearch(const ContractionHierarchy& chVeh, const PdSets& pd, Dist maxDist, int k,
                          SearchStats* stats = nullptr);

}  // namespace ridepool
