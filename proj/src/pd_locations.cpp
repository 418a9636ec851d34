#include "ridepool/pd_locations.h"

#include <algorithm>

namespace ridepool {

namespace {

std::vector<PdLoc> boardableWithin(const RoadNetworkPair& network, const Graph& psgSide,
                                   Vertex root, Dist radius) {
    std::vector<PdLoc> locs;
    const std::vector<Dist> dist = psgSide.distancesFrom(root, radius);
    for (Vertex v = 0; v < network.vertexCount; ++v) {
        if (isInf(dist[static_cast<size_t>(v)]) || dist[static_cast<size_t>(v)] > radius) continue;
        if (!network.isBoardable(v)) continue;
        locs.push_back({v, dist[static_cast<size_t>(v)]});
    }
    std::sort(locs.begin(), locs.end(), [](const PdLoc& a, const PdLoc& b) {
        return a.walk != b.walk ? a.walk < b.walk : a.vertex < b.vertex;
    });
    return locs;
}

// Distance from root to every target (or the reverse on a reversed graph),
// stopping as soon as all targets are settled.
std::vector<Dist> targetDistances(const Graph& graph, Vertex root,
                                  const std::vector<Vertex>& targets, SearchStats& stats) {
    std::vector<uint8_t> pending(static_cast<size_t>(graph.numVertices()), 0);
    int remaining = 0;
    for (Vertex t : targets) {
        if (!pending[static_cast<size_t>(t)]) {
            pending[static_cast<size_t>(t)] = 1;
            ++remaining;
        }
    }
    BundledSearch<Graph> search(graph, graph.numVertices(), 1);
    search.reset();
    search.addSource(0, root);
    search.run(
        [&](Vertex v, std::span<const Dist>) {
            if (pending[static_cast<size_t>(v)]) {
                pending[static_cast<size_t>(v)] = 0;
                --remaining;
            }
        },
        [&](Dist) { return remaining == 0; }, stats);
    std::vector<Dist> out;
    out.reserve(targets.size());
    for (Vertex t : targets) out.push_back(search.row(t)[0]);
    return out;
}

}  // namespace

PdSets findPdLocations(const RoadNetworkPair& network, const Request& r, Dist radius) {
    PdSets pd;
    pd.pickups = boardableWithin(network, network.psg, r.origin, radius);
    pd.dropoffs = boardableWithin(network, network.psgReversed, r.destination, radius);
    return pd;
}

Dist maxPdDist(const RoadNetworkPair& network, const ContractionHierarchy& chVeh,
               const Request& r, const PdSets& pd, SearchStats* stats) {
    SearchStats local;
    SearchStats& st = stats ? *stats : local;
    std::vector<Vertex> pickupVertices, dropoffVertices;
    for (const PdLoc& p : pd.pickups) pickupVertices.push_back(p.vertex);
    for (const PdLoc& d : pd.dropoffs) dropoffVertices.push_back(d.vertex);

    Dist maxToOrigin = 0;
    for (Dist d : targetDistances(network.vehReversed, r.origin, pickupVertices, st))
        maxToOrigin = std::max(maxToOrigin, d);
    Dist maxFromDest = 0;
    for (Dist d : targetDistances(network.veh, r.destination, dropoffVertices, st))
        maxFromDest = std::max(maxFromDest, d);
    const Dist direct = chVeh.query(r.origin, r.destination);
    return addSat(maxToOrigin, direct, maxFromDest);
}

PdMatrix pdDistanceSearch(const ContractionHierarchy& chVeh, const PdSets& pd, Dist maxDist, int k,
                          SearchStats* stats) {
    assert(k >= 1);
    SearchStats local;
    SearchStats& st = stats ? *stats : local;
    PdMatrix matrix;
    matrix.numPickups = static_cast<int>(pd.pickups.size());
    matrix.numDropoffs = static_cast<int>(pd.dropoffs.size());
    matrix.dist.assign(
        static_cast<size_t>(matrix.numPickups) * static_cast<size_t>(matrix.numDropoffs), kInf);
    if (matrix.numPickups == 0 || matrix.numDropoffs == 0) return matrix;

    const int numVertices = chVeh.numVertices();
    BucketStore<ScanByDistAscending> buckets(numVertices, false);
    BundledSearch<SearchGraph> down(chVeh.downwardIn(), numVertices, k);
    for (int base = 0; base < matrix.numDropoffs; base += k) {
        const int lanes = std::min(k, matrix.numDropoffs - base);
        down.reset();
        for (int lane = 0; lane < lanes; ++lane)
            down.addSource(lane, pd.dropoffs[static_cast<size_t>(base + lane)].vertex);
        down.run(
            [&](Vertex v, std::span<const Dist> row) {
                for (int lane = 0; lane < lanes; ++lane) {
                    if (row[lane] > maxDist) continue;
                    buckets.insert(v, {base + lane, row[lane], 0});
                }
            },
            [&](Dist key) { return key > maxDist; }, st);
    }

    BundledSearch<SearchGraph> up(chVeh.upwardOut(), numVertices, k);
    for (int base = 0; base < matrix.numPickups; base += k) {
        const int lanes = std::min(k, matrix.numPickups - base);
        up.reset();
        for (int lane = 0; lane < lanes; ++lane)
            up.addSource(lane, pd.pickups[static_cast<size_t>(base + lane)].vertex);
        up.run(
            [&](Vertex v, std::span<const Dist> row) {
                for (const BucketEntry& entry : buckets.entries(v)) {
                    ++st.entriesScanned;
                    for (int lane = 0; lane < lanes; ++lane) {
                        if (row[lane] > maxDist) continue;
                        const Dist cand = row[lane] + entry.dist;
                        Dist& cell =
                            matrix.dist[static_cast<size_t>(base + lane) *
                                            static_cast<size_t>(matrix.numDropoffs) +
                                        static_cast<size_t>(entry.owner)];
                        cell = std::min(cell, cand);
                    }
                }
            },
            [&](Dist key) { return key > maxDist; }, st);
    }

    for (Dist d : matrix.dist) matrix.minEntry = std::min(matrix.minEntry, d);
    return matrix;
}

}  // namespace ridepool
