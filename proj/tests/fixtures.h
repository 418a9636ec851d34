#pragma once

// Shared test fixtures: the four-vertex line network, deterministic random
// instances, and an independent set-based Dijkstra used as the distance
// reference.

#include <map>
#include <random>
#include <set>
#include <vector>

#include "ridepool/ch.h"
#include "ridepool/cost_model.h"
#include "ridepool/fleet_state.h"
#include "ridepool/graph.h"
#include "ridepool/insertion.h"
#include "ridepool/pd_locations.h"
#include "ridepool/road_network.h"
#include "ridepool/types.h"

namespace fixtures {

using namespace ridepool;

inline std::vector<Graph::EdgeTuple> chainEdges(int n, Dist w) {
    std::vector<Graph::EdgeTuple> edges;
    for (Vertex v = 0; v + 1 < n; ++v) {
        edges.push_back({v, v + 1, w});
        edges.push_back({v + 1, v, w});
    }
    return edges;
}

// v0 - v1 - v2 - v3, every hop 100 in the vehicle network and psgWeight in
// the pedestrian network, all vertices boardable.
inline RoadNetworkPair lineNetwork(Dist psgWeight = 100) {
    return buildNetworkPair(4, chainEdges(4, 100), chainEdges(4, psgWeight));
}

// Fixed contraction order v1, v0, v2, v3: contracting v1 first adds the only
// shortcut (v0 <-> v2, length 200), so upward spaces are predictable by hand.
inline ContractionHierarchy lineCh(const Graph& g) {
    return ContractionHierarchy::build(g, {1, 0, 2, 3});
}

// Independent reference Dijkstra (set-based, shares nothing with the library
// search code).
inline std::vector<Dist> refDistances(const Graph& g, Vertex source) {
    std::vector<Dist> dist(static_cast<size_t>(g.numVertices()), kInf);
    std::set<std::pair<Dist, Vertex>> queue;
    dist[static_cast<size_t>(source)] = 0;
    queue.insert({0, source});
    while (!queue.empty()) {
        auto [d, v] = *queue.begin();
        queue.erase(queue.begin());
        for (const auto& e : g.edgesFrom(v)) {
            const Dist nd = d + e.weight;
            if (nd < dist[static_cast<size_t>(e.to)]) {
                queue.erase({dist[static_cast<size_t>(e.to)], e.to});
                dist[static_cast<size_t>(e.to)] = nd;
                queue.insert({nd, e.to});
            }
        }
    }
    return dist;
}

inline Dist refDistance(const Graph& g, Vertex s, Vertex t) {
    return refDistances(g, s)[static_cast<size_t>(t)];
}

// Strongly connected random multigraph: a directed ring plus extra random
// arcs, weights in [minW, maxW].
inline std::vector<Graph::EdgeTuple> randomEdges(std::mt19937& rng, int n, int extraArcs,
                                                 Dist minW, Dist maxW) {
    std::uniform_int_distribution<Dist> weight(minW, maxW);
    std::uniform_int_distribution<Vertex> vertex(0, n - 1);
    std::vector<Graph::EdgeTuple> edges;
    for (Vertex v = 0; v < n; ++v) edges.push_back({v, (v + 1) % n, weight(rng)});
    for (int i = 0; i < extraArcs; ++i) {
        Vertex a = vertex(rng);
        Vertex b = vertex(rng);
        if (a == b) continue;
        edges.push_back({a, b, weight(rng)});
    }
    return edges;
}

// Vehicle and pedestrian networks over the same vertex set. The pedestrian
// network reuses the vehicle topology with rescaled weights plus its own
// extra arcs, so every vertex stays boardable while distances differ.
inline RoadNetworkPair randomNetwork(std::mt19937& rng, int n, int extraArcs, Dist minW = 10,
                                     Dist maxW = 300) {
    auto vehEdges = randomEdges(rng, n, extraArcs, minW, maxW);
    std::uniform_int_distribution<Dist> scale(2, 5);
    std::vector<Graph::EdgeTuple> psgEdges;
    for (const auto& [a, b, w] : vehEdges) psgEdges.push_back({a, b, w * scale(rng)});
    for (const auto& [a, b, w] : randomEdges(rng, n, extraArcs / 2, minW, maxW))
        psgEdges.push_back({a, b, w * 4});
    return buildNetworkPair(n, std::move(vehEdges), std::move(psgEdges));
}

inline Vehicle makeVehicle(int32_t id, Vertex home, int capacity = 3, Time start = 0,
                           Time end = 1'000'000) {
    Vehicle v;
    v.id = id;
    v.home = home;
    v.capacity = capacity;
    v.serviceStart = start;
    v.serviceEnd = end;
    return v;
}

inline std::vector<Vehicle> randomVehicles(std::mt19937& rng, int count, int numVertices,
                                           Time end = 1'000'000) {
    std::uniform_int_distribution<Vertex> vertex(0, numVertices - 1);
    std::uniform_int_distribution<int> cap(1, 4);
    std::vector<Vehicle> vehicles;
    for (int i = 0; i < count; ++i)
        vehicles.push_back(makeVehicle(i + 1, vertex(rng), cap(rng), 0, end));
    return vehicles;
}

inline Request makeRequest(int32_t id, Vertex origin, Vertex dest, Time t) {
    Request r;
    r.id = id;
    r.origin = origin;
    r.destination = dest;
    r.reqTime = t;
    return r;
}

inline std::vector<Request> randomRequests(std::mt19937& rng, int count, int numVertices,
                                           Time maxGap = 400) {
    std::uniform_int_distribution<Vertex> vertex(0, numVertices - 1);
    std::uniform_int_distribution<Time> gap(0, maxGap);
    std::vector<Request> requests;
    Time t = 0;
    for (int i = 0; i < count; ++i) {
        t += gap(rng);
        Vertex o = vertex(rng);
        Vertex d = vertex(rng);
        if (o == d) d = (d + 1) % numVertices;
        requests.push_back(makeRequest(i, o, d, t));
    }
    return requests;
}

// Cost parameters scaled down for hand-checked scenarios.
inline CostParameters smallParams() {
    CostParameters p;
    p.maxWaitTime = 100;
    p.stopTime = 0;
    p.waitPenaltyWeight = 1;
    p.tripPenaltyWeight = 10;
    p.tripWeight = 1;
    p.walkWeight = 0;
    return p;
}

// The two-pickup/two-dropoff example: a vehicle drives A -> B while a rider
// asks for O -> Dest with pickups P1/P2 and dropoffs D1/D2. All distances are
// given directly, so insertions are priced on hand-built stop views.
namespace fig2 {

inline constexpr Dist kVehAP1 = 3;
inline constexpr Dist kVehP1B = 1;
inline constexpr Dist kVehAP2 = 6;
inline constexpr Dist kVehP2B = 1;
inline constexpr Dist kVehAB = 2;
inline constexpr Dist kVehBD1 = 1;
inline constexpr Dist kVehBD2 = 3;
inline constexpr Dist kWalkOP1 = 2;
inline constexpr Dist kWalkOP2 = 2;
inline constexpr Dist kWalkD1Dest = 4;
inline constexpr Dist kWalkD2Dest = 1;
inline constexpr Time kMaxTrip = 10;

inline CostParameters params() {
    CostParameters p = smallParams();
    p.maxWaitTime = 1000;
    return p;
}

// Vertex ids used when the example needs a concrete graph.
inline constexpr Vertex kA = 0, kB = 1, kP1 = 2, kP2 = 3, kD1 = 4, kD2 = 5, kO = 6, kDest = 7;

inline RoadNetworkPair network() {
    std::vector<Graph::EdgeTuple> veh = {
        {kA, kP1, kVehAP1}, {kP1, kB, kVehP1B}, {kA, kP2, kVehAP2}, {kP2, kB, kVehP2B},
        {kA, kB, kVehAB},   {kB, kD1, kVehBD1}, {kB, kD2, kVehBD2},
    };
    std::vector<Graph::EdgeTuple> psg = {
        {kO, kP1, kWalkOP1},
        {kO, kP2, kWalkOP2},
        {kD1, kDest, kWalkD1Dest},
        {kD2, kDest, kWalkD2Dest},
    };
    std::vector<Vertex> board = {kA, kB, kP1, kP2, kD1, kD2};
    return buildNetworkPair(8, std::move(veh), std::move(psg), std::move(board));
}

// Stop views for the vehicle mid-assignment: s_0 at A (departing at 0),
// s_1 = last stop at B.
inline VehicleContext context(std::vector<StopView>& buffer) {
    buffer.clear();
    StopView a;
    a.location = kA;
    a.minArr = 0;
    a.minDep = 0;
    a.distToNext = kVehAB;
    StopView b;
    b.location = kB;
    b.minArr = kVehAB;
    b.minDep = kVehAB;
    b.distToNext = kInf;
    buffer.push_back(a);
    buffer.push_back(b);
    VehicleContext ctx;
    ctx.vehicleId = 0;
    ctx.stops = buffer;
    ctx.depAtPrevEquivalent = 0;
    ctx.serviceEnd = kInf;
    ctx.capacity = 2;
    return ctx;
}

// Insertion (pickup k, dropoff l): pickup between A and B, dropoff appended
// after B.
inline Insertion insertion(int k, int l) {
    Insertion ins;
    ins.vehicleId = 0;
    ins.pickupPos = 0;
    ins.dropoffPos = 1;
    ins.pickup = k == 1 ? PdLoc{kP1, kWalkOP1} : PdLoc{kP2, kWalkOP2};
    ins.dropoff = l == 1 ? PdLoc{kD1, kWalkD1Dest} : PdLoc{kD2, kWalkD2Dest};
    ins.pickupIdx = k - 1;
    ins.dropoffIdx = l - 1;
    ins.distToPickup = k == 1 ? kVehAP1 : kVehAP2;
    ins.distFromPickup = k == 1 ? kVehP1B : kVehP2B;
    ins.distToDropoff = l == 1 ? kVehBD1 : kVehBD2;
    ins.distFromDropoff = kInf;
    return ins;
}

inline Request request() { return makeRequest(0, kO, kDest, 0); }

}  // namespace fig2

}  // namespace fixtures
