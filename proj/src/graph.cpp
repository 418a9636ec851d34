#include "ridepool/graph.h"

#include <algorithm>
#include <queue>

namespace ridepool {

Graph::Graph(int vertexCount, const std::vector<EdgeTuple>& edges) {
    assert(vertexCount >= 0);
    std::vector<EdgeTuple> sorted = edges;
    std::stable_sort(sorted.begin(), sorted.end(), [](const EdgeTuple& a, const EdgeTuple& b) {
        return std::get<0>(a) < std::get<0>(b);
    });
    offsets_.assign(static_cast<size_t>(vertexCount) + 1, 0);
    edges_.reserve(sorted.size());
    for (const auto& [tail, head, weight] : sorted) {
        assert(tail >= 0 && tail < vertexCount);
        assert(head >= 0 && head < vertexCount);
        assert(weight >= 0);
        offsets_[static_cast<size_t>(tail) + 1]++;
        edges_.push_back({head, weight});
    }
    for (size_t v = 1; v < offsets_.size(); ++v) offsets_[v] += offsets_[v - 1];
}

Graph Graph::reversed() const {
    std::vector<EdgeTuple> rev;
    rev.reserve(edges_.size());
    for (Vertex v = 0; v < numVertices(); ++v)
        for (const auto& e : edgesFrom(v)) rev.emplace_back(e.to, v, e.weight);
    return Graph(numVertices(), rev);
}

std::vector<Dist> Graph::distancesFrom(Vertex source, Dist radius) const {
    std::vector<Dist> dist(numVertices(), kInf);
    using Item = std::pair<Dist, Vertex>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[source] = 0;
    queue.push({0, source});
    while (!queue.empty()) {
        auto [d, v] = queue.top();
        queue.pop();
        if (d != dist[v]) continue;
        if (d > radius) break;
        for (const auto& e : edgesFrom(v)) {
            const Dist nd = d + e.weight;
            if (nd < dist[e.to]) {
                dist[e.to] = nd;
                queue.push({nd, e.to});
            }
        }
    }
    for (auto& d : dist)
        if (d > radius) d = kInf;
    return dist;
}

}  // namespace ridepool
