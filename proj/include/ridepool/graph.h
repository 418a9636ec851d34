#pragma once

#include <span>
#include <tuple>
#include <vector>

#include "ridepool/types.h"

namespace ridepool {

struct GraphEdge {
    Vertex to;
    Dist weight;
};

// Directed graph with non-negative integer edge weights in CSR layout.
class Graph {
  public:
    using EdgeTuple = std::tuple<Vertex, Vertex, Dist>;  // tail, head, weight

    Graph() = default;
    Graph(int vertexCount, const std::vector<EdgeTuple>& edges);

    int numVertices() const { return static_cast<int>(offsets_.size()) - 1; }
    int numEdges() const { return static_cast<int>(edges_.size()); }

    std::span<const GraphEdge> edgesFrom(Vertex v) const {
        assert(v >= 0 && v < numVertices());
        return {edges_.data() + offsets_[v], edges_.data() + offsets_[v + 1]};
    }

    Graph reversed() const;

    // Plain Dijkstra, mainly for small utility uses inside the engine.
    std::vector<Dist> distancesFrom(Vertex source, Dist radius = kInf) const;

  private:
    std::vector<int32_t> offsets_ = {0};
    std::vector<GraphEdge> edges_;
};

}  // namespace ridepool
