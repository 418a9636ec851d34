#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "ridepool/graph.h"
#include "ridepool/types.h"

namespace ridepool {

struct SearchEdge {
    Vertex neighbor;
    Dist weight;
    int32_t edgeId;
};

// Adjacency over the hierarchy, rank-ascending in both directions.
class SearchGraph {
  public:
    SearchGraph() = default;
    SearchGraph(int vertexCount, std::vector<std::pair<Vertex, SearchEdge>> edges);
    int numVertices() const { return static_cast<int>(offsets_.size()) - 1; }
    std::span<const SearchEdge> edges(Vertex v) const {
        assert(v >= 0 && v + 1 < static_cast<Vertex>(offsets_.size()));
        return {edges_.data() + offsets_[v], edges_.data() + offsets_[v + 1]};
    }

  private:
    std::vector<int32_t> offsets_ = {0};
    std::vector<SearchEdge> edges_;
};

class ContractionHierarchy {
  public:
    struct ChEdge {
        Vertex tail;
        Vertex head;
        Dist length;
        int32_t left = -1;   // lower half of a shortcut, -1 for an input edge
        int32_t right = -1;  // upper half of a shortcut
    };

    enum class Direction {
        Upward,          // distances from the root along upward edges
        ReverseDownward  // distances to the root along downward edges
    };

    struct SpaceEntry {
        Vertex vertex;
        Dist dist;
    };

    static ContractionHierarchy build(const Graph& graph);
    static ContractionHierarchy build(const Graph& graph, const std::vector<Vertex>& order);

    int numVertices() const { return static_cast<int>(rank_.size()); }
    int rank(Vertex v) const { return rank_[static_cast<size_t>(v)]; }

    Dist query(Vertex s, Vertex t) const;
    // Query plus the unpacked vertex path with cumulative travel times from s.
    // Empty when t is unreachable. The first element is (s, 0).
    std::vector<std::pair<Vertex, Dist>> queryPath(Vertex s, Vertex t) const;

    // Settles the full search space of root in the given direction, in distance
    // order, dropping everything beyond radius.
    std::vector<SpaceEntry> searchSpace(Vertex root, Direction dir, Dist radius = kInf) const;

    const SearchGraph& upwardOut() const { return upOut_; }
    const SearchGraph& downwardIn() const { return downIn_; }

    void save(std::ostream& out) const;
    static ContractionHierarchy load(std::istream& in, const Graph& expectedGraph);

    // Checksum of the input graph, stored in the cache for staleness checks.
    static uint64_t graphChecksum(const Graph& graph);

  private:
    std::vector<int> rank_;
    std::vector<ChEdge> edges_;
    SearchGraph upOut_;
    SearchGraph downIn_;
    uint64_t checksum_ = 0;

    void buildSearchGraphs();
    void appendUnpacked(int32_t edgeId, std::vector<std::pair<Vertex, Dist>>& path) const;
};

}  // namespace ridepool
