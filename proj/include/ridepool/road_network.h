#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ridepool/graph.h"
#include "ridepool/types.h"

namespace ridepool {

// A shared vertex id space with separate vehicle and passenger edge sets.
// Boarding is restricted to vertices accessible in both networks; an optional
// explicit list narrows it (and flags the listed vertices as accessible).
struct RoadNetworkPair {
    int vertexCount = 0;
    std::vector<Graph::EdgeTuple> vehEdges;
    std::vector<Graph::EdgeTuple> psgEdges;
    std::optional<std::vector<Vertex>> boardList;

    Graph veh;
    Graph psg;
    Graph vehReversed;
    Graph psgReversed;
    std::vector<uint8_t> vehAccessible;
    std::vector<uint8_t> psgAccessible;
    std::vector<uint8_t> boardable;

    bool isBoardable(Vertex v) const { return boardable[static_cast<size_t>(v)] != 0; }

    bool operator==(const RoadNetworkPair& other) const {
        return vertexCount == other.vertexCount && vehEdges == other.vehEdges &&
               psgEdges == other.psgEdges && boardList == other.boardList;
    }
};

// Builds the derived structures (graphs, accessibility, boarding set) and
// validates the invariants. Throws std::runtime_error on violation.
RoadNetworkPair buildNetworkPair(int vertexCount, std::vector<Graph::EdgeTuple> vehEdges,
                                 std::vector<Graph::EdgeTuple> psgEdges,
                                 std::optional<std::vector<Vertex>> boardList = std::nullopt);

// Plain-text format: "vertices N", then "veh tail head time", "psg tail head time",
// optional "board v" lines. '#' starts a comment. Errors carry line numbers.
RoadNetworkPair parseNetworkPair(std::istream& in, const std::string& name);
RoadNetworkPair loadNetworkPair(const std::string& path);
void writeNetworkPair(const RoadNetworkPair& network, std::ostream& out);

}  // namespace ridepool
