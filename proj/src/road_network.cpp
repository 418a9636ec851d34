#include "ridepool/road_network.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ridepool {

namespace {

[[noreturn]] void parseError(const std::string& name, int line, const std::string& what) {
    throw std::runtime_error(name + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

RoadNetworkPair buildNetworkPair(int vertexCount, std::vector<Graph::EdgeTuple> vehEdges,
                                 std::vector<Graph::EdgeTuple> psgEdges,
                                 std::optional<std::vector<Vertex>> boardList) {
    if (vertexCount <= 0) throw std::runtime_error("network must have at least one vertex");
    auto checkEdges = [&](const std::vector<Graph::EdgeTuple>& edges, const char* kind) {
        for (const auto& [tail, head, weight] : edges) {
            if (tail < 0 || tail >= vertexCount || head < 0 || head >= vertexCount)
                throw std::runtime_error(std::string(kind) + " edge references unknown vertex");
            if (weight < 0)
                throw std::runtime_error(std::string(kind) + " edge has negative travel time");
        }
    };
    checkEdges(vehEdges, "veh");
    checkEdges(psgEdges, "psg");

    RoadNetworkPair network;
    network.vertexCount = vertexCount;
    network.vehEdges = std::move(vehEdges);
    network.psgEdges = std::move(psgEdges);
    network.boardList = std::move(boardList);

    network.veh = Graph(vertexCount, network.vehEdges);
    network.psg = Graph(vertexCount, network.psgEdges);
    network.vehReversed = network.veh.reversed();
    network.psgReversed = network.psg.reversed();

    network.vehAccessible.assign(static_cast<size_t>(vertexCount), 0);
    network.psgAccessible.assign(static_cast<size_t>(vertexCount), 0);
    for (const auto& [tail, head, weight] : network.vehEdges) {
        network.vehAccessible[static_cast<size_t>(tail)] = 1;
        network.vehAccessible[static_cast<size_t>(head)] = 1;
    }
    for (const auto& [tail, head, weight] : network.psgEdges) {
        network.psgAccessible[static_cast<size_t>(tail)] = 1;
        network.psgAccessible[static_cast<size_t>(head)] = 1;
    }
    if (network.boardList) {
        for (Vertex v : *network.boardList) {
            if (v < 0 || v >= vertexCount)
                throw std::runtime_error("board line references unknown vertex");
            network.vehAccessible[static_cast<size_t>(v)] = 1;
            network.psgAccessible[static_cast<size_t>(v)] = 1;
        }
    }

    network.boardable.assign(static_cast<size_t>(vertexCount), 0);
    if (network.boardList) {
        for (Vertex v : *network.boardList) network.boardable[static_cast<size_t>(v)] = 1;
    } else {
        for (Vertex v = 0; v < vertexCount; ++v)
            network.boardable[static_cast<size_t>(v)] =
                network.vehAccessible[static_cast<size_t>(v)] &&
                network.psgAccessible[static_cast<size_t>(v)];
    }
    bool anyBoardable = false;
    for (uint8_t b : network.boardable) anyBoardable |= b != 0;
    if (!anyBoardable) throw std::runtime_error("boarding set is empty");
    return network;
}

RoadNetworkPair parseNetworkPair(std::istream& in, const std::string& name) {
    int vertexCount = -1;
    std::vector<Graph::EdgeTuple> vehEdges;
    std::vector<Graph::EdgeTuple> psgEdges;
    std::optional<std::vector<Vertex>> boardList;

    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string keyword;
        if (!(fields >> keyword)) continue;
        if (keyword == "vertices") {
            if (vertexCount >= 0) parseError(name, lineNo, "duplicate vertices line");
            if (!(fields >> vertexCount) || vertexCount <= 0)
                parseError(name, lineNo, "expected positive vertex count");
        } else if (keyword == "veh" || keyword == "psg") {
            int64_t tail = 0, head = 0, weight = 0;
            if (!(fields >> tail >> head >> weight))
                parseError(name, lineNo, "expected: " + keyword + " tail head time");
            if (vertexCount < 0) parseError(name, lineNo, "edge before vertices line");
            if (tail < 0 || tail >= vertexCount || head < 0 || head >= vertexCount)
                parseError(name, lineNo, "edge references unknown vertex");
            if (weight < 0) parseError(name, lineNo, "negative travel time");
            auto& edges = keyword == "veh" ? vehEdges : psgEdges;
            edges.emplace_back(static_cast<Vertex>(tail), static_cast<Vertex>(head), weight);
        } else if (keyword == "board") {
            int64_t v = 0;
            if (!(fields >> v)) parseError(name, lineNo, "expected: board vertex");
            if (vertexCount < 0) parseError(name, lineNo, "board before vertices line");
            if (v < 0 || v >= vertexCount) parseError(name, lineNo, "board references unknown vertex");
            if (!boardList) boardList.emplace();
            boardList->push_back(static_cast<Vertex>(v));
        } else {
            parseError(name, lineNo, "unknown keyword '" + keyword + "'");
        }
        std::string extra;
        if (fields >> extra) parseError(name, lineNo, "trailing tokens");
    }
    if (vertexCount < 0) throw std::runtime_error(name + ": missing vertices line");
    try {
        return buildNetworkPair(vertexCount, std::move(vehEdges), std::move(psgEdges),
                                std::move(boardList));
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(name + ": " + e.what());
    }
}

RoadNetworkPair loadNetworkPair(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open network file: " + path);
    return parseNetworkPair(in, path);
}

void writeNetworkPair(const RoadNetworkPair& network, std::ostream& out) {
    out << "vertices " << network.vertexCount << "\n";
    for (const auto& [tail, head, weight] : network.vehEdges)
        out << "veh " << tail << " " << head << " " << weight << "\n";
    for (const auto& [tail, head, weight] : network.psgEdges)
        out << "psg " << tail << " " << head << " " << weight << "\n";
    if (network.boardList)
        for (Vertex v : *network.boardList) out << "board " << v << "\n";
}

}  // namespace ridepool
