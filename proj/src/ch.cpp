#include "ridepool/ch.h"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace ridepool {

SearchGraph::SearchGraph(int vertexCount, std::vector<std::pair<Vertex, SearchEdge>> edges) {
    std::stable_sort(edges.begin(), edges.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    offsets_.assign(static_cast<size_t>(vertexCount) + 1, 0);
    edges_.reserve(edges.size());
    for (const auto& [from, edge] : edges) {
        offsets_[static_cast<size_t>(from) + 1]++;
        edges_.push_back(edge);
    }
    for (size_t v = 1; v < offsets_.size(); ++v) offsets_[v] += offsets_[v - 1];
}

namespace {

// Working graph during contraction. Adjacency lists reference the master edge
// array and keep only edges between still-uncontracted vertices relevant.
struct ContractionState {
    const int n;
    std::vector<ContractionHierarchy::ChEdge>& edges;
    std::vector<std::vector<int32_t>> out;
    std::vector<std::vector<int32_t>> in;
    std::vector<uint8_t> contracted;
    std::vector<int> contractedNeighbors;

    // Timestamped Dijkstra scratch for witness searches.
    std::vector<Dist> witnessDist;
    std::vector<int> witnessStamp;
    int stamp = 0;

    explicit ContractionState(const Graph& graph, std::vector<ContractionHierarchy::ChEdge>& e)
        : n(graph.numVertices()),
          edges(e),
          out(static_cast<size_t>(n)),
          in(static_cast<size_t>(n)),
          contracted(static_cast<size_t>(n), 0),
          contractedNeighbors(static_cast<size_t>(n), 0),
          witnessDist(static_cast<size_t>(n), kInf),
          witnessStamp(static_cast<size_t>(n), -1) {
        for (Vertex v = 0; v < n; ++v) {
            for (const auto& ge : graph.edgesFrom(v)) {
                if (ge.to == v) continue;  // self loops never shorten anything
                const auto id = static_cast<int32_t>(edges.size());
                edges.push_back({v, ge.to, ge.weight, -1, -1});
                out[static_cast<size_t>(v)].push_back(id);
                in[static_cast<size_t>(ge.to)].push_back(id);
            }
        }
    }

    // Minimal-length alive edge per distinct neighbor.
    std::vector<int32_t> aliveMinEdges(const std::vector<int32_t>& list, bool byTail,
                                       Vertex exclude) {
        std::unordered_map<Vertex, int32_t> best;
        for (int32_t id : list) {
            const auto& e = edges[static_cast<size_t>(id)];
            const Vertex nb = byTail ? e.tail : e.head;
            if (nb == exclude || contracted[static_cast<size_t>(nb)]) continue;
            auto it = best.find(nb);
            if (it == best.end() || e.length < edges[static_cast<size_t>(it->second)].length)
                best[nb] = id;
        }
        std::vector<int32_t> result;
        result.reserve(best.size());
        for (const auto& [nb, id] : best) result.push_back(id);
        std::sort(result.begin(), result.end());
        return result;
    }

    Dist distTo(Vertex v) const {
        return witnessStamp[static_cast<size_t>(v)] == stamp ? witnessDist[static_cast<size_t>(v)]
                                                             : kInf;
    }

    // Shortcuts required to contract v. When apply is set they are added.
    int shortcuts(Vertex v, bool apply) {
        const auto inEdges = aliveMinEdges(in[static_cast<size_t>(v)], true, v);
        const auto outEdges = aliveMinEdges(out[static_cast<size_t>(v)], false, v);
        int added = 0;
        for (int32_t inId : inEdges) {
            const Vertex u = edges[static_cast<size_t>(inId)].tail;
            const Dist inLen = edges[static_cast<size_t>(inId)].length;
            Dist maxTotal = 0;
            for (int32_t outId : outEdges) {
                const auto& oe = edges[static_cast<size_t>(outId)];
                if (oe.head == u) continue;
                maxTotal = std::max(maxTotal, inLen + oe.length);
            }
            if (maxTotal == 0 && outEdges.empty()) continue;
            witnessSearchRun(u, v, maxTotal, 200);
            for (int32_t outId : outEdges) {
                const auto& oe = edges[static_cast<size_t>(outId)];
                const Vertex w = oe.head;
                if (w == u) continue;
                const Dist total = inLen + oe.length;
                if (distTo(w) <= total) continue;  // witness path, shortcut not needed
                ++added;
                if (apply) {
                    const auto id = static_cast<int32_t>(edges.size());
                    edges.push_back({u, w, total, inId, outId});
                    out[static_cast<size_t>(u)].push_back(id);
                    in[static_cast<size_t>(w)].push_back(id);
                }
            }
        }
        return added;
    }

    void witnessSearchRun(Vertex source, Vertex skip, Dist bound, int settleBudget) {
        ++stamp;
        using Item = std::pair<Dist, Vertex>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
        witnessDist[static_cast<size_t>(source)] = 0;
        witnessStamp[static_cast<size_t>(source)] = stamp;
        queue.push({0, source});
        while (!queue.empty() && settleBudget > 0) {
            auto [d, v] = queue.top();
            queue.pop();
            if (witnessStamp[static_cast<size_t>(v)] != stamp ||
                d != witnessDist[static_cast<size_t>(v)])
                continue;
            if (d > bound) break;
            --settleBudget;
            for (int32_t id : out[static_cast<size_t>(v)]) {
                const auto& e = edges[static_cast<size_t>(id)];
                if (e.head == skip || contracted[static_cast<size_t>(e.head)]) continue;
                const Dist nd = d + e.length;
                if (nd > bound) continue;
                const auto h = static_cast<size_t>(e.head);
                if (witnessStamp[h] != stamp || nd < witnessDist[h]) {
                    witnessStamp[h] = stamp;
                    witnessDist[h] = nd;
                    queue.push({nd, e.head});
                }
            }
        }
    }

    int aliveDegree(Vertex v) {
        int deg = 0;
        for (int32_t id : in[static_cast<size_t>(v)]) {
            const Vertex u = edges[static_cast<size_t>(id)].tail;
            if (u != v && !contracted[static_cast<size_t>(u)]) ++deg;
        }
        for (int32_t id : out[static_cast<size_t>(v)]) {
            const Vertex w = edges[static_cast<size_t>(id)].head;
            if (w != v && !contracted[static_cast<size_t>(w)]) ++deg;
        }
        return deg;
    }

    int64_t priority(Vertex v) {
        return static_cast<int64_t>(shortcuts(v, false)) - aliveDegree(v) +
               contractedNeighbors[static_cast<size_t>(v)];
    }

    void contract(Vertex v) {
        shortcuts(v, true);
        contracted[static_cast<size_t>(v)] = 1;
        for (int32_t id : in[static_cast<size_t>(v)]) {
            const Vertex u = edges[static_cast<size_t>(id)].tail;
            if (!contracted[static_cast<size_t>(u)]) contractedNeighbors[static_cast<size_t>(u)]++;
        }
        for (int32_t id : out[static_cast<size_t>(v)]) {
            const Vertex w = edges[static_cast<size_t>(id)].head;
            if (!contracted[static_cast<size_t>(w)]) contractedNeighbors[static_cast<size_t>(w)]++;
        }
    }
};

}  // namespace

ContractionHierarchy ContractionHierarchy::build(const Graph& graph) {
    ContractionHierarchy ch;
    ch.checksum_ = graphChecksum(graph);
    ch.rank_.assign(static_cast<size_t>(graph.numVertices()), -1);
    ContractionState state(graph, ch.edges_);

    using Item = std::pair<int64_t, Vertex>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    for (Vertex v = 0; v < graph.numVertices(); ++v) queue.push({state.priority(v), v});

    int nextRank = 0;
    while (!queue.empty()) {
        auto [key, v] = queue.top();
        queue.pop();
        if (state.contracted[static_cast<size_t>(v)]) continue;
        const int64_t fresh = state.priority(v);
        if (!queue.empty() && fresh > queue.top().first) {
            queue.push({fresh, v});
            continue;
        }
        state.contract(v);
        ch.rank_[static_cast<size_t>(v)] = nextRank++;
    }
    ch.buildSearchGraphs();
    return ch;
}

ContractionHierarchy ContractionHierarchy::build(const Graph& graph,
                                                 const std::vector<Vertex>& order) {
    if (static_cast<int>(order.size()) != graph.numVertices())
        throw std::runtime_error("contraction order must list every vertex exactly once");
    ContractionHierarchy ch;
    ch.checksum_ = graphChecksum(graph);
    ch.rank_.assign(static_cast<size_t>(graph.numVertices()), -1);
    ContractionState state(graph, ch.edges_);
    int nextRank = 0;
    for (Vertex v : order) {
        if (v < 0 || v >= graph.numVertices() || ch.rank_[static_cast<size_t>(v)] >= 0)
            throw std::runtime_error("contraction order must list every vertex exactly once");
        state.contract(v);
        ch.rank_[static_cast<size_t>(v)] = nextRank++;
    }
    ch.buildSearchGraphs();
    return ch;
}

void ContractionHierarchy::buildSearchGraphs() {
    std::vector<std::pair<Vertex, SearchEdge>> up;
    std::vector<std::pair<Vertex, SearchEdge>> down;
    for (int32_t id = 0; id < static_cast<int32_t>(edges_.size()); ++id) {
        const auto& e = edges_[static_cast<size_t>(id)];
        if (rank_[static_cast<size_t>(e.tail)] < rank_[static_cast<size_t>(e.head)])
            up.push_back({e.tail, {e.head, e.length, id}});
        else
            down.push_back({e.head, {e.tail, e.length, id}});
    }
    upOut_ = SearchGraph(numVertices(), std::move(up));
    downIn_ = SearchGraph(numVertices(), std::move(down));
}

namespace {

struct QuerySide {
    std::unordered_map<Vertex, Dist> dist;
    std::unordered_map<Vertex, int32_t> parentEdge;
    using Item = std::pair<Dist, Vertex>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;

    void init(Vertex root) {
        dist[root] = 0;
        parentEdge[root] = -1;
        queue.push({0, root});
    }

    bool settleNext(const SearchGraph& adj, Dist& bestSoFar, const QuerySide& other,
                    Vertex& meetVertex) {
        while (!queue.empty()) {
            auto [d, v] = queue.top();
            if (d > bestSoFar) return false;
            queue.pop();
            if (d != dist.at(v)) continue;
            auto it = other.dist.find(v);
            if (it != other.dist.end() && d + it->second < bestSoFar) {
                bestSoFar = d + it->second;
                meetVertex = v;
            }
            for (const auto& e : adj.edges(v)) {
                const Dist nd = d + e.weight;
                auto [slot, inserted] = dist.try_emplace(e.neighbor, nd);
                if (!inserted && slot->second <= nd) continue;
                slot->second = nd;
                parentEdge[e.neighbor] = e.edgeId;
                queue.push({nd, e.neighbor});
            }
            return true;
        }
        return false;
    }

    Dist minKey() const { return queue.empty() ? kInf : queue.top().first; }
};

}  // namespace

Dist ContractionHierarchy::query(Vertex s, Vertex t) const {
    QuerySide fwd, bwd;
    fwd.init(s);
    bwd.init(t);
    Dist best = kInf;
    Vertex meet = kInvalidVertex;
    while (fwd.minKey() < best || bwd.minKey() < best) {
        if (fwd.minKey() <= bwd.minKey()) {
            if (!fwd.settleNext(upOut_, best, bwd, meet) && bwd.minKey() > best) break;
        } else {
            if (!bwd.settleNext(downIn_, best, fwd, meet) && fwd.minKey() > best) break;
        }
    }
    return best;
}

void ContractionHierarchy::appendUnpacked(int32_t edgeId,
                                          std::vector<std::pair<Vertex, Dist>>& path) const {
    const auto& e = edges_[static_cast<size_t>(edgeId)];
    if (e.left < 0) {
        path.emplace_back(e.head, path.back().second + e.length);
        return;
    }
    appendUnpacked(e.left, path);
    appendUnpacked(e.right, path);
}

std::vector<std::pair<Vertex, Dist>> ContractionHierarchy::queryPath(Vertex s, Vertex t) const {
    QuerySide fwd, bwd;
    fwd.init(s);
    bwd.init(t);
    Dist best = kInf;
    Vertex meet = kInvalidVertex;
    while (fwd.minKey() < best || bwd.minKey() < best) {
        if (fwd.minKey() <= bwd.minKey()) {
            if (!fwd.settleNext(upOut_, best, bwd, meet) && bwd.minKey() > best) break;
        } else {
            if (!bwd.settleNext(downIn_, best, fwd, meet) && fwd.minKey() > best) break;
        }
    }
    if (meet == kInvalidVertex) return {};

    std::vector<int32_t> fwdChain;
    for (Vertex v = meet; v != s;) {
        const int32_t id = fwd.parentEdge.at(v);
        fwdChain.push_back(id);
        v = edges_[static_cast<size_t>(id)].tail;
    }
    std::reverse(fwdChain.begin(), fwdChain.end());

    std::vector<std::pair<Vertex, Dist>> path;
    path.emplace_back(s, 0);
    for (int32_t id : fwdChain) appendUnpacked(id, path);
    for (Vertex v = meet; v != t;) {
        const int32_t id = bwd.parentEdge.at(v);
        appendUnpacked(id, path);
        v = edges_[static_cast<size_t>(id)].head;
    }
    assert(path.back().first == t && path.back().second == best);
    return path;
}

std::vector<ContractionHierarchy::SpaceEntry> ContractionHierarchy::searchSpace(
    Vertex root, Direction dir, Dist radius) const {
    const SearchGraph& adj = dir == Direction::Upward ? upOut_ : downIn_;
    std::unordered_map<Vertex, Dist> dist;
    using Item = std::pair<Dist, Vertex>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[root] = 0;
    queue.push({0, root});
    std::vector<SpaceEntry> space;
    while (!queue.empty()) {
        auto [d, v] = queue.top();
        queue.pop();
        if (d != dist.at(v)) continue;
        if (d > radius) break;
        space.push_back({v, d});
        for (const auto& e : adj.edges(v)) {
            const Dist nd = d + e.weight;
            auto [slot, inserted] = dist.try_emplace(e.neighbor, nd);
            if (!inserted && slot->second <= nd) continue;
            slot->second = nd;
            queue.push({nd, e.neighbor});
        }
    }
    return space;
}

uint64_t ContractionHierarchy::graphChecksum(const Graph& graph) {
    uint64_t hash = 1469598103934665603ull;
    auto mix = [&hash](int64_t value) {
        for (int i = 0; i < 8; ++i) {
            hash ^= static_cast<uint64_t>(value >> (8 * i)) & 0xff;
            hash *= 1099511628211ull;
        }
    };
    mix(graph.numVertices());
    for (Vertex v = 0; v < graph.numVertices(); ++v)
        for (const auto& e : graph.edgesFrom(v)) {
            mix(v);
            mix(e.to);
            mix(e.weight);
        }
    return hash;
}

namespace {
constexpr char kCacheMagic[8] = {'R', 'P', 'C', 'H', '0', '0', '0', '1'};

template <class T>
void writeRaw(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T readRaw(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("truncated hierarchy cache");
    return value;
}
}  // namespace

void ContractionHierarchy::save(std::ostream& out) const {
    out.write(kCacheMagic, sizeof(kCacheMagic));
    writeRaw(out, checksum_);
    writeRaw(out, static_cast<int64_t>(rank_.size()));
    writeRaw(out, static_cast<int64_t>(edges_.size()));
    for (int r : rank_) writeRaw(out, static_cast<int32_t>(r));
    for (const auto& e : edges_) {
        writeRaw(out, e.tail);
        writeRaw(out, e.head);
        writeRaw(out, e.length);
        writeRaw(out, e.left);
        writeRaw(out, e.right);
    }
}

ContractionHierarchy ContractionHierarchy::load(std::istream& in, const Graph& expectedGraph) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0)
        throw std::runtime_error("not a hierarchy cache file");
    ContractionHierarchy ch;
    ch.checksum_ = readRaw<uint64_t>(in);
    if (ch.checksum_ != graphChecksum(expectedGraph))
        throw std::runtime_error("hierarchy cache does not match the network");
    const auto numVertices = readRaw<int64_t>(in);
    const auto numEdges = readRaw<int64_t>(in);
    if (numVertices != expectedGraph.numVertices())
        throw std::runtime_error("hierarchy cache does not match the network");
    ch.rank_.resize(static_cast<size_t>(numVertices));
    for (auto& r : ch.rank_) r = readRaw<int32_t>(in);
    ch.edges_.resize(static_cast<size_t>(numEdges));
    for (auto& e : ch.edges_) {
        e.tail = readRaw<Vertex>(in);
        e.head = readRaw<Vertex>(in);
        e.length = readRaw<Dist>(in);
        e.left = readRaw<int32_t>(in);
        e.right = readRaw<int32_t>(in);
    }
    ch.buildSearchGraphs();
    return ch;
}

}  // namespace ridepool
