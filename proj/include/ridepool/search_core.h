#pragma once

#include <algorithm>
#include <queue>
#include <span>
#include <vector>

#include "ridepool/ch.h"
#include "ridepool/graph.h"
#include "ridepool/types.h"

namespace ridepool {

struct SearchStats {
    int64_t verticesSettled = 0;
    int64_t edgesRelaxed = 0;
    int64_t entriesScanned = 0;

    SearchStats& operator+=(const SearchStats& other) {
        verticesSettled += other.verticesSettled;
        edgesRelaxed += other.edgesRelaxed;
        entriesScanned += other.entriesScanned;
        return *this;
    }
};

struct BucketEntry {
    int32_t owner = kInvalidId;  // stop id or vehicle id
    Dist dist = kInf;            // distance between the owner's stop and the bucket vertex
    Dist sortKey = 0;            // scan-order key, fixed by the store's comparator
};

struct ScanByDistAscending {
    bool operator()(const BucketEntry& a, const BucketEntry& b) const { return a.dist < b.dist; }
};

struct ScanByKeyDescending {
    bool operator()(const BucketEntry& a, const BucketEntry& b) const { return a.sortKey > b.sortKey; }
};

// Contiguous per-vertex entry arrays. A sorted store inserts by binary search
// and keeps equal keys in insertion order, so scans may stop early on the
// comparator's key; an unsorted store appends and must be scanned fully.
template <class Compare>
class BucketStore {
  public:
    BucketStore() = default;
    explicit BucketStore(int vertexCount, bool sorted = true)
        : buckets_(static_cast<size_t>(vertexCount)), sorted_(sorted) {}

    bool sorted() const { return sorted_; }
    int numVertices() const { return static_cast<int>(buckets_.size()); }

    void insert(Vertex v, const BucketEntry& entry) {
        auto& bucket = buckets_[static_cast<size_t>(v)];
        if (!sorted_) {
            bucket.push_back(entry);
            return;
        }
        auto pos = std::upper_bound(bucket.begin(), bucket.end(), entry, Compare{});
        bucket.insert(pos, entry);
    }

    // Removes every entry of the owner at v; unknown owners are a no-op.
    void removeOwner(Vertex v, int32_t owner) {
        auto& bucket = buckets_[static_cast<size_t>(v)];
        std::erase_if(bucket, [owner](const BucketEntry& e) { return e.owner == owner; });
    }

    std::span<const BucketEntry> entries(Vertex v) const { return buckets_[static_cast<size_t>(v)]; }

    int64_t totalEntries() const {
        int64_t total = 0;
        for (const auto& bucket : buckets_) total += static_cast<int64_t>(bucket.size());
        return total;
    }

    void clear() {
        for (auto& bucket : buckets_) bucket.clear();
    }

  private:
    std::vector<std::vector<BucketEntry>> buckets_;
    bool sorted_ = true;
};

namespace detail {

inline std::span<const GraphEdge> searchEdges(const Graph& g, Vertex v) { return g.edgesFrom(v); }
inline std::span<const SearchEdge> searchEdges(const SearchGraph& g, Vertex v) { return g.edges(v); }
inline Vertex edgeTarget(const GraphEdge& e) { return e.to; }
inline Vertex edgeTarget(const SearchEdge& e) { return e.neighbor; }

}  // namespace detail

// Up to k same-direction Dijkstra lanes advanced together over a road graph or
// a hierarchy side. The queue is keyed by the minimum lane distance of a
// vertex, so pop keys are monotone and any stop rule monotone in that key is
// safe. Lanes are label-correcting: every improvement re-queues the vertex and
// the visitor sees the refreshed row, so min-combining visitor output yields
// exactly the distances of k independent single-lane runs.
template <class GraphT>
class BundledSearch {
  public:
    BundledSearch(const GraphT& graph, int vertexCount, int laneCount)
        : graph_(&graph),
          laneCount_(laneCount),
          dist_(static_cast<size_t>(vertexCount) * static_cast<size_t>(laneCount), kInf),
          generationSeen_(static_cast<size_t>(vertexCount), 0),
          dirty_(static_cast<size_t>(vertexCount), 0),
          infRow_(static_cast<size_t>(laneCount), kInf) {}

    int laneCount() const { return laneCount_; }

    void reset() {
        ++generation_;
        queue_ = Queue{};
    }

    void addSource(int lane, Vertex v, Dist offset = 0) {
        assert(lane >= 0 && lane < laneCount_);
        Dist* row = mutableRow(v);
        if (offset < row[lane]) {
            row[lane] = offset;
            dirty_[static_cast<size_t>(v)] = 1;
            queue_.push({rowMin(v), v});
        }
    }

    std::span<const Dist> row(Vertex v) const {
        if (generationSeen_[static_cast<size_t>(v)] != generation_) return infRow_;
        return {dist_.data() + static_cast<size_t>(v) * laneCount_, static_cast<size_t>(laneCount_)};
    }

    // visit(vertex, row) fires whenever a vertex is settled with fresh lane
    // values; stop(minKey) is checked against the queue head before each pop.
    template <class Visit, class Stop>
    void run(Visit&& visit, Stop&& stop, SearchStats& stats) {
        while (!queue_.empty()) {
            const auto [key, v] = queue_.top();
            if (stop(key)) break;
            queue_.pop();
            if (!dirty_[static_cast<size_t>(v)]) continue;
            dirty_[static_cast<size_t>(v)] = 0;
            ++stats.verticesSettled;
            visit(v, row(v));
            const Dist* fromRow = dist_.data() + static_cast<size_t>(v) * laneCount_;
            for (const auto& edge : detail::searchEdges(*graph_, v)) {
                ++stats.edgesRelaxed;
                const Vertex to = detail::edgeTarget(edge);
                Dist* toRow = mutableRow(to);
                bool improved = false;
                for (int lane = 0; lane < laneCount_; ++lane) {
                    if (isInf(fromRow[lane])) continue;
                    const Dist candidate = fromRow[lane] + edge.weight;
                    if (candidate < toRow[lane]) {
                        toRow[lane] = candidate;
                        improved = true;
                    }
                }
                if (improved) {
                    dirty_[static_cast<size_t>(to)] = 1;
                    queue_.push({rowMin(to), to});
                }
            }
        }
    }

  private:
    struct QueueItem {
        Dist key;
        Vertex vertex;
        bool operator>(const QueueItem& other) const {
            return key != other.key ? key > other.key : vertex > other.vertex;
        }
    };
    using Queue = std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>>;

    Dist* mutableRow(Vertex v) {
        Dist* row = dist_.data() + static_cast<size_t>(v) * laneCount_;
        if (generationSeen_[static_cast<size_t>(v)] != generation_) {
            std::fill(row, row + laneCount_, kInf);
            generationSeen_[static_cast<size_t>(v)] = generation_;
            dirty_[static_cast<size_t>(v)] = 0;
        }
        return row;
    }

    Dist rowMin(Vertex v) const {
        const Dist* row = dist_.data() + static_cast<size_t>(v) * laneCount_;
        Dist best = kInf;
        for (int lane = 0; lane < laneCount_; ++lane) best = std::min(best, row[lane]);
        return best;
    }

    const GraphT* graph_;
    int laneCount_;
    std::vector<Dist> dist_;
    std::vector<uint32_t> generationSeen_;
    std::vector<uint8_t> dirty_;
    std::vector<Dist> infRow_;
    uint32_t generation_ = 1;
    Queue queue_;
};

}  // namespace ridepool
