#include "ridepool/last_stop.h"

#include <algorithm>
#include <cassert>
#include <queue>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace ridepool {

LastStopBuckets::LastStopBuckets(const ContractionHierarchy& ch, bool sorted)
    : ch_(&ch), store_(ch.numVertices(), sorted) {}

void LastStopBuckets::sync(const FleetState& fleet) {
    using Dir = ContractionHierarchy::Direction;
    registry_.resize(static_cast<size_t>(fleet.numVehicles()));
    for (int veh = 0; veh < fleet.numVehicles(); ++veh) {
        const Stop& last = fleet.stops(veh).back();
        LastStop& reg = registry_[static_cast<size_t>(veh)];
        if (reg.stopId == last.stopId && reg.location == last.location) continue;
        if (reg.stopId != kInvalidId) {
            for (const auto& [v, d] : ch_->searchSpace(reg.location, Dir::Upward))
                store_.removeOwner(v, veh);
        }
        reg = {last.stopId, last.location};
        for (const auto& [v, d] : ch_->searchSpace(last.location, Dir::Upward))
            store_.insert(v, {veh, d, d});
    }
}

namespace {

// Per-vehicle facts every last-stop candidate is priced against.
struct VehicleLast {
    Vertex lastVertex = kInvalidVertex;
    Time depTime = 0;  // earliest departure at the last stop; equals the
                       // current-location equivalent for single-stop routes
    Time serviceEnd = kInf;
    Time maxDepLast = kInf;
    bool canMerge = false;  // a pickup at the last stop merges unless it is s_0
    int lastPos = 0;
};

std::vector<VehicleLast> snapshotLastStops(const FleetState& fleet) {
    std::vector<VehicleLast> rows(static_cast<size_t>(fleet.numVehicles()));
    for (int veh = 0; veh < fleet.numVehicles(); ++veh) {
        const auto& stops = fleet.stops(veh);
        const Stop& last = stops.back();
        VehicleLast& row = rows[static_cast<size_t>(veh)];
        row.lastVertex = last.location;
        row.depTime = last.minDep;
        row.serviceEnd = fleet.vehicle(veh).serviceEnd;
        row.maxDepLast = last.maxDepPromise;
        row.canMerge = stops.size() >= 2;
        row.lastPos = static_cast<int>(stops.size()) - 1;
    }
    return rows;
}

// Accumulated per-vehicle distance rows, one slot per PD-set index. Rows may
// overestimate pairs whose lower bound already exceeded the running cost
// bound when scanned; such pairs provably lose, so the eventual winner's
// distance is always exact.
struct DistRows {
    std::unordered_map<int, std::vector<Dist>> rows;
    std::vector<int> touched;

    std::vector<Dist>& rowFor(int veh, int width) {
        auto [it, fresh] = rows.try_emplace(veh);
        if (fresh) {
            it->second.assign(static_cast<size_t>(width), kInf);
            touched.push_back(veh);
        }
        return it->second;
    }
};

struct PalsContext {
    const Request& r;
    const CostParameters& params;
    Time maxTrip;
    const PdSets& pd;
    const PdMatrix& matrix;
    const PruningConfig& pruning;
    std::vector<VehicleLast> vehs;
    std::vector<int> viable;   // pickups with at least one reachable dropoff
    std::vector<Dist> minPd;   // per pickup: min over dropoffs
    std::vector<int> dStar;    // per pickup: argmin of pd + dropoff walk
    Dist minWalkP = 0;
    Dist minWalkD = 0;

    int numPickups() const { return static_cast<int>(pd.pickups.size()); }
};

PalsContext makePalsContext(const Request& r, const CostParameters& params, Time maxTrip,
                            const PdSets& pd, const PdMatrix& matrix,
                            const PruningConfig& pruning, const FleetState& fleet) {
    PalsContext cx{r, params, maxTrip, pd, matrix, pruning, snapshotLastStops(fleet),
                   {},  {},     {},        0,  0};
    const int numP = static_cast<int>(pd.pickups.size());
    const int numD = static_cast<int>(pd.dropoffs.size());
    cx.minPd.assign(static_cast<size_t>(numP), kInf);
    cx.dStar.assign(static_cast<size_t>(numP), -1);
    for (int p = 0; p < numP; ++p) {
        Dist bestKey = kInf;
        for (int d = 0; d < numD; ++d) {
            const Dist pdDist = matrix.at(p, d);
            if (isInf(pdDist)) continue;
            cx.minPd[static_cast<size_t>(p)] = std::min(cx.minPd[static_cast<size_t>(p)], pdDist);
            const Dist key = pdDist + pd.dropoffs[static_cast<size_t>(d)].walk;
            if (key < bestKey) {
                bestKey = key;
                cx.dStar[static_cast<size_t>(p)] = d;
            }
        }
        if (cx.dStar[static_cast<size_t>(p)] >= 0) cx.viable.push_back(p);
    }
    cx.minWalkP = pd.pickups.front().walk;    // PD sets are sorted by walk
    cx.minWalkD = pd.dropoffs.front().walk;
    return cx;
}

// Prices the candidate against its cheapest-looking dropoff and tightens the
// running bound when the completed insertion is feasible. The distance may be
// tentative; the bound stays valid because the cost is monotone in it.
void tightenPalsBound(const PalsContext& cx, int veh, int pIdx, Dist tdist, Cost& cmax) {
    if (!cx.pruning.costScans) return;
    const int dIdx = cx.dStar[static_cast<size_t>(pIdx)];
    assert(dIdx >= 0);
    const VehicleLast& row = cx.vehs[static_cast<size_t>(veh)];
    const bool merged =
        row.canMerge && cx.pd.pickups[static_cast<size_t>(pIdx)].vertex == row.lastVertex;
    const CostBreakdown cb =
        palsCost(cx.r, cx.params, cx.maxTrip, row.depTime, row.serviceEnd, tdist,
                 cx.matrix.at(pIdx, dIdx), cx.pd.pickups[static_cast<size_t>(pIdx)].walk,
                 cx.pd.dropoffs[static_cast<size_t>(dIdx)].walk, merged);
    if (!cb.feasible) return;
    if (merged && cb.depAtPickup > row.maxDepLast) return;
    cmax = std::min(cmax, cb.total);
}

void palsIndividual(const ContractionHierarchy& ch, const LastStopBuckets& buckets,
                    const PalsContext& cx, int laneCount, Cost cmax, DistRows& out,
                    SearchStats& stats) {
    const int numViable = static_cast<int>(cx.viable.size());
    if (numViable == 0) return;
    const int lanes = std::min(std::max(laneCount, 1), numViable);
    BundledSearch<SearchGraph> search(ch.downwardIn(), ch.numVertices(), lanes);
    const bool canBreak = buckets.sorted() && cx.pruning.costScans && cx.pruning.sortedEarlyStop;

    for (int base = 0; base < numViable; base += lanes) {
        const int batch = std::min(lanes, numViable - base);
        search.reset();
        for (int lane = 0; lane < batch; ++lane)
            search.addSource(lane, cx.pd.pickups[static_cast<size_t>(cx.viable[base + lane])].vertex);

        auto laneBound = [&](int lane, Dist x) {
            const int pIdx = cx.viable[base + lane];
            return palsLowerBound(cx.params, cx.maxTrip, x, cx.minPd[static_cast<size_t>(pIdx)],
                                  cx.pd.pickups[static_cast<size_t>(pIdx)].walk, cx.minWalkD);
        };
        auto visit = [&](Vertex v, std::span<const Dist> row) {
            for (const BucketEntry& e : buckets.entries(v)) {
                if (canBreak) {
                    bool allAbove = true;
                    for (int lane = 0; lane < batch && allAbove; ++lane) {
                        if (isInf(row[lane])) continue;
                        if (laneBound(lane, e.dist + row[lane]) <= cmax) allAbove = false;
                    }
                    if (allAbove) break;
                }
                ++stats.entriesScanned;
                for (int lane = 0; lane < batch; ++lane) {
                    if (isInf(row[lane])) continue;
                    const Dist tdist = e.dist + row[lane];
                    if (cx.pruning.costScans && laneBound(lane, tdist) > cmax) continue;
                    const int pIdx = cx.viable[base + lane];
                    auto& dists = out.rowFor(e.owner, cx.numPickups());
                    if (tdist < dists[static_cast<size_t>(pIdx)]) {
                        dists[static_cast<size_t>(pIdx)] = tdist;
                        tightenPalsBound(cx, e.owner, pIdx, tdist, cmax);
                    }
                }
            }
        };
        auto stop = [&](Dist key) {
            return cx.pruning.costScans &&
                   palsLowerBound(cx.params, cx.maxTrip, key, cx.matrix.minEntry, cx.minWalkP,
                                  cx.minWalkD) > cmax;
        };
        search.run(visit, stop, stats);
    }
}

void palsDijkstra(const RoadNetworkPair& net, const PalsContext& cx, int laneCount, Cost cmax,
                  DistRows& out, SearchStats& stats) {
    const int numViable = static_cast<int>(cx.viable.size());
    if (numViable == 0) return;
    std::unordered_map<Vertex, std::vector<int>> vehiclesAt;
    for (int veh = 0; veh < static_cast<int>(cx.vehs.size()); ++veh)
        vehiclesAt[cx.vehs[static_cast<size_t>(veh)].lastVertex].push_back(veh);

    const int lanes = std::min(std::max(laneCount, 1), numViable);
    BundledSearch<Graph> search(net.vehReversed, net.vertexCount, lanes);

    for (int base = 0; base < numViable; base += lanes) {
        const int batch = std::min(lanes, numViable - base);
        search.reset();
        for (int lane = 0; lane < batch; ++lane)
            search.addSource(lane, cx.pd.pickups[static_cast<size_t>(cx.viable[base + lane])].vertex);

        auto visit = [&](Vertex v, std::span<const Dist> row) {
            auto it = vehiclesAt.find(v);
            if (it == vehiclesAt.end()) return;
            for (int veh : it->second) {
                for (int lane = 0; lane < batch; ++lane) {
                    if (isInf(row[lane])) continue;
                    const int pIdx = cx.viable[base + lane];
                    const Dist tdist = row[lane];
                    if (cx.pruning.costScans &&
                        palsLowerBound(cx.params, cx.maxTrip, tdist,
                                       cx.minPd[static_cast<size_t>(pIdx)],
                                       cx.pd.pickups[static_cast<size_t>(pIdx)].walk,
                                       cx.minWalkD) > cmax)
                        continue;
                    auto& dists = out.rowFor(veh, cx.numPickups());
                    if (tdist < dists[static_cast<size_t>(pIdx)]) {
                        dists[static_cast<size_t>(pIdx)] = tdist;
                        tightenPalsBound(cx, veh, pIdx, tdist, cmax);
                    }
                }
            }
        };
        auto stop = [&](Dist key) {
            return cx.pruning.costScans &&
                   palsLowerBound(cx.params, cx.maxTrip, key, cx.matrix.minEntry, cx.minWalkP,
                                  cx.minWalkD) > cmax;
        };
        search.run(visit, stop, stats);
    }
}

// Evaluates every accumulated pair exactly, vehicles and indices ascending.
void palsEnumerate(FleetState& fleet, const PalsContext& cx, DistRows& rows,
                   BestAssignment& best) {
    std::sort(rows.touched.begin(), rows.touched.end());
    std::vector<StopView> buffer;
    const int numD = static_cast<int>(cx.pd.dropoffs.size());
    for (int veh : rows.touched) {
        const auto& dists = rows.rows.at(veh);
        const int n = cx.vehs[static_cast<size_t>(veh)].lastPos;
        VehicleContext ctx;
        bool filled = false;
        for (int pIdx : cx.viable) {
            const Dist x = dists[static_cast<size_t>(pIdx)];
            if (isInf(x)) continue;
            const PdLoc& pickup = cx.pd.pickups[static_cast<size_t>(pIdx)];
            for (int dIdx = 0; dIdx < numD; ++dIdx) {
                const Dist pdDist = cx.matrix.at(pIdx, dIdx);
                if (isInf(pdDist)) continue;
                const PdLoc& dropoff = cx.pd.dropoffs[static_cast<size_t>(dIdx)];
                if (palsLowerBound(cx.params, cx.maxTrip, x, pdDist, pickup.walk, dropoff.walk) >
                    best.cost)
                    continue;
                Insertion ins;
                ins.vehicleId = veh;
                ins.pickupPos = n;
                ins.dropoffPos = n;
                ins.pickup = pickup;
                ins.dropoff = dropoff;
                ins.pickupIdx = pIdx;
                ins.dropoffIdx = dIdx;
                ins.distToPickup = x;
                ins.distFromPickup = pdDist;
                ins.distToDropoff = pdDist;
                ins.distFromDropoff = 0;
                if (!filled) {
                    ctx = fleet.fillContext(veh, buffer);
                    filled = true;
                }
                const CostBreakdown eval = evaluateInsertion(ctx, cx.r, ins, cx.params, cx.maxTrip);
                if (eval.feasible) best.update(eval.total, ins);
            }
        }
    }
}

struct CollectiveOutcome {
    bool found = false;
    int veh = -1;
    int pIdx = -1;
    int dIdx = -1;
    Cost winnerCost = kInf;   // constraint-free cost of the recorded winner
    Cost feasibleCmax = kInf; // tightest bound from candidates passing all hard checks
};

// Label-propagating search over the reverse-downward hierarchy. Labels carry
// a (pickup, dropoff) pair and their exact downward distance to the pickup;
// pricing ignores the service end and the last stop's departure promise, so
// the caller re-checks the winner and falls back when it violates either.
CollectiveOutcome palsCollective(const ContractionHierarchy& ch, const LastStopBuckets& buckets,
                                 const PalsContext& cx, Cost entryBound, SearchStats& stats) {
    struct Label {
        int p;
        int d;
        Dist dist;
    };
    struct Cell {
        std::vector<Label> open;
        std::vector<Label> closed;
    };
    struct QueueItem {
        Cost cmin;
        int p;
        int d;
        Vertex v;
        Dist dist;
        bool operator>(const QueueItem& o) const {
            return std::tie(cmin, p, d, v, dist) > std::tie(o.cmin, o.p, o.d, o.v, o.dist);
        }
    };

    CollectiveOutcome out;
    out.feasibleCmax = entryBound;
    Cost cmax = entryBound;
    std::unordered_map<Vertex, Cell> cells;
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue;

    auto pdOf = [&](const Label& l) { return cx.matrix.at(l.p, l.d); };
    auto view = [&](const Label& l) {
        return PalsLabelView{l.dist, pdOf(l), cx.pd.pickups[static_cast<size_t>(l.p)].walk,
                             cx.pd.dropoffs[static_cast<size_t>(l.d)].walk};
    };
    auto dominates = [&](const Label& a, const Label& b) {
        return palsDeltaCMax(cx.params, view(a), view(b)) < 0 &&
               palsArrivalNoLater(cx.params, view(a), view(b));
    };
    // A zero-distance label at its own pickup vertex is the one that surfaces
    // candidates merged into a last stop, whose pricing the domination bound
    // does not cover; it must never be discarded as a victim.
    auto shielded = [&](const Label& l, Vertex v) {
        return l.dist == 0 && cx.pd.pickups[static_cast<size_t>(l.p)].vertex == v;
    };

    auto insertLabel = [&](Vertex v, Label l) {
        const Cost cmin =
            palsLowerBound(cx.params, cx.maxTrip, l.dist, pdOf(l),
                           cx.pd.pickups[static_cast<size_t>(l.p)].walk,
                           cx.pd.dropoffs[static_cast<size_t>(l.d)].walk);
        if (cx.pruning.costScans && cmin > cmax) return;
        Cell& cell = cells[v];
        for (const Label& c : cell.closed) {
            if (c.p == l.p && c.d == l.d) {
                assert(c.dist <= l.dist);
                return;
            }
        }
        for (auto it = cell.open.begin(); it != cell.open.end(); ++it) {
            if (it->p == l.p && it->d == l.d) {
                if (it->dist <= l.dist) return;
                cell.open.erase(it);  // the stale queue entry is skipped on pop
                break;
            }
        }
        if (cx.pruning.domination) {
            if (!shielded(l, v)) {
                for (const Label& c : cell.closed)
                    if (dominates(c, l)) return;
                for (const Label& c : cell.open)
                    if (dominates(c, l)) return;
            }
            std::erase_if(cell.open,
                          [&](const Label& c) { return !shielded(c, v) && dominates(l, c); });
        }
        cell.open.push_back(l);
        queue.push({cmin, l.p, l.d, v, l.dist});
    };

    const int numD = static_cast<int>(cx.pd.dropoffs.size());
    for (int pIdx : cx.viable) {
        const Vertex pv = cx.pd.pickups[static_cast<size_t>(pIdx)].vertex;
        for (int dIdx = 0; dIdx < numD; ++dIdx) {
            if (isInf(cx.matrix.at(pIdx, dIdx))) continue;
            insertLabel(pv, {pIdx, dIdx, 0});
        }
    }

    const bool canBreak = buckets.sorted() && cx.pruning.costScans && cx.pruning.sortedEarlyStop;
    const SearchGraph& downIn = ch.downwardIn();
    while (!queue.empty()) {
        const QueueItem top = queue.top();
        queue.pop();
        if (cx.pruning.costScans && top.cmin > cmax) break;
        auto cellIt = cells.find(top.v);
        if (cellIt == cells.end()) continue;
        Cell& cell = cellIt->second;
        auto openIt = std::find_if(cell.open.begin(), cell.open.end(), [&](const Label& c) {
            return c.p == top.p && c.d == top.d && c.dist == top.dist;
        });
        if (openIt == cell.open.end()) continue;
        const Label l = *openIt;
        cell.open.erase(openIt);
        cell.closed.push_back(l);
        ++stats.verticesSettled;

        const Dist pdDist = pdOf(l);
        const Dist walkP = cx.pd.pickups[static_cast<size_t>(l.p)].walk;
        const Dist walkD = cx.pd.dropoffs[static_cast<size_t>(l.d)].walk;
        for (const BucketEntry& e : buckets.entries(top.v)) {
            const Cost entryBoundCost =
                palsLowerBound(cx.params, cx.maxTrip, e.dist + l.dist, pdDist, walkP, walkD);
            if (cx.pruning.costScans && entryBoundCost > cmax) {
                if (canBreak) break;
                ++stats.entriesScanned;
                continue;
            }
            ++stats.entriesScanned;
            const VehicleLast& row = cx.vehs[static_cast<size_t>(e.owner)];
            const bool merged =
                row.canMerge && cx.pd.pickups[static_cast<size_t>(l.p)].vertex == row.lastVertex;
            const CostBreakdown priced =
                palsCost(cx.r, cx.params, cx.maxTrip, row.depTime, kInf, e.dist + l.dist, pdDist,
                         walkP, walkD, merged);
            assert(priced.feasible);
            if (priced.total < cmax) {
                cmax = priced.total;
                out.found = true;
                out.veh = e.owner;
                out.pIdx = l.p;
                out.dIdx = l.d;
                out.winnerCost = priced.total;
            }
            if (priced.total < out.feasibleCmax && priced.arrAtDropoff <= row.serviceEnd &&
                (!merged || priced.depAtPickup <= row.maxDepLast))
                out.feasibleCmax = priced.total;
        }
        for (const SearchEdge& e : downIn.edges(top.v)) {
            ++stats.edgesRelaxed;
            insertLabel(e.neighbor, {l.p, l.d, l.dist + e.weight});
        }
    }
    return out;
}

}  // namespace

void palsSearch(const RoadNetworkPair& net, const ContractionHierarchy& chVeh,
                const LastStopBuckets& buckets, FleetState& fleet, const Request& r,
                const CostParameters& params, Time maxTrip, const PdSets& pd,
                const PdMatrix& matrix, LastStopStrategy strategy, int laneCount,
                const PruningConfig& pruning, BestAssignment& best, SearchStats& stats) {
    if (!pd.usable() || fleet.numVehicles() == 0) return;
    const PalsContext cx = makePalsContext(r, params, maxTrip, pd, matrix, pruning, fleet);
    if (cx.viable.empty()) return;

    if (strategy == LastStopStrategy::CollectiveBch) {
        const CollectiveOutcome col = palsCollective(chVeh, buckets, cx, best.cost, stats);
        if (!col.found) return;
        const VehicleLast& row = cx.vehs[static_cast<size_t>(col.veh)];
        Insertion ins;
        ins.vehicleId = col.veh;
        ins.pickupPos = row.lastPos;
        ins.dropoffPos = row.lastPos;
        ins.pickup = pd.pickups[static_cast<size_t>(col.pIdx)];
        ins.dropoff = pd.dropoffs[static_cast<size_t>(col.dIdx)];
        ins.pickupIdx = col.pIdx;
        ins.dropoffIdx = col.dIdx;
        ins.distToPickup = chVeh.query(row.lastVertex, ins.pickup.vertex);
        ins.distFromPickup = matrix.at(col.pIdx, col.dIdx);
        ins.distToDropoff = ins.distFromPickup;
        ins.distFromDropoff = 0;
        std::vector<StopView> buffer;
        const VehicleContext ctx = fleet.fillContext(col.veh, buffer);
        const CostBreakdown eval = evaluateInsertion(ctx, r, ins, params, maxTrip);
        if (eval.feasible) {
            assert(eval.total == col.winnerCost);
            best.update(eval.total, ins);
            return;
        }
        // The winner broke the service end or a departure promise, which the
        // collective pricing ignores. Redo the distances individually, keeping
        // the bounds the search established from fully checked candidates.
        DistRows rows;
        palsIndividual(chVeh, buckets, cx, laneCount, std::min(col.feasibleCmax, best.cost), rows,
                       stats);
        palsEnumerate(fleet, cx, rows, best);
        return;
    }

    DistRows rows;
    if (strategy == LastStopStrategy::Dijkstra) {
        palsDijkstra(net, cx, laneCount, best.cost, rows, stats);
    } else {
        palsIndividual(chVeh, buckets, cx, laneCount, best.cost, rows, stats);
    }
    palsEnumerate(fleet, cx, rows, best);
}

namespace {

struct DalsCandidate {
    int dIdx;
    Dist dist;
};

struct DalsContext {
    const Request& r;
    const CostParameters& params;
    Time maxTrip;
    const PdSets& pd;
    const PdMatrix& matrix;
    const PruningConfig& pruning;
    std::vector<VehicleLast> vehs;
    Dist minWalkD = 0;
};

struct DalsSets {
    std::unordered_map<int, std::vector<DalsCandidate>> byVehicle;
    std::vector<int> touched;

    std::vector<DalsCandidate>& setFor(int veh) {
        auto [it, fresh] = byVehicle.try_emplace(veh);
        if (fresh) touched.push_back(veh);
        return it->second;
    }
};

void dalsIndividual(const ContractionHierarchy& ch, const LastStopBuckets& buckets,
                    const DalsContext& cx, int laneCount, Cost cmax, DistRows& out,
                    SearchStats& stats) {
    const int numD = static_cast<int>(cx.pd.dropoffs.size());
    const int lanes = std::min(std::max(laneCount, 1), numD);
    BundledSearch<SearchGraph> search(ch.downwardIn(), ch.numVertices(), lanes);
    const bool canBreak = buckets.sorted() && cx.pruning.costScans && cx.pruning.sortedEarlyStop;

    for (int base = 0; base < numD; base += lanes) {
        const int batch = std::min(lanes, numD - base);
        search.reset();
        for (int lane = 0; lane < batch; ++lane)
            search.addSource(lane, cx.pd.dropoffs[static_cast<size_t>(base + lane)].vertex);

        auto laneBound = [&](int lane, Dist x) {
            return dalsLowerBound(cx.params, cx.maxTrip, x,
                                  cx.pd.dropoffs[static_cast<size_t>(base + lane)].walk);
        };
        auto visit = [&](Vertex v, std::span<const Dist> row) {
            for (const BucketEntry& e : buckets.entries(v)) {
                if (canBreak) {
                    bool allAbove = true;
                    for (int lane = 0; lane < batch && allAbove; ++lane) {
                        if (isInf(row[lane])) continue;
                        if (laneBound(lane, e.dist + row[lane]) <= cmax) allAbove = false;
                    }
                    if (allAbove) break;
                }
                ++stats.entriesScanned;
                for (int lane = 0; lane < batch; ++lane) {
                    if (isInf(row[lane])) continue;
                    const Dist tdist = e.dist + row[lane];
                    if (cx.pruning.costScans && laneBound(lane, tdist) > cmax) continue;
                    auto& dists = out.rowFor(e.owner, numD);
                    const size_t dIdx = static_cast<size_t>(base + lane);
                    dists[dIdx] = std::min(dists[dIdx], tdist);
                }
            }
        };
        auto stop = [&](Dist key) {
            return cx.pruning.costScans &&
                   dalsLowerBound(cx.params, cx.maxTrip, key, cx.minWalkD) > cmax;
        };
        search.run(visit, stop, stats);
    }
}

void dalsDijkstra(const RoadNetworkPair& net, const DalsContext& cx, int laneCount, Cost cmax,
                  DistRows& out, SearchStats& stats) {
    const int numD = static_cast<int>(cx.pd.dropoffs.size());
    std::unordered_map<Vertex, std::vector<int>> vehiclesAt;
    for (int veh = 0; veh < static_cast<int>(cx.vehs.size()); ++veh)
        vehiclesAt[cx.vehs[static_cast<size_t>(veh)].lastVertex].push_back(veh);

    const int lanes = std::min(std::max(laneCount, 1), numD);
    BundledSearch<Graph> search(net.vehReversed, net.vertexCount, lanes);

    for (int base = 0; base < numD; base += lanes) {
        const int batch = std::min(lanes, numD - base);
        search.reset();
        for (int lane = 0; lane < batch; ++lane)
            search.addSource(lane, cx.pd.dropoffs[static_cast<size_t>(base + lane)].vertex);

        auto visit = [&](Vertex v, std::span<const Dist> row) {
            auto it = vehiclesAt.find(v);
            if (it == vehiclesAt.end()) return;
            for (int veh : it->second) {
                for (int lane = 0; lane < batch; ++lane) {
                    if (isInf(row[lane])) continue;
                    if (cx.pruning.costScans &&
                        dalsLowerBound(cx.params, cx.maxTrip, row[lane],
                                       cx.pd.dropoffs[static_cast<size_t>(base + lane)].walk) >
                            cmax)
                        continue;
                    auto& dists = out.rowFor(veh, numD);
                    const size_t dIdx = static_cast<size_t>(base + lane);
                    dists[dIdx] = std::min(dists[dIdx], row[lane]);
                }
            }
        };
        auto stop = [&](Dist key) {
            return cx.pruning.costScans &&
                   dalsLowerBound(cx.params, cx.maxTrip, key, cx.minWalkD) > cmax;
        };
        search.run(visit, stop, stats);
    }
}

// Dropoff-label search; no bound updates, since a label never knows its
// pickup side. Produces a pareto set of candidates per reached vehicle.
void dalsCollective(const ContractionHierarchy& ch, const LastStopBuckets& buckets,
                    const DalsContext& cx, Cost cmax, DalsSets& sets, SearchStats& stats) {
    struct Label {
        int d;
        Dist dist;
    };
    struct Cell {
        std::vector<Label> open;
        std::vector<Label> closed;
    };
    struct QueueItem {
        Cost cmin;
        int d;
        Vertex v;
        Dist dist;
        bool operator>(const QueueItem& o) const {
            return std::tie(cmin, d, v, dist) > std::tie(o.cmin, o.d, o.v, o.dist);
        }
    };

    std::unordered_map<Vertex, Cell> cells;
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue;

    auto walkOf = [&](int d) { return cx.pd.dropoffs[static_cast<size_t>(d)].walk; };
    auto dominates = [&](const Label& a, const Label& b) {
        return dalsDominates(cx.params, a.dist, walkOf(a.d), b.dist, walkOf(b.d));
    };
    // Zero-distance labels at their own dropoff vertex surface candidates that
    // may merge into a last stop; the domination bound assumes they do not.
    auto shielded = [&](const Label& l, Vertex v) {
        return l.dist == 0 && cx.pd.dropoffs[static_cast<size_t>(l.d)].vertex == v;
    };

    auto insertLabel = [&](Vertex v, Label l) {
        const Cost cmin = dalsLowerBound(cx.params, cx.maxTrip, l.dist, walkOf(l.d));
        if (cx.pruning.costScans && cmin > cmax) return;
        Cell& cell = cells[v];
        for (const Label& c : cell.closed) {
            if (c.d == l.d) {
                assert(c.dist <= l.dist);
                return;
            }
        }
        for (auto it = cell.open.begin(); it != cell.open.end(); ++it) {
            if (it->d == l.d) {
                if (it->dist <= l.dist) return;
                cell.open.erase(it);
                break;
            }
        }
        if (cx.pruning.domination) {
            if (!shielded(l, v)) {
                for (const Label& c : cell.closed)
                    if (dominates(c, l)) return;
                for (const Label& c : cell.open)
                    if (dominates(c, l)) return;
            }
            std::erase_if(cell.open,
                          [&](const Label& c) { return !shielded(c, v) && dominates(l, c); });
        }
        cell.open.push_back(l);
        queue.push({cmin, l.d, v, l.dist});
    };

    auto addCandidate = [&](int veh, int dIdx, Dist tdist) {
        auto& set = sets.setFor(veh);
        for (auto it = set.begin(); it != set.end(); ++it) {
            if (it->dIdx == dIdx) {
                if (it->dist <= tdist) return;
                set.erase(it);
                break;
            }
        }
        if (cx.pruning.domination) {
            if (tdist != 0) {
                for (const DalsCandidate& c : set)
                    if (dalsDominates(cx.params, c.dist, walkOf(c.dIdx), tdist, walkOf(dIdx)))
                        return;
            }
            std::erase_if(set, [&](const DalsCandidate& c) {
                return c.dist != 0 &&
                       dalsDominates(cx.params, tdist, walkOf(dIdx), c.dist, walkOf(c.dIdx));
            });
        }
        set.push_back({dIdx, tdist});
    };

    const int numD = static_cast<int>(cx.pd.dropoffs.size());
    for (int dIdx = 0; dIdx < numD; ++dIdx)
        insertLabel(cx.pd.dropoffs[static_cast<size_t>(dIdx)].vertex, {dIdx, 0});

    const bool canBreak = buckets.sorted() && cx.pruning.costScans && cx.pruning.sortedEarlyStop;
    const SearchGraph& downIn = ch.downwardIn();
    while (!queue.empty()) {
        const QueueItem top = queue.top();
        queue.pop();
        if (cx.pruning.costScans && top.cmin > cmax) break;
        auto cellIt = cells.find(top.v);
        if (cellIt == cells.end()) continue;
        Cell& cell = cellIt->second;
        auto openIt = std::find_if(cell.open.begin(), cell.open.end(), [&](const Label& c) {
            return c.d == top.d && c.dist == top.dist;
        });
        if (openIt == cell.open.end()) continue;
        const Label l = *openIt;
        cell.open.erase(openIt);
        cell.closed.push_back(l);
        ++stats.verticesSettled;

        const Dist walkD = walkOf(l.d);
        for (const BucketEntry& e : buckets.entries(top.v)) {
            const Cost entryBound =
                dalsLowerBound(cx.params, cx.maxTrip, e.dist + l.dist, walkD);
            if (cx.pruning.costScans && entryBound > cmax) {
                if (canBreak) break;
                ++stats.entriesScanned;
                continue;
            }
            ++stats.entriesScanned;
            addCandidate(e.owner, l.d, e.dist + l.dist);
        }
        for (const SearchEdge& e : downIn.edges(top.v)) {
            ++stats.edgesRelaxed;
            insertLabel(e.neighbor, {l.d, l.dist + e.weight});
        }
    }
}

// Pairs every dropoff candidate with every elliptic pickup candidate of the
// vehicle. Pickups before the next stop of a departed vehicle go through the
// same bound-then-exact filter as the PBNS search.
void dalsEnumerate(FleetState& fleet, const DalsContext& cx,
                   const std::vector<VehicleElliptic>& byVehicle,
                   CurrentLocationBuckets& clBuckets, DalsSets& sets, BestAssignment& best,
                   SearchStats& stats) {
    struct Survivor {
        int veh;
        Insertion ins;
    };
    std::vector<Survivor> survivors;
    std::vector<int> needed;
    std::vector<StopView> buffer;
    std::sort(sets.touched.begin(), sets.touched.end());

    for (int veh : sets.touched) {
        auto& set = sets.byVehicle.at(veh);
        const VehicleElliptic& ve = byVehicle[static_cast<size_t>(veh)];
        if (set.empty() || ve.pickupLegs.empty()) continue;
        std::sort(set.begin(), set.end(),
                  [](const DalsCandidate& a, const DalsCandidate& b) { return a.dIdx < b.dIdx; });

        const bool atFirstStop = !fleet.departed(veh);
        VehicleContext ctx = fleet.fillContext(veh, buffer);
        VehicleContext boundCtx = ctx;
        boundCtx.depAtPrevEquivalent = buffer[0].minDep;
        const int n = static_cast<int>(buffer.size()) - 1;

        bool addedToNeeded = false;
        for (const auto& [pos, pickupCands] : ve.pickupLegs) {
            assert(pos < n);
            for (const LegPdDistance& pc : *pickupCands) {
                for (const DalsCandidate& cand : set) {
                    Insertion ins;
                    ins.vehicleId = veh;
                    ins.pickupPos = pos;
                    ins.dropoffPos = n;
                    ins.pickup = cx.pd.pickups[static_cast<size_t>(pc.pdIdx)];
                    ins.dropoff = cx.pd.dropoffs[static_cast<size_t>(cand.dIdx)];
                    ins.pickupIdx = pc.pdIdx;
                    ins.dropoffIdx = cand.dIdx;
                    ins.distToPickup = pc.toPd;
                    ins.distFromPickup = pc.fromPd;
                    ins.distToDropoff = cand.dist;
                    ins.distFromDropoff = 0;
                    if (pos == 0 && !atFirstStop) {
                        const CostBreakdown bound =
                            evaluateInsertion(boundCtx, cx.r, ins, cx.params, cx.maxTrip);
                        if (!bound.feasible) continue;
                        if (best.found() && candidateKey(bound.total, ins) >=
                                                candidateKey(best.cost, best.insertion))
                            continue;
                        survivors.push_back({veh, ins});
                        if (!addedToNeeded) {
                            needed.push_back(veh);
                            addedToNeeded = true;
                        }
                        continue;
                    }
                    const CostBreakdown eval =
                        evaluateInsertion(ctx, cx.r, ins, cx.params, cx.maxTrip);
                    if (eval.feasible) best.update(eval.total, ins);
                }
            }
        }
    }

    if (survivors.empty()) return;
    clBuckets.ensure(fleet, needed, cx.pd.pickups, &stats);

    int ctxVeh = -1;
    VehicleContext ctx;
    for (Survivor& s : survivors) {
        if (s.veh != ctxVeh) {
            ctx = fleet.fillContext(s.veh, buffer);
            ctxVeh = s.veh;
        }
        s.ins.distToPickup = clBuckets.distances(s.veh)[static_cast<size_t>(s.ins.pickupIdx)];
        const CostBreakdown eval = evaluateInsertion(ctx, cx.r, s.ins, cx.params, cx.maxTrip);
        if (eval.feasible) best.update(eval.total, s.ins);
    }
}

}  // namespace

void dalsSearch(const RoadNetworkPair& net, const ContractionHierarchy& chVeh,
                const LastStopBuckets& buckets, FleetState& fleet, const Request& r,
                const CostParameters& params, Time maxTrip, const PdSets& pd,
                const PdMatrix& matrix, const std::vector<VehicleElliptic>& byVehicle,
                CurrentLocationBuckets& clBuckets, LastStopStrategy strategy, int laneCount,
                const PruningConfig& pruning, BestAssignment& best, SearchStats& stats) {
    if (!pd.usable() || fleet.numVehicles() == 0) return;
    DalsContext cx{r,  params, maxTrip, pd, matrix, pruning, snapshotLastStops(fleet),
                   pd.dropoffs.front().walk};
    const Cost cmax = best.cost;

    DalsSets sets;
    if (strategy == LastStopStrategy::CollectiveBch) {
        dalsCollective(chVeh, buckets, cx, cmax, sets, stats);
    } else {
        DistRows rows;
        if (strategy == LastStopStrategy::Dijkstra) {
            dalsDijkstra(net, cx, laneCount, cmax, rows, stats);
        } else {
            dalsIndividual(chVeh, buckets, cx, laneCount, cmax, rows, stats);
        }
        std::sort(rows.touched.begin(), rows.touched.end());
        const int numD = static_cast<int>(pd.dropoffs.size());
        for (int veh : rows.touched) {
            const auto& dists = rows.rows.at(veh);
            for (int dIdx = 0; dIdx < numD; ++dIdx) {
                if (isInf(dists[static_cast<size_t>(dIdx)])) continue;
                sets.setFor(veh).push_back({dIdx, dists[static_cast<size_t>(dIdx)]});
            }
        }
    }
    dalsEnumerate(fleet, cx, byVehicle, clBuckets, sets, best, stats);
}

}  // namespace ridepool
