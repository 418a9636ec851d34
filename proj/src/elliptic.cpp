#include "ridepool/elliptic.h"

#include <algorithm>
#include <cassert>

namespace ridepool {

EllipticBuckets::EllipticBuckets(const ContractionHierarchy& ch, Time stopTime, int k, bool sorted,
                                 PruningConfig pruning)
    : ch_(&ch),
      stopTime_(stopTime),
      k_(k),
      pruning_(pruning),
      source_(ch.numVertices(), sorted),
      target_(ch.numVertices(), sorted) {
    assert(k_ >= 1);
}

Dist EllipticBuckets::entryRadius(Dist lambda) const {
    return pruning_.ellipticLeeway ? lambda : kInf;
}

void EllipticBuckets::generate(int32_t startStopId, const LegRecord& rec) {
    using Dir = ContractionHierarchy::Direction;
    for (const auto& [v, d] : ch_->searchSpace(rec.startLoc, Dir::Upward, entryRadius(rec.lambda)))
        source_.insert(v, {startStopId, d, rec.lambda - d});
    for (const auto& [v, d] :
         ch_->searchSpace(rec.endLoc, Dir::ReverseDownward, entryRadius(rec.lambda)))
        target_.insert(v, {startStopId, d, rec.lambda - d});
}

void EllipticBuckets::removeEntries(int32_t startStopId, const LegRecord& rec) {
    using Dir = ContractionHierarchy::Direction;
    for (const auto& [v, d] : ch_->searchSpace(rec.startLoc, Dir::Upward, entryRadius(rec.lambda)))
        source_.removeOwner(v, startStopId);
    for (const auto& [v, d] :
         ch_->searchSpace(rec.endLoc, Dir::ReverseDownward, entryRadius(rec.lambda)))
        target_.removeOwner(v, startStopId);
}

void EllipticBuckets::sync(const FleetState& fleet) {
    std::map<int32_t, LegRecord> wanted;
    for (int veh = 0; veh < fleet.numVehicles(); ++veh) {
        const auto& stops = fleet.stops(veh);
        for (int a = 0; a + 1 < static_cast<int>(stops.size()); ++a) {
            LegRecord rec;
            rec.endStopId = stops[a + 1].stopId;
            rec.lambda = fleet.leewayAfter(veh, a);
            rec.startLoc = stops[a].location;
            rec.endLoc = stops[a + 1].location;
            wanted.emplace(stops[a].stopId, rec);
        }
    }

    for (auto it = legs_.begin(); it != legs_.end();) {
        const auto found = wanted.find(it->first);
        if (found != wanted.end() && found->second.endStopId == it->second.endStopId &&
            found->second.lambda == it->second.lambda) {
            ++it;
            continue;
        }
        removeEntries(it->first, it->second);
        it = legs_.erase(it);
    }
    for (const auto& [startStopId, rec] : wanted) {
        if (legs_.contains(startStopId)) continue;
        generate(startStopId, rec);
        legs_.emplace(startStopId, rec);
    }

    maxLeeway_ = 0;
    for (const auto& [startStopId, rec] : legs_) maxLeeway_ = std::max(maxLeeway_, rec.lambda);
}

Dist EllipticBuckets::legLeeway(int32_t startStopId) const {
    const auto it = legs_.find(startStopId);
    return it == legs_.end() ? kInf : it->second.lambda;
}

EllipticDistances EllipticBuckets::query(std::span<const PdLoc> pds, SearchStats* stats) const {
    EllipticDistances out;
    if (pds.empty() || legs_.empty()) return out;

    SearchStats st;
    std::unordered_map<int32_t, std::vector<Dist>> toAcc;
    std::unordered_map<int32_t, std::vector<Dist>> fromAcc;
    auto accRow = [&](std::unordered_map<int32_t, std::vector<Dist>>& acc,
                      int32_t leg) -> std::vector<Dist>& {
        auto [it, fresh] = acc.try_emplace(leg);
        if (fresh) it->second.assign(pds.size(), kInf);
        return it->second;
    };

    const bool screen = pruning_.ellipticLeeway;
    const bool earlyBreak = source_.sorted() && screen && pruning_.sortedEarlyStop;
    auto scanInto = [&](const BucketStore<ScanByKeyDescending>& store,
                        std::unordered_map<int32_t, std::vector<Dist>>& acc, size_t base,
                        int lanes) {
        return [&, base, lanes](Vertex v, std::span<const Dist> row) {
            Dist qMin = kInf;
            for (int l = 0; l < lanes; ++l) qMin = std::min(qMin, row[l]);
            for (const BucketEntry& e : store.entries(v)) {
                if (earlyBreak && e.sortKey < qMin) break;
                ++st.entriesScanned;
                std::vector<Dist>* slots = nullptr;
                for (int l = 0; l < lanes; ++l) {
                    const Dist q = row[l];
                    if (isInf(q)) continue;
                    if (screen && q > e.sortKey) continue;
                    if (!slots) slots = &accRow(acc, e.owner);
                    Dist& slot = (*slots)[base + static_cast<size_t>(l)];
                    slot = std::min(slot, e.dist + q);
                }
            }
        };
    };
    auto stopRule = [&](Dist key) { return pruning_.ellipticLeeway && key > maxLeeway_; };

    BundledSearch<SearchGraph> down(ch_->downwardIn(), ch_->numVertices(), k_);
    BundledSearch<SearchGraph> up(ch_->upwardOut(), ch_->numVertices(), k_);
    for (size_t base = 0; base < pds.size(); base += static_cast<size_t>(k_)) {
        const int lanes = static_cast<int>(std::min(pds.size() - base, static_cast<size_t>(k_)));
        down.reset();
        up.reset();
        for (int l = 0; l < lanes; ++l) {
            down.addSource(l, pds[base + static_cast<size_t>(l)].vertex);
            up.addSource(l, pds[base + static_cast<size_t>(l)].vertex);
        }
        down.run(scanInto(source_, toAcc, base, lanes), stopRule, st);
        up.run(scanInto(target_, fromAcc, base, lanes), stopRule, st);
    }

    for (const auto& [leg, toRow] : toAcc) {
        const auto fromIt = fromAcc.find(leg);
        if (fromIt == fromAcc.end()) continue;
        const Dist lambda = legs_.at(leg).lambda;
        std::vector<LegPdDistance> cands;
        for (size_t idx = 0; idx < pds.size(); ++idx) {
            const Dist toPd = toRow[idx];
            const Dist fromPd = fromIt->second[idx];
            if (isInf(toPd) || isInf(fromPd)) continue;
            if (screen && toPd > 0 && toPd + stopTime_ + fromPd > lambda) continue;
            cands.push_back({static_cast<int>(idx), toPd, fromPd});
        }
        if (!cands.empty()) out.byLeg.emplace(leg, std::move(cands));
    }
    if (stats) *stats += st;
    return out;
}

CurrentLocationBuckets::CurrentLocationBuckets(const ContractionHierarchy& ch, int k)
    : ch_(&ch), k_(k) {
    assert(k_ >= 1);
}

void CurrentLocationBuckets::ensure(FleetState& fleet, std::span<const int> vehicles,
                                    std::span<const PdLoc> pickups, SearchStats* stats) {
    std::vector<int> fresh;
    for (int veh : vehicles) {
        auto [it, inserted] = rows_.try_emplace(veh);
        if (!inserted) continue;
        it->second.assign(pickups.size(), kInf);
        fresh.push_back(veh);
    }
    if (fresh.empty() || pickups.empty()) return;

    SearchStats st;
    BucketStore<ScanByDistAscending> store(ch_->numVertices(), false);
    for (int veh : fresh) {
        const CurrentLocation cl = fleet.currentLocation(veh);
        for (const auto& [v, d] :
             ch_->searchSpace(cl.vertex, ContractionHierarchy::Direction::Upward))
            store.insert(v, {veh, d, 0});
    }

    BundledSearch<SearchGraph> down(ch_->downwardIn(), ch_->numVertices(), k_);
    for (size_t base = 0; base < pickups.size(); base += static_cast<size_t>(k_)) {
        const int lanes = static_cast<int>(std::min(pickups.size() - base, static_cast<size_t>(k_)));
        down.reset();
        for (int l = 0; l < lanes; ++l) down.addSource(l, pickups[base + static_cast<size_t>(l)].vertex);
        down.run(
            [&](Vertex v, std::span<const Dist> row) {
                for (const BucketEntry& e : store.entries(v)) {
                    ++st.entriesScanned;
                    auto& slots = rows_.at(e.owner);
                    for (int l = 0; l < lanes; ++l) {
                        if (isInf(row[l])) continue;
                        Dist& slot = slots[base + static_cast<size_t>(l)];
                        slot = std::min(slot, e.dist + row[l]);
                    }
                }
            },
            [](Dist) { return false; }, st);
    }
    if (stats) *stats += st;
}

std::vector<VehicleElliptic> groupByVehicle(const FleetState& fleet,
                                            const EllipticDistances& pickupSide,
                                            const EllipticDistances& dropoffSide) {
    std::vector<VehicleElliptic> out(static_cast<size_t>(fleet.numVehicles()));
    auto place = [&](const EllipticDistances& side, bool pickup) {
        for (const auto& [stopId, cands] : side.byLeg) {
            const auto [veh, pos] = fleet.locateStop(stopId);
            assert(veh >= 0 && pos >= 0);
            auto& legs = pickup ? out[static_cast<size_t>(veh)].pickupLegs
                                : out[static_cast<size_t>(veh)].dropoffLegs;
            legs.emplace_back(pos, &cands);
        }
    };
    place(pickupSide, true);
    place(dropoffSide, false);
    for (auto& ve : out) {
        std::sort(ve.pickupLegs.begin(), ve.pickupLegs.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::sort(ve.dropoffLegs.begin(), ve.dropoffLegs.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    return out;
}

namespace {

Insertion makeInsertion(int veh, int i, int j, const PdSets& pd, const PdMatrix& matrix,
                        const LegPdDistance& pc, const LegPdDistance& dc) {
    Insertion ins;
    ins.vehicleId = veh;
    ins.pickupPos = i;
    ins.dropoffPos = j;
    ins.pickup = pd.pickups[static_cast<size_t>(pc.pdIdx)];
    ins.dropoff = pd.dropoffs[static_cast<size_t>(dc.pdIdx)];
    ins.pickupIdx = pc.pdIdx;
    ins.dropoffIdx = dc.pdIdx;
    ins.distToPickup = pc.toPd;
    if (i == j) {
        const Dist pdDist = matrix.at(pc.pdIdx, dc.pdIdx);
        ins.distFromPickup = pdDist;
        ins.distToDropoff = pdDist;
    } else {
        ins.distFromPickup = pc.fromPd;
        ins.distToDropoff = dc.toPd;
    }
    ins.distFromDropoff = dc.fromPd;
    return ins;
}

}  // namespace

void enumerateOrdinary(FleetState& fleet, const std::vector<VehicleElliptic>& byVehicle,
                       const PdSets& pd, const PdMatrix& matrix, const Request& r,
                       const CostParameters& params, Time maxTrip, BestAssignment& best) {
    std::vector<StopView> buffer;
    for (int veh = 0; veh < static_cast<int>(byVehicle.size()); ++veh) {
        const VehicleElliptic& ve = byVehicle[static_cast<size_t>(veh)];
        if (ve.pickupLegs.empty() || ve.dropoffLegs.empty()) continue;
        bool haveCtx = false;
        VehicleContext ctx;
        for (const auto& [i, pickupCands] : ve.pickupLegs) {
            if (i == 0) continue;
            for (const auto& [j, dropoffCands] : ve.dropoffLegs) {
                if (j < i) continue;
                if (!haveCtx) {
                    ctx = fleet.fillContext(veh, buffer);
                    haveCtx = true;
                }
                for (const LegPdDistance& pc : *pickupCands) {
                    for (const LegPdDistance& dc : *dropoffCands) {
                        const Insertion ins = makeInsertion(veh, i, j, pd, matrix, pc, dc);
                        const CostBreakdown eval = evaluateInsertion(ctx, r, ins, params, maxTrip);
                        if (eval.feasible) best.update(eval.total, ins);
                    }
                }
            }
        }
    }
}

void enumeratePbns(FleetState& fleet, const std::vector<VehicleElliptic>& byVehicle,
                   const PdSets& pd, const PdMatrix& matrix, const Request& r,
                   const CostParameters& params, Time maxTrip, CurrentLocationBuckets& clBuckets,
                   BestAssignment& best, SearchStats* stats) {
    struct Survivor {
        int veh;
        Insertion ins;
    };
    std::vector<Survivor> survivors;
    std::vector<int> needed;
    std::vector<StopView> buffer;

    for (int veh = 0; veh < static_cast<int>(byVehicle.size()); ++veh) {
        const VehicleElliptic& ve = byVehicle[static_cast<size_t>(veh)];
        if (ve.pickupLegs.empty() || ve.pickupLegs.front().first != 0) continue;
        if (ve.dropoffLegs.empty()) continue;
        const std::vector<LegPdDistance>& pickupCands = *ve.pickupLegs.front().second;

        const bool atFirstStop = !fleet.departed(veh);
        VehicleContext ctx = fleet.fillContext(veh, buffer);
        VehicleContext boundCtx = ctx;
        boundCtx.depAtPrevEquivalent = buffer[0].minDep;

        bool addedToNeeded = false;
        for (const auto& [j, dropoffCands] : ve.dropoffLegs) {
            for (const LegPdDistance& pc : pickupCands) {
                for (const LegPdDistance& dc : *dropoffCands) {
                    const Insertion ins = makeInsertion(veh, 0, j, pd, matrix, pc, dc);
                    if (atFirstStop) {
                        const CostBreakdown eval = evaluateInsertion(ctx, r, ins, params, maxTrip);
                        if (eval.feasible) best.update(eval.total, ins);
                        continue;
                    }
                    const CostBreakdown bound =
                        evaluateInsertion(boundCtx, r, ins, params, maxTrip);
                    if (!bound.feasible) continue;
                    if (best.found() && candidateKey(bound.total, ins) >=
                                            candidateKey(best.cost, best.insertion))
                        continue;
                    survivors.push_back({veh, ins});
                    if (!addedToNeeded) {
                        needed.push_back(veh);
                        addedToNeeded = true;
                    }
                }
            }
        }
    }

    if (survivors.empty()) return;
    clBuckets.ensure(fleet, needed, pd.pickups, stats);

    int ctxVeh = -1;
    VehicleContext ctx;
    for (Survivor& s : survivors) {
        if (s.veh != ctxVeh) {
            ctx = fleet.fillContext(s.veh, buffer);
            ctxVeh = s.veh;
        }
        s.ins.distToPickup = clBuckets.distances(s.veh)[static_cast<size_t>(s.ins.pickupIdx)];
        const CostBreakdown eval = evaluateInsertion(ctx, r, s.ins, params, maxTrip);
        if (eval.feasible) best.update(eval.total, s.ins);
    }
}

}  // namespace ridepool
