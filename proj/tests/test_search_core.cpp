#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <map>

#include "doctest.h"
#include "fixtures.h"
#include "ridepool/search_core.h"

using namespace ridepool;

namespace {

template <class GraphT>
std::map<Vertex, Dist> settleAll(BundledSearch<GraphT>& search, Dist radius = kInf) {
    std::map<Vertex, Dist> settled;
    SearchStats stats;
    search.run([&](Vertex v, std::span<const Dist> row) { settled[v] = row[0]; },
               [&](Dist key) { return key > radius; }, stats);
    return settled;
}

}  // namespace

TEST_CASE("single lane search with radius stop rule") {
    auto net = fixtures::lineNetwork();
    BundledSearch<Graph> search(net.veh, 4, 1);
    search.reset();
    search.addSource(0, 0);
    auto settled = settleAll(search, 250);
    CHECK(settled == std::map<Vertex, Dist>{{0, 0}, {1, 100}, {2, 200}});
}

TEST_CASE("stop rule yields exactly the radius ball") {
    std::mt19937 rng(5);
    Graph g(40, fixtures::randomEdges(rng, 40, 80, 1, 100));
    for (Vertex s = 0; s < 40; s += 7) {
        const Dist radius = 220;
        BundledSearch<Graph> search(g, 40, 1);
        search.reset();
        search.addSource(0, s);
        auto settled = settleAll(search, radius);
        auto ref = fixtures::refDistances(g, s);
        for (Vertex v = 0; v < 40; ++v) {
            const Dist d = ref[static_cast<size_t>(v)];
            if (d <= radius) {
                REQUIRE(settled.count(v) == 1);
                CHECK(settled[v] == d);
            } else {
                CHECK(settled.count(v) == 0);
            }
        }
    }
}

TEST_CASE("bundled lanes equal independent single-lane runs") {
    std::mt19937 rng(9);
    Graph g(50, fixtures::randomEdges(rng, 50, 100, 1, 300));
    const std::vector<Vertex> sources = {3, 8, 8, 14, 21, 30, 42, 49};
    BundledSearch<Graph> bundle(g, 50, static_cast<int>(sources.size()));
    bundle.reset();
    for (int lane = 0; lane < static_cast<int>(sources.size()); ++lane)
        bundle.addSource(lane, sources[static_cast<size_t>(lane)]);
    SearchStats stats;
    bundle.run([](Vertex, std::span<const Dist>) {}, [](Dist) { return false; }, stats);
    for (int lane = 0; lane < static_cast<int>(sources.size()); ++lane) {
        auto ref = fixtures::refDistances(g, sources[static_cast<size_t>(lane)]);
        for (Vertex v = 0; v < 50; ++v)
            CHECK(bundle.row(v)[static_cast<size_t>(lane)] == ref[static_cast<size_t>(v)]);
    }
}

TEST_CASE("source offsets shift the whole lane") {
    auto net = fixtures::lineNetwork();
    BundledSearch<Graph> search(net.veh, 4, 1);
    search.reset();
    search.addSource(0, 1, 40);
    auto settled = settleAll(search);
    CHECK(settled == std::map<Vertex, Dist>{{0, 140}, {1, 40}, {2, 140}, {3, 240}});
}

TEST_CASE("reset clears previous sources") {
    auto net = fixtures::lineNetwork();
    BundledSearch<Graph> search(net.veh, 4, 1);
    search.reset();
    search.addSource(0, 0);
    settleAll(search);
    search.reset();
    search.addSource(0, 3);
    auto settled = settleAll(search);
    CHECK(settled[0] == 300);
    CHECK(settled[3] == 0);
}

TEST_CASE("search over a hierarchy side matches its search space") {
    auto net = fixtures::lineNetwork();
    auto ch = fixtures::lineCh(net.veh);
    BundledSearch<SearchGraph> search(ch.upwardOut(), 4, 1);
    search.reset();
    search.addSource(0, 0);
    auto settled = settleAll(search);
    CHECK(settled == std::map<Vertex, Dist>{{0, 0}, {2, 200}, {3, 300}});
}

TEST_CASE("single lane settles each reachable vertex once") {
    std::mt19937 rng(13);
    Graph g(30, fixtures::randomEdges(rng, 30, 60, 1, 100));
    BundledSearch<Graph> search(g, 30, 1);
    search.reset();
    search.addSource(0, 0);
    SearchStats stats;
    search.run([](Vertex, std::span<const Dist>) {}, [](Dist) { return false; }, stats);
    CHECK(stats.verticesSettled == 30);
    CHECK(stats.edgesRelaxed > 0);
}

TEST_CASE("sorted bucket scans ascending by distance") {
    BucketStore<ScanByDistAscending> store(2, true);
    store.insert(0, {7, 30, 30});
    store.insert(0, {8, 10, 10});
    store.insert(0, {9, 20, 20});
    auto entries = store.entries(0);
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].dist == 10);
    CHECK(entries[1].dist == 20);
    CHECK(entries[2].dist == 30);
    CHECK(store.entries(1).empty());
}

TEST_CASE("sorted bucket scans descending by key") {
    BucketStore<ScanByKeyDescending> store(1, true);
    store.insert(0, {1, 500, 10});
    store.insert(0, {2, 500, 30});
    store.insert(0, {3, 500, 20});
    auto entries = store.entries(0);
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].sortKey == 30);
    CHECK(entries[1].sortKey == 20);
    CHECK(entries[2].sortKey == 10);
}

TEST_CASE("descending key scan stops at the first small key") {
    BucketStore<ScanByKeyDescending> store(1, true);
    store.insert(0, {1, 0, 50});
    store.insert(0, {2, 0, 30});
    store.insert(0, {3, 0, 10});
    int visited = 0;
    for (const auto& e : store.entries(0)) {
        if (e.sortKey < 40) break;
        ++visited;
    }
    CHECK(visited == 1);
}

TEST_CASE("equal keys keep insertion order") {
    BucketStore<ScanByDistAscending> store(1, true);
    store.insert(0, {1, 10, 10});
    store.insert(0, {2, 10, 10});
    store.insert(0, {3, 5, 5});
    auto entries = store.entries(0);
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].owner == 3);
    CHECK(entries[1].owner == 1);
    CHECK(entries[2].owner == 2);
}

TEST_CASE("unsorted store appends in insertion order") {
    BucketStore<ScanByDistAscending> store(1, false);
    store.insert(0, {1, 30, 30});
    store.insert(0, {2, 10, 10});
    auto entries = store.entries(0);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].owner == 1);
    CHECK(entries[1].owner == 2);
}

TEST_CASE("removeOwner erases every entry of that owner only") {
    BucketStore<ScanByDistAscending> store(1, true);
    store.insert(0, {1, 10, 10});
    store.insert(0, {2, 20, 20});
    store.insert(0, {1, 30, 30});
    store.removeOwner(0, 1);
    auto entries = store.entries(0);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].owner == 2);
    store.removeOwner(0, 99);
    CHECK(store.entries(0).size() == 1);
    CHECK(store.totalEntries() == 1);
}
