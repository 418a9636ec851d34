#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sstream>

#include "doctest.h"
#include "fixtures.h"
#include "ridepool/fleet_state.h"
#include "ridepool/oracle.h"

using namespace ridepool;

namespace {

CostParameters lineParams() {
    CostParameters params;
    params.stopTime = 60;
    return params;
}

Insertion palsInsertion(Vertex pickup, Vertex dropoff, Dist toPickup, Dist pd) {
    Insertion ins;
    ins.vehicleId = 0;
    ins.pickupPos = 0;
    ins.dropoffPos = 0;
    ins.pickup = {pickup, 0};
    ins.dropoff = {dropoff, 0};
    ins.distToPickup = toPickup;
    ins.distFromPickup = pd;
    ins.distToDropoff = pd;
    return ins;
}

CostBreakdown applyChecked(FleetState& fleet, const Request& r, const Insertion& ins,
                           const CostParameters& params, Time maxTrip) {
    std::vector<StopView> buffer;
    auto ctx = fleet.fillContext(ins.vehicleId, buffer);
    auto eval = evaluateInsertion(ctx, r, ins, params, maxTrip);
    REQUIRE(eval.feasible);
    fleet.apply(r, ins, eval, maxTrip);
    REQUIRE(fleet.scheduleFeasible(ins.vehicleId));
    return eval;
}

}  // namespace

TEST_CASE("vehicle files parse and validate") {
    SUBCASE("well-formed") {
        std::istringstream in("# fleet\nvehicle 7 2 3 0 5000\n\nvehicle 9 0 1 100 900\n");
        auto vehicles = parseVehicles(in, "fleet", 4);
        REQUIRE(vehicles.size() == 2);
        CHECK(vehicles[0].id == 7);
        CHECK(vehicles[0].home == 2);
        CHECK(vehicles[0].capacity == 3);
        CHECK(vehicles[1].serviceStart == 100);
        CHECK(vehicles[1].serviceEnd == 900);
    }
    SUBCASE("bad tag") {
        std::istringstream in("car 1 0 1 0 10\n");
        CHECK_THROWS_AS(parseVehicles(in, "fleet", 4), std::runtime_error);
    }
    SUBCASE("duplicate id") {
        std::istringstream in("vehicle 1 0 1 0 10\nvehicle 1 1 1 0 10\n");
        CHECK_THROWS_AS(parseVehicles(in, "fleet", 4), std::runtime_error);
    }
    SUBCASE("location out of range") {
        std::istringstream in("vehicle 1 4 1 0 10\n");
        CHECK_THROWS_AS(parseVehicles(in, "fleet", 4), std::runtime_error);
    }
    SUBCASE("zero capacity") {
        std::istringstream in("vehicle 1 0 0 0 10\n");
        CHECK_THROWS_AS(parseVehicles(in, "fleet", 4), std::runtime_error);
    }
    SUBCASE("empty service window") {
        std::istringstream in("vehicle 1 0 1 10 10\n");
        CHECK_THROWS_AS(parseVehicles(in, "fleet", 4), std::runtime_error);
    }
    SUBCASE("trailing token") {
        std::istringstream in("vehicle 1 0 1 0 10 extra\n");
        CHECK_THROWS_AS(parseVehicles(in, "fleet", 4), std::runtime_error);
    }
}

TEST_CASE("applying a last-stop insertion builds the expected schedule") {
    auto net = fixtures::lineNetwork();
    auto ch = fixtures::lineCh(net.veh);
    auto params = lineParams();
    FleetState fleet(ch, {fixtures::makeVehicle(42, 0, 2)}, params);
    fleet.advanceTo(0);
    fleet.advanceIdleDepartures();

    Request r = fixtures::makeRequest(0, 2, 3, 0);
    auto eval = applyChecked(fleet, r, palsInsertion(2, 3, 200, 100), params, 860);
    CHECK(eval.depAtPickup == 260);
    CHECK(eval.arrAtDropoff == 360);

    const auto& stops = fleet.stops(0);
    REQUIRE(stops.size() == 3);
    CHECK(stops[0].location == 0);
    CHECK(stops[0].minDep == 0);
    CHECK(stops[1].location == 2);
    CHECK(stops[1].minArr == 200);
    CHECK(stops[1].minDep == 260);
    CHECK(stops[1].pickups == std::vector<int32_t>{0});
    CHECK(stops[1].occupancyAfter == 1);
    CHECK(stops[2].location == 3);
    CHECK(stops[2].minArr == 360);
    CHECK(stops[2].dropoffs == std::vector<int32_t>{0});
    CHECK(stops[2].occupancyAfter == 0);

    SUBCASE("promises bind the new rider's stops") {
        CHECK(stops[1].maxDepPromise == 6000);  // reqTime + maxWaitTime
        CHECK(stops[2].maxArrPromise == 860);   // reqTime + maxTrip - dropoff walk
    }
    SUBCASE("leeway chains the deadline backwards") {
        CHECK(fleet.leewayAfter(0, 1) == 100 + 500);
        CHECK(fleet.leewayAfter(0, 0) == 200 + 500);
    }
    SUBCASE("stops can be located by id") {
        CHECK(fleet.locateStop(stops[1].stopId) == std::pair<int, int>{0, 1});
        const int32_t firstId = stops[0].stopId;
        std::vector<StopEvent> events;
        fleet.advanceTo(200, &events);
        CHECK(fleet.locateStop(firstId) == std::pair<int, int>{-1, -1});
        CHECK(fleet.locateStop(9999) == std::pair<int, int>{-1, -1});
    }
}

TEST_CASE("merging a rider into existing stops keeps the stop count") {
    auto net = fixtures::lineNetwork();
    auto ch = fixtures::lineCh(net.veh);
    auto params = lineParams();
    FleetState fleet(ch, {fixtures::makeVehicle(42, 0, 2)}, params);
    fleet.advanceTo(0);
    fleet.advanceIdleDepartures();

    Request r0 = fixtures::makeRequest(0, 2, 3, 0);
    applyChecked(fleet, r0, palsInsertion(2, 3, 200, 100), params, 860);

    Request r1 = fixtures::makeRequest(1, 2, 3, 0);
    Insertion ins;
    ins.vehicleId = 0;
    ins.pickupPos = 1;
    ins.dropoffPos = 2;
    ins.pickup = {2, 0};
    ins.dropoff = {3, 0};
    ins.distToPickup = 0;
    ins.distFromPickup = 100;
    ins.distToDropoff = 0;
    auto eval = applyChecked(fleet, r1, ins, params, 2000);
    CHECK(eval.depAtPickup == 260);
    CHECK(eval.arrAtDropoff == 360);
    CHECK(eval.detour == 0);

    const auto& stops = fleet.stops(0);
    REQUIRE(stops.size() == 3);
    CHECK(stops[1].pickups == std::vector<int32_t>{0, 1});
    CHECK(stops[1].occupancyAfter == 2);
    CHECK(stops[2].dropoffs == std::vector<int32_t>{0, 1});
    CHECK(stops[2].maxArrPromise == 860);  // the older, tighter promise stays
}

TEST_CASE("current location commits to the next path vertex") {
    auto net = fixtures::lineNetwork();
    auto ch = fixtures::lineCh(net.veh);
    auto params = lineParams();
    FleetState fleet(ch, {fixtures::makeVehicle(42, 0, 2)}, params);
    fleet.advanceTo(0);
    fleet.advanceIdleDepartures();

    Request r = fixtures::makeRequest(0, 0, 3, 0);
    applyChecked(fleet, r, palsInsertion(0, 3, 0, 300), params, 2000);

    SUBCASE("before departing the location is the stop itself") {
        auto loc = fleet.currentLocation(0);
        CHECK(loc.vertex == 0);
        CHECK(loc.depEquivalent == 60);
    }
    SUBCASE("mid-edge the vehicle is committed to the next vertex") {
        fleet.advanceTo(210);
        REQUIRE(fleet.departed(0));
        auto loc = fleet.currentLocation(0);
        CHECK(loc.vertex == 2);
        CHECK(loc.depEquivalent == 260);
    }
    SUBCASE("exactly at a vertex the vehicle can still be rerouted from it") {
        fleet.advanceTo(260);
        auto loc = fleet.currentLocation(0);
        CHECK(loc.vertex == 2);
        CHECK(loc.depEquivalent == 260);
        fleet.advanceTo(261);
        CHECK(fleet.currentLocation(0).vertex == 3);
    }
    SUBCASE("after arriving the vehicle idles at the last stop") {
        fleet.advanceTo(500);
        CHECK(fleet.idle(0));
        auto loc = fleet.currentLocation(0);
        CHECK(loc.vertex == 3);
        CHECK(loc.depEquivalent == 420);
    }
    SUBCASE("events fire in schedule order with the right riders") {
        std::vector<StopEvent> events;
        fleet.advanceTo(500, &events);
        REQUIRE(events.size() == 5);
        CHECK(events[0].kind == StopEvent::Kind::Depart);
        CHECK(events[0].time == 0);
        CHECK(events[0].riders.empty());
        CHECK(events[1].kind == StopEvent::Kind::Arrive);
        CHECK(events[1].time == 0);
        CHECK(events[2].kind == StopEvent::Kind::Depart);
        CHECK(events[2].time == 60);
        CHECK(events[2].riders == std::vector<int32_t>{0});
        CHECK(events[3].kind == StopEvent::Kind::Arrive);
        CHECK(events[3].time == 360);
        CHECK(events[3].riders == std::vector<int32_t>{0});
        CHECK(events[4].kind == StopEvent::Kind::Depart);
        CHECK(events[4].time == 360);
        const auto& ops = fleet.ops(0);
        CHECK(ops.firstDeparture == 0);
        CHECK(ops.lastArrival == 360);
        CHECK(ops.emptyDrive == 0);
        CHECK(ops.occupiedDrive == 300);
    }
}

TEST_CASE("insertion before the next stop re-roots a moving vehicle") {
    auto net = fixtures::lineNetwork();
    auto ch = fixtures::lineCh(net.veh);
    auto params = lineParams();
    FleetState fleet(ch, {fixtures::makeVehicle(42, 0, 2)}, params);
    fleet.advanceTo(0);
    fleet.advanceIdleDepartures();

    Request r0 = fixtures::makeRequest(0, 0, 3, 0);
    applyChecked(fleet, r0, palsInsertion(0, 3, 0, 300), params, 2000);
    fleet.advanceTo(210);
    REQUIRE(fleet.departed(0));

    std::vector<StopView> buffer;
    auto ctx = fleet.fillContext(0, buffer);
    CHECK(ctx.depAtPrevEquivalent == 260);

    Request r1 = fixtures::makeRequest(1, 1, 3, 210);
    Insertion ins;
    ins.vehicleId = 0;
    ins.pickupPos = 0;
    ins.dropoffPos = 0;
    ins.pickup = {1, 0};
    ins.dropoff = {3, 0};
    ins.distToPickup = 100;  // from the committed vertex v2
    ins.distFromPickup = 200;
    ins.distToDropoff = 200;
    ins.distFromDropoff = 0;
    auto eval = evaluateInsertion(ctx, r1, ins, params, 2000);
    REQUIRE(eval.feasible);
    CHECK(eval.depAtPickup == 260 + 100 + 60);
    fleet.apply(r1, ins, eval, 2000);
    REQUIRE(fleet.scheduleFeasible(0));

    const auto& stops = fleet.stops(0);
    REQUIRE(stops.size() == 4);
    CHECK(stops[0].location == 2);  // virtual stop at the committed vertex
    CHECK(stops[0].minDep == 260);
    CHECK(stops[0].occupancyAfter == 1);
    CHECK(stops[1].location == 1);
    CHECK(stops[1].occupancyAfter == 2);
    CHECK(stops[2].location == 3);
    CHECK(stops[2].dropoffs == std::vector<int32_t>{1});
    CHECK(stops[3].location == 3);
    CHECK(stops[3].dropoffs == std::vector<int32_t>{0});
    CHECK(stops[3].minArr == eval.arrAtDropoff + 60 + 0);
    CHECK(!fleet.departed(0));
}

TEST_CASE("idle departures track the clock") {
    auto net = fixtures::lineNetwork();
    auto ch = fixtures::lineCh(net.veh);
    auto params = lineParams();
    FleetState fleet(ch, {fixtures::makeVehicle(1, 0, 2, 0, 100000)}, params);
    fleet.advanceTo(500);
    fleet.advanceIdleDepartures();
    CHECK(fleet.stops(0)[0].minDep == 500);
    CHECK(fleet.currentLocation(0).depEquivalent == 500);
    fleet.advanceTo(900);
    fleet.advanceIdleDepartures();
    CHECK(fleet.stops(0)[0].minDep == 900);
    CHECK(fleet.ops(0).firstDeparture == -1);
}

TEST_CASE("applied schedules replay exactly as the evaluator promised") {
    std::mt19937 rng(53);
    auto net = fixtures::randomNetwork(rng, 25, 40);
    auto ch = ContractionHierarchy::build(net.veh);
    CostParameters params;
    params.stopTime = 300;
    params.walkWeight = 10;  // keep the walking fallback from winning every request
    FleetState fleet(ch, fixtures::randomVehicles(rng, 3, 25), params);

    std::uniform_int_distribution<Vertex> vertex(0, 24);
    Time clock = 0;
    int applied = 0;
    for (int reqId = 0; reqId < 30; ++reqId) {
        clock += 200;
        fleet.advanceTo(clock);
        fleet.advanceIdleDepartures();
        Request r = fixtures::makeRequest(reqId, vertex(rng), vertex(rng), clock);
        if (r.origin == r.destination) continue;
        auto snapshot = snapshotFleet(fleet);
        auto best = oracleDispatchBest(net, snapshot, r, 0, params);
        if (!best.found() || best.insertion.vehicleId < 0) continue;
        std::vector<StopView> buffer;
        auto ctx = fleet.fillContext(best.insertion.vehicleId, buffer);
        auto eval = evaluateInsertion(ctx, r, best.insertion, params,
                                      oracleMaxTrip(net, r, params));
        REQUIRE(eval.feasible);
        CHECK(eval.total == best.cost);
        fleet.apply(r, best.insertion, eval, oracleMaxTrip(net, r, params));
        ++applied;
        for (int veh = 0; veh < fleet.numVehicles(); ++veh) CHECK(fleet.scheduleFeasible(veh));
    }
    CHECK(applied > 5);
    fleet.advanceTo(1'000'000);
    for (int veh = 0; veh < fleet.numVehicles(); ++veh) {
        CHECK(fleet.idle(veh));
        CHECK(fleet.scheduleFeasible(veh));
    }
}
