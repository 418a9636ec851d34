#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ridepool/ch.h"
#include "ridepool/cost_model.h"
#include "ridepool/insertion.h"

namespace ridepool {

struct Vehicle {
    int32_t id = kInvalidId;
    Vertex home = kInvalidVertex;
    int capacity = 0;
    Time serviceStart = 0;
    Time serviceEnd = 0;
};

// Lines "vehicle <id> <location> <capacity> <serviceStart> <serviceEnd>".
std::vector<Vehicle> parseVehicles(std::istream& in, const std::string& name, int numVertices);
std::vector<Vehicle> loadVehicles(const std::string& path, int numVertices);

struct Stop {
    int32_t stopId = kInvalidId;  // persistent identity, owns bucket entries
    Vertex location = kInvalidVertex;
    Time minArr = 0;
    Time minDep = 0;
    Time maxDepPromise = kInf;  // latest departure promised to riders boarding here
    Time maxArrPromise = kInf;  // latest arrival promised to riders alighting here
    Time deadline = kInf;       // latest arrival keeping every promise from here on
    Dist distToNext = kInf;
    int occupancyAfter = 0;
    std::vector<int32_t> pickups;
    std::vector<int32_t> dropoffs;
};

struct StopEvent {
    enum class Kind { Depart, Arrive };
    Kind kind;
    int vehicleIdx;
    Time time;
    Vertex location;
    std::vector<int32_t> riders;  // boarding on Depart, alighting on Arrive
};

struct CurrentLocation {
    Vertex vertex = kInvalidVertex;  // next vertex the vehicle is committed to
    Time depEquivalent = 0;          // departure-time stand-in at that vertex
};

struct VehicleOps {
    Time firstDeparture = -1;
    Time lastArrival = -1;
    Dist emptyDrive = 0;
    Dist occupiedDrive = 0;
};

// All vehicle routes with their schedules, rider promises, and per-stop
// deadlines. Stop s_0 of a route is the stop the vehicle last arrived at (or
// its start stop); a vehicle with a single stop is idle there.
class FleetState {
  public:
    FleetState(const ContractionHierarchy& chVeh, std::vector<Vehicle> vehicles,
               const CostParameters& params);

    int numVehicles() const { return static_cast<int>(vehicles_.size()); }
    const Vehicle& vehicle(int veh) const { return vehicles_[static_cast<size_t>(veh)]; }
    const std::vector<Stop>& stops(int veh) const { return routes_[static_cast<size_t>(veh)].stops; }
    bool departed(int veh) const { return routes_[static_cast<size_t>(veh)].departed; }
    bool idle(int veh) const { return stops(veh).size() == 1; }
    Time now() const { return now_; }
    const VehicleOps& ops(int veh) const { return routes_[static_cast<size_t>(veh)].ops; }

    // Executes every departure and arrival scheduled at or before t, appending
    // them to events when given.
    void advanceTo(Time t, std::vector<StopEvent>* events = nullptr);

    // Lets every idle vehicle depart no earlier than the current clock.
    void advanceIdleDepartures();

    // Next committed vertex and the departure-time equivalent there; cached
    // per leg. For a vehicle still at its first stop this is that stop.
    CurrentLocation currentLocation(int veh);

    // Materializes the evaluator's view, including the current-location
    // departure equivalent for insertions before the next stop.
    VehicleContext fillContext(int veh, std::vector<StopView>& buffer);

    // Maximum total duration of the leg s_pos -> s_pos+1 that keeps every
    // promise and the service end intact.
    Dist leewayAfter(int veh, int pos) const;

    // Applies the winning insertion: splices the stops, reschedules, records
    // the new rider's promises, and refreshes deadlines.
    void apply(const Request& r, const Insertion& ins, const CostBreakdown& eval, Time maxTrip);

    // (vehicle, position) of a live stop id, or (-1, -1).
    std::pair<int, int> locateStop(int32_t stopId) const;

    // Every promise, dwell time, occupancy bound, and the service end hold on
    // the vehicle's current schedule.
    bool scheduleFeasible(int veh) const;

  private:
    struct LegPathCache {
        int32_t stopId = kInvalidId;
        std::vector<std::pair<Vertex, Dist>> path;
    };

    struct RouteData {
        std::vector<Stop> stops;
        bool departed = false;
        LegPathCache legPath;
        VehicleOps ops;
    };

    Stop makeStop(Vertex location, Time arr, Time dep);
    void refreshDeadlines(int veh);
    void fireDepart(int veh, std::vector<StopEvent>* events);
    void fireArrive(int veh, std::vector<StopEvent>* events);

    const ContractionHierarchy* ch_;
    std::vector<Vehicle> vehicles_;
    std::vector<RouteData> routes_;
    CostParameters params_;
    Time now_ = 0;
    int32_t nextStopId_ = 0;
    mutable std::vector<std::pair<int, int>> stopIndex_;  // stopId -> (vehicle, position)
    mutable bool stopIndexDirty_ = true;
};

}  // namespace ridepool
