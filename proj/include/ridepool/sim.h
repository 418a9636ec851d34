#pragma once

#include <array>
#include <istream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ridepool/ch.h"
#include "ridepool/cost_model.h"
#include "ridepool/elliptic.h"
#include "ridepool/fleet_state.h"
#include "ridepool/insertion.h"
#include "ridepool/last_stop.h"
#include "ridepool/pd_locations.h"
#include "ridepool/road_network.h"
#include "ridepool/search_core.h"

namespace ridepool {

struct OracleVehicle;

// Lines "request <id> <origin> <dest> <t_req>", '#' starts a comment. Ids
// must be unique; requests are stable-sorted by request time.
std::vector<Request> parseRequests(std::istream& in, const std::string& name, int numVertices);
std::vector<Request> loadRequests(const std::string& path, int numVertices);

struct SimConfig {
    CostParameters params;
    LastStopStrategy palsStrategy = LastStopStrategy::CollectiveBch;
    LastStopStrategy dalsStrategy = LastStopStrategy::CollectiveBch;
    int kElliptic = 16;
    int kPd = 32;
    int kLastStop = 0;  // 0 picks the strategy default: 8 bundled, 64 dijkstra
    bool sortedBuckets = true;
    PruningConfig pruning;
    bool verifyOracle = false;
};

enum class Phase { Sync, PdDistances, Elliptic, Ordinary, Pbns, Pals, Dals };
inline constexpr int kNumPhases = 7;
const char* phaseName(Phase phase);

struct PhaseStats {
    std::array<SearchStats, kNumPhases> search;
    std::array<int64_t, kNumPhases> micros{};

    SearchStats& operator[](Phase p) { return search[static_cast<size_t>(p)]; }
    const SearchStats& operator[](Phase p) const { return search[static_cast<size_t>(p)]; }
};

enum class OutcomeKind { Ordinary, Pbns, Pals, Dals, Pseudo, Unserved };
const char* outcomeKindName(OutcomeKind kind);

struct DispatchOutcome {
    int32_t requestId = kInvalidId;
    OutcomeKind kind = OutcomeKind::Unserved;
    Insertion insertion;        // vehicleId is the fleet index, -1 for pseudo
    int32_t vehicleFileId = -1;
    CostBreakdown cost;
    PhaseStats phases;
    int64_t totalMicros = 0;
};

// Deterministic single-line JSON rendering; timings and counters stay out so
// paired runs across strategies produce identical logs.
std::string outcomeLogLine(const DispatchOutcome& outcome);

struct SimulationStats {
    int64_t requests = 0;
    int64_t served = 0;    // by a vehicle
    int64_t walked = 0;    // pseudo-insertion
    int64_t unserved = 0;
    Time meanWait = 0;
    Time p95Wait = 0;
    Time meanRide = 0;
    Time meanTrip = 0;
    Time meanEmptyDrive = 0;
    Time meanOccupiedDrive = 0;
    Time meanStopTime = 0;
    Time meanOperationTime = 0;
};

// Sequential dispatcher. Feed requests in request-time order; each dispatch
// advances the clock, runs the full search pipeline, applies the winner, and
// records realized rider times from the resulting schedule events.
class Engine {
  public:
    Engine(const RoadNetworkPair& net, const ContractionHierarchy& chVeh,
           const ContractionHierarchy& chPsg, std::vector<Vehicle> vehicles, SimConfig config);

    DispatchOutcome dispatch(const Request& r);
    // Executes schedules up to t; dispatch does this on its own, so calling
    // it between requests changes no outcome.
    void advanceTo(Time t);
    // Runs all remaining schedules to completion.
    void finish();
    // Valid after finish().
    SimulationStats stats() const;

    FleetState& fleet() { return fleet_; }
    const SimConfig& config() const { return config_; }
    int64_t ellipticEntries() const { return elliptic_.totalEntries(); }
    int64_t lastStopEntries() const { return lastStop_.totalEntries(); }

  private:
    struct RiderRecord {
        Time reqTime = 0;
        Dist walkToDest = 0;
        Time boardTime = -1;
    };

    Time maxTripFor(const Request& r) const;
    int lanesFor(LastStopStrategy strategy) const;
    void consumeEvents();
    void checkAgainstOracle(const Request& r, const std::vector<OracleVehicle>& snapshot,
                            Cost chosenCost) const;

    const RoadNetworkPair* net_;
    const ContractionHierarchy* chVeh_;
    const ContractionHierarchy* chPsg_;
    SimConfig config_;
    FleetState fleet_;
    EllipticBuckets elliptic_;
    LastStopBuckets lastStop_;
    CurrentLocationBuckets clBuckets_;
    std::vector<StopEvent> events_;
    std::unordered_map<int32_t, RiderRecord> riders_;
    std::vector<Time> waits_;
    std::vector<Time> rides_;
    std::vector<Time> trips_;
    int64_t requests_ = 0;
    int64_t served_ = 0;
    int64_t walked_ = 0;
    int64_t unserved_ = 0;
    bool finished_ = false;
};

struct SimulationResult {
    SimulationStats stats;
    std::vector<DispatchOutcome> outcomes;
};

SimulationResult runSimulation(const RoadNetworkPair& net, const ContractionHierarchy& chVeh,
                               const ContractionHierarchy& chPsg, std::vector<Vehicle> vehicles,
                               const std::vector<Request>& requests, const SimConfig& config);

}  // namespace ridepool
