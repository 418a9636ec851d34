#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ridepool/sim.h"

namespace ridepool {

// Everything a command needs: file paths plus the full simulation setup.
// Fields are filled from a key=value config file and CLI flag overrides.
struct RunConfig {
    std::string networkPath;
    std::string vehiclesPath;
    std::string requestsPath;
    std::string chCachePath;
    std::string outPath;
    SimConfig sim;
    bool counters = true;
};

LastStopStrategy parseStrategy(const std::string& name);
const char* strategyName(LastStopStrategy strategy);

// Applies one setting; throws naming the key when it is unknown or the value
// does not parse.
void applyConfigKey(RunConfig& config, const std::string& key, const std::string& value);
// Flat "key = value" lines, '#' comments.
void loadConfigFile(RunConfig& config, const std::string& path);

struct LoadedInstance {
    RoadNetworkPair network;
    ContractionHierarchy chVeh;
    ContractionHierarchy chPsg;
    std::vector<Vehicle> vehicles;
    std::vector<Request> requests;
};

// Loads all instance files; takes the hierarchies from the cache when it is
// present and matches the network, rebuilding otherwise.
LoadedInstance loadInstance(const RunConfig& config);

void writeStatsCsv(std::ostream& out, const SimulationStats& stats);
void writeCounterTotals(std::ostream& out, const std::vector<DispatchOutcome>& outcomes);

// Simulates and writes the outcome log plus a stats CSV on stdout.
int runCommand(const RunConfig& config);
// Runs strategy and bucket-order variants of the same instance, reports
// timings, counters, and outcome hashes; fails when any variant's outcomes
// diverge from the base run.
int benchCommand(const RunConfig& config);
// Builds both hierarchies and stores them in the cache file.
int prepCommand(const RunConfig& config);

}  // namespace ridepool
