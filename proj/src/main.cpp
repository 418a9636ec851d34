#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ridepool/config.h"

namespace {

struct CliOverrides {
    std::optional<std::string> configPath;
    std::optional<std::string> network;
    std::optional<std::string> vehicles;
    std::optional<std::string> requests;
    std::optional<std::string> chCache;
    std::optional<std::string> out;
    std::optional<long long> radius;
    std::optional<std::string> strategyPals;
    std::optional<std::string> strategyDals;
    std::optional<long long> kElliptic;
    std::optional<long long> kPd;
    std::optional<long long> kLastStop;
    std::optional<std::string> sortedBuckets;
    std::optional<std::string> counters;
    bool verifyOracle = false;
};

void addCommonOptions(CLI::App& cmd, CliOverrides& cli) {
    cmd.add_option("--config", cli.configPath, "key=value config file, overridden by flags");
    cmd.add_option("--network", cli.network, "road network file");
    cmd.add_option("--vehicles", cli.vehicles, "vehicle file");
    cmd.add_option("--requests", cli.requests, "request file");
    cmd.add_option("--ch-cache", cli.chCache, "hierarchy cache file");
    cmd.add_option("--out", cli.out, "output file");
    cmd.add_option("--radius", cli.radius, "walking radius around origin and destination");
    cmd.add_option("--strategy-pals", cli.strategyPals,
                   "dijkstra, individual-bch, or collective-bch");
    cmd.add_option("--strategy-dals", cli.strategyDals,
                   "dijkstra, individual-bch, or collective-bch");
    cmd.add_option("--k-elliptic", cli.kElliptic, "bundling width of elliptic searches");
    cmd.add_option("--k-pd", cli.kPd, "bundling width of PD-distance searches");
    cmd.add_option("--k-laststop", cli.kLastStop, "bundling width of last-stop searches, 0 = default");
    cmd.add_option("--sorted-buckets", cli.sortedBuckets, "on or off");
    cmd.add_option("--counters", cli.counters, "on or off");
    cmd.add_flag("--verify-oracle", cli.verifyOracle,
                 "cross-check every dispatch against the brute-force reference");
}

ridepool::RunConfig buildConfig(const CliOverrides& cli) {
    ridepool::RunConfig config;
    if (cli.configPath) ridepool::loadConfigFile(config, *cli.configPath);
    const auto apply = [&](const char* key, const auto& opt) {
        if (!opt) return;
        if constexpr (std::is_same_v<std::decay_t<decltype(*opt)>, std::string>) {
            ridepool::applyConfigKey(config, key, *opt);
        } else {
            ridepool::applyConfigKey(config, key, std::to_string(*opt));
        }
    };
    apply("network", cli.network);
    apply("vehicles", cli.vehicles);
    apply("requests", cli.requests);
    apply("ch-cache", cli.chCache);
    apply("out", cli.out);
    apply("radius", cli.radius);
    apply("strategy-pals", cli.strategyPals);
    apply("strategy-dals", cli.strategyDals);
    apply("k-elliptic", cli.kElliptic);
    apply("k-pd", cli.kPd);
    apply("k-laststop", cli.kLastStop);
    apply("sorted-buckets", cli.sortedBuckets);
    apply("counters", cli.counters);
    if (cli.verifyOracle) ridepool::applyConfigKey(config, "verify-oracle", "on");
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamic ridesharing dispatch engine"};
    app.require_subcommand(1);

    CliOverrides runCli, benchCli, prepCli;
    CLI::App* run = app.add_subcommand("run", "simulate an instance and write the outcome log");
    addCommonOptions(*run, runCli);
    CLI::App* bench = app.add_subcommand("bench", "compare strategies and bucket orders");
    addCommonOptions(*bench, benchCli);
    CLI::App* prep = app.add_subcommand("prep", "build and cache the hierarchies");
    addCommonOptions(*prep, prepCli);

    try {
        app.parse(argc, argv);
        if (run->parsed()) return ridepool::runCommand(buildConfig(runCli));
        if (bench->parsed()) return ridepool::benchCommand(buildConfig(benchCli));
        return ridepool::prepCommand(buildConfig(prepCli));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
