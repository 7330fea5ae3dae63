#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "huntforge/telemetry.hpp"

namespace huntforge::telemetry {

/// The 64-hex Zeus fixture hash: prefix `014e7`, suffix `7bbb`, middle drawn from seed 0.
const std::string& zeus_hash_fixture();

struct LateralMove {
    std::string from;
    std::string to;
    bool infected = false;  // does the target actually carry the malware
};

struct ScenarioParams {
    int clients = 10;
    std::string c2_host = "203.0.113.7";
    std::string beacon_client = "client1";
    bool plant_beacon = true;
    double beacon_period = 7200.0;
    double beacon_jitter = 0.05;  // uniform, as a fraction of the period
    double window_start = 1609459200.0;
    double window = 7 * 86400.0;
    int benign_hosts = 6;
    double background_rate_per_day = 12.0;  // mean flows per day per client/benign-host pair
    double client_rate_per_day = 0.5;       // occasional client-to-client HTTP
    /// A high-volume aperiodic pair (client3 -> 198.51.100.50); feeds the histogram baseline.
    bool chatty_pair = true;
    double chatty_rate_per_day = 150.0;
    std::vector<LateralMove> lateral = {{"client1", "client2", true}, {"client1", "client7", false}};
    std::string malware_name = "zeus";

    /// Background traffic only: no beacon, no lateral movement, nobody infected.
    static ScenarioParams background_only();
};

/// What actually happened; for tests only, never handed to detectors.
struct ScenarioTruth {
    std::vector<std::pair<std::string, std::string>> beacon_pairs;  // (src, dst)
    std::vector<std::string> infected_hosts;
    std::vector<std::string> clients;
};

struct Scenario {
    TelemetryCorpus corpus;
    ScenarioTruth truth;
};

std::string client_name(int index);

/// Deterministic for a fixed seed. Throws if a lateral pair names an unknown client.
Scenario generate_scenario(std::uint64_t seed, const ScenarioParams& params = {});

}  // namespace huntforge::telemetry
