#include "huntforge/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "huntforge/errors.hpp"

namespace huntforge::telemetry {

namespace {

constexpr char kHex[] = "0123456789abcdef";

std::string random_hash(std::mt19937_64& rng) {
    std::string h(64, '0');
    for (auto& c : h) c = kHex[rng() & 0xF];
    return h;
}

std::string benign_host(int i) { return "198.51.100." + std::to_string(10 + i); }

// Poisson arrivals on [start, start + span).
std::vector<double> poisson_times(std::mt19937_64& rng, double rate_per_day, double start, double span) {
    std::vector<double> out;
    if (rate_per_day <= 0) return out;
    std::exponential_distribution<double> gap(rate_per_day / 86400.0);
    for (double t = start + gap(rng); t < start + span; t += gap(rng)) out.push_back(t);
    return out;
}

HttpFlow flow(std::mt19937_64& rng, double ts, std::string src, std::string dst, std::string host, std::string uri) {
    std::uniform_int_distribution<std::uint64_t> out_bytes(200, 2000);
    std::uniform_int_distribution<std::uint64_t> in_bytes(500, 60000);
    HttpFlow f;
    f.ts = std::round(ts * 1000.0) / 1000.0;
    f.src = std::move(src);
    f.dst = std::move(dst);
    f.dst_port = (rng() & 1) ? 443 : 80;
    f.host_header = std::move(host);
    f.uri = std::move(uri);
    f.bytes_out = out_bytes(rng);
    f.bytes_in = in_bytes(rng);
    return f;
}

}  // namespace

const std::string& zeus_hash_fixture() {
    static const std::string hash = [] {
        std::mt19937 rng(0);
        std::string middle(64 - 5 - 4, '0');
        for (auto& c : middle) c = kHex[rng() & 0xF];
        return "014e7" + middle + "7bbb";
    }();
    return hash;
}

std::string client_name(int index) { return "client" + std::to_string(index); }

ScenarioParams ScenarioParams::background_only() {
    ScenarioParams p;
    p.plant_beacon = false;
    p.lateral.clear();
    return p;
}

Scenario generate_scenario(std::uint64_t seed, const ScenarioParams& params) {
    if (params.clients < 1) throw invalid("scenario: need at least one client");
    if (!(params.window > 0)) throw invalid("scenario: window must be positive");
    std::vector<std::string> clients;
    for (int i = 1; i <= params.clients; ++i) clients.push_back(client_name(i));
    auto known = [&](const std::string& c) { return std::find(clients.begin(), clients.end(), c) != clients.end(); };
    for (const auto& mv : params.lateral) {
        if (!known(mv.from)) throw invalid("scenario: lateral pair references unknown client '" + mv.from + "'");
        if (!known(mv.to)) throw invalid("scenario: lateral pair references unknown client '" + mv.to + "'");
    }
    if (params.plant_beacon && !known(params.beacon_client))
        throw invalid("scenario: unknown beacon client '" + params.beacon_client + "'");

    std::mt19937_64 rng(seed);
    Scenario sc;
    sc.truth.clients = clients;
    auto& http = sc.corpus.http;
    auto& syslog = sc.corpus.syslog;
    const double t0 = params.window_start;
    const double span = params.window;

    if (params.plant_beacon) {
        std::uniform_real_distribution<double> phase(0.0, params.beacon_period);
        std::uniform_real_distribution<double> jitter(-params.beacon_jitter, params.beacon_jitter);
        for (double t = t0 + phase(rng); t < t0 + span; t += params.beacon_period) {
            double ts = t + jitter(rng) * params.beacon_period;
            if (ts < t0 || ts >= t0 + span) continue;
            http.push_back(flow(rng, ts, params.beacon_client, params.c2_host, "cdn-update.example", "/gate.php"));
        }
        sc.truth.beacon_pairs.emplace_back(params.beacon_client, params.c2_host);
    }

    std::uniform_real_distribution<double> rate_scale(0.25, 1.75);
    for (const auto& c : clients) {
        for (int b = 0; b < params.benign_hosts; ++b) {
            double rate = params.background_rate_per_day * rate_scale(rng);
            for (double ts : poisson_times(rng, rate, t0, span))
                http.push_back(flow(rng, ts, c, benign_host(b), "www.site" + std::to_string(b) + ".example", "/"));
        }
        for (const auto& other : clients) {
            if (other == c) continue;
            for (double ts : poisson_times(rng, params.client_rate_per_day, t0, span))
                http.push_back(flow(rng, ts, c, other, other + ".corp.example", "/intranet"));
        }
    }
    if (params.chatty_pair && clients.size() >= 3) {
        for (double ts : poisson_times(rng, params.chatty_rate_per_day, t0, span))
            http.push_back(flow(rng, ts, clients[2], "198.51.100.50", "telemetry.vendor.example", "/v1/metrics"));
    }

    std::set<std::string> infected;
    if (params.plant_beacon) infected.insert(params.beacon_client);
    for (const auto& mv : params.lateral)
        if (mv.infected) infected.insert(mv.to);

    // Lateral movement shows up as share access logged on the target.
    std::uniform_real_distribution<double> when(t0, t0 + span);
    for (const auto& mv : params.lateral) {
        for (int k = 0; k < 3; ++k) {
            SyslogEvent e;
            e.ts = std::round(when(rng) * 1000.0) / 1000.0;
            e.host = mv.to;
            e.process = "smbd";
            e.event_type = "smb_access";
            e.peer = mv.from;
            e.message = "share mounted";
            syslog.push_back(std::move(e));
        }
    }

    std::set<std::string> involved = infected;
    for (const auto& mv : params.lateral) {
        involved.insert(mv.from);
        involved.insert(mv.to);
    }
    std::vector<std::string> bystanders;
    for (const auto& c : clients)
        if (!involved.count(c)) bystanders.push_back(c);

    static const std::vector<std::pair<std::string, std::string>> routine = {
        {"login", "sshd"}, {"logout", "sshd"}, {"process_start", "systemd"}, {"service_restart", "systemd"}};
    for (const auto& c : clients) {
        for (double ts : poisson_times(rng, 4.0, t0, span)) {
            const auto& [type, proc] = routine[rng() % routine.size()];
            SyslogEvent e;
            e.ts = std::round(ts * 1000.0) / 1000.0;
            e.host = c;
            e.process = proc;
            e.event_type = type;
            e.message = type;
            syslog.push_back(std::move(e));
        }
    }
    // Benign share access among clients untouched by the campaign.
    if (bystanders.size() >= 2) {
        for (double ts : poisson_times(rng, 1.0, t0, span)) {
            auto a = rng() % bystanders.size();
            auto b = (a + 1 + rng() % (bystanders.size() - 1)) % bystanders.size();
            SyslogEvent e;
            e.ts = std::round(ts * 1000.0) / 1000.0;
            e.host = bystanders[b];
            e.process = "smbd";
            e.event_type = "smb_access";
            e.peer = bystanders[a];
            e.message = "share mounted";
            syslog.push_back(std::move(e));
        }
    }

    for (const auto& c : clients) {
        ForensicInventory inv;
        inv.host = c;
        int n = 3 + static_cast<int>(rng() % 4);
        for (int k = 0; k < n; ++k)
            inv.artifacts.push_back({random_hash(rng), "C:\\Program Files\\app" + std::to_string(k) + "\\app.exe"});
        if (infected.count(c)) {
            inv.artifacts.push_back({zeus_hash_fixture(), "C:\\Users\\" + c + "\\AppData\\Roaming\\sdra64.exe"});
        } else if (std::any_of(params.lateral.begin(), params.lateral.end(),
                               [&](const LateralMove& mv) { return mv.to == c; })) {
            // A different build of the family: must not match the registered variant.
            inv.artifacts.push_back({random_hash(rng), "C:\\Users\\" + c + "\\Downloads\\invoice.exe"});
        }
        sc.corpus.inventories[c] = std::move(inv);
    }

    std::stable_sort(http.begin(), http.end(), [](const HttpFlow& a, const HttpFlow& b) { return a.ts < b.ts; });
    std::stable_sort(syslog.begin(), syslog.end(),
                     [](const SyslogEvent& a, const SyslogEvent& b) { return a.ts < b.ts; });
    sc.truth.infected_hosts.assign(infected.begin(), infected.end());
    return sc;
}

}  // namespace huntforge::telemetry
