#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "huntforge/dsl/dsl.hpp"
#include "huntforge/scenario.hpp"
#include "huntforge/service/api.hpp"
#include "huntforge/service/session.hpp"

namespace fs = std::filesystem;
using namespace huntforge;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw not_found("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw HuntError(ErrorCode::io, "cannot write " + p.string());
    out << text;
}

/// Scripted analyst: decisions keyed by predicate text, dispositions by action and first target.
struct Script {
    std::map<std::string, std::pair<Decision, std::string>> decisions;
    std::vector<json> dispositions;

    static Script load(const fs::path& p) {
        Script s;
        json doc = json::parse(slurp(p));
        for (const auto& d : doc.value("decisions", json::array()))
            s.decisions[Predicate::parse(d.at("hypothesis").get<std::string>()).to_string()] = {
                parse_decision(d.at("verdict").get<std::string>()), d.value("analyst", std::string("analyst"))};
        for (const auto& d : doc.value("dispositions", json::array())) s.dispositions.push_back(d);
        return s;
    }
};

struct RunArgs {
    std::string spec, telemetry, journal, state_out, script;
    std::optional<std::uint64_t> seed;
    bool auto_accept = false;
    std::optional<double> threshold, window;
};

int run(const RunArgs& a) {
    auto start = std::chrono::steady_clock::now();
    auto cfg = dsl::load_config_file(a.spec);
    service::HuntOptions opts;
    if (a.auto_accept) opts.gate = AnalystGate::auto_accept_on_verifier_accept;
    opts.beacon_threshold = a.threshold;
    opts.beacon_window = a.window;
    service::apply_options(*cfg, opts);
    if (!a.telemetry.empty())
        cfg->telemetry = std::make_shared<telemetry::TelemetryCorpus>(telemetry::load_corpus(a.telemetry));
    else if (a.seed)
        cfg->telemetry = std::make_shared<telemetry::TelemetryCorpus>(telemetry::generate_scenario(*a.seed).corpus);
    else
        throw invalid("run needs --telemetry or --seed");
    std::optional<Script> script;
    if (!a.script.empty()) script = Script::load(a.script);

    HuntState state = init_hunt(cfg);
    std::vector<StepRecord> journal;
    auto take = [&](std::pair<HuntState, StepRecord> step) {
        std::cout << "[" << step.second.seq << "] " << step.second.manifold << " " << to_string(step.second.kind)
                  << " (" << step.second.actor.to_string() << ")\n";
        journal.push_back(step.second);
        state = std::move(step.first);
    };
    while (true) {
        auto work = pending_work(state);
        if (!work.empty()) {
            auto step = apply_step(state, work.front());
            if (!step) break;
            take(std::move(*step));
            continue;
        }
        bool decided = false;
        if (script) {
            for (const auto* h : state.awaiting_decision()) {
                auto it = script->decisions.find(h->predicate.to_string());
                if (it == script->decisions.end()) continue;
                take(promote(state, h->id, it->second.first, Actor::analyst_named(it->second.second)));
                decided = true;
                break;
            }
        }
        if (!decided) break;
    }
    if (script) {
        for (const auto& d : script->dispositions) {
            for (const auto& r : state.recommendations) {
                if (r.action != d.at("action").get<std::string>() || r.status != deliberation::RecommendationStatus::recommended)
                    continue;
                if (d.contains("target") && (r.targets.empty() || r.targets.front() != d.at("target").get<std::string>()))
                    continue;
                take(dispose_recommendation(state, r.id,
                                            deliberation::parse_recommendation_status(d.at("decision").get<std::string>()),
                                            Actor::analyst_named(d.value("analyst", std::string("analyst")))));
                break;
            }
        }
    }

    if (!a.journal.empty()) write_journal(journal, a.journal);
    if (!a.state_out.empty()) spit(a.state_out, to_json(state).dump(2) + "\n");
    auto awaiting = state.awaiting_decision();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << journal.size() << " steps, " << state.k.facts.size() << " facts, " << state.recommendations.size()
              << " recommendations in " << secs << " s\n";
    for (const auto* h : awaiting)
        std::cout << "awaiting analyst: " << h->id << " " << h->predicate.to_string() << "\n";
    return 0;
}

int replay_cmd(const std::string& journal_path, const std::string& spec, const std::string& assert_final,
               const std::string& state_out) {
    auto cfg = dsl::load_config_file(spec);
    auto state = replay(read_journal(journal_path), cfg);
    json got = to_json(state);
    if (!state_out.empty()) spit(state_out, got.dump(2) + "\n");
    std::cout << "replayed to seq " << state.seq << "\n";
    if (assert_final.empty()) return 0;
    json want = json::parse(slurp(assert_final));
    if (want == got) {
        std::cout << "final state matches\n";
        return 0;
    }
    std::cerr << "final state differs: " << json::diff(want, got).dump() << "\n";
    return 1;
}

service::ApiServer* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"huntforge: evidential threat-hunting engine"};
    app.require_subcommand(1);

    std::string check_file;
    auto* check = app.add_subcommand("check", "Parse and bind a .hunt file");
    check->add_option("file", check_file, "hunt file")->required();

    std::string fmt_file;
    bool fmt_write = false;
    auto* fmt = app.add_subcommand("fmt", "Print a .hunt file in canonical form");
    fmt->add_option("file", fmt_file, "hunt file")->required();
    fmt->add_flag("-w,--write", fmt_write, "rewrite the file in place");

    std::uint64_t sim_seed = 42;
    std::string sim_out, sim_truth;
    bool sim_background = false;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic Zeus-campaign telemetry corpus");
    simulate->add_option("--seed", sim_seed, "random seed")->capture_default_str();
    simulate->add_option("--out", sim_out, "output directory")->required();
    simulate->add_option("--truth", sim_truth, "write ground truth JSON here");
    simulate->add_flag("--background-only", sim_background, "no beacon, no lateral movement");

    RunArgs ra;
    std::uint64_t run_seed = 0;
    auto* runc = app.add_subcommand("run", "Run a hunt headless until quiescent or blocked on the analyst");
    runc->add_option("--spec", ra.spec, "hunt file")->required();
    auto* tel = runc->add_option("--telemetry", ra.telemetry, "telemetry directory");
    auto* seed_opt = runc->add_option("--seed", run_seed, "generate the scenario corpus in memory");
    tel->excludes(seed_opt);
    runc->add_flag("--auto-accept", ra.auto_accept, "promote hypotheses on verifier verdicts");
    runc->add_option("--journal", ra.journal, "write the NDJSON journal here");
    runc->add_option("--state-out", ra.state_out, "write the final state JSON here");
    runc->add_option("--decisions", ra.script, "scripted analyst decisions (JSON)");
    runc->add_option("--beacon-threshold", ra.threshold, "override the beacon score threshold");
    runc->add_option("--beacon-window", ra.window, "override the beacon window, seconds");

    int port = 8080;
    std::string data_dir;
    auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
    serve->add_option("--port", port, "listen port")->capture_default_str();
    serve->add_option("--data-dir", data_dir, "journal root (default: $HUNTFORGE_DATA_DIR)");
    std::string host = "127.0.0.1";
    serve->add_option("--host", host, "listen address")->capture_default_str();

    std::string rj, rspec, rassert, rout;
    auto* rep = app.add_subcommand("replay", "Replay a journal and optionally compare the final state");
    rep->add_option("--journal", rj, "journal file")->required();
    rep->add_option("--spec", rspec, "hunt file")->required();
    rep->add_option("--assert-final", rassert, "expected final state JSON");
    rep->add_option("--state-out", rout, "write the replayed state JSON here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) {
            auto cfg = dsl::bind(dsl::parse(slurp(check_file)));
            std::cout << check_file << ": ok (" << cfg.detectors.size() << " detectors, " << cfg.cases.size()
                      << " cases, " << cfg.verifiers.size() << " verifiers, " << cfg.decisions.size()
                      << " decisions, " << cfg.actions.actions().size() << " actions)\n";
            return 0;
        }
        if (fmt->parsed()) {
            std::string text = dsl::format(dsl::parse(slurp(fmt_file)));
            if (fmt_write) spit(fmt_file, text);
            else std::cout << text;
            return 0;
        }
        if (simulate->parsed()) {
            auto params = sim_background ? telemetry::ScenarioParams::background_only() : telemetry::ScenarioParams{};
            auto sc = telemetry::generate_scenario(sim_seed, params);
            telemetry::write_corpus(sc.corpus, sim_out, "scenario");
            if (!sim_truth.empty()) {
                json pairs = json::array();
                for (const auto& [s, d] : sc.truth.beacon_pairs) pairs.push_back({{"src", s}, {"dst", d}});
                spit(sim_truth, json{{"beacon_pairs", pairs},
                                     {"infected_hosts", sc.truth.infected_hosts},
                                     {"clients", sc.truth.clients}}
                                    .dump(2) + "\n");
            }
            std::cout << "wrote " << sc.corpus.http.size() << " http, " << sc.corpus.syslog.size() << " syslog, "
                      << sc.corpus.inventories.size() << " inventories to " << sim_out << "\n";
            return 0;
        }
        if (runc->parsed()) {
            if (*seed_opt) ra.seed = run_seed;
            return run(ra);
        }
        if (serve->parsed()) {
            if (data_dir.empty())
                if (const char* env = std::getenv("HUNTFORGE_DATA_DIR")) data_dir = env;
            std::optional<fs::path> root;
            if (!data_dir.empty()) root = data_dir;
            service::SessionManager sessions(root);
            std::size_t recovered = sessions.recover_all();
            service::ApiServer server(sessions);
            g_server = &server;
            std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
            std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
            std::cout << "huntforge listening on " << host << ":" << port << " (" << recovered << " hunts recovered)"
                      << std::endl;
            server.listen(host, port);
            return 0;
        }
        if (rep->parsed()) return replay_cmd(rj, rspec, rassert, rout);
    } catch (const dsl::DslError& e) {
        std::string file = check->parsed() ? check_file : fmt->parsed() ? fmt_file : runc->parsed() ? ra.spec : rspec;
        std::cerr << file << ":" << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
