#include "fixtures.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <sys/wait.h>

#include "huntforge/errors.hpp"
#include "huntforge/reasoning.hpp"

namespace hftest {

namespace fs = std::filesystem;
namespace tel = huntforge::telemetry;
namespace del = huntforge::deliberation;

fs::path source_dir() { return HUNTFORGE_SOURCE_DIR; }
fs::path zeus_hunt_path() { return source_dir() / "hunts" / "zeus.hunt"; }

std::string zeus_hunt_text() {
    std::ifstream in(zeus_hunt_path());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::shared_ptr<HuntConfig> zeus_config(AnalystGate gate, std::uint64_t seed) {
    auto cfg = dsl::load_config_file(zeus_hunt_path());
    cfg->telemetry = std::make_shared<tel::TelemetryCorpus>(tel::generate_scenario(seed).corpus);
    cfg->gate.gate = gate;
    return cfg;
}

Run run_machine(HuntState state) {
    Run r{std::move(state), {}};
    for (;;) {
        auto work = pending_work(r.state);
        if (work.empty()) break;
        auto step = apply_step(r.state, work.front());
        if (!step) break;
        r.state = std::move(step->first);
        r.journal.push_back(std::move(step->second));
    }
    return r;
}

Run run_machine(std::shared_ptr<const HuntConfig> cfg) { return run_machine(init_hunt(std::move(cfg))); }

fs::path cli_path() { return HUNTFORGE_CLI; }

CommandResult run_cli(const std::vector<std::string>& args) {
    auto quote = [](const std::string& a) {
        std::string q = "'";
        for (char c : a) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
        return q + "'";
    };
    std::string cmd = quote(cli_path().string());
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " 2>&1";
    CommandResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

TempDir::TempDir(const std::string& tag) {
    std::string tmpl = (fs::temp_directory_path() / ("huntforge-" + tag + "-XXXXXX")).string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

void PropertyResult::fail(std::size_t index, const std::string& why) {
    if (failures++ == 0) first_failure = "case " + std::to_string(index) + ": " + why;
}

namespace {

const std::string kZeusHash = "014e7cf503b37935247688ca1677e8159d8943035eff023813d33e70199f7bbb";
const std::string kOtherHash = "9f86d081884c7d659a2feaa0c55ad015a3bf4f1b2b0b822cd15d6c15b0f00a08";
const std::string kBenignHash = "2c26b46b68ffc68ff99b453c1d30413413422d706483bfa0f98a5e886266e7ae";

bool coin(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

tel::HttpFlow flow(double ts, const std::string& src, const std::string& dst) {
    return {ts, src, dst, 443, dst, "/", 512, 2048};
}

}  // namespace

std::shared_ptr<HuntConfig> random_hunt(std::mt19937_64& rng) {
    const double t0 = 1609459200.0, window = 86400.0;
    const std::vector<std::string> remotes = {"203.0.113.7", "198.51.100.9"};
    const int n = std::uniform_int_distribution<int>(2, 5)(rng);
    std::vector<std::string> clients;
    for (int i = 1; i <= n; ++i) clients.push_back("client" + std::to_string(i));

    auto corpus = std::make_shared<tel::TelemetryCorpus>();
    std::uniform_real_distribution<double> when(t0, t0 + window);
    for (const auto& c : clients) {
        if (coin(rng, 0.6)) {
            const double period = pick(rng, std::vector<double>{1800.0, 2700.0, 3600.0});
            const double jitter = std::uniform_real_distribution<double>(0.0, 0.05)(rng) * period;
            std::uniform_real_distribution<double> j(-jitter, jitter);
            const auto& dst = pick(rng, remotes);
            for (double t = t0 + period / 2; t < t0 + window; t += period) corpus->http.push_back(flow(t + j(rng), c, dst));
        }
        const int background = std::poisson_distribution<int>(6.0)(rng);
        for (int i = 0; i < background; ++i) corpus->http.push_back(flow(when(rng), c, "192.0.2.5"));
    }
    std::sort(corpus->http.begin(), corpus->http.end(), [](const auto& a, const auto& b) { return a.ts < b.ts; });

    for (const auto& host : clients)
        for (const auto& peer : clients)
            if (host != peer && coin(rng, 0.3))
                corpus->syslog.push_back({when(rng), host, "smbd", "smb_access", peer, "share opened"});
    std::sort(corpus->syslog.begin(), corpus->syslog.end(), [](const auto& a, const auto& b) { return a.ts < b.ts; });

    for (const auto& c : clients) {
        if (!coin(rng, 0.6)) continue;
        tel::ForensicInventory inv{c, {{kBenignHash, "C:/Windows/notepad.exe"}}};
        if (coin(rng, 0.5)) inv.artifacts.push_back({kZeusHash, "C:/Users/Public/sdra64.exe"});
        corpus->inventories[c] = inv;
    }

    auto intel = std::make_shared<IntelStore>();
    for (const auto& r : remotes)
        if (coin(rng, 0.75)) intel->cc_hosts.push_back(r);
    intel->malware.push_back({"zeus", kZeusHash});
    if (coin(rng, 0.3)) intel->malware.push_back({"emotet", kOtherHash});

    auto cfg = std::make_shared<HuntConfig>();
    cfg->name = "random";
    cfg->internal = std::make_shared<InternalKnowledge>(InternalKnowledge{clients, {"http", "syslog"}});
    cfg->intel = intel;
    cfg->telemetry = corpus;

    DetectorSpec beac;
    beac.name = "beac";
    beac.params.window = window;
    beac.params.window_start = t0;
    beac.params.max_period = 21600.0;
    beac.params.min_events = 4;
    cfg->detectors.push_back(beac);
    if (coin(rng, 0.95)) cfg->cases.push_back({"kge", "kge", "beacon", {"cec", "infected"}, 0.5});
    if (coin(rng, 0.95)) cfg->cases.push_back({"impact", "impact", "infected", {"infected"}, 0.5});
    cfg->verifiers.push_back({"analytics", "analytics", "cec", "intel"});
    cfg->verifiers.push_back({"forensics", "forensics", "infected", "inventories"});
    if (coin(rng, 0.5)) std::swap(cfg->verifiers[0], cfg->verifiers[1]);
    cfg->decisions.push_back({"malwareman", "infected"});
    cfg->decisions.push_back({"cecman", "cec"});

    if (!intel->cc_hosts.empty() && coin(rng, 0.2)) {
        const auto& cc = intel->cc_hosts.front();
        cfg->seed_facts.push_back({Predicate("cec", {cc}), {EvidenceRef::intel(cc_entry_id(cc))}});
    }

    for (const auto& c : clients) {
        if (!coin(rng, 0.5)) continue;
        del::AssetProfile p;
        p.host = c;
        p.crown_jewel = coin(rng, 0.3);
        p.critical = p.crown_jewel || coin(rng, 0.3);
        p.downtime_tolerance = pick(rng, std::vector<del::Downtime>{del::Downtime::none, del::Downtime::low,
                                                                  del::Downtime::high});
        cfg->profiles.assets[c] = p;
    }
    cfg->profiles.defender.resource_constrained = coin(rng, 0.5);
    cfg->profiles.defender.risk_averse = coin(rng, 0.5);
    if (coin(rng, 0.5)) cfg->profiles.defender.goals.insert("inform_partners");
    cfg->profiles.defender.fortify_targets = {"decoy1", "decoy2", "decoy3"};

    cfg->gate.gate = coin(rng, 0.5) ? AnalystGate::required : AnalystGate::auto_accept_on_verifier_accept;
    cfg->gate.analyst_override = coin(rng, 0.5);
    cfg->validate();
    return cfg;
}

namespace {

/// One transition of a random walk: the state before, the state after and its record.
using Observer = std::function<std::string(const HuntState&, const HuntState&, const StepRecord&)>;

struct Walk {
    HuntState final;
    std::vector<StepRecord> journal;
    std::string failure;
};

/// Mixes machine invocations (in random order) with analyst promotions and
/// dispositions. Conflicts the engine refuses are part of the walk.
Walk random_walk(std::mt19937_64& rng, const Observer& observe) {
    auto cfg = random_hunt(rng);
    Walk w{init_hunt(cfg), {}, {}};
    auto take = [&](const HuntState& before, std::pair<HuntState, StepRecord> step) {
        if (w.failure.empty()) w.failure = observe(before, step.first, step.second);
        w.journal.push_back(std::move(step.second));
        w.final = std::move(step.first);
    };
    const std::vector<std::string> analysts = {"alice", "bob"};

    for (int iter = 0; iter < 200 && w.failure.empty(); ++iter) {
        const HuntState before = w.final;
        auto work = pending_work(before);
        auto pending = before.pending();
        std::vector<const del::ActionRecommendation*> open;
        for (const auto& r : before.recommendations)
            if (r.status == del::RecommendationStatus::recommended) open.push_back(&r);

        const bool analyst_turn = (!pending.empty() || !open.empty()) && (work.empty() || coin(rng, 0.3));
        if (!analyst_turn) {
            if (work.empty()) break;
            const auto& inv = pick(rng, work);
            auto step = apply_step(before, inv);
            if (!step) {
                w.failure = "pending_work offered an inapplicable invocation " + to_json(inv).dump();
                break;
            }
            take(before, std::move(*step));
            continue;
        }
        const Actor actor = Actor::analyst_named(pick(rng, analysts));
        try {
            if (!open.empty() && (pending.empty() || coin(rng, 0.3))) {
                const auto* r = pick(rng, open);
                auto d = coin(rng, 0.7) ? del::RecommendationStatus::approved : del::RecommendationStatus::declined;
                take(before, dispose_recommendation(before, r->id, d, actor));
            } else {
                const auto* h = pick(rng, pending);
                auto d = coin(rng, 0.6) ? Decision::accepted : Decision::rejected;
                take(before, promote(before, h->id, d, actor));
            }
        } catch (const HuntError& e) {
            if (e.code() != ErrorCode::conflict) {
                w.failure = std::string("analyst action raised ") + e.what();
                break;
            }
            if (before != w.final || state_digest(before) != state_digest(w.final)) {
                w.failure = "refused analyst action changed the state";
                break;
            }
        }
    }
    return w;
}

std::set<Predicate> fact_set(const HuntState& s) {
    std::set<Predicate> out;
    for (const auto& f : s.k.facts) out.insert(f.predicate);
    return out;
}

template <typename Check>
PropertyResult walk_property(std::size_t cases, std::uint64_t seed, Observer observe, Check at_end) {
    PropertyResult res;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < cases; ++i) {
        ++res.cases;
        try {
            auto w = random_walk(rng, observe);
            res.transitions += w.journal.size();
            for (const auto& r : w.journal) res.facts += r.deltas.facts_added.size();
            if (!w.failure.empty()) {
                res.fail(i, w.failure);
                continue;
            }
            if (auto why = at_end(w); !why.empty()) res.fail(i, why);
        } catch (const std::exception& e) {
            res.fail(i, std::string("exception: ") + e.what());
        }
    }
    return res;
}

std::string no_check(const Walk&) { return {}; }

}  // namespace

PropertyResult property_knowledge_monotonicity(std::size_t cases, std::uint64_t seed) {
    return walk_property(
        cases, seed,
        [](const HuntState& before, const HuntState& after, const StepRecord&) -> std::string {
            auto a = fact_set(before), b = fact_set(after);
            if (!std::includes(b.begin(), b.end(), a.begin(), a.end())) return "a fact left K";
            for (const auto& h : before.hypotheses) {
                if (h.pending()) continue;
                const auto* now = after.find_hypothesis(std::string_view(h.id));
                if (!now || now->status != h.status) return "archived hypothesis " + h.id + " changed";
            }
            for (std::size_t i = 0; i < before.k.facts.size(); ++i)
                if (!(after.k.facts[i] == before.k.facts[i])) return "stored provenance changed";
            return {};
        },
        no_check);
}

PropertyResult property_promotion_soundness(std::size_t cases, std::uint64_t seed) {
    return walk_property(
        cases, seed,
        [](const HuntState& before, const HuntState& after, const StepRecord& r) -> std::string {
            for (const auto& p : r.deltas.facts_added) {
                if (r.kind != StepKind::promote) return "fact added by a " + std::string(to_string(r.kind)) + " step";
                bool matched = false;
                for (const auto& id : r.deltas.hyps_removed) {
                    const auto* was = before.find_hypothesis(std::string_view(id));
                    const auto* now = after.find_hypothesis(std::string_view(id));
                    if (was && was->pending() && was->predicate == p && now &&
                        now->status == HypothesisStatus::accepted)
                        matched = true;
                }
                if (!matched) return "fact " + p.to_string() + " without an accepted hypothesis";
                const auto chain = provenance(after, p);
                if (chain.empty()) return "fact " + p.to_string() + " has no provenance";
            }
            return {};
        },
        [](const Walk& w) -> std::string {
            std::set<Predicate> promoted;
            for (const auto& f : w.final.config->seed_facts) promoted.insert(f.predicate);
            for (const auto& r : w.journal)
                for (const auto& p : r.deltas.facts_added) promoted.insert(p);
            if (fact_set(w.final) != promoted) return "K differs from seeds plus promoted facts";
            return {};
        });
}

PropertyResult property_disjointness(std::size_t cases, std::uint64_t seed) {
    return walk_property(
        cases, seed,
        [](const HuntState&, const HuntState& after, const StepRecord&) -> std::string {
            std::set<std::string> ids;
            for (const auto& h : after.hypotheses) {
                if (!ids.insert(h.id).second) return "duplicate hypothesis id " + h.id;
                if (h.pending() && after.k.has_fact(h.predicate))
                    return "pending " + h.predicate.to_string() + " is also a fact";
            }
            std::set<Predicate> live;
            for (const auto* h : after.pending())
                if (!live.insert(h->predicate).second) return "two pending copies of " + h->predicate.to_string();
            return {};
        },
        no_check);
}

PropertyResult property_replay_fixpoint(std::size_t cases, std::uint64_t seed) {
    std::mt19937_64 cut(seed ^ 0x5eed);
    return walk_property(cases, seed, Observer([](const HuntState&, const HuntState&, const StepRecord&) {
                             return std::string();
                         }),
                         [&cut](const Walk& w) -> std::string {
                             const auto& cfg = w.final.config;
                             if (!(replay(w.journal, cfg) == w.final)) return "replay differs from the live state";
                             std::string text;
                             for (const auto& r : w.journal) text += write_journal_line(r) + "\n";
                             auto parsed = parse_journal(text);
                             if (!(replay(parsed, cfg) == w.final)) return "replay of serialized journal differs";
                             const std::size_t k = std::uniform_int_distribution<std::size_t>(0, w.journal.size())(cut);
                             std::vector<StepRecord> prefix(w.journal.begin(), w.journal.begin() + k);
                             HuntState s = replay(prefix, cfg);
                             for (std::size_t i = k; i < w.journal.size(); ++i) s = apply_record(s, w.journal[i]);
                             if (!(s == w.final)) return "prefix replay plus suffix differs";
                             return {};
                         });
}

PropertyResult property_step_purity(std::size_t cases, std::uint64_t seed) {
    return walk_property(
        cases, seed,
        [](const HuntState& before, const HuntState&, const StepRecord& r) -> std::string {
            if (r.actor.analyst) return {};
            const auto digest = state_digest(before);
            for (const auto& inv : pending_work(before)) {
                auto once = apply_step(before, inv);
                auto twice = apply_step(before, inv);
                if (state_digest(before) != digest) return "apply_step modified its input";
                if (!once || !twice) return "applicable invocation returned no step";
                if (!(once->first == twice->first) || !once->second.same_transition(twice->second))
                    return "apply_step is not deterministic";
            }
            return {};
        },
        no_check);
}

PropertyResult property_rank_invariance(std::size_t cases, std::uint64_t seed) {
    PropertyResult res;
    std::mt19937_64 rng(seed);
    const std::vector<del::Level> levels = {del::Level::low, del::Level::moderate, del::Level::high};
    for (std::size_t i = 0; i < cases; ++i) {
        ++res.cases;
        del::ActionCatalog catalog = del::ActionCatalog::shipped();
        const int extra = std::uniform_int_distribution<int>(0, 3)(rng);
        for (int e = 0; e < extra; ++e) catalog.add({"CUSTOM" + std::to_string(e), del::TargetKind::host,
                                                     del::Condition::crown_jewel});
        del::CostMatrix m;
        for (const auto& a : catalog.actions()) {
            del::CostVector v{};
            for (std::size_t c = 0; c < del::kCriteria; ++c) v[c] = {del::criterion_side(c), pick(rng, levels)};
            m.actions.push_back(a.name);
            m.rows[a.name] = v;
        }
        std::vector<std::string> candidates;
        for (const auto& a : catalog.actions())
            if (coin(rng, 0.7)) candidates.push_back(a.name);
        std::shuffle(candidates.begin(), candidates.end(), rng);
        std::vector<std::size_t> order = {0, 1, 2, 3, 4, 5};
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(std::uniform_int_distribution<std::size_t>(1, 6)(rng));

        std::vector<double> key = {std::uniform_real_distribution<double>(-1e6, 1e6)(rng),
                                   std::uniform_real_distribution<double>(-1e6, 1e6)(rng),
                                   std::uniform_real_distribution<double>(-1e6, 1e6)(rng)};
        std::sort(key.begin(), key.end());
        if (key[0] == key[1] || key[1] == key[2]) key = {-1.0, 0.5, 7.0};
        auto relabel = [key](del::Level l) { return key[static_cast<std::size_t>(l)]; };

        auto base = del::rank(candidates, m, order, catalog);
        auto moved = del::rank(candidates, m, order, catalog, relabel);
        std::reverse(candidates.begin(), candidates.end());
        auto reordered = del::rank(candidates, m, order, catalog);
        if (base != moved) res.fail(i, "ranking changed under a monotone relabeling");
        else if (base != reordered) res.fail(i, "ranking depends on candidate input order");
    }
    return res;
}

dsl::HuntSpecAst random_ast(std::mt19937_64& rng) {
    using namespace dsl;
    auto upto = [&](int n) { return std::uniform_int_distribution<int>(0, n)(rng); };
    auto word = [&](bool capital = false) {
        static const std::vector<std::string> stems = {"alpha", "beac", "client", "decoy", "zeus", "cc", "http",
                                                       "order_x", "on", "and", "using", "x", "known", "monitoring"};
        std::string w = pick(rng, stems);
        if (capital || coin(rng, 0.2)) w[0] = static_cast<char>(std::toupper(w[0]));
        if (coin(rng, 0.5)) w += std::to_string(upto(99));
        return w;
    };
    auto text = [&] {
        static const std::vector<std::string> pieces = {"203.0.113.7", "a b", "quote\"d", "back\\slash", "tab\t",
                                                        "line\nbreak", "", "hunt", "case", "0x1f", "#nocomment"};
        return pick(rng, pieces);
    };
    auto number = [&] {
        switch (upto(3)) {
            case 0: return static_cast<double>(upto(100000));
            case 1: return std::uniform_real_distribution<double>(-1e3, 1e3)(rng);
            case 2: return std::ldexp(std::uniform_real_distribution<double>(0.5, 1.0)(rng), upto(120) - 60);
            default: return 0.25 * upto(40);
        }
    };
    auto atom = [&] {
        switch (upto(2)) {
            case 0: return Atom::ident(word());
            case 1: return Atom::string(text());
            default: return Atom::num(number());
        }
    };
    auto items = [&](int max) {
        std::vector<ListItem> out(static_cast<std::size_t>(upto(max)));
        for (auto& it : out) {
            it.atom = atom();
            if (it.atom.kind == Atom::Kind::ident && coin(rng, 0.3)) {
                long lo = upto(20);
                it.range = {lo, lo + upto(30)};
            }
        }
        return out;
    };
    auto pattern = [&] {
        PredPattern p{word(), {}, {}};
        for (int i = upto(3); i > 0; --i) p.args.push_back(atom());
        return p;
    };
    auto patterns = [&](int min, int max) {
        std::vector<PredPattern> out;
        for (int i = min + upto(max - min); i > 0; --i) out.push_back(pattern());
        return out;
    };

    HuntSpecAst ast;
    ast.name = word();
    bool have_costs = false;
    for (int n = upto(12); n > 0; --n) {
        switch (upto(9)) {
            case 0: {
                IntelDecl d;
                d.cc = items(3);
                for (int i = upto(2); i > 0; --i) d.malware.push_back({atom(), text()});
                d.known = patterns(0, 2);
                ast.decls.emplace_back(d);
                break;
            }
            case 1: ast.decls.emplace_back(TelemetryDecl{items(3), items(3), {}}); break;
            case 2: {
                DetectorDecl d{word(), word(), {}, {}};
                for (int i = upto(4); i > 0; --i) d.params.push_back({word(), atom(), {}});
                ast.decls.emplace_back(d);
                break;
            }
            case 3: {
                CaseDecl d{word(), patterns(1, 3), patterns(1, 3), std::nullopt, {}};
                if (coin(rng, 0.5)) d.confidence = Atom::num(number()).number;
                ast.decls.emplace_back(d);
                break;
            }
            case 4: ast.decls.emplace_back(VerifierDecl{word(), word(), word(), {}}); break;
            case 5: ast.decls.emplace_back(DecisionDecl{word(), word(), {}}); break;
            case 6: ast.decls.emplace_back(ActionDecl{word(), word(), word(), {}}); break;
            case 7: {
                if (have_costs) break;
                have_costs = true;
                CostsDecl d;
                static const std::vector<std::string> lv = {"low", "moderate", "high", "huge"};
                for (int i = upto(4); i > 0; --i) {
                    CostRow r;
                    r.action = coin(rng, 0.5) ? "QUARANTINE" : word(true);
                    for (int c = upto(6); c > 0; --c) r.cells.emplace_back("C" + std::to_string(upto(7)), pick(rng, lv));
                    d.rows.push_back(r);
                }
                for (int i = coin(rng, 0.5) ? upto(6) : 0; i > 0; --i) d.order.push_back("C" + std::to_string(1 + upto(5)));
                ast.decls.emplace_back(d);
                break;
            }
            case 8: {
                ProfileDecl d;
                d.defender = coin(rng, 0.4);
                if (!d.defender) d.host = coin(rng, 0.5) ? word() : text();
                for (int i = 1 + upto(3); i > 0; --i) {
                    Flag f;
                    f.name = coin(rng, 0.3) ? "downtime" : word();
                    if (f.name == "downtime") f.value = atom();
                    else if (coin(rng, 0.4)) {
                        f.list = items(3);
                        f.has_list = true;
                    }
                    d.flags.push_back(f);
                }
                ast.decls.emplace_back(d);
                break;
            }
            default: ast.decls.emplace_back(GoalDecl{word(), {}}); break;
        }
    }
    return ast;
}

PropertyResult property_dsl_roundtrip(std::size_t cases, std::uint64_t seed) {
    PropertyResult res;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < cases; ++i) {
        ++res.cases;
        auto ast = random_ast(rng);
        const std::string text = dsl::format(ast);
        try {
            auto back = dsl::parse(text);
            if (!(back == ast)) res.fail(i, "parse(format(ast)) differs:\n" + text);
            else if (dsl::format(back) != text) res.fail(i, "format is not stable:\n" + text);
        } catch (const std::exception& e) {
            res.fail(i, std::string(e.what()) + "\n" + text);
        }
    }
    return res;
}

}  // namespace hftest
