#include <algorithm>
#include <fstream>
#include <sstream>

#include "../core/detection_cache.hpp"
#include "huntforge/dsl/dsl.hpp"

namespace huntforge::dsl {
namespace {

[[noreturn]] void fail(const std::string& message, const Span& span) {
    throw DslError(ErrorCode::bind, message, span);
}

/// Runs a store-level check and reports its failure at the declaration.
template <typename F>
auto at_span(const Span& span, F&& f) {
    try {
        return f();
    } catch (const DslError&) {
        throw;
    } catch (const HuntError& e) {
        fail(e.what(), span);
    }
}

class Binder {
public:
    Binder(const HuntSpecAst& ast, const BuiltinRegistry& b) : ast_(ast), builtins_(b) {}

    HuntConfig run() {
        cfg_.name = ast_.name;
        cfg_.actions = deliberation::ActionCatalog{};
        // Stores first: later declarations resolve names against them.
        for (const auto& d : ast_.decls) {
            if (auto* t = std::get_if<TelemetryDecl>(&d)) telemetry(*t);
            if (auto* i = std::get_if<IntelDecl>(&d)) intel(*i);
            if (auto* a = std::get_if<ActionDecl>(&d)) action(*a);
        }
        cfg_.internal = std::make_shared<InternalKnowledge>(internal_);
        at_span(ast_.span, [&] { intel_.validate(); return 0; });
        cfg_.intel = std::make_shared<IntelStore>(intel_);
        for (const auto& d : ast_.decls) {
            if (auto* i = std::get_if<IntelDecl>(&d)) seeds(*i);
            if (auto* x = std::get_if<DetectorDecl>(&d)) detector(*x);
            if (auto* x = std::get_if<CaseDecl>(&d)) case_decl(*x);
            if (auto* x = std::get_if<VerifierDecl>(&d)) verifier(*x);
            if (auto* x = std::get_if<DecisionDecl>(&d)) decision(*x);
            if (auto* x = std::get_if<ProfileDecl>(&d)) profile(*x);
            if (auto* x = std::get_if<GoalDecl>(&d)) cfg_.profiles.defender.goals.insert(x->name);
        }
        const CostsDecl* costs = nullptr;
        for (const auto& d : ast_.decls)
            if (auto* c = std::get_if<CostsDecl>(&d)) costs = c;
        cost_matrix(costs);
        at_span(ast_.span, [&] { cfg_.validate(); return 0; });
        return std::move(cfg_);
    }

private:
    void telemetry(const TelemetryDecl& d) {
        for (auto& e : expand(d.endpoints)) internal_.endpoints.push_back(std::move(e));
        for (auto& m : expand(d.monitoring)) {
            if (m != "http" && m != "syslog") fail("unknown telemetry source '" + m + "' (expected http or syslog)", d.span);
            internal_.monitoring.push_back(std::move(m));
        }
    }

    void intel(const IntelDecl& d) {
        for (auto& h : expand(d.cc)) intel_.cc_hosts.push_back(std::move(h));
        for (const auto& m : d.malware) intel_.malware.push_back({m.name.text, m.sha256});
    }

    void seeds(const IntelDecl& d) {
        for (const auto& p : d.known) {
            Predicate pred = ground(p);
            Fact f{pred, {}};
            for (const auto& a : pred.args) {
                if (intel_.has_entry(cc_entry_id(a))) f.provenance.push_back(EvidenceRef::intel(cc_entry_id(a)));
                if (intel_.find_malware(a)) f.provenance.push_back(EvidenceRef::intel(malware_entry_id(a)));
            }
            if (f.provenance.empty()) fail("known fact " + pred.to_string() + " cites no intel entry", p.span);
            cfg_.seed_facts.push_back(std::move(f));
        }
    }

    Predicate ground(const PredPattern& p) {
        signature(p, std::nullopt);
        Predicate out;
        out.name = p.name;
        for (const auto& a : p.args) {
            if (a.variable()) fail("known fact " + p.name + " must be ground, " + a.text + " is a variable", p.span);
            out.args.push_back(a.text);
        }
        return out;
    }

    const PredicateSignature& signature(const PredPattern& p, std::optional<PredicateKind> kind) {
        const auto* sig = cfg_.vocabulary.find(p.name);
        if (!sig) fail("undeclared predicate '" + p.name + "'", p.span);
        if (sig->arity != p.args.size())
            fail("predicate " + p.name + " takes " + std::to_string(sig->arity) + " arguments, got " +
                     std::to_string(p.args.size()),
                 p.span);
        if (kind && sig->kind != *kind)
            fail("predicate " + p.name + " is a " + (sig->kind == PredicateKind::detection ? "detection" : "threat") +
                     " predicate here",
                 p.span);
        return *sig;
    }

    void detector(const DetectorDecl& d) {
        if (!builtins_.detectors.count(d.name)) fail("unknown detector '" + d.name + "'", d.span);
        if (std::find(internal_.monitoring.begin(), internal_.monitoring.end(), d.source) == internal_.monitoring.end())
            fail("detector " + d.name + " reads undeclared telemetry source '" + d.source + "'", d.span);
        DetectorSpec spec{d.name, d.name, d.source, {}};
        auto& p = spec.params;
        for (const auto& param : d.params) {
            if (param.value.kind != Atom::Kind::number)
                fail("detector parameter " + param.name + " must be a number", param.span);
            double v = param.value.number;
            if (param.name == "threshold") p.score_threshold = v;
            else if (param.name == "bin_width") p.bin_width = v;
            else if (param.name == "window") p.window = v;
            else if (param.name == "min_events") p.min_events = static_cast<std::uint64_t>(std::max(0.0, v));
            else if (param.name == "max_period") p.max_period = v;
            else if (param.name == "smoothing") p.smoothing_bins = v;
            else if (param.name == "window_start") p.window_start = v;
            else fail("unknown detector parameter '" + param.name + "'", param.span);
        }
        at_span(d.span, [&] { p.validate(); return 0; });
        cfg_.detectors.push_back(std::move(spec));
    }

    void case_decl(const CaseDecl& d) {
        if (!builtins_.cases.count(d.name)) fail("unknown case manifold '" + d.name + "'", d.span);
        if (d.when.size() != 1) fail("case " + d.name + " takes exactly one input pattern", d.span);
        bool kge = d.name == "kge";
        const auto& in = d.when.front();
        // kge: detection hypothesis x K -> threat; impact: threat fact x K -> threat.
        signature(in, kge ? PredicateKind::detection : PredicateKind::threat);
        CaseSpec spec{d.name, d.name, in.name, {}, d.confidence.value_or(0.5)};
        for (const auto& o : d.outputs) {
            signature(o, PredicateKind::threat);
            bool allowed = kge ? (o.name == "cec" || o.name == "infected") : o.name == "infected";
            if (!allowed) fail("case " + d.name + " cannot hypothesize " + o.name, o.span);
            spec.outputs.push_back(o.name);
        }
        if (spec.confidence < 0.0 || spec.confidence > 1.0) fail("confidence must lie in [0,1]", d.span);
        cfg_.cases.push_back(std::move(spec));
    }

    void verifier(const VerifierDecl& d) {
        if (!builtins_.verifiers.count(d.name)) fail("unknown verifier '" + d.name + "'", d.span);
        const auto* sig = cfg_.vocabulary.find(d.predicate);
        if (!sig) fail("undeclared predicate '" + d.predicate + "'", d.span);
        if (sig->kind != PredicateKind::threat)
            fail("verifier " + d.name + " on " + d.predicate +
                     ": verifiers take threat hypotheses, not detection hypotheses",
                 d.span);
        std::string want = d.name == "analytics" ? "cec" : "infected";
        if (d.predicate != want) fail("verifier " + d.name + " verifies " + want + ", not " + d.predicate, d.span);
        std::string source = d.name == "analytics" ? "intel" : "inventories";
        if (d.evidence != source) fail("verifier " + d.name + " uses " + source + ", not " + d.evidence, d.span);
        cfg_.verifiers.push_back({d.name, d.name, d.predicate, d.evidence});
    }

    void decision(const DecisionDecl& d) {
        const auto* sig = cfg_.vocabulary.find(d.predicate);
        if (!sig) fail("undeclared predicate '" + d.predicate + "'", d.span);
        if (sig->kind != PredicateKind::threat) fail("decision " + d.name + " must subscribe to threat facts", d.span);
        cfg_.decisions.push_back({d.name, d.predicate});
    }

    void action(const ActionDecl& d) {
        if (!builtins_.actions.count(d.name)) fail("unknown action '" + d.name + "'", d.span);
        deliberation::ActionSpec spec;
        spec.name = d.name;
        spec.target = at_span(d.span, [&] { return deliberation::parse_target_kind(d.target_kind); });
        spec.condition = at_span(d.span, [&] { return deliberation::parse_condition(d.condition); });
        at_span(d.span, [&] { cfg_.actions.add(spec); return 0; });
    }

    void cost_matrix(const CostsDecl* d) {
        if (!d) {
            auto base = deliberation::default_cost_matrix();
            deliberation::CostMatrix m;
            for (const auto& a : cfg_.actions.actions()) {
                if (!base.rows.count(a.name)) fail("missing cost row for " + a.name, ast_.span);
                m.actions.push_back(a.name);
                m.rows[a.name] = base.rows[a.name];
            }
            cfg_.costs = std::move(m);
            return;
        }
        deliberation::CostDeclaration decl;
        for (const auto& r : d->rows) {
            decl.rows.emplace_back(r.action, r.cells);
            at_span(r.span, [&] {
                for (const auto& [c, l] : r.cells) {
                    deliberation::parse_criterion(c);
                    deliberation::parse_level(l);
                }
                return 0;
            });
        }
        cfg_.costs = at_span(d->span, [&] { return deliberation::load_cost_matrix(decl, cfg_.actions); });
        if (!d->order.empty()) {
            std::vector<std::size_t> order;
            for (const auto& c : d->order) order.push_back(at_span(d->span, [&] { return deliberation::parse_criterion(c); }));
            cfg_.criterion_order = std::move(order);
        }
    }

    void profile(const ProfileDecl& d) {
        if (d.defender) {
            auto& def = cfg_.profiles.defender;
            for (const auto& f : d.flags) {
                if (f.name == "risk_averse") def.risk_averse = true;
                else if (f.name == "resource_constrained") def.resource_constrained = true;
                else if (f.name == "fortify" && f.has_list) def.fortify_targets = expand(f.list);
                else fail("unknown defender flag '" + f.name + "'", f.span);
            }
            return;
        }
        if (!internal_.has_endpoint(d.host)) fail("profile for unknown host '" + d.host + "'", d.span);
        auto& a = cfg_.profiles.assets[d.host];
        a.host = d.host;
        for (const auto& f : d.flags) {
            if (f.name == "crown_jewel") a.crown_jewel = a.critical = true;
            else if (f.name == "critical") a.critical = true;
            else if (f.name == "downtime" && f.value)
                a.downtime_tolerance = at_span(f.span, [&] { return deliberation::parse_downtime(f.value->text); });
            else fail("unknown asset flag '" + f.name + "'", f.span);
        }
    }

    const HuntSpecAst& ast_;
    const BuiltinRegistry& builtins_;
    HuntConfig cfg_;
    InternalKnowledge internal_;
    IntelStore intel_;
};

}  // namespace

BuiltinRegistry BuiltinRegistry::standard() {
    return {{"beac"}, {"kge", "impact"}, {"analytics", "forensics"}, {"QUARANTINE", "CONTAIN", "MISDIRECT", "FORTIFY", "SHARE"}};
}

HuntConfig bind(const HuntSpecAst& ast, const BuiltinRegistry& builtins) { return Binder(ast, builtins).run(); }

std::shared_ptr<HuntConfig> load_config(std::string_view text) {
    auto cfg = std::make_shared<HuntConfig>(bind(parse(text)));
    cfg->cache = std::make_shared<DetectionCache>();
    return cfg;
}

std::shared_ptr<HuntConfig> load_config_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw not_found("hunt file not found: " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config(ss.str());
}

}  // namespace huntforge::dsl
