#include <algorithm>
#include <cstdint>

#include "detection_cache.hpp"
#include "huntforge/errors.hpp"
#include "huntforge/hunt.hpp"
#include "huntforge/reasoning.hpp"

namespace huntforge {
namespace {

using deliberation::ActionRecommendation;
using deliberation::RecommendationStatus;

template <typename T>
const T* by_name(const std::vector<T>& items, std::string_view name) {
    auto it = std::find_if(items.begin(), items.end(), [&](const T& i) { return i.name == name; });
    return it == items.end() ? nullptr : &*it;
}

bool known(const HuntState& s, const Predicate& p) { return s.k.has_fact(p) || s.find_hypothesis(p) != nullptr; }

std::string next_hypothesis_id(const HuntState& s, std::size_t offset) {
    return "h" + std::to_string(s.hypotheses.size() + offset + 1);
}

/// Assigns ids to the hypotheses that are new to the state, dropping repeats.
std::vector<Hypothesis> admit(const HuntState& s, std::vector<Hypothesis> raised, std::size_t limit) {
    std::vector<Hypothesis> out;
    for (auto& h : raised) {
        if (out.size() == limit) break;
        if (known(s, h.predicate)) continue;
        if (std::any_of(out.begin(), out.end(), [&](const Hypothesis& o) { return o.predicate == h.predicate; }))
            continue;
        h.id = next_hypothesis_id(s, out.size());
        h.status = HypothesisStatus::pending;
        h.verdicts.clear();
        out.push_back(std::move(h));
    }
    return out;
}

std::vector<Hypothesis> run_detector(const HuntState& s, const DetectorSpec& d) {
    const auto& corpus = s.config->telemetry;
    auto found = s.config->cache ? s.config->cache->detect(d, corpus) : detectors::detect_beacons(corpus->http, d.params);
    for (auto& h : found) h.origin = d.name;
    return admit(s, std::move(found), SIZE_MAX);
}

std::vector<Hypothesis> run_case(const HuntState& s, const CaseSpec& c, const std::string& input) {
    if (c.impl == "kge") {
        const Hypothesis* d = s.find_hypothesis(input);
        if (!d || !d->pending() || d->predicate.name != c.input) return {};
        auto raised = reasoning::kge_expand(*d, s.k, c.confidence);
        std::erase_if(raised, [&](const Hypothesis& h) {
            return std::find(c.outputs.begin(), c.outputs.end(), h.predicate.name) == c.outputs.end();
        });
        for (auto& h : raised) h.origin = c.name;
        return admit(s, std::move(raised), 1);
    }
    Predicate fact = Predicate::parse(input);
    if (fact.name != c.input || !s.k.has_fact(fact)) return {};
    auto raised = reasoning::impact_assess(fact, s.k, s.config->telemetry->syslog, c.confidence);
    for (auto& h : raised) h.origin = c.name;
    return admit(s, std::move(raised), SIZE_MAX);
}

std::optional<Verdict> run_verifier(const HuntState& s, const VerifierSpec& v, const Hypothesis& h) {
    if (!h.pending() || h.predicate.name != v.predicate || h.verdict_from(v.name)) return std::nullopt;
    try {
        Verdict verdict = v.impl == "analytics" ? reasoning::verify_analytics(h, s.k)
                                                : reasoning::verify_forensics(h, s.config->telemetry->inventories, s.k);
        verdict.verifier = v.name;
        return verdict;
    } catch (const HuntError& e) {
        if (e.code() == ErrorCode::unavailable) return std::nullopt;
        throw;
    }
}

/// The policy verdict for a hypothesis: accepted only if every verifier accepted.
Decision combined_verdict(const Hypothesis& h) {
    for (const auto& v : h.verdicts)
        if (v.decision == Decision::rejected) return Decision::rejected;
    return Decision::accepted;
}

/// Subscribed facts no recommendation has been triggered by yet, in arrival order.
std::vector<Predicate> undeliberated(const HuntState& s, const DecisionSpec& d) {
    std::vector<Predicate> out;
    for (const auto& f : s.k.facts) {
        if (f.predicate.name != d.predicate) continue;
        bool used = std::any_of(s.recommendations.begin(), s.recommendations.end(),
                                [&](const ActionRecommendation& r) { return r.trigger == f.predicate; });
        if (!used) out.push_back(f.predicate);
    }
    return out;
}

std::vector<ActionRecommendation> run_decision(const HuntState& s, const DecisionSpec& d,
                                               const std::vector<std::string>& inputs) {
    std::vector<Predicate> facts;
    for (const auto& i : inputs) {
        Predicate p = Predicate::parse(i);
        if (p.name != d.predicate || !s.k.has_fact(p)) return {};
        facts.push_back(std::move(p));
    }
    auto recs = deliberate(s, facts);
    for (std::size_t i = 0; i < recs.size(); ++i) recs[i].id = "r" + std::to_string(s.recommendations.size() + i + 1);
    return recs;
}

std::pair<HuntState, StepRecord> commit(const HuntState& s, std::string manifold, StepKind kind, Deltas deltas,
                                        Actor actor) {
    StepRecord r;
    r.seq = s.seq;
    r.ts = utc_now();
    r.manifold = std::move(manifold);
    r.kind = kind;
    r.deltas = std::move(deltas);
    r.actor = std::move(actor);
    HuntState next = apply_record(s, r);
    return {std::move(next), std::move(r)};
}

Deltas promotion_deltas(const Hypothesis& h, Decision verdict) {
    Deltas d;
    d.hyps_removed.push_back(h.id);
    if (verdict == Decision::accepted) d.facts_added.push_back(h.predicate);
    return d;
}

}  // namespace

std::string_view to_string(ManifoldKind k) {
    switch (k) {
        case ManifoldKind::detector: return "detector";
        case ManifoldKind::case_manifold: return "case";
        case ManifoldKind::verifier: return "verifier";
        case ManifoldKind::gate: return "gate";
        case ManifoldKind::decision: return "decision";
    }
    return "";
}

nlohmann::json to_json(const ManifoldInvocation& inv) {
    return {{"kind", to_string(inv.kind)}, {"manifold", inv.manifold}, {"inputs", inv.inputs}};
}

std::vector<ActionRecommendation> deliberate(const HuntState& state, std::span<const Predicate> new_facts) {
    const auto& c = *state.config;
    deliberation::DeliberationContext ctx{state.k.facts, state.recommendations, c.profiles, *c.internal,
                                          c.actions,     c.costs,              c.criterion_order, c.vocabulary};
    return deliberation::deliberate(ctx, new_facts);
}

std::optional<std::pair<HuntState, StepRecord>> apply_step(const HuntState& s, const ManifoldInvocation& inv) {
    const HuntConfig& c = *s.config;
    Deltas d;
    StepKind kind = StepKind::detect;
    switch (inv.kind) {
        case ManifoldKind::detector: {
            const auto* spec = by_name(c.detectors, inv.manifold);
            if (!spec) throw not_found("unknown detector " + inv.manifold);
            d.hyps_added = run_detector(s, *spec);
            kind = StepKind::detect;
            break;
        }
        case ManifoldKind::case_manifold: {
            const auto* spec = by_name(c.cases, inv.manifold);
            if (!spec) throw not_found("unknown case manifold " + inv.manifold);
            if (inv.inputs.size() != 1) return std::nullopt;
            d.hyps_added = run_case(s, *spec, inv.inputs.front());
            kind = StepKind::case_step;
            break;
        }
        case ManifoldKind::verifier: {
            const auto* spec = by_name(c.verifiers, inv.manifold);
            if (!spec) throw not_found("unknown verifier " + inv.manifold);
            if (inv.inputs.size() != 1) return std::nullopt;
            const Hypothesis* h = s.find_hypothesis(inv.inputs.front());
            if (!h) return std::nullopt;
            auto verdict = run_verifier(s, *spec, *h);
            if (!verdict) return std::nullopt;
            Hypothesis updated = *h;
            updated.verdicts.push_back(std::move(*verdict));
            d.hyps_added.push_back(std::move(updated));
            kind = StepKind::verify;
            break;
        }
        case ManifoldKind::gate: {
            if (c.gate.gate != AnalystGate::auto_accept_on_verifier_accept || inv.inputs.size() != 1)
                return std::nullopt;
            const Hypothesis* h = s.find_hypothesis(inv.inputs.front());
            if (!h || !h->pending() || !h->has_verdict()) return std::nullopt;
            d = promotion_deltas(*h, combined_verdict(*h));
            kind = StepKind::promote;
            break;
        }
        case ManifoldKind::decision: {
            const auto* spec = by_name(c.decisions, inv.manifold);
            if (!spec) throw not_found("unknown decision manifold " + inv.manifold);
            d.recommendations_added = run_decision(s, *spec, inv.inputs);
            kind = StepKind::deliberate;
            break;
        }
    }
    if (d.empty()) return std::nullopt;
    std::string manifold = inv.kind == ManifoldKind::gate ? "auto_accept" : inv.manifold;
    return commit(s, std::move(manifold), kind, std::move(d), Actor::machine());
}

std::pair<HuntState, StepRecord> promote(const HuntState& s, std::string_view id, Decision verdict,
                                         const Actor& actor) {
    const Hypothesis* h = s.find_hypothesis(id);
    if (!h) throw not_found("unknown hypothesis " + std::string(id));
    if (!h->pending()) throw conflict("hypothesis " + std::string(id) + " is not pending");
    bool override = s.config->gate.analyst_override;
    if (!override && !h->has_verdict())
        throw conflict("hypothesis " + std::string(id) + " has no verifier verdict yet");
    if (!override && verdict == Decision::accepted && combined_verdict(*h) == Decision::rejected)
        throw conflict("hypothesis " + std::string(id) + " was rejected by a verifier; accepting needs analyst override");
    return commit(s, actor.analyst ? "analyst" : "auto_accept", StepKind::promote, promotion_deltas(*h, verdict),
                  actor);
}

std::pair<HuntState, StepRecord> dispose_recommendation(const HuntState& s, std::string_view id,
                                                        RecommendationStatus decision, const Actor& actor) {
    if (decision == RecommendationStatus::recommended) throw invalid("disposition must be approved or declined");
    const ActionRecommendation* r = s.find_recommendation(id);
    if (!r) throw not_found("unknown recommendation " + std::string(id));
    if (r->status != RecommendationStatus::recommended)
        throw conflict("recommendation " + std::string(id) + " is already " + std::string(to_string(r->status)));
    ActionRecommendation updated = *r;
    updated.status = decision;
    updated.decided_by = actor.to_string();
    Deltas d;
    d.recommendations_added.push_back(std::move(updated));
    return commit(s, "analyst", StepKind::promote, std::move(d), actor);
}

std::pair<HuntState, StepRecord> inject_hypothesis(const HuntState& s, Hypothesis h, const Actor& actor) {
    if (!s.config->vocabulary.admits(h.predicate)) throw invalid("undeclared predicate " + h.predicate.to_string());
    const auto* sig = s.config->vocabulary.find(h.predicate.name);
    h.kind = sig->kind == PredicateKind::detection ? HypothesisKind::detection : HypothesisKind::threat;
    if (known(s, h.predicate)) throw conflict(h.predicate.to_string() + " is already known");
    h.id = next_hypothesis_id(s, 0);
    h.status = HypothesisStatus::pending;
    h.verdicts.clear();
    if (h.origin.empty()) h.origin = "analyst";
    h.evidence.push_back(EvidenceRef::analyst(actor.id.empty() ? "anonymous" : actor.id));
    Deltas d;
    d.hyps_added.push_back(std::move(h));
    return commit(s, "analyst", StepKind::promote, std::move(d), actor);
}

std::vector<ManifoldInvocation> pending_work(const HuntState& s) {
    const HuntConfig& c = *s.config;
    std::vector<ManifoldInvocation> out;

    for (const auto& d : c.detectors)
        if (!run_detector(s, d).empty()) out.push_back({ManifoldKind::detector, d.name, {}});

    for (const auto& cs : c.cases) {
        if (cs.impl == "kge") {
            for (const auto& h : s.hypotheses)
                if (h.pending() && !run_case(s, cs, h.id).empty())
                    out.push_back({ManifoldKind::case_manifold, cs.name, {h.id}});
        } else {
            for (const auto& f : s.k.facts) {
                auto text = f.predicate.to_string();
                if (f.predicate.name == cs.input && !run_case(s, cs, text).empty())
                    out.push_back({ManifoldKind::case_manifold, cs.name, {text}});
            }
        }
    }

    for (const auto& v : c.verifiers)
        for (const auto& h : s.hypotheses)
            if (run_verifier(s, v, h)) out.push_back({ManifoldKind::verifier, v.name, {h.id}});

    if (c.gate.gate == AnalystGate::auto_accept_on_verifier_accept)
        for (const auto* h : s.awaiting_decision()) out.push_back({ManifoldKind::gate, "auto_accept", {h->id}});

    if (!out.empty() || !s.awaiting_decision().empty()) return out;

    for (const auto& d : c.decisions) {
        auto facts = undeliberated(s, d);
        if (facts.empty()) continue;
        std::vector<std::string> inputs;
        for (const auto& f : facts) inputs.push_back(f.to_string());
        if (!run_decision(s, d, inputs).empty()) out.push_back({ManifoldKind::decision, d.name, inputs});
    }
    return out;
}

bool quiescent(const HuntState& s) { return s.awaiting_decision().empty() && pending_work(s).empty(); }

}  // namespace huntforge
