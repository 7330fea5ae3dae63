#include <algorithm>
#include <set>

#include "huntforge/errors.hpp"
#include "huntforge/hunt.hpp"

namespace huntforge {
namespace {

/// Depth-first expansion of a hypothesis' support down to telemetry and intel.
class ChainBuilder {
public:
    explicit ChainBuilder(const HuntState& s) : state_(s) {}

    void ref(const EvidenceRef& r) {
        if (!seen_.insert(r).second) return;
        chain_.push_back(r);
        if (r.kind == EvidenceKind::hypothesis) {
            if (const auto* h = state_.find_hypothesis(r.source)) expand(*h);
        } else if (r.kind == EvidenceKind::fact) {
            if (const auto* f = state_.k.find_fact(Predicate::parse(r.source)))
                for (const auto& link : f->provenance) ref(link);
        }
    }

    ProvenanceChain take() { return std::move(chain_); }

private:
    void expand(const Hypothesis& h) {
        for (const auto& ev : h.evidence) ref(ev);
        for (const auto& v : h.verdicts) {
            ref(EvidenceRef::verdict(v.verifier, h.id));
            for (const auto& r : v.rationale) ref(r);
        }
    }

    const HuntState& state_;
    std::set<EvidenceRef> seen_;
    ProvenanceChain chain_;
};

}  // namespace

const Hypothesis* HuntState::find_hypothesis(std::string_view id) const {
    auto it = std::find_if(hypotheses.begin(), hypotheses.end(), [&](const Hypothesis& h) { return h.id == id; });
    return it == hypotheses.end() ? nullptr : &*it;
}

const Hypothesis* HuntState::find_hypothesis(const Predicate& p) const {
    auto it = std::find_if(hypotheses.begin(), hypotheses.end(), [&](const Hypothesis& h) { return h.predicate == p; });
    return it == hypotheses.end() ? nullptr : &*it;
}

const deliberation::ActionRecommendation* HuntState::find_recommendation(std::string_view id) const {
    auto it = std::find_if(recommendations.begin(), recommendations.end(),
                           [&](const deliberation::ActionRecommendation& r) { return r.id == id; });
    return it == recommendations.end() ? nullptr : &*it;
}

std::vector<const Hypothesis*> HuntState::pending() const {
    std::vector<const Hypothesis*> out;
    for (const auto& h : hypotheses)
        if (h.pending()) out.push_back(&h);
    return out;
}

std::vector<const Hypothesis*> HuntState::awaiting_decision() const {
    std::vector<const Hypothesis*> out;
    for (const auto& h : hypotheses)
        if (h.pending() && h.has_verdict()) out.push_back(&h);
    return out;
}

bool HuntState::operator==(const HuntState& o) const {
    return seq == o.seq && k.facts == o.k.facts && hypotheses == o.hypotheses && recommendations == o.recommendations;
}

nlohmann::json to_json(const HuntState& s) {
    nlohmann::json j;
    j["seq"] = s.seq;
    j["facts"] = s.k.facts;
    nlohmann::json pending = nlohmann::json::array(), archive = nlohmann::json::array();
    for (const auto& h : s.hypotheses) (h.pending() ? pending : archive).push_back(h);
    j["hypotheses"] = pending;
    j["archive"] = archive;
    j["recommendations"] = s.recommendations;
    if (s.config) {
        const auto& c = *s.config;
        auto names = [](const auto& items) {
            std::vector<std::string> out;
            for (const auto& i : items) out.push_back(i.name);
            return out;
        };
        j["name"] = c.name;
        j["registries"] = {{"detectors", names(c.detectors)},
                           {"cases", names(c.cases)},
                           {"decisions", names(c.decisions)},
                           {"verifiers", names(c.verifiers)},
                           {"actions", names(c.actions.actions())}};
    }
    return j;
}

std::uint64_t state_digest(const HuntState& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : to_json(s).dump()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

HuntState init_hunt(std::shared_ptr<const HuntConfig> config) {
    if (!config) throw invalid("init_hunt: no config");
    config->validate();
    HuntState s;
    s.config = config;
    s.k.internal = config->internal;
    s.k.intel = config->intel;
    s.k.facts = config->seed_facts;
    return s;
}

HuntState apply_record(const HuntState& state, const StepRecord& r) {
    if (r.seq > state.seq) throw invalid("journal gap at seq " + std::to_string(r.seq));
    if (r.seq < state.seq) throw invalid("duplicate seq " + std::to_string(r.seq));
    if (r.deltas.empty()) throw invalid("empty step at seq " + std::to_string(r.seq));

    HuntState next = state;
    for (const auto& h : r.deltas.hyps_added) {
        h.validate();
        auto it = std::find_if(next.hypotheses.begin(), next.hypotheses.end(),
                               [&](const Hypothesis& x) { return x.id == h.id; });
        if (it == next.hypotheses.end()) {
            next.hypotheses.push_back(h);
        } else {
            if (!it->pending()) throw conflict("seq " + std::to_string(r.seq) + ": hypothesis " + h.id + " is not pending");
            *it = h;
        }
    }

    // Provenance is read before removal so chains see the verdicts being promoted.
    for (const auto& id : r.deltas.hyps_removed) {
        const Hypothesis* h = next.find_hypothesis(id);
        if (!h) throw not_found("seq " + std::to_string(r.seq) + ": unknown hypothesis id " + id);
        if (!h->pending()) throw conflict("seq " + std::to_string(r.seq) + ": hypothesis " + id + " is not pending");
    }
    std::vector<Fact> new_facts;
    for (const auto& p : r.deltas.facts_added) {
        if (next.k.has_fact(p)) continue;
        const Hypothesis* source = nullptr;
        for (const auto& id : r.deltas.hyps_removed)
            if (const auto* h = next.find_hypothesis(id); h && h->predicate == p) source = h;
        if (!source) throw invalid("seq " + std::to_string(r.seq) + ": fact " + p.to_string() + " has no promoted hypothesis");
        ChainBuilder b(next);
        b.ref(EvidenceRef::hypothesis(source->id));
        new_facts.push_back({p, b.take()});
    }
    for (const auto& id : r.deltas.hyps_removed) {
        auto it = std::find_if(next.hypotheses.begin(), next.hypotheses.end(),
                               [&](const Hypothesis& x) { return x.id == id; });
        bool accepted = std::find(r.deltas.facts_added.begin(), r.deltas.facts_added.end(), it->predicate) !=
                        r.deltas.facts_added.end();
        it->status = accepted ? HypothesisStatus::accepted : HypothesisStatus::rejected;
    }
    for (auto& f : new_facts) next.k.facts.push_back(std::move(f));

    for (const auto& rec : r.deltas.recommendations_added) {
        auto it = std::find_if(next.recommendations.begin(), next.recommendations.end(),
                               [&](const deliberation::ActionRecommendation& x) { return x.id == rec.id; });
        if (it == next.recommendations.end())
            next.recommendations.push_back(rec);
        else
            *it = rec;
    }
    next.seq = state.seq + 1;
    return next;
}

HuntState replay(const std::vector<StepRecord>& journal, std::shared_ptr<const HuntConfig> config) {
    HuntState s = init_hunt(std::move(config));
    for (const auto& r : journal) s = apply_record(s, r);
    return s;
}

ProvenanceChain provenance(const HuntState& state, const Predicate& fact) {
    const Fact* f = state.k.find_fact(fact);
    if (!f) throw not_found("fact not in knowledge: " + fact.to_string());
    return f->provenance;
}

}  // namespace huntforge
