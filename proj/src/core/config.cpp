#include <algorithm>
#include <set>

#include "detection_cache.hpp"
#include "huntforge/errors.hpp"
#include "huntforge/hunt.hpp"

namespace huntforge {
namespace {

HuntError bind_error(const std::string& what) { return {ErrorCode::bind, what}; }

template <typename T>
void unique_names(const std::vector<T>& items, std::string_view registry) {
    std::set<std::string> seen;
    for (const auto& i : items)
        if (!seen.insert(i.name).second)
            throw bind_error("duplicate " + std::string(registry) + " name '" + i.name + "'");
}

const PredicateSignature& declared(const Vocabulary& v, const std::string& name, const std::string& where) {
    const auto* sig = v.find(name);
    if (!sig) throw bind_error(where + ": undeclared predicate '" + name + "'");
    return *sig;
}

}  // namespace

std::string_view to_string(AnalystGate g) {
    return g == AnalystGate::required ? "required" : "auto_accept_on_verifier_accept";
}

AnalystGate parse_analyst_gate(std::string_view s) {
    if (s == "required") return AnalystGate::required;
    if (s == "auto_accept_on_verifier_accept" || s == "auto_accept") return AnalystGate::auto_accept_on_verifier_accept;
    throw invalid("unknown analyst gate '" + std::string(s) + "'");
}

void HuntConfig::validate() const {
    unique_names(detectors, "detector");
    unique_names(cases, "case");
    unique_names(verifiers, "verifier");
    unique_names(decisions, "decision");

    for (const auto& d : detectors) {
        if (d.impl != "beac") throw bind_error("detector " + d.name + ": unknown built-in '" + d.impl + "'");
        if (d.source != "http") throw bind_error("detector " + d.name + ": beac reads http telemetry, not " + d.source);
        d.params.validate();
    }
    for (const auto& c : cases) {
        const auto& in = declared(vocabulary, c.input, "case " + c.name);
        for (const auto& o : c.outputs)
            if (declared(vocabulary, o, "case " + c.name).kind != PredicateKind::threat)
                throw bind_error("case " + c.name + ": output " + o + " must be a threat predicate");
        if (c.impl == "kge") {
            if (in.kind != PredicateKind::detection)
                throw bind_error("case " + c.name + ": kge expands detection hypotheses, " + c.input + " is a threat");
        } else if (c.impl == "impact") {
            if (in.kind != PredicateKind::threat)
                throw bind_error("case " + c.name + ": impact reads threat facts, " + c.input + " is a detection");
        } else {
            throw bind_error("case " + c.name + ": unknown built-in '" + c.impl + "'");
        }
        if (c.confidence < 0.0 || c.confidence > 1.0)
            throw bind_error("case " + c.name + ": confidence must lie in [0,1]");
    }
    for (const auto& v : verifiers) {
        const auto& sig = declared(vocabulary, v.predicate, "verifier " + v.name);
        if (sig.kind != PredicateKind::threat)
            throw bind_error("verifier " + v.name + ": verifiers take threat hypotheses, " + v.predicate +
                             " is a detection predicate");
        if (v.impl == "analytics") {
            if (v.predicate != "cec") throw bind_error("verifier " + v.name + ": analytics verifies cec, not " + v.predicate);
        } else if (v.impl == "forensics") {
            if (v.predicate != "infected")
                throw bind_error("verifier " + v.name + ": forensics verifies infected, not " + v.predicate);
        } else {
            throw bind_error("verifier " + v.name + ": unknown built-in '" + v.impl + "'");
        }
    }
    for (const auto& d : decisions)
        if (declared(vocabulary, d.predicate, "decision " + d.name).kind != PredicateKind::threat)
            throw bind_error("decision " + d.name + ": decisions take threat facts");
    for (const auto& a : actions.actions())
        if (!costs.rows.count(a.name)) throw bind_error("missing cost row for " + a.name);
    for (auto c : criterion_order)
        if (c >= deliberation::kCriteria) throw bind_error("criterion order names an unknown criterion");
    for (const auto& [host, p] : profiles.assets) p.validate();
    for (const auto& f : seed_facts)
        if (!vocabulary.admits(f.predicate)) throw bind_error("seed fact " + f.predicate.to_string() + " is undeclared");
    intel->validate();
}

std::shared_ptr<const HuntConfig> with_telemetry(const HuntConfig& config,
                                                 std::shared_ptr<const telemetry::TelemetryCorpus> corpus) {
    auto next = std::make_shared<HuntConfig>(config);
    next->telemetry = std::move(corpus);
    return next;
}

std::vector<Hypothesis> DetectionCache::detect(const DetectorSpec& spec,
                                               const std::shared_ptr<const telemetry::TelemetryCorpus>& corpus) {
    Key key{spec.name, corpus.get(), corpus->http.size()};
    {
        std::lock_guard lock(mu_);
        if (auto it = entries_.find(key); it != entries_.end()) return it->second.found;
    }
    auto found = detectors::detect_beacons(corpus->http, spec.params);
    std::lock_guard lock(mu_);
    entries_.emplace(key, Entry{corpus, found});
    return found;
}

}  // namespace huntforge
