#include "huntforge/hypothesis.hpp"

#include <algorithm>
#include <cmath>

#include "huntforge/errors.hpp"

namespace huntforge {

std::string_view to_string(HypothesisKind k) {
    return k == HypothesisKind::detection ? "detection" : "threat";
}

std::string_view to_string(HypothesisStatus s) {
    switch (s) {
        case HypothesisStatus::pending: return "pending";
        case HypothesisStatus::accepted: return "accepted";
        case HypothesisStatus::rejected: return "rejected";
    }
    return "pending";
}

std::string_view to_string(Decision d) { return d == Decision::accepted ? "accepted" : "rejected"; }

HypothesisKind parse_hypothesis_kind(std::string_view s) {
    if (s == "detection") return HypothesisKind::detection;
    if (s == "threat") return HypothesisKind::threat;
    throw invalid("unknown hypothesis kind '" + std::string(s) + "'");
}

HypothesisStatus parse_hypothesis_status(std::string_view s) {
    if (s == "pending") return HypothesisStatus::pending;
    if (s == "accepted") return HypothesisStatus::accepted;
    if (s == "rejected") return HypothesisStatus::rejected;
    throw invalid("unknown hypothesis status '" + std::string(s) + "'");
}

Decision parse_decision(std::string_view s) {
    if (s == "accepted") return Decision::accepted;
    if (s == "rejected") return Decision::rejected;
    throw invalid("unknown verdict '" + std::string(s) + "' (expected accepted|rejected)");
}

const Verdict* Hypothesis::verdict_from(std::string_view verifier) const {
    auto it = std::find_if(verdicts.begin(), verdicts.end(),
                           [&](const Verdict& v) { return v.verifier == verifier; });
    return it == verdicts.end() ? nullptr : &*it;
}

void Hypothesis::validate() const {
    if (!std::isfinite(confidence) || confidence < 0.0 || confidence > 1.0)
        throw invalid("hypothesis " + predicate.to_string() + ": confidence outside [0,1]");
    if (kind == HypothesisKind::detection && evidence.empty())
        throw invalid("detection hypothesis " + predicate.to_string() + " carries no evidence");
}

void to_json(nlohmann::json& j, const Verdict& v) {
    j = nlohmann::json{{"hypothesis", v.hypothesis_id},
                       {"decision", to_string(v.decision)},
                       {"verifier", v.verifier},
                       {"rationale", v.rationale}};
}

void from_json(const nlohmann::json& j, Verdict& v) {
    j.at("hypothesis").get_to(v.hypothesis_id);
    v.decision = parse_decision(j.at("decision").get<std::string>());
    j.at("verifier").get_to(v.verifier);
    v.rationale = j.value("rationale", std::vector<EvidenceRef>{});
}

void to_json(nlohmann::json& j, const Hypothesis& h) {
    j = nlohmann::json{{"id", h.id},
                       {"kind", to_string(h.kind)},
                       {"predicate", h.predicate},
                       {"confidence", h.confidence},
                       {"evidence", h.evidence},
                       {"origin", h.origin},
                       {"status", to_string(h.status)}};
    if (!h.verdicts.empty()) j["verdicts"] = h.verdicts;
}

void from_json(const nlohmann::json& j, Hypothesis& h) {
    j.at("id").get_to(h.id);
    h.kind = parse_hypothesis_kind(j.at("kind").get<std::string>());
    j.at("predicate").get_to(h.predicate);
    j.at("confidence").get_to(h.confidence);
    h.evidence = j.value("evidence", std::vector<EvidenceRef>{});
    h.origin = j.value("origin", std::string{});
    h.status = parse_hypothesis_status(j.value("status", std::string("pending")));
    h.verdicts = j.value("verdicts", std::vector<Verdict>{});
}

}  // namespace huntforge
