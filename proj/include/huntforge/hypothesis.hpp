#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "huntforge/evidence.hpp"
#include "huntforge/predicate.hpp"

namespace huntforge {

enum class HypothesisKind { detection, threat };
enum class HypothesisStatus { pending, accepted, rejected };
enum class Decision { accepted, rejected };

std::string_view to_string(HypothesisKind k);
std::string_view to_string(HypothesisStatus s);
std::string_view to_string(Decision d);
HypothesisKind parse_hypothesis_kind(std::string_view s);
HypothesisStatus parse_hypothesis_status(std::string_view s);
Decision parse_decision(std::string_view s);

/// Output of a verifier. Accepted verdicts always cite their rationale.
struct Verdict {
    std::string hypothesis_id;
    Decision decision = Decision::rejected;
    std::string verifier;
    std::vector<EvidenceRef> rationale;

    bool operator==(const Verdict&) const = default;
};

struct Hypothesis {
    std::string id;  // assigned by the engine when the hypothesis enters the state
    HypothesisKind kind = HypothesisKind::threat;
    Predicate predicate;
    double confidence = 0.0;
    std::vector<EvidenceRef> evidence;
    std::string origin;  // manifold that raised it
    HypothesisStatus status = HypothesisStatus::pending;
    std::vector<Verdict> verdicts;

    bool pending() const noexcept { return status == HypothesisStatus::pending; }
    bool has_verdict() const noexcept { return !verdicts.empty(); }
    const Verdict* verdict_from(std::string_view verifier) const;

    /// Checks the type invariants (confidence range, detection evidence).
    void validate() const;

    bool operator==(const Hypothesis&) const = default;
};

void to_json(nlohmann::json& j, const Verdict& v);
void from_json(const nlohmann::json& j, Verdict& v);
void to_json(nlohmann::json& j, const Hypothesis& h);
void from_json(const nlohmann::json& j, Hypothesis& h);

}  // namespace huntforge
