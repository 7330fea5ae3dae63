#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "huntforge/deliberation.hpp"
#include "huntforge/detectors.hpp"
#include "huntforge/hypothesis.hpp"
#include "huntforge/knowledge.hpp"
#include "huntforge/predicate.hpp"
#include "huntforge/telemetry.hpp"

namespace huntforge {

/// Δ entry. `impl` names the built-in algorithm; `source` the telemetry it reads.
struct DetectorSpec {
    std::string name;
    std::string impl = "beac";
    std::string source = "http";
    detectors::BeaconDetectionParams params;
};

/// Φ entry. kge consumes detection hypotheses, impact consumes accepted facts.
struct CaseSpec {
    std::string name;
    std::string impl;
    std::string input;                 // predicate name matched by the `when` pattern
    std::vector<std::string> outputs;  // predicate names it may hypothesize
    double confidence = 0.5;
};

/// Γ entry.
struct VerifierSpec {
    std::string name;
    std::string impl;
    std::string predicate;
    std::string evidence;  // "intel" or "inventories"
};

/// Ψ entry: deliberates over accepted facts of one predicate.
struct DecisionSpec {
    std::string name;
    std::string predicate;
};

enum class AnalystGate { required, auto_accept_on_verifier_accept };
std::string_view to_string(AnalystGate g);
AnalystGate parse_analyst_gate(std::string_view s);

struct GateOptions {
    AnalystGate gate = AnalystGate::required;
    /// Lets an analyst accept without a verdict, or against a rejection.
    bool analyst_override = false;
};

class DetectionCache;

/// Everything init_hunt needs: registries, stores, profiles and telemetry.
struct HuntConfig {
    std::string name = "hunt";
    Vocabulary vocabulary = Vocabulary::builtin();
    std::vector<DetectorSpec> detectors;
    std::vector<CaseSpec> cases;
    std::vector<VerifierSpec> verifiers;
    std::vector<DecisionSpec> decisions;
    deliberation::ActionCatalog actions = deliberation::ActionCatalog::shipped();
    deliberation::CostMatrix costs = deliberation::default_cost_matrix();
    std::vector<std::size_t> criterion_order = deliberation::default_criterion_order();
    deliberation::Profiles profiles;
    std::shared_ptr<const InternalKnowledge> internal = std::make_shared<InternalKnowledge>();
    std::shared_ptr<const IntelStore> intel = std::make_shared<IntelStore>();
    /// Facts known from intelligence before the hunt starts.
    std::vector<Fact> seed_facts;
    std::shared_ptr<const telemetry::TelemetryCorpus> telemetry = std::make_shared<telemetry::TelemetryCorpus>();
    GateOptions gate;
    std::shared_ptr<DetectionCache> cache;

    /// Duplicate registry names, undeclared predicates, unknown built-ins.
    void validate() const;
};

/// Copy of `config` that sees `corpus` instead of its telemetry.
std::shared_ptr<const HuntConfig> with_telemetry(const HuntConfig& config,
                                                 std::shared_ptr<const telemetry::TelemetryCorpus> corpus);

enum class StepKind { detect, case_step, verify, deliberate, promote };
std::string_view to_string(StepKind k);
StepKind parse_step_kind(std::string_view s);

struct Actor {
    bool analyst = false;
    std::string id;

    static Actor machine() { return {}; }
    static Actor analyst_named(std::string id) { return {true, std::move(id)}; }
    /// "machine" or "analyst:<id>".
    std::string to_string() const;
    static Actor parse(std::string_view text);
    bool operator==(const Actor&) const = default;
};

struct Deltas {
    std::vector<Predicate> facts_added;
    std::vector<Hypothesis> hyps_added;  // upsert by id
    std::vector<std::string> hyps_removed;
    std::vector<deliberation::ActionRecommendation> recommendations_added;  // upsert by id

    bool empty() const noexcept {
        return facts_added.empty() && hyps_added.empty() && hyps_removed.empty() && recommendations_added.empty();
    }
    bool operator==(const Deltas&) const = default;
};

struct StepRecord {
    std::uint64_t seq = 0;
    std::string ts;  // RFC 3339 UTC; not part of equality
    std::string manifold;
    StepKind kind = StepKind::detect;
    Deltas deltas;
    Actor actor;

    /// Equality ignoring the timestamp.
    bool same_transition(const StepRecord& o) const {
        return seq == o.seq && manifold == o.manifold && kind == o.kind && deltas == o.deltas && actor == o.actor;
    }
};

void to_json(nlohmann::json& j, const StepRecord& r);
void from_json(const nlohmann::json& j, StepRecord& r);

/// The tuple (K, H, Δ, Φ, Ψ, Γ, A) plus the step counter.
/// Registries and stores are read through `config`; H keeps every hypothesis
/// ever raised, pending ones form the live set and decided ones the archive.
struct HuntState {
    std::uint64_t seq = 0;
    std::shared_ptr<const HuntConfig> config;
    KnowledgeBase k;
    std::vector<Hypothesis> hypotheses;
    std::vector<deliberation::ActionRecommendation> recommendations;

    const Hypothesis* find_hypothesis(std::string_view id) const;
    const Hypothesis* find_hypothesis(const Predicate& p) const;
    const deliberation::ActionRecommendation* find_recommendation(std::string_view id) const;
    std::vector<const Hypothesis*> pending() const;
    /// Pending hypotheses that carry a verdict and wait for a promotion.
    std::vector<const Hypothesis*> awaiting_decision() const;

    /// Equality over seq, knowledge, hypotheses and recommendations.
    bool operator==(const HuntState& o) const;
};

nlohmann::json to_json(const HuntState& s);
/// Stable digest of the state's JSON form.
std::uint64_t state_digest(const HuntState& s);

enum class ManifoldKind { detector, case_manifold, verifier, gate, decision };
std::string_view to_string(ManifoldKind k);

/// A manifold applied to concrete inputs: hypothesis ids or fact texts.
struct ManifoldInvocation {
    ManifoldKind kind = ManifoldKind::detector;
    std::string manifold;
    std::vector<std::string> inputs;

    bool operator==(const ManifoldInvocation&) const = default;
};

nlohmann::json to_json(const ManifoldInvocation& inv);

HuntState init_hunt(std::shared_ptr<const HuntConfig> config);

/// One transition. Returns nullopt ("no step") when the invocation is outside
/// the manifold's domain or would change nothing. The input state is not modified.
std::optional<std::pair<HuntState, StepRecord>> apply_step(const HuntState& state, const ManifoldInvocation& inv);

/// Analyst (or policy) decision on a pending hypothesis.
std::pair<HuntState, StepRecord> promote(const HuntState& state, std::string_view hypothesis_id, Decision verdict,
                                         const Actor& actor);

/// Analyst disposition of a recommendation: approved or declined.
std::pair<HuntState, StepRecord> dispose_recommendation(const HuntState& state, std::string_view recommendation_id,
                                                        deliberation::RecommendationStatus decision,
                                                        const Actor& actor);

/// Adds an analyst-authored hypothesis to H.
std::pair<HuntState, StepRecord> inject_hypothesis(const HuntState& state, Hypothesis h, const Actor& actor);

/// Every applicable invocation in execution order: detectors, cases, verifiers,
/// policy promotions, then decisions. Decisions are offered only once nothing
/// else is runnable and no verdict waits for the analyst, so one deliberation
/// batch sees every fact of a campaign.
std::vector<ManifoldInvocation> pending_work(const HuntState& state);

/// No work left and nothing waiting on the analyst.
bool quiescent(const HuntState& state);

/// Folds one record's deltas into the state. Throws on a seq mismatch or a
/// delta that references an unknown hypothesis.
HuntState apply_record(const HuntState& state, const StepRecord& record);

HuntState replay(const std::vector<StepRecord>& journal, std::shared_ptr<const HuntConfig> config);

/// Provenance chain stored with an accepted fact.
ProvenanceChain provenance(const HuntState& state, const Predicate& fact);

/// Deliberation over the given facts with the state's profiles and catalog.
std::vector<deliberation::ActionRecommendation> deliberate(const HuntState& state,
                                                           std::span<const Predicate> new_facts);

/// Current UTC time in RFC 3339 with milliseconds.
std::string utc_now();

std::string write_journal_line(const StepRecord& r);
std::vector<StepRecord> parse_journal(std::string_view text);
std::vector<StepRecord> read_journal(const std::filesystem::path& file);
void write_journal(const std::vector<StepRecord>& journal, const std::filesystem::path& file);

}  // namespace huntforge
