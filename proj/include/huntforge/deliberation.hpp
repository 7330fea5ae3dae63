#pragma once

#include <array>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "huntforge/knowledge.hpp"
#include "huntforge/predicate.hpp"

namespace huntforge::deliberation {

enum class Level { low, moderate, high };
enum class Side { defender, attacker };

std::string_view to_string(Level l);
std::string_view to_string(Side s);
Level parse_level(std::string_view s);

inline constexpr std::size_t kCriteria = 6;

/// C1 system downtime, C2 allocated resources, C3 analysis time, C4 defender risk
/// (defender side); C5 threat intel acquisition, C6 attacker risk (attacker side).
std::string_view criterion_name(std::size_t index);
std::string_view criterion_label(std::size_t index);
/// "C1".."C6" -> 0..5. Throws HuntError(invalid_argument) for anything else.
std::size_t parse_criterion(std::string_view name);
Side criterion_side(std::size_t index);

struct CostValue {
    Side side = Side::defender;
    Level level = Level::low;

    bool operator==(const CostValue&) const = default;
};

using CostVector = std::array<CostValue, kCriteria>;

struct CostMatrix {
    std::vector<std::string> actions;  // row order
    std::map<std::string, CostVector> rows;

    const CostVector& row(std::string_view action) const;
    bool operator==(const CostMatrix&) const = default;
};

enum class TargetKind { host, decoy_set, intel_bundle };
enum class Condition { crown_jewel, no_downtime, resource_constrained, risk_averse, inform_partners };

std::string_view to_string(TargetKind k);
std::string_view to_string(Condition c);
TargetKind parse_target_kind(std::string_view s);
Condition parse_condition(std::string_view s);
/// Human-readable reason shown with a recommendation, e.g. "if target is a crown jewel".
std::string_view condition_text(Condition c);

struct ActionSpec {
    std::string name;
    TargetKind target = TargetKind::host;
    Condition condition = Condition::crown_jewel;

    bool operator==(const ActionSpec&) const = default;
};

class ActionCatalog {
public:
    /// QUARANTINE, CONTAIN, MISDIRECT, FORTIFY, SHARE.
    static ActionCatalog shipped();

    /// Throws HuntError(invalid_argument) on a duplicate name.
    void add(ActionSpec spec);
    const ActionSpec* find(std::string_view name) const;
    /// Declaration position; throws HuntError(not_found) for unknown actions.
    std::size_t index(std::string_view name) const;
    const std::vector<ActionSpec>& actions() const noexcept { return actions_; }
    bool empty() const noexcept { return actions_.empty(); }

    bool operator==(const ActionCatalog&) const = default;

private:
    std::vector<ActionSpec> actions_;
};

/// The shipped action cost table.
CostMatrix default_cost_matrix();

/// Textual cost declaration: per action, (criterion, level) pairs as written.
struct CostDeclaration {
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> rows;
};

/// Builds a matrix covering every catalog action. Errors name the missing row,
/// the missing or unknown criterion, or the unknown level token.
CostMatrix load_cost_matrix(const CostDeclaration& decl, const ActionCatalog& catalog);
/// `{"QUARANTINE": {"C1": "high", ...}, ...}`; sides follow the criterion column.
CostMatrix load_cost_matrix(const nlohmann::json& doc, const ActionCatalog& catalog);
nlohmann::json to_json(const CostMatrix& m);
nlohmann::json to_json(const CostVector& v);
CostVector cost_vector_from_json(const nlohmann::json& j);

/// Default priority: C4, C1, C2, C3, then C6, C5.
std::vector<std::size_t> default_criterion_order();

enum class Downtime { none, low, high };
std::string_view to_string(Downtime d);
Downtime parse_downtime(std::string_view s);

struct AssetProfile {
    std::string host;
    bool crown_jewel = false;
    bool critical = false;
    Downtime downtime_tolerance = Downtime::high;

    /// crown_jewel implies critical.
    void validate() const;
    bool operator==(const AssetProfile&) const = default;
};

struct DefenderProfile {
    bool resource_constrained = false;
    bool risk_averse = false;
    std::set<std::string> goals;
    std::vector<std::string> fortify_targets;

    bool operator==(const DefenderProfile&) const = default;
};

struct Profiles {
    std::map<std::string, AssetProfile> assets;
    DefenderProfile defender;

    bool operator==(const Profiles&) const = default;
};

enum class RecommendationStatus { recommended, approved, declined };
std::string_view to_string(RecommendationStatus s);
RecommendationStatus parse_recommendation_status(std::string_view s);

struct ActionRecommendation {
    std::string id;
    std::string action;
    std::vector<std::string> targets;
    Predicate trigger;
    CostVector cost_vector{};
    Condition rule = Condition::crown_jewel;
    RecommendationStatus status = RecommendationStatus::recommended;
    std::string decided_by;  // analyst id once disposed

    bool operator==(const ActionRecommendation&) const = default;
};

void to_json(nlohmann::json& j, const ActionRecommendation& r);
void from_json(const nlohmann::json& j, ActionRecommendation& r);

/// Does the condition hold for this fact? Host conditions read `asset`.
bool condition_holds(Condition c, const Predicate& fact, PredicateKind fact_kind, const AssetProfile* asset,
                     const DefenderProfile& defender);

/// Catalog actions whose condition holds for the fact, in catalog order.
/// `asset` is the profile of the host an `infected(host, _)` fact is about;
/// passing none for such a fact is an error (unknown host).
std::vector<std::string> applicable_actions(const Predicate& fact, const AssetProfile* asset,
                                            const DefenderProfile& defender, const ActionCatalog& catalog,
                                            PredicateKind fact_kind = PredicateKind::threat);

/// Strictly increasing map used to compare levels; ranking only depends on its order.
using LevelKey = std::function<double(Level)>;
double natural_level_key(Level l);

/// Lexicographic ordering over `order`: defender-side criteria ascending,
/// attacker-side descending; ties by catalog position.
std::vector<std::string> rank(std::span<const std::string> candidates, const CostMatrix& matrix,
                              std::span<const std::size_t> order, const ActionCatalog& catalog,
                              const LevelKey& key = natural_level_key);

/// Everything deliberation reads from a hunt.
struct DeliberationContext {
    std::span<const Fact> facts;
    std::span<const ActionRecommendation> existing;
    const Profiles& profiles;
    const InternalKnowledge& internal;
    const ActionCatalog& catalog;
    const CostMatrix& matrix;
    std::span<const std::size_t> order;
    const Vocabulary& vocabulary;
};

/// Recommendations for newly accepted facts. Ids are left empty for the caller.
std::vector<ActionRecommendation> deliberate(const DeliberationContext& ctx, std::span<const Predicate> new_facts);

/// Re-evaluates each recommendation's rule against the context. Returns the
/// ids whose rule no longer holds or whose targets leave the inventory.
std::vector<std::string> audit_recommendations(const DeliberationContext& ctx,
                                               std::span<const ActionRecommendation> recs);

/// The host profile deliberation uses: the declared one, a default for an
/// inventoried host without one, none for a host outside the inventory.
std::optional<AssetProfile> resolve_asset(const Profiles& profiles, const InternalKnowledge& internal,
                                          std::string_view host);

}  // namespace huntforge::deliberation
