#include <algorithm>
#include <optional>

#include "huntforge/deliberation.hpp"
#include "huntforge/errors.hpp"

namespace huntforge::deliberation {
namespace {

bool about_host(const Predicate& fact) { return fact.name == "infected" && fact.arity() == 2; }

bool is_threat(const Predicate& p, const Vocabulary& vocab) {
    const auto* sig = vocab.find(p.name);
    return sig && sig->kind == PredicateKind::threat;
}

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<E, std::string_view>, N>& table, std::string_view what) {
    for (const auto& [e, name] : table)
        if (name == s) return e;
    throw invalid("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

constexpr std::array<std::pair<TargetKind, std::string_view>, 3> kTargetKinds = {
    {{TargetKind::host, "host"}, {TargetKind::decoy_set, "decoy_set"}, {TargetKind::intel_bundle, "intel_bundle"}}};
constexpr std::array<std::pair<Condition, std::string_view>, 5> kConditions = {
    {{Condition::crown_jewel, "crown_jewel"},
     {Condition::no_downtime, "no_downtime"},
     {Condition::resource_constrained, "resource_constrained"},
     {Condition::risk_averse, "risk_averse"},
     {Condition::inform_partners, "inform_partners"}}};
constexpr std::array<std::pair<Downtime, std::string_view>, 3> kDowntime = {
    {{Downtime::none, "none"}, {Downtime::low, "low"}, {Downtime::high, "high"}}};
constexpr std::array<std::pair<RecommendationStatus, std::string_view>, 3> kRecStatus = {
    {{RecommendationStatus::recommended, "recommended"},
     {RecommendationStatus::approved, "approved"},
     {RecommendationStatus::declined, "declined"}}};

template <typename E, std::size_t N>
std::string_view enum_name(E e, const std::array<std::pair<E, std::string_view>, N>& table) {
    for (const auto& [v, name] : table)
        if (v == e) return name;
    return "";
}

}  // namespace

std::string_view to_string(TargetKind k) { return enum_name(k, kTargetKinds); }
std::string_view to_string(Condition c) { return enum_name(c, kConditions); }
std::string_view to_string(Downtime d) { return enum_name(d, kDowntime); }
std::string_view to_string(RecommendationStatus s) { return enum_name(s, kRecStatus); }
TargetKind parse_target_kind(std::string_view s) { return parse_enum(s, kTargetKinds, "target kind"); }
Condition parse_condition(std::string_view s) { return parse_enum(s, kConditions, "condition"); }
Downtime parse_downtime(std::string_view s) { return parse_enum(s, kDowntime, "downtime tolerance"); }
RecommendationStatus parse_recommendation_status(std::string_view s) {
    return parse_enum(s, kRecStatus, "recommendation status");
}

std::string_view condition_text(Condition c) {
    switch (c) {
        case Condition::crown_jewel: return "if target is a crown jewel";
        case Condition::no_downtime: return "if target can't tolerate downtime";
        case Condition::resource_constrained: return "if defender is resource-constrained";
        case Condition::risk_averse: return "if defender is averse to risk";
        case Condition::inform_partners: return "to inform partners";
    }
    return "";
}

ActionCatalog ActionCatalog::shipped() {
    ActionCatalog c;
    c.add({"QUARANTINE", TargetKind::host, Condition::crown_jewel});
    c.add({"CONTAIN", TargetKind::host, Condition::no_downtime});
    c.add({"MISDIRECT", TargetKind::decoy_set, Condition::resource_constrained});
    c.add({"FORTIFY", TargetKind::decoy_set, Condition::risk_averse});
    c.add({"SHARE", TargetKind::intel_bundle, Condition::inform_partners});
    return c;
}

void ActionCatalog::add(ActionSpec spec) {
    if (find(spec.name)) throw invalid("duplicate action " + spec.name);
    actions_.push_back(std::move(spec));
}

const ActionSpec* ActionCatalog::find(std::string_view name) const {
    auto it = std::find_if(actions_.begin(), actions_.end(), [&](const ActionSpec& a) { return a.name == name; });
    return it == actions_.end() ? nullptr : &*it;
}

std::size_t ActionCatalog::index(std::string_view name) const {
    for (std::size_t i = 0; i < actions_.size(); ++i)
        if (actions_[i].name == name) return i;
    throw not_found("unknown action " + std::string(name));
}

void AssetProfile::validate() const {
    if (host.empty()) throw invalid("asset profile without a host");
    if (crown_jewel && !critical) throw invalid("asset " + host + ": a crown jewel must be critical");
}

void to_json(nlohmann::json& j, const ActionRecommendation& r) {
    j = nlohmann::json{{"id", r.id},
                       {"action", r.action},
                       {"targets", r.targets},
                       {"trigger", r.trigger},
                       {"cost_vector", to_json(r.cost_vector)},
                       {"rule", to_string(r.rule)},
                       {"rule_text", condition_text(r.rule)},
                       {"status", to_string(r.status)}};
    if (!r.decided_by.empty()) j["decided_by"] = r.decided_by;
}

void from_json(const nlohmann::json& j, ActionRecommendation& r) {
    j.at("id").get_to(r.id);
    j.at("action").get_to(r.action);
    j.at("targets").get_to(r.targets);
    j.at("trigger").get_to(r.trigger);
    r.cost_vector = cost_vector_from_json(j.at("cost_vector"));
    r.rule = parse_condition(j.at("rule").get<std::string>());
    r.status = parse_recommendation_status(j.value("status", std::string("recommended")));
    r.decided_by = j.value("decided_by", std::string{});
}

bool condition_holds(Condition c, const Predicate& fact, PredicateKind fact_kind, const AssetProfile* asset,
                     const DefenderProfile& defender) {
    switch (c) {
        case Condition::crown_jewel: return about_host(fact) && asset && asset->crown_jewel;
        case Condition::no_downtime:
            return about_host(fact) && asset && asset->downtime_tolerance == Downtime::none;
        case Condition::resource_constrained:
            return fact_kind == PredicateKind::threat && defender.resource_constrained;
        case Condition::risk_averse: return fact_kind == PredicateKind::threat && defender.risk_averse;
        case Condition::inform_partners:
            return fact.name == "cec" && fact.arity() == 1 && defender.goals.count("inform_partners") > 0;
    }
    return false;
}

std::vector<std::string> applicable_actions(const Predicate& fact, const AssetProfile* asset,
                                            const DefenderProfile& defender, const ActionCatalog& catalog,
                                            PredicateKind fact_kind) {
    if (about_host(fact) && !asset) throw not_found("fact about unknown host: " + fact.to_string());
    std::vector<std::string> out;
    for (const auto& a : catalog.actions())
        if (condition_holds(a.condition, fact, fact_kind, asset, defender)) out.push_back(a.name);
    return out;
}

double natural_level_key(Level l) { return static_cast<double>(l); }

std::vector<std::string> rank(std::span<const std::string> candidates, const CostMatrix& matrix,
                              std::span<const std::size_t> order, const ActionCatalog& catalog,
                              const LevelKey& key) {
    for (auto c : order)
        if (c >= kCriteria) throw invalid("criterion index " + std::to_string(c) + " is not in the cost matrix");
    struct Entry {
        std::string name;
        const CostVector* costs;
        std::size_t position;
    };
    std::vector<Entry> entries;
    for (const auto& c : candidates) entries.push_back({c, &matrix.row(c), catalog.index(c)});
    std::stable_sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
        for (auto c : order) {
            double ka = key((*a.costs)[c].level), kb = key((*b.costs)[c].level);
            if (ka == kb) continue;
            bool lower_first = (*a.costs)[c].side == Side::defender;
            return lower_first ? ka < kb : ka > kb;
        }
        return a.position < b.position;
    });
    std::vector<std::string> out;
    for (auto& e : entries) out.push_back(std::move(e.name));
    return out;
}

std::optional<AssetProfile> resolve_asset(const Profiles& profiles, const InternalKnowledge& internal,
                                          std::string_view host) {
    if (!internal.has_endpoint(host)) return std::nullopt;
    auto it = profiles.assets.find(std::string(host));
    if (it != profiles.assets.end()) return it->second;
    AssetProfile p;
    p.host = std::string(host);
    return p;
}

std::vector<ActionRecommendation> deliberate(const DeliberationContext& ctx, std::span<const Predicate> new_facts) {
    std::vector<Predicate> threats;
    for (const auto& f : new_facts)
        if (is_threat(f, ctx.vocabulary)) threats.push_back(f);

    std::vector<std::string> once;  // profile-wide actions already recommended in this hunt
    for (const auto& r : ctx.existing)
        if (const auto* spec = ctx.catalog.find(r.action); spec && spec->target == TargetKind::decoy_set)
            once.push_back(r.action);

    auto make = [&](const std::string& action, std::vector<std::string> targets, const Predicate& trigger) {
        ActionRecommendation r;
        r.action = action;
        r.targets = std::move(targets);
        r.trigger = trigger;
        r.cost_vector = ctx.matrix.row(action);
        r.rule = ctx.catalog.find(action)->condition;
        return r;
    };

    std::vector<ActionRecommendation> out;
    for (TargetKind kind : {TargetKind::host, TargetKind::decoy_set, TargetKind::intel_bundle}) {
        bool bundle_done = false;
        for (const auto& fact : threats) {
            std::optional<AssetProfile> asset;
            if (about_host(fact)) asset = resolve_asset(ctx.profiles, ctx.internal, fact.args[0]);
            std::vector<std::string> candidates;
            for (const auto& a : ctx.catalog.actions()) {
                if (a.target != kind) continue;
                if (kind == TargetKind::decoy_set && std::count(once.begin(), once.end(), a.name)) continue;
                if (condition_holds(a.condition, fact, PredicateKind::threat, asset ? &*asset : nullptr,
                                    ctx.profiles.defender))
                    candidates.push_back(a.name);
            }
            if (candidates.empty() || (kind == TargetKind::intel_bundle && bundle_done)) continue;
            const std::string best = rank(candidates, ctx.matrix, ctx.order, ctx.catalog).front();
            switch (kind) {
                case TargetKind::host: out.push_back(make(best, {fact.args[0]}, fact)); break;
                case TargetKind::decoy_set:
                    out.push_back(make(best, ctx.profiles.defender.fortify_targets, fact));
                    once.push_back(best);
                    break;
                case TargetKind::intel_bundle: {
                    std::vector<std::string> bundle;
                    for (const auto& f : ctx.facts)
                        if (is_threat(f.predicate, ctx.vocabulary)) bundle.push_back(f.predicate.to_string());
                    out.push_back(make(best, std::move(bundle), fact));
                    bundle_done = true;
                    break;
                }
            }
        }
    }
    return out;
}

std::vector<std::string> audit_recommendations(const DeliberationContext& ctx,
                                               std::span<const ActionRecommendation> recs) {
    std::vector<std::string> bad;
    for (const auto& r : recs) {
        const auto* spec = ctx.catalog.find(r.action);
        bool known = std::any_of(ctx.facts.begin(), ctx.facts.end(),
                                 [&](const Fact& f) { return f.predicate == r.trigger; });
        bool ok = spec && known && spec->condition == r.rule;
        std::optional<AssetProfile> asset;
        if (ok && about_host(r.trigger)) asset = resolve_asset(ctx.profiles, ctx.internal, r.trigger.args[0]);
        ok = ok && condition_holds(r.rule, r.trigger, PredicateKind::threat, asset ? &*asset : nullptr,
                                   ctx.profiles.defender);
        if (ok && spec->target == TargetKind::host)
            for (const auto& t : r.targets) ok = ok && ctx.internal.has_endpoint(t);
        if (!ok) bad.push_back(r.id);
    }
    return bad;
}

}  // namespace huntforge::deliberation
