#include <algorithm>
#include <array>

#include "huntforge/deliberation.hpp"
#include "huntforge/errors.hpp"

namespace huntforge::deliberation {
namespace {

constexpr std::array<std::string_view, kCriteria> kNames = {"C1", "C2", "C3", "C4", "C5", "C6"};
constexpr std::array<std::string_view, kCriteria> kLabels = {
    "system downtime", "allocated resources", "analysis time",
    "defender risk",   "threat intel acquisition", "attacker risk"};

CostVector make_row(std::array<Level, kCriteria> levels) {
    CostVector v;
    for (std::size_t i = 0; i < kCriteria; ++i) v[i] = {criterion_side(i), levels[i]};
    return v;
}

}  // namespace

std::string_view to_string(Level l) {
    switch (l) {
        case Level::low: return "low";
        case Level::moderate: return "moderate";
        case Level::high: return "high";
    }
    return "low";
}

std::string_view to_string(Side s) { return s == Side::defender ? "defender" : "attacker"; }

Level parse_level(std::string_view s) {
    if (s == "low") return Level::low;
    if (s == "moderate") return Level::moderate;
    if (s == "high") return Level::high;
    throw invalid("unknown cost level '" + std::string(s) + "' (expected low, moderate or high)");
}

std::string_view criterion_name(std::size_t index) { return kNames.at(index); }
std::string_view criterion_label(std::size_t index) { return kLabels.at(index); }

std::size_t parse_criterion(std::string_view name) {
    auto it = std::find(kNames.begin(), kNames.end(), name);
    if (it == kNames.end()) throw invalid("unknown criterion '" + std::string(name) + "' (expected C1..C6)");
    return static_cast<std::size_t>(it - kNames.begin());
}

Side criterion_side(std::size_t index) { return index < 4 ? Side::defender : Side::attacker; }

const CostVector& CostMatrix::row(std::string_view action) const {
    auto it = rows.find(std::string(action));
    if (it == rows.end()) throw not_found("no cost row for action " + std::string(action));
    return it->second;
}

CostMatrix default_cost_matrix() {
    using enum Level;
    CostMatrix m;
    m.actions = {"QUARANTINE", "CONTAIN", "MISDIRECT", "FORTIFY", "SHARE"};
    m.rows["QUARANTINE"] = make_row({high, low, low, moderate, low, low});
    m.rows["CONTAIN"] = make_row({low, low, moderate, moderate, moderate, moderate});
    m.rows["MISDIRECT"] = make_row({low, low, low, high, low, high});
    m.rows["FORTIFY"] = make_row({low, high, low, low, moderate, moderate});
    m.rows["SHARE"] = make_row({low, moderate, low, low, moderate, low});
    return m;
}

CostMatrix load_cost_matrix(const CostDeclaration& decl, const ActionCatalog& catalog) {
    CostMatrix m;
    for (const auto& [action, cells] : decl.rows) {
        if (!catalog.find(action)) throw invalid("cost row for undeclared action " + action);
        if (m.rows.count(action)) throw invalid("duplicate cost row for " + action);
        std::array<bool, kCriteria> seen{};
        CostVector v;
        for (const auto& [crit, level] : cells) {
            std::size_t i = parse_criterion(crit);
            if (seen[i]) throw invalid("cost row " + action + " repeats " + crit);
            seen[i] = true;
            v[i] = {criterion_side(i), parse_level(level)};
        }
        for (std::size_t i = 0; i < kCriteria; ++i)
            if (!seen[i]) throw invalid("cost row " + action + " is missing " + std::string(kNames[i]));
        m.rows.emplace(action, v);
    }
    for (const auto& a : catalog.actions()) {
        if (!m.rows.count(a.name)) throw invalid("missing cost row for " + a.name);
        m.actions.push_back(a.name);
    }
    return m;
}

CostMatrix load_cost_matrix(const nlohmann::json& doc, const ActionCatalog& catalog) {
    if (!doc.is_object()) throw invalid("cost matrix: expected a JSON object");
    CostDeclaration decl;
    for (const auto& [action, row] : doc.items()) {
        if (!row.is_object()) throw invalid("cost row " + action + ": expected an object");
        std::vector<std::pair<std::string, std::string>> cells;
        for (const auto& [crit, level] : row.items()) {
            if (crit == "side") continue;
            if (!level.is_string()) throw invalid("cost row " + action + ": level for " + crit + " must be a string");
            cells.emplace_back(crit, level.get<std::string>());
        }
        decl.rows.emplace_back(action, std::move(cells));
    }
    return load_cost_matrix(decl, catalog);
}

nlohmann::json to_json(const CostVector& v) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t i = 0; i < kCriteria; ++i)
        j[std::string(kNames[i])] = {{"side", to_string(v[i].side)}, {"level", to_string(v[i].level)}};
    return j;
}

CostVector cost_vector_from_json(const nlohmann::json& j) {
    CostVector v;
    for (std::size_t i = 0; i < kCriteria; ++i) {
        const auto& cell = j.at(std::string(kNames[i]));
        v[i].side = cell.at("side").get<std::string>() == "attacker" ? Side::attacker : Side::defender;
        v[i].level = parse_level(cell.at("level").get<std::string>());
    }
    return v;
}

nlohmann::json to_json(const CostMatrix& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& a : m.actions) {
        nlohmann::json row = nlohmann::json::object();
        const auto& v = m.row(a);
        for (std::size_t i = 0; i < kCriteria; ++i) row[std::string(kNames[i])] = to_string(v[i].level);
        j[a] = row;
    }
    return j;
}

std::vector<std::size_t> default_criterion_order() { return {3, 0, 1, 2, 5, 4}; }

}  // namespace huntforge::deliberation
