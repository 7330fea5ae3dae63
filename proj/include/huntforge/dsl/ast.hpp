#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace huntforge::dsl {

/// Byte range in the source plus the 1-based position of its first byte.
/// Spans never take part in AST equality.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
    int line = 1;
    int column = 1;

    bool operator==(const Span&) const { return true; }
};

/// A literal or name appearing in a list, pattern or parameter.
struct Atom {
    enum class Kind { ident, string, number };
    Kind kind = Kind::ident;
    std::string text;  // identifier, unescaped string, or number as written canonically
    double number = 0.0;

    static Atom ident(std::string t) { return {Kind::ident, std::move(t), 0.0}; }
    static Atom string(std::string t) { return {Kind::string, std::move(t), 0.0}; }
    static Atom num(double v);

    /// Capitalised identifiers in patterns are variables.
    bool variable() const;
    bool operator==(const Atom&) const = default;
};

/// List element; `client[1..10]` carries a range that expands to client1..client10.
struct ListItem {
    Atom atom;
    std::optional<std::pair<long, long>> range;

    bool operator==(const ListItem&) const = default;
};

struct PredPattern {
    std::string name;
    std::vector<Atom> args;
    Span span;

    bool operator==(const PredPattern&) const = default;
};

struct MalwarePair {
    Atom name;
    std::string sha256;

    bool operator==(const MalwarePair&) const = default;
};

struct IntelDecl {
    std::vector<ListItem> cc;
    std::vector<MalwarePair> malware;
    std::vector<PredPattern> known;
    Span span;
    bool operator==(const IntelDecl&) const = default;
};

struct TelemetryDecl {
    std::vector<ListItem> endpoints;
    std::vector<ListItem> monitoring;
    Span span;
    bool operator==(const TelemetryDecl&) const = default;
};

struct Param {
    std::string name;
    Atom value;
    Span span;
    bool operator==(const Param&) const = default;
};

struct DetectorDecl {
    std::string name;
    std::string source;
    std::vector<Param> params;
    Span span;
    bool operator==(const DetectorDecl&) const = default;
};

struct CaseDecl {
    std::string name;
    std::vector<PredPattern> when;
    std::vector<PredPattern> outputs;
    std::optional<double> confidence;
    Span span;
    bool operator==(const CaseDecl&) const = default;
};

struct VerifierDecl {
    std::string name;
    std::string predicate;
    std::string evidence;
    Span span;
    bool operator==(const VerifierDecl&) const = default;
};

struct DecisionDecl {
    std::string name;
    std::string predicate;
    Span span;
    bool operator==(const DecisionDecl&) const = default;
};

struct ActionDecl {
    std::string name;
    std::string target_kind;
    std::string condition;
    Span span;
    bool operator==(const ActionDecl&) const = default;
};

struct CostRow {
    std::string action;
    std::vector<std::pair<std::string, std::string>> cells;  // (criterion, level) as written
    Span span;
    bool operator==(const CostRow&) const = default;
};

struct CostsDecl {
    std::vector<CostRow> rows;
    std::vector<std::string> order;  // empty: default priority
    Span span;
    bool operator==(const CostsDecl&) const = default;
};

/// `critical`, `crown_jewel`, `downtime none`, `fortify [decoy[1..25]]`, ...
struct Flag {
    std::string name;
    std::optional<Atom> value;
    std::vector<ListItem> list;
    bool has_list = false;
    Span span;
    bool operator==(const Flag&) const = default;
};

struct ProfileDecl {
    bool defender = false;
    std::string host;  // asset profiles only
    std::vector<Flag> flags;
    Span span;
    bool operator==(const ProfileDecl&) const = default;
};

struct GoalDecl {
    std::string name;
    Span span;
    bool operator==(const GoalDecl&) const = default;
};

using Decl = std::variant<IntelDecl, TelemetryDecl, DetectorDecl, CaseDecl, VerifierDecl, DecisionDecl, ActionDecl,
                          CostsDecl, ProfileDecl, GoalDecl>;

struct HuntSpecAst {
    std::string name;
    std::vector<Decl> decls;
    Span span;

    bool operator==(const HuntSpecAst&) const = default;
};

const Span& span_of(const Decl& d);

/// Names of the list items, ranges expanded.
std::vector<std::string> expand(const std::vector<ListItem>& items);

}  // namespace huntforge::dsl
