#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace huntforge {

/// A ground atom such as `beacon(203.0.113.7, client1)`.
///
/// Arguments are terms: entity identifiers or literals, all carried as text.
/// Equality is structural and drives set insertion/removal in the hunt state.
struct Predicate {
    std::string name;
    std::vector<std::string> args;

    Predicate() = default;
    Predicate(std::string n, std::vector<std::string> a) : name(std::move(n)), args(std::move(a)) {}

    std::size_t arity() const noexcept { return args.size(); }

    /// `name(arg1,arg2)`; arguments that are not plain identifiers are quoted.
    std::string to_string() const;

    /// Inverse of to_string. Throws HuntError(invalid_argument) on malformed text.
    static Predicate parse(std::string_view text);

    auto operator<=>(const Predicate&) const = default;
    bool operator==(const Predicate&) const = default;
};

void to_json(nlohmann::json& j, const Predicate& p);
void from_json(const nlohmann::json& j, Predicate& p);

enum class PredicateKind { detection, threat };

/// One entry of the predicate vocabulary.
struct PredicateSignature {
    std::string name;
    std::size_t arity = 0;
    PredicateKind kind = PredicateKind::threat;

    bool operator==(const PredicateSignature&) const = default;
};

/// Declared predicates; the shipped vocabulary is beacon/2, cec/1 and infected/2.
class Vocabulary {
public:
    static Vocabulary builtin();

    void declare(PredicateSignature sig);
    const PredicateSignature* find(std::string_view name) const;
    bool admits(const Predicate& p) const;
    const std::vector<PredicateSignature>& entries() const noexcept { return entries_; }

private:
    std::vector<PredicateSignature> entries_;
};

}  // namespace huntforge
