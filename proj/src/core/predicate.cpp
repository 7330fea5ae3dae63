#include "huntforge/predicate.hpp"

#include <algorithm>
#include <cctype>

#include "huntforge/errors.hpp"

namespace huntforge {

namespace {

bool is_bare(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '.' || c == '-' || c == '/';
    });
}

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::string Predicate::to_string() const {
    std::string out = name + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ",";
        out += is_bare(args[i]) ? args[i] : quote(args[i]);
    }
    out += ")";
    return out;
}

Predicate Predicate::parse(std::string_view text) {
    auto fail = [&](const std::string& why) {
        return invalid("malformed predicate '" + std::string(text) + "': " + why);
    };
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    skip_ws();
    std::size_t start = i;
    while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
    if (i == start) throw fail("missing name");
    Predicate p;
    p.name = std::string(text.substr(start, i - start));
    skip_ws();
    if (i >= text.size() || text[i] != '(') throw fail("expected '('");
    ++i;
    skip_ws();
    if (i < text.size() && text[i] == ')') {
        ++i;
    } else {
        for (;;) {
            skip_ws();
            std::string arg;
            if (i < text.size() && text[i] == '"') {
                ++i;
                while (i < text.size() && text[i] != '"') {
                    if (text[i] == '\\' && i + 1 < text.size()) ++i;
                    arg.push_back(text[i++]);
                }
                if (i >= text.size()) throw fail("unterminated string");
                ++i;
            } else {
                std::size_t a = i;
                while (i < text.size() && text[i] != ',' && text[i] != ')') ++i;
                arg = std::string(text.substr(a, i - a));
                while (!arg.empty() && std::isspace(static_cast<unsigned char>(arg.back()))) arg.pop_back();
                if (arg.empty()) throw fail("empty argument");
            }
            p.args.push_back(std::move(arg));
            skip_ws();
            if (i >= text.size()) throw fail("expected ')'");
            if (text[i] == ',') { ++i; continue; }
            if (text[i] == ')') { ++i; break; }
            throw fail("unexpected character");
        }
    }
    skip_ws();
    if (i != text.size()) throw fail("trailing characters");
    return p;
}

void to_json(nlohmann::json& j, const Predicate& p) {
    j = nlohmann::json{{"name", p.name}, {"args", p.args}};
}

void from_json(const nlohmann::json& j, Predicate& p) {
    if (j.is_string()) {
        p = Predicate::parse(j.get<std::string>());
        return;
    }
    j.at("name").get_to(p.name);
    j.at("args").get_to(p.args);
}

Vocabulary Vocabulary::builtin() {
    Vocabulary v;
    v.declare({"beacon", 2, PredicateKind::detection});
    v.declare({"cec", 1, PredicateKind::threat});
    v.declare({"infected", 2, PredicateKind::threat});
    return v;
}

void Vocabulary::declare(PredicateSignature sig) {
    if (const auto* existing = find(sig.name)) {
        if (*existing == sig) return;
        throw invalid("predicate '" + sig.name + "' redeclared with a different signature");
    }
    entries_.push_back(std::move(sig));
}

const PredicateSignature* Vocabulary::find(std::string_view name) const {
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const PredicateSignature& s) { return s.name == name; });
    return it == entries_.end() ? nullptr : &*it;
}

bool Vocabulary::admits(const Predicate& p) const {
    const auto* sig = find(p.name);
    return sig && sig->arity == p.arity();
}

}  // namespace huntforge
