#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "huntforge/dsl/ast.hpp"
#include "huntforge/errors.hpp"
#include "huntforge/hunt.hpp"

namespace huntforge::dsl {

/// Lexing, parsing and binding failure with the offending source span.
class DslError : public HuntError {
public:
    DslError(ErrorCode code, const std::string& message, Span span)
        : HuntError(code, format_message(message, span)), message_(message), span_(span) {}

    const std::string& message() const noexcept { return message_; }
    const Span& span() const noexcept { return span_; }

private:
    static std::string format_message(const std::string& m, const Span& s) {
        return std::to_string(s.line) + ":" + std::to_string(s.column) + ": " + m;
    }
    std::string message_;
    Span span_;
};

enum class TokenKind {
    keyword,
    ident,
    number,
    string,
    lbrace,
    rbrace,
    lparen,
    rparen,
    lbracket,
    rbracket,
    colon,
    comma,
    dotdot,
    end,
};

std::string_view to_string(TokenKind k);

struct Token {
    TokenKind kind = TokenKind::end;
    std::string text;  // strings are unescaped
    Span span;
};

/// hunt, intel, telemetry, detector, case, verifier, decision, action, costs,
/// profile, goal, when, hypothesize, confidence.
const std::set<std::string, std::less<>>& keywords();

/// Tokens of the text, `#` comments dropped, always terminated by one `end` token.
/// Throws DslError(parse) on an illegal character or unterminated string.
std::vector<Token> tokenize(std::string_view text);

/// Recursive-descent parse. Empty profile blocks carry nothing and are dropped.
/// The first error is reported with the set of expected tokens.
HuntSpecAst parse(const std::vector<Token>& tokens);
HuntSpecAst parse(std::string_view text);

/// Canonical text; comments are not preserved.
std::string format(const HuntSpecAst& ast);

/// The built-in implementations manifold declarations may name.
struct BuiltinRegistry {
    std::set<std::string> detectors;
    std::set<std::string> cases;
    std::set<std::string> verifiers;
    std::set<std::string> actions;

    static BuiltinRegistry standard();
};

/// Resolves names and checks manifold signatures. Throws DslError(bind).
HuntConfig bind(const HuntSpecAst& ast, const BuiltinRegistry& builtins = BuiltinRegistry::standard());

/// parse + bind, with a detection cache attached.
std::shared_ptr<HuntConfig> load_config(std::string_view text);
std::shared_ptr<HuntConfig> load_config_file(const std::filesystem::path& file);

}  // namespace huntforge::dsl
