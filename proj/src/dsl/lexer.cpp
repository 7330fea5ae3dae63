#include <cctype>
#include <charconv>

#include "huntforge/dsl/dsl.hpp"

namespace huntforge::dsl {
namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_blank();
            if (pos_ >= text_.size()) break;
            out.push_back(next());
        }
        out.push_back({TokenKind::end, "", here(pos_)});
        return out;
    }

private:
    Span here(std::size_t begin) const { return {begin, pos_, line_, col_ - static_cast<int>(pos_ - begin)}; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_blank() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                break;
            }
        }
    }

    Token make(TokenKind k, std::size_t begin, int line, int col, std::string text) {
        return {k, std::move(text), Span{begin, pos_, line, col}};
    }

    Token next() {
        std::size_t begin = pos_;
        int line = line_, col = col_;
        char c = text_[pos_];
        auto single = [&](TokenKind k) {
            advance();
            return make(k, begin, line, col, std::string(1, c));
        };
        switch (c) {
            case '{': return single(TokenKind::lbrace);
            case '}': return single(TokenKind::rbrace);
            case '(': return single(TokenKind::lparen);
            case ')': return single(TokenKind::rparen);
            case '[': return single(TokenKind::lbracket);
            case ']': return single(TokenKind::rbracket);
            case ':': return single(TokenKind::colon);
            case ',': return single(TokenKind::comma);
            default: break;
        }
        if (c == '.' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '.') {
            advance();
            advance();
            return make(TokenKind::dotdot, begin, line, col, "..");
        }
        if (ident_start(c)) {
            while (pos_ < text_.size() && ident_char(text_[pos_])) advance();
            std::string word(text_.substr(begin, pos_ - begin));
            auto kind = keywords().count(word) ? TokenKind::keyword : TokenKind::ident;
            return make(kind, begin, line, col, std::move(word));
        }
        if (digit(c) || (c == '-' && pos_ + 1 < text_.size() && digit(text_[pos_ + 1]))) return number(begin, line, col);
        if (c == '"') return string(begin, line, col);
        std::string shown = static_cast<unsigned char>(c) < 0x80 ? std::string(1, c) : "non-ASCII byte";
        throw DslError(ErrorCode::parse, "illegal character '" + shown + "'", Span{begin, begin + 1, line, col});
    }

    Token number(std::size_t begin, int line, int col) {
        if (text_[pos_] == '-') advance();
        while (pos_ < text_.size() && digit(text_[pos_])) advance();
        if (pos_ + 1 < text_.size() && text_[pos_] == '.' && digit(text_[pos_ + 1])) {
            advance();
            while (pos_ < text_.size() && digit(text_[pos_])) advance();
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_;
            int save_col = col_;
            advance();
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) advance();
            if (pos_ < text_.size() && digit(text_[pos_])) {
                while (pos_ < text_.size() && digit(text_[pos_])) advance();
            } else {
                pos_ = save;
                col_ = save_col;
            }
        }
        return make(TokenKind::number, begin, line, col, std::string(text_.substr(begin, pos_ - begin)));
    }

    Token string(std::size_t begin, int line, int col) {
        advance();
        std::string value;
        while (true) {
            if (pos_ >= text_.size() || text_[pos_] == '\n')
                throw DslError(ErrorCode::parse, "unterminated string", Span{begin, pos_, line, col});
            char c = text_[pos_];
            if (c == '"') {
                advance();
                break;
            }
            if (c == '\\') {
                advance();
                if (pos_ >= text_.size()) continue;
                char e = text_[pos_];
                switch (e) {
                    case 'n': value += '\n'; break;
                    case 't': value += '\t'; break;
                    case '"': value += '"'; break;
                    case '\\': value += '\\'; break;
                    default:
                        throw DslError(ErrorCode::parse, std::string("unknown escape '\\") + e + "'",
                                       Span{pos_ - 1, pos_ + 1, line_, col_ - 1});
                }
                advance();
                continue;
            }
            value += c;
            advance();
        }
        return make(TokenKind::string, begin, line, col, std::move(value));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

}  // namespace

std::string_view to_string(TokenKind k) {
    switch (k) {
        case TokenKind::keyword: return "keyword";
        case TokenKind::ident: return "identifier";
        case TokenKind::number: return "number";
        case TokenKind::string: return "string";
        case TokenKind::lbrace: return "'{'";
        case TokenKind::rbrace: return "'}'";
        case TokenKind::lparen: return "'('";
        case TokenKind::rparen: return "')'";
        case TokenKind::lbracket: return "'['";
        case TokenKind::rbracket: return "']'";
        case TokenKind::colon: return "':'";
        case TokenKind::comma: return "','";
        case TokenKind::dotdot: return "'..'";
        case TokenKind::end: return "end of input";
    }
    return "";
}

const std::set<std::string, std::less<>>& keywords() {
    static const std::set<std::string, std::less<>> words = {
        "hunt",   "intel",   "telemetry", "detector", "case", "verifier",    "decision",
        "action", "costs",   "profile",   "goal",     "when", "hypothesize", "confidence"};
    return words;
}

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

Atom Atom::num(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return {Kind::number, std::string(buf, end), v};
}

bool Atom::variable() const {
    return kind == Kind::ident && !text.empty() && std::isupper(static_cast<unsigned char>(text[0]));
}

const Span& span_of(const Decl& d) {
    return std::visit([](const auto& x) -> const Span& { return x.span; }, d);
}

std::vector<std::string> expand(const std::vector<ListItem>& items) {
    std::vector<std::string> out;
    for (const auto& i : items) {
        if (!i.range) {
            out.push_back(i.atom.text);
            continue;
        }
        for (long n = i.range->first; n <= i.range->second; ++n) out.push_back(i.atom.text + std::to_string(n));
    }
    return out;
}

}  // namespace huntforge::dsl
