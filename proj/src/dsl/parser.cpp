#include <charconv>
#include <cmath>

#include "huntforge/dsl/dsl.hpp"

namespace huntforge::dsl {
namespace {

class Parser {
public:
    explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {
        if (toks_.empty() || toks_.back().kind != TokenKind::end) throw invalid("token stream must end with the end token");
    }

    HuntSpecAst hunt() {
        HuntSpecAst ast;
        const Token& start = expect_keyword("hunt");
        ast.name = expect(TokenKind::ident, "hunt name").text;
        expect(TokenKind::lbrace);
        bool have_costs = false;
        while (!at(TokenKind::rbrace)) {
            const Token& t = peek();
            if (t.kind != TokenKind::keyword) fail_expected({"declaration keyword", "'}'"});
            const std::string& k = t.text;
            if (k == "intel") ast.decls.push_back(intel());
            else if (k == "telemetry") ast.decls.push_back(telemetry());
            else if (k == "detector") ast.decls.push_back(detector());
            else if (k == "case") ast.decls.push_back(case_decl());
            else if (k == "verifier") ast.decls.push_back(verifier());
            else if (k == "decision") ast.decls.push_back(decision());
            else if (k == "action") ast.decls.push_back(action());
            else if (k == "costs") {
                if (have_costs) throw DslError(ErrorCode::parse, "duplicate costs block", t.span);
                have_costs = true;
                ast.decls.push_back(costs());
            } else if (k == "profile") {
                auto p = profile();
                if (!p.flags.empty()) ast.decls.push_back(std::move(p));
            } else if (k == "goal") ast.decls.push_back(goal());
            else fail_expected({"declaration keyword", "'}'"});
        }
        const Token& close = expect(TokenKind::rbrace);
        expect(TokenKind::end);
        ast.span = join(start.span, close.span);
        return ast;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    bool at(TokenKind k, std::size_t ahead = 0) const { return peek(ahead).kind == k; }
    bool at_word(std::string_view w, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return (t.kind == TokenKind::ident || t.kind == TokenKind::keyword) && t.text == w;
    }
    const Token& take() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }
    const Token& previous() const { return toks_[pos_ == 0 ? 0 : pos_ - 1]; }

    static Span join(const Span& a, const Span& b) { return {a.begin, b.end, a.line, a.column}; }
    Span from(const Span& a) const { return join(a, previous().span); }

    [[noreturn]] void fail_expected(std::vector<std::string> expected) const {
        const Token& t = peek();
        std::string list;
        for (std::size_t i = 0; i < expected.size(); ++i) list += (i ? ", " : "") + expected[i];
        std::string found = t.kind == TokenKind::end ? "end of input"
                            : t.kind == TokenKind::string ? "string \"" + t.text + "\""
                                                          : "'" + t.text + "'";
        throw DslError(ErrorCode::parse,
                       (expected.size() > 1 ? "expected one of " : "expected ") + list + "; found " + found, t.span);
    }

    const Token& expect(TokenKind k, std::string what = {}) {
        if (!at(k)) fail_expected({what.empty() ? std::string(to_string(k)) : what});
        return take();
    }
    const Token& expect_keyword(std::string_view w) {
        if (!(at(TokenKind::keyword) && peek().text == w)) fail_expected({"'" + std::string(w) + "'"});
        return take();
    }
    const Token& expect_word(std::string_view w) {
        if (!at_word(w)) fail_expected({"'" + std::string(w) + "'"});
        return take();
    }
    std::string name(std::string what) { return expect(TokenKind::ident, what).text; }

    Atom atom() {
        const Token& t = peek();
        switch (t.kind) {
            case TokenKind::ident: take(); return Atom::ident(t.text);
            case TokenKind::string: take(); return Atom::string(t.text);
            case TokenKind::number: take(); return number_atom(t);
            default: fail_expected({"identifier", "string", "number"});
        }
    }

    static Atom number_atom(const Token& t) {
        double v = 0.0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc{} || p != t.text.data() + t.text.size() || !std::isfinite(v))
            throw DslError(ErrorCode::parse, "malformed number '" + t.text + "'", t.span);
        return Atom::num(v);
    }

    long integer() {
        const Token& t = expect(TokenKind::number, "integer");
        long v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc{} || p != t.text.data() + t.text.size() || v < 0)
            throw DslError(ErrorCode::parse, "range bound must be a non-negative integer", t.span);
        return v;
    }

    std::vector<ListItem> list() {
        expect(TokenKind::lbracket);
        std::vector<ListItem> items;
        if (!at(TokenKind::rbracket)) {
            do {
                ListItem item;
                bool ident = at(TokenKind::ident);
                const Span first = peek().span;
                item.atom = atom();
                if (ident && at(TokenKind::lbracket)) {
                    take();
                    long lo = integer();
                    expect(TokenKind::dotdot);
                    long hi = integer();
                    expect(TokenKind::rbracket);
                    if (lo > hi) throw DslError(ErrorCode::parse, "empty range", from(first));
                    item.range = {lo, hi};
                }
                items.push_back(std::move(item));
            } while (at(TokenKind::comma) && (take(), true));
        }
        if (!at(TokenKind::rbracket)) fail_expected({"','", "']'"});
        take();
        return items;
    }

    PredPattern pattern() {
        PredPattern p;
        const Token& n = expect(TokenKind::ident, "predicate name");
        p.name = n.text;
        expect(TokenKind::lparen);
        if (!at(TokenKind::rparen)) {
            p.args.push_back(atom());
            while (at(TokenKind::comma)) {
                take();
                p.args.push_back(atom());
            }
        }
        if (!at(TokenKind::rparen)) fail_expected({"','", "')'"});
        take();
        p.span = from(n.span);
        return p;
    }

    IntelDecl intel() {
        IntelDecl d;
        const Token& start = take();
        expect(TokenKind::lbrace);
        while (!at(TokenKind::rbrace)) {
            if (at_word("cc")) {
                take();
                expect(TokenKind::colon);
                auto items = list();
                d.cc.insert(d.cc.end(), items.begin(), items.end());
            } else if (at_word("malware")) {
                take();
                expect(TokenKind::colon);
                expect(TokenKind::lbracket);
                if (!at(TokenKind::rbracket)) {
                    do {
                        expect(TokenKind::lparen);
                        MalwarePair m;
                        m.name = atom();
                        expect(TokenKind::comma);
                        m.sha256 = expect(TokenKind::string, "hash string").text;
                        expect(TokenKind::rparen);
                        d.malware.push_back(std::move(m));
                    } while (at(TokenKind::comma) && (take(), true));
                }
                expect(TokenKind::rbracket);
            } else if (at_word("known")) {
                take();
                expect(TokenKind::colon);
                expect(TokenKind::lbracket);
                if (!at(TokenKind::rbracket)) {
                    do d.known.push_back(pattern());
                    while (at(TokenKind::comma) && (take(), true));
                }
                expect(TokenKind::rbracket);
            } else {
                fail_expected({"'cc'", "'malware'", "'known'", "'}'"});
            }
        }
        take();
        d.span = from(start.span);
        return d;
    }

    TelemetryDecl telemetry() {
        TelemetryDecl d;
        const Token& start = take();
        expect(TokenKind::lbrace);
        while (!at(TokenKind::rbrace)) {
            bool endpoints = at_word("endpoints");
            if (!endpoints && !at_word("monitoring")) fail_expected({"'endpoints'", "'monitoring'", "'}'"});
            take();
            expect(TokenKind::colon);
            auto items = list();
            auto& dest = endpoints ? d.endpoints : d.monitoring;
            dest.insert(dest.end(), items.begin(), items.end());
        }
        take();
        d.span = from(start.span);
        return d;
    }

    DetectorDecl detector() {
        DetectorDecl d;
        const Token& start = take();
        d.name = name("detector name");
        expect_word("on");
        d.source = name("telemetry source");
        expect(TokenKind::lbrace);
        while (at(TokenKind::ident)) {
            Param p;
            const Token& n = take();
            p.name = n.text;
            p.value = atom();
            p.span = from(n.span);
            d.params.push_back(std::move(p));
        }
        if (!at(TokenKind::rbrace)) fail_expected({"parameter name", "'}'"});
        take();
        d.span = from(start.span);
        return d;
    }

    CaseDecl case_decl() {
        CaseDecl d;
        const Token& start = take();
        d.name = name("case name");
        expect_keyword("when");
        d.when.push_back(pattern());
        while (at_word("and")) {
            take();
            d.when.push_back(pattern());
        }
        expect_keyword("hypothesize");
        d.outputs.push_back(pattern());
        while (at(TokenKind::comma)) {
            take();
            d.outputs.push_back(pattern());
        }
        if (at(TokenKind::keyword) && peek().text == "confidence") {
            take();
            const Token& t = expect(TokenKind::number, "confidence value");
            d.confidence = number_atom(t).number;
        }
        d.span = from(start.span);
        return d;
    }

    VerifierDecl verifier() {
        VerifierDecl d;
        const Token& start = take();
        d.name = name("verifier name");
        expect_word("on");
        d.predicate = name("predicate name");
        expect_word("using");
        // `intel` is also a keyword; here it names an evidence store.
        if (!at(TokenKind::ident) && !(at(TokenKind::keyword) && peek().text == "intel"))
            fail_expected({"evidence source"});
        d.evidence = take().text;
        d.span = from(start.span);
        return d;
    }

    DecisionDecl decision() {
        DecisionDecl d;
        const Token& start = take();
        d.name = name("decision name");
        expect_word("on");
        d.predicate = name("predicate name");
        d.span = from(start.span);
        return d;
    }

    ActionDecl action() {
        ActionDecl d;
        const Token& start = take();
        d.name = name("action name");
        expect_word("targets");
        d.target_kind = name("target kind");
        expect_word("applies");
        d.condition = name("condition");
        d.span = from(start.span);
        return d;
    }

    static bool level_word(const Token& t) {
        return t.kind == TokenKind::ident && (t.text == "low" || t.text == "moderate" || t.text == "high");
    }

    CostsDecl costs() {
        CostsDecl d;
        const Token& start = take();
        expect(TokenKind::lbrace);
        while (!at(TokenKind::rbrace)) {
            if (!(at(TokenKind::ident) && at(TokenKind::colon, 1))) fail_expected({"action name", "'order'", "'}'"});
            const Token& head = take();
            take();
            auto row_ends = [&] { return at(TokenKind::rbrace) || (at(TokenKind::ident) && at(TokenKind::colon, 1)); };
            if (head.text == "order") {
                while (!row_ends()) d.order.push_back(name("criterion"));
                continue;
            }
            CostRow row;
            row.action = head.text;
            if (level_word(peek())) {
                for (int i = 1; i <= 6; ++i) {
                    if (!level_word(peek())) fail_expected({"'low'", "'moderate'", "'high'"});
                    row.cells.emplace_back("C" + std::to_string(i), take().text);
                }
            } else {
                while (!row_ends()) {
                    std::string crit = name("criterion");
                    std::string level = name("level");
                    row.cells.emplace_back(std::move(crit), std::move(level));
                }
            }
            row.span = from(head.span);
            d.rows.push_back(std::move(row));
        }
        take();
        d.span = from(start.span);
        return d;
    }

    ProfileDecl profile() {
        ProfileDecl d;
        const Token& start = take();
        if (at_word("defender")) {
            take();
            d.defender = true;
        } else if (at_word("asset")) {
            take();
            if (at(TokenKind::string)) d.host = take().text;
            else d.host = name("host");
        } else {
            fail_expected({"'asset'", "'defender'"});
        }
        while (at(TokenKind::ident)) {
            Flag f;
            const Token& n = take();
            f.name = n.text;
            if (at(TokenKind::lbracket)) {
                f.list = list();
                f.has_list = true;
            } else if (f.name == "downtime") {
                f.value = atom();
            }
            f.span = from(n.span);
            d.flags.push_back(std::move(f));
        }
        d.span = from(start.span);
        return d;
    }

    GoalDecl goal() {
        GoalDecl d;
        const Token& start = take();
        d.name = name("goal name");
        d.span = from(start.span);
        return d;
    }

    const std::vector<Token>& toks_;
    std::size_t pos_ = 0;
};

}  // namespace

HuntSpecAst parse(const std::vector<Token>& tokens) { return Parser(tokens).hunt(); }

HuntSpecAst parse(std::string_view text) {
    auto tokens = tokenize(text);
    return parse(tokens);
}

}  // namespace huntforge::dsl
