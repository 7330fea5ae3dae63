#include <sstream>

#include "huntforge/dsl/dsl.hpp"

namespace huntforge::dsl {
namespace {

bool bare_word(const std::string& s) {
    if (s.empty() || keywords().count(s)) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out + "\"";
}

std::string word(const std::string& s) { return bare_word(s) ? s : quote(s); }

std::string atom(const Atom& a) {
    switch (a.kind) {
        case Atom::Kind::ident: return word(a.text);
        case Atom::Kind::string: return quote(a.text);
        case Atom::Kind::number: return Atom::num(a.number).text;
    }
    return a.text;
}

std::string list(const std::vector<ListItem>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += atom(items[i].atom);
        if (items[i].range)
            out += "[" + std::to_string(items[i].range->first) + ".." + std::to_string(items[i].range->second) + "]";
    }
    return out + "]";
}

std::string pattern(const PredPattern& p) {
    std::string out = p.name + "(";
    for (std::size_t i = 0; i < p.args.size(); ++i) out += (i ? ", " : "") + atom(p.args[i]);
    return out + ")";
}

std::string patterns(const std::vector<PredPattern>& ps, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < ps.size(); ++i) out += (i ? sep : "") + pattern(ps[i]);
    return out;
}

struct Printer {
    std::ostringstream out;

    void operator()(const IntelDecl& d) {
        out << "  intel {\n";
        if (!d.cc.empty()) out << "    cc: " << list(d.cc) << "\n";
        if (!d.malware.empty()) {
            out << "    malware: [";
            for (std::size_t i = 0; i < d.malware.size(); ++i)
                out << (i ? ", " : "") << "(" << atom(d.malware[i].name) << ", " << quote(d.malware[i].sha256) << ")";
            out << "]\n";
        }
        if (!d.known.empty()) out << "    known: [" << patterns(d.known, ", ") << "]\n";
        out << "  }\n";
    }
    void operator()(const TelemetryDecl& d) {
        out << "  telemetry {\n";
        if (!d.endpoints.empty()) out << "    endpoints: " << list(d.endpoints) << "\n";
        if (!d.monitoring.empty()) out << "    monitoring: " << list(d.monitoring) << "\n";
        out << "  }\n";
    }
    void operator()(const DetectorDecl& d) {
        out << "  detector " << d.name << " on " << d.source << " {";
        if (d.params.empty()) {
            out << " }\n";
            return;
        }
        out << "\n";
        for (const auto& p : d.params) out << "    " << p.name << " " << atom(p.value) << "\n";
        out << "  }\n";
    }
    void operator()(const CaseDecl& d) {
        out << "  case " << d.name << " when " << patterns(d.when, " and ") << " hypothesize "
            << patterns(d.outputs, ", ");
        if (d.confidence) out << " confidence " << Atom::num(*d.confidence).text;
        out << "\n";
    }
    void operator()(const VerifierDecl& d) {
        out << "  verifier " << d.name << " on " << d.predicate << " using " << d.evidence << "\n";
    }
    void operator()(const DecisionDecl& d) { out << "  decision " << d.name << " on " << d.predicate << "\n"; }
    void operator()(const ActionDecl& d) {
        out << "  action " << d.name << " targets " << d.target_kind << " applies " << d.condition << "\n";
    }
    void operator()(const CostsDecl& d) {
        out << "  costs {\n";
        for (const auto& r : d.rows) {
            out << "    " << r.action << ":";
            for (const auto& [c, l] : r.cells) out << " " << c << " " << l;
            out << "\n";
        }
        if (!d.order.empty()) {
            out << "    order:";
            for (const auto& c : d.order) out << " " << c;
            out << "\n";
        }
        out << "  }\n";
    }
    void operator()(const ProfileDecl& d) {
        if (d.flags.empty()) return;
        out << "  profile " << (d.defender ? std::string("defender") : "asset " + word(d.host));
        for (const auto& f : d.flags) {
            out << " " << f.name;
            if (f.value) out << " " << atom(*f.value);
            if (f.has_list) out << " " << list(f.list);
        }
        out << "\n";
    }
    void operator()(const GoalDecl& d) { out << "  goal " << d.name << "\n"; }
};

}  // namespace

std::string format(const HuntSpecAst& ast) {
    Printer p;
    p.out << "hunt " << ast.name << " {\n";
    for (const auto& d : ast.decls) std::visit(p, d);
    p.out << "}\n";
    return p.out.str();
}

}  // namespace huntforge::dsl
