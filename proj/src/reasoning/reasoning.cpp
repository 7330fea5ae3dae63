#include "huntforge/reasoning.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "huntforge/errors.hpp"

namespace huntforge::reasoning {
namespace {

void expect_shape(const Hypothesis& h, HypothesisKind kind, std::string_view name, std::size_t arity) {
    if (h.kind != kind || h.predicate.name != name || h.predicate.arity() != arity)
        throw invalid("wrong predicate shape: expected " + std::string(to_string(kind)) + " " + std::string(name) +
                      "/" + std::to_string(arity) + ", got " + h.predicate.to_string());
}

}  // namespace

bool natural_less(std::string_view a, std::string_view b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        bool da = std::isdigit(static_cast<unsigned char>(a[i])) != 0;
        bool db = std::isdigit(static_cast<unsigned char>(b[j])) != 0;
        if (da && db) {
            std::size_t ei = i, ej = j;
            while (ei < a.size() && std::isdigit(static_cast<unsigned char>(a[ei]))) ++ei;
            while (ej < b.size() && std::isdigit(static_cast<unsigned char>(b[ej]))) ++ej;
            auto na = a.substr(i, ei - i), nb = b.substr(j, ej - j);
            while (na.size() > 1 && na.front() == '0') na.remove_prefix(1);
            while (nb.size() > 1 && nb.front() == '0') nb.remove_prefix(1);
            if (na.size() != nb.size()) return na.size() < nb.size();
            if (na != nb) return na < nb;
            i = ei;
            j = ej;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    return a.size() - i < b.size() - j;
}

std::vector<Hypothesis> kge_expand(const Hypothesis& d, const KnowledgeBase& k, double unmatched_factor) {
    expect_shape(d, HypothesisKind::detection, "beacon", 2);
    const std::string& remote = d.predicate.args[0];
    const std::string& client = d.predicate.args[1];
    const IntelStore& intel = *k.intel;

    bool matched = false;
    for (const auto& m : intel_lookup(intel, remote))
        if (m.kind == IntelMatchKind::cc) matched = true;

    std::vector<Hypothesis> out;
    Hypothesis cec;
    cec.kind = HypothesisKind::threat;
    cec.predicate = Predicate("cec", {remote});
    cec.confidence = matched ? d.confidence : d.confidence * unmatched_factor;
    cec.evidence.push_back(EvidenceRef::hypothesis(d.id));
    if (matched) cec.evidence.push_back(EvidenceRef::intel(cc_entry_id(remote)));
    cec.origin = "kge";
    out.push_back(std::move(cec));

    if (!matched) return out;
    for (const auto& m : intel.malware) {
        Hypothesis inf;
        inf.kind = HypothesisKind::threat;
        inf.predicate = Predicate("infected", {client, m.name});
        inf.confidence = d.confidence;
        inf.evidence = {EvidenceRef::hypothesis(d.id), EvidenceRef::intel(cc_entry_id(remote)),
                        EvidenceRef::intel(malware_entry_id(m.name))};
        inf.origin = "kge";
        out.push_back(std::move(inf));
    }
    return out;
}

std::vector<Hypothesis> impact_assess(const Predicate& fact, const KnowledgeBase& k,
                                      std::span<const telemetry::SyslogEvent> syslog, double confidence) {
    if (fact.name != "infected" || fact.arity() != 2)
        throw invalid("wrong predicate shape: expected infected/2, got " + fact.to_string());
    if (!k.has_fact(fact)) throw HuntError(ErrorCode::not_applicable, "fact not in knowledge: " + fact.to_string());
    const std::string& source = fact.args[0];
    const std::string& malware = fact.args[1];

    auto by_host = std::map<std::string, std::vector<std::size_t>, bool (*)(std::string_view, std::string_view)>(
        natural_less);
    for (std::size_t i = 0; i < syslog.size(); ++i) {
        const auto& e = syslog[i];
        if (e.event_type != "smb_access" || !e.peer || *e.peer != source || e.host == source) continue;
        if (!k.internal->has_endpoint(e.host)) continue;
        if (k.has_fact(Predicate("infected", {e.host, malware}))) continue;
        by_host[e.host].push_back(i);
    }

    std::vector<Hypothesis> out;
    for (const auto& [host, offsets] : by_host) {
        Hypothesis h;
        h.kind = HypothesisKind::threat;
        h.predicate = Predicate("infected", {host, malware});
        h.confidence = confidence;
        h.evidence.push_back(EvidenceRef::fact(fact.to_string()));
        for (auto off : offsets) h.evidence.push_back(EvidenceRef::telemetry("syslog", off));
        h.origin = "impact";
        out.push_back(std::move(h));
    }
    return out;
}

Verdict verify_analytics(const Hypothesis& h, const KnowledgeBase& k) {
    expect_shape(h, HypothesisKind::threat, "cec", 1);
    Verdict v{h.id, Decision::rejected, "analytics", {}};
    const std::string& x = h.predicate.args[0];
    const auto& cc = k.intel->cc_hosts;
    if (std::find(cc.begin(), cc.end(), x) != cc.end()) {
        v.decision = Decision::accepted;
        v.rationale.push_back(EvidenceRef::intel(cc_entry_id(x)));
    }
    return v;
}

Verdict verify_forensics(const Hypothesis& h, const telemetry::ForensicInventorySet& inventories,
                         const KnowledgeBase& k) {
    expect_shape(h, HypothesisKind::threat, "infected", 2);
    const std::string& host = h.predicate.args[0];
    const std::string& malware = h.predicate.args[1];
    auto inv = inventories.find(host);
    if (inv == inventories.end())
        throw HuntError(ErrorCode::unavailable, "verification unavailable: no forensic inventory for " + host);

    Verdict v{h.id, Decision::rejected, "forensics", {}};
    const MalwareEntry* entry = k.intel->find_malware(malware);
    if (!entry) return v;
    v.rationale.push_back(EvidenceRef::intel(malware_entry_id(malware)));
    for (const auto& a : inv->second.artifacts) {
        if (a.sha256 == entry->sha256) {
            v.decision = Decision::accepted;
            v.rationale.insert(v.rationale.begin(), EvidenceRef::artifact(host, a.path));
            break;
        }
    }
    return v;
}

}  // namespace huntforge::reasoning
