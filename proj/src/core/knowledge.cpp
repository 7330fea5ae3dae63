#include "huntforge/knowledge.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "huntforge/errors.hpp"

namespace huntforge {

bool InternalKnowledge::has_endpoint(std::string_view host) const {
    return std::find(endpoints.begin(), endpoints.end(), host) != endpoints.end();
}

std::string cc_entry_id(std::string_view host) { return "cc/" + std::string(host); }
std::string malware_entry_id(std::string_view name) { return "malware/" + std::string(name); }

void IntelStore::validate() const {
    std::set<std::string> seen;
    for (const auto& h : cc_hosts) {
        if (h.empty()) throw invalid("intel: empty C&C indicator");
        if (!seen.insert(cc_entry_id(h)).second) throw invalid("intel: duplicate C&C indicator '" + h + "'");
    }
    for (const auto& m : malware) {
        if (m.name.empty()) throw invalid("intel: malware entry without a name");
        if (!seen.insert(malware_entry_id(m.name)).second) throw invalid("intel: duplicate malware '" + m.name + "'");
        bool hex = m.sha256.size() == 64 && std::all_of(m.sha256.begin(), m.sha256.end(), [](char c) {
                       return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
                   });
        if (!hex) throw invalid("intel: sha256 for '" + m.name + "' must be 64 lowercase hex characters");
    }
}

const MalwareEntry* IntelStore::find_malware(std::string_view name) const {
    auto it = std::find_if(malware.begin(), malware.end(), [&](const MalwareEntry& m) { return m.name == name; });
    return it == malware.end() ? nullptr : &*it;
}

bool IntelStore::has_entry(std::string_view entry_id) const {
    if (entry_id.starts_with("cc/"))
        return std::find(cc_hosts.begin(), cc_hosts.end(), entry_id.substr(3)) != cc_hosts.end();
    if (entry_id.starts_with("malware/")) return find_malware(entry_id.substr(8)) != nullptr;
    return false;
}

std::vector<IntelMatch> intel_lookup(const IntelStore& store, std::string_view indicator) {
    std::vector<IntelMatch> out;
    for (const auto& h : store.cc_hosts)
        if (h == indicator) out.push_back({IntelMatchKind::cc, cc_entry_id(h), h});
    for (const auto& m : store.malware)
        if (m.sha256 == indicator) out.push_back({IntelMatchKind::malware, malware_entry_id(m.name), m.name});
    return out;
}

IntelStore parse_intel(const nlohmann::json& doc) {
    if (!doc.is_object()) throw invalid("intel: expected a JSON object");
    IntelStore s;
    s.cc_hosts = doc.value("cc_hosts", std::vector<std::string>{});
    for (const auto& m : doc.value("malware", nlohmann::json::array())) {
        MalwareEntry e;
        e.name = m.at("name").get<std::string>();
        e.sha256 = m.at("sha256").get<std::string>();
        s.malware.push_back(std::move(e));
    }
    s.validate();
    return s;
}

IntelStore load_intel(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw not_found("intel file not found: " + file.string());
    try {
        return parse_intel(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw invalid("intel file " + file.string() + ": " + e.what());
    }
}

nlohmann::json to_json(const IntelStore& store) {
    nlohmann::json malware = nlohmann::json::array();
    for (const auto& m : store.malware) malware.push_back({{"name", m.name}, {"sha256", m.sha256}});
    return {{"cc_hosts", store.cc_hosts}, {"malware", malware}};
}

void to_json(nlohmann::json& j, const Fact& f) {
    j = nlohmann::json{{"predicate", f.predicate}, {"provenance", f.provenance}};
}

void from_json(const nlohmann::json& j, Fact& f) {
    j.at("predicate").get_to(f.predicate);
    f.provenance = j.value("provenance", ProvenanceChain{});
}

const Fact* KnowledgeBase::find_fact(const Predicate& p) const {
    auto it = std::find_if(facts.begin(), facts.end(), [&](const Fact& f) { return f.predicate == p; });
    return it == facts.end() ? nullptr : &*it;
}

}  // namespace huntforge
