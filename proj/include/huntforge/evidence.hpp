#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace huntforge {

enum class EvidenceKind {
    telemetry,   // source = "http" | "syslog", offset = record index
    intel,       // source = intel entry id, e.g. "cc/203.0.113.7", "malware/zeus"
    hypothesis,  // source = hypothesis id
    verdict,     // source = verifier name, detail = hypothesis id
    artifact,    // source = host, detail = artifact path
    fact,        // source = predicate text
    analyst,     // source = analyst id
};

/// A link from a claim back towards the observation that supports it.
struct EvidenceRef {
    EvidenceKind kind = EvidenceKind::telemetry;
    std::string source;
    std::string detail;
    std::uint64_t offset = 0;

    static EvidenceRef telemetry(std::string source, std::uint64_t offset);
    static EvidenceRef intel(std::string entry_id);
    static EvidenceRef hypothesis(std::string id);
    static EvidenceRef verdict(std::string verifier, std::string hypothesis_id);
    static EvidenceRef artifact(std::string host, std::string path);
    static EvidenceRef fact(std::string predicate_text);
    static EvidenceRef analyst(std::string analyst_id);

    /// Compact text form used in journals, e.g. `telemetry:http:12`, `hyp:h3`.
    std::string to_string() const;
    static EvidenceRef parse(std::string_view text);

    auto operator<=>(const EvidenceRef&) const = default;
    bool operator==(const EvidenceRef&) const = default;
};

using ProvenanceChain = std::vector<EvidenceRef>;

void to_json(nlohmann::json& j, const EvidenceRef& r);
void from_json(const nlohmann::json& j, EvidenceRef& r);

}  // namespace huntforge
