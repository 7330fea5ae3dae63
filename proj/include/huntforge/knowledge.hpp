#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "huntforge/evidence.hpp"
#include "huntforge/predicate.hpp"

namespace huntforge {

/// What the defender knows about its own network.
struct InternalKnowledge {
    std::vector<std::string> endpoints;
    std::vector<std::string> monitoring;

    bool has_endpoint(std::string_view host) const;
    bool operator==(const InternalKnowledge&) const = default;
};

struct MalwareEntry {
    std::string name;
    std::string sha256;  // 64 lowercase hex chars

    bool operator==(const MalwareEntry&) const = default;
};

/// Local threat intelligence: C&C indicators and malware hashes.
struct IntelStore {
    std::vector<std::string> cc_hosts;
    std::vector<MalwareEntry> malware;

    /// Throws HuntError(invalid_argument) on malformed hashes or duplicate entries.
    void validate() const;
    const MalwareEntry* find_malware(std::string_view name) const;
    bool has_entry(std::string_view entry_id) const;

    bool operator==(const IntelStore&) const = default;
};

enum class IntelMatchKind { cc, malware };

struct IntelMatch {
    IntelMatchKind kind = IntelMatchKind::cc;
    std::string entry_id;  // "cc/<host>" or "malware/<name>"
    std::string name;      // host indicator or malware name

    bool operator==(const IntelMatch&) const = default;
};

/// Exact-match lookup across C&C hosts and malware hashes.
std::vector<IntelMatch> intel_lookup(const IntelStore& store, std::string_view indicator);

std::string cc_entry_id(std::string_view host);
std::string malware_entry_id(std::string_view name);

IntelStore parse_intel(const nlohmann::json& doc);
IntelStore load_intel(const std::filesystem::path& file);
nlohmann::json to_json(const IntelStore& store);

/// A fact and the chain of evidence that established it.
struct Fact {
    Predicate predicate;
    ProvenanceChain provenance;

    bool operator==(const Fact&) const = default;
};

void to_json(nlohmann::json& j, const Fact& f);
void from_json(const nlohmann::json& j, Fact& f);

/// K of the hunt state. Stores are shared and immutable; facts only grow.
struct KnowledgeBase {
    std::shared_ptr<const InternalKnowledge> internal = std::make_shared<InternalKnowledge>();
    std::shared_ptr<const IntelStore> intel = std::make_shared<IntelStore>();
    std::vector<Fact> facts;

    const Fact* find_fact(const Predicate& p) const;
    bool has_fact(const Predicate& p) const { return find_fact(p) != nullptr; }
};

}  // namespace huntforge
