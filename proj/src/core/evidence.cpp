#include "huntforge/evidence.hpp"

#include <charconv>

#include "huntforge/errors.hpp"

namespace huntforge {

EvidenceRef EvidenceRef::telemetry(std::string source, std::uint64_t offset) {
    return {EvidenceKind::telemetry, std::move(source), {}, offset};
}
EvidenceRef EvidenceRef::intel(std::string entry_id) {
    return {EvidenceKind::intel, std::move(entry_id), {}, 0};
}
EvidenceRef EvidenceRef::hypothesis(std::string id) {
    return {EvidenceKind::hypothesis, std::move(id), {}, 0};
}
EvidenceRef EvidenceRef::verdict(std::string verifier, std::string hypothesis_id) {
    return {EvidenceKind::verdict, std::move(verifier), std::move(hypothesis_id), 0};
}
EvidenceRef EvidenceRef::artifact(std::string host, std::string path) {
    return {EvidenceKind::artifact, std::move(host), std::move(path), 0};
}
EvidenceRef EvidenceRef::fact(std::string predicate_text) {
    return {EvidenceKind::fact, std::move(predicate_text), {}, 0};
}
EvidenceRef EvidenceRef::analyst(std::string analyst_id) {
    return {EvidenceKind::analyst, std::move(analyst_id), {}, 0};
}

std::string EvidenceRef::to_string() const {
    switch (kind) {
        case EvidenceKind::telemetry: return "telemetry:" + source + ":" + std::to_string(offset);
        case EvidenceKind::intel: return "intel:" + source;
        case EvidenceKind::hypothesis: return "hyp:" + source;
        case EvidenceKind::verdict: return "verdict:" + source + ":" + detail;
        case EvidenceKind::artifact: return "artifact:" + source + ":" + detail;
        case EvidenceKind::fact: return "fact:" + source;
        case EvidenceKind::analyst: return "analyst:" + source;
    }
    return {};
}

EvidenceRef EvidenceRef::parse(std::string_view text) {
    auto colon = text.find(':');
    if (colon == std::string_view::npos) throw invalid("malformed evidence ref '" + std::string(text) + "'");
    auto tag = text.substr(0, colon);
    auto rest = text.substr(colon + 1);
    auto split = [&](std::string_view s) {
        auto c = s.find(':');
        if (c == std::string_view::npos) throw invalid("malformed evidence ref '" + std::string(text) + "'");
        return std::pair{std::string(s.substr(0, c)), std::string(s.substr(c + 1))};
    };
    if (tag == "telemetry") {
        auto [src, off] = split(rest);
        std::uint64_t value = 0;
        auto [ptr, ec] = std::from_chars(off.data(), off.data() + off.size(), value);
        if (ec != std::errc{} || ptr != off.data() + off.size())
            throw invalid("malformed telemetry offset in '" + std::string(text) + "'");
        return telemetry(src, value);
    }
    if (tag == "intel") return intel(std::string(rest));
    if (tag == "hyp") return hypothesis(std::string(rest));
    if (tag == "verdict") {
        auto [v, h] = split(rest);
        return verdict(v, h);
    }
    if (tag == "artifact") {
        auto [host, path] = split(rest);
        return artifact(host, path);
    }
    if (tag == "fact") return fact(std::string(rest));
    if (tag == "analyst") return analyst(std::string(rest));
    throw invalid("unknown evidence kind in '" + std::string(text) + "'");
}

void to_json(nlohmann::json& j, const EvidenceRef& r) { j = r.to_string(); }
void from_json(const nlohmann::json& j, EvidenceRef& r) { r = EvidenceRef::parse(j.get<std::string>()); }

}  // namespace huntforge
