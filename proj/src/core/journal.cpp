#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "huntforge/errors.hpp"
#include "huntforge/hunt.hpp"

namespace huntforge {

std::string_view to_string(StepKind k) {
    switch (k) {
        case StepKind::detect: return "detect";
        case StepKind::case_step: return "case";
        case StepKind::verify: return "verify";
        case StepKind::deliberate: return "deliberate";
        case StepKind::promote: return "promote";
    }
    return "";
}

StepKind parse_step_kind(std::string_view s) {
    if (s == "detect") return StepKind::detect;
    if (s == "case") return StepKind::case_step;
    if (s == "verify") return StepKind::verify;
    if (s == "deliberate") return StepKind::deliberate;
    if (s == "promote") return StepKind::promote;
    throw invalid("unknown step kind '" + std::string(s) + "'");
}

std::string Actor::to_string() const { return analyst ? "analyst:" + id : "machine"; }

Actor Actor::parse(std::string_view text) {
    if (text == "machine") return machine();
    if (text.starts_with("analyst:")) return analyst_named(std::string(text.substr(8)));
    throw invalid("unknown actor '" + std::string(text) + "'");
}

void to_json(nlohmann::json& j, const StepRecord& r) {
    nlohmann::json deltas = nlohmann::json::object();
    if (!r.deltas.facts_added.empty()) deltas["facts_added"] = r.deltas.facts_added;
    if (!r.deltas.hyps_added.empty()) deltas["hyps_added"] = r.deltas.hyps_added;
    if (!r.deltas.hyps_removed.empty()) deltas["hyps_removed"] = r.deltas.hyps_removed;
    if (!r.deltas.recommendations_added.empty()) deltas["recommendations_added"] = r.deltas.recommendations_added;
    j = nlohmann::json{{"seq", r.seq},         {"ts", r.ts},         {"manifold", r.manifold},
                       {"kind", to_string(r.kind)}, {"deltas", deltas}, {"actor", r.actor.to_string()}};
}

void from_json(const nlohmann::json& j, StepRecord& r) {
    j.at("seq").get_to(r.seq);
    r.ts = j.value("ts", std::string{});
    j.at("manifold").get_to(r.manifold);
    r.kind = parse_step_kind(j.at("kind").get<std::string>());
    r.actor = Actor::parse(j.at("actor").get<std::string>());
    const auto& d = j.at("deltas");
    r.deltas.facts_added = d.value("facts_added", std::vector<Predicate>{});
    r.deltas.hyps_added = d.value("hyps_added", std::vector<Hypothesis>{});
    r.deltas.hyps_removed = d.value("hyps_removed", std::vector<std::string>{});
    r.deltas.recommendations_added =
        d.value("recommendations_added", std::vector<deliberation::ActionRecommendation>{});
}

std::string utc_now() {
    using namespace std::chrono;
    auto now = system_clock::now();
    auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    std::time_t t = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

std::string write_journal_line(const StepRecord& r) {
    nlohmann::json j = r;
    nlohmann::ordered_json line;
    for (const char* key : {"seq", "ts", "manifold", "kind", "deltas", "actor"}) line[key] = j[key];
    return line.dump();
}

std::vector<StepRecord> parse_journal(std::string_view text) {
    std::vector<StepRecord> out;
    std::size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            out.push_back(nlohmann::json::parse(line).get<StepRecord>());
        } catch (const nlohmann::json::exception& e) {
            throw HuntError(ErrorCode::parse, "journal line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<StepRecord> read_journal(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw not_found("journal not found: " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_journal(ss.str());
}

void write_journal(const std::vector<StepRecord>& journal, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw HuntError(ErrorCode::io, "cannot write journal " + file.string());
    for (const auto& r : journal) out << write_journal_line(r) << '\n';
}

}  // namespace huntforge
