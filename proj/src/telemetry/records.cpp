#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "huntforge/errors.hpp"
#include "huntforge/telemetry.hpp"

namespace huntforge::telemetry {

using nlohmann::json;

namespace {

json parse_object(std::string_view line, std::string_view what) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw invalid(std::string(what) + ": malformed JSON: " + e.what());
    }
    if (!j.is_object()) throw invalid(std::string(what) + ": expected a JSON object");
    return j;
}

const json& require(const json& j, const char* key, std::string_view what) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null())
        throw invalid(std::string(what) + ": missing required field '" + key + "'");
    return *it;
}

std::string require_string(const json& j, const char* key, std::string_view what) {
    const auto& v = require(j, key, what);
    if (!v.is_string()) throw invalid(std::string(what) + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

double require_ts(const json& j, std::string_view what) {
    const auto& v = require(j, "ts", what);
    if (!v.is_number()) throw invalid(std::string(what) + ": field 'ts' must be a number");
    double ts = v.get<double>();
    if (!std::isfinite(ts) || ts < 0) throw invalid(std::string(what) + ": 'ts' must be finite and >= 0");
    return ts;
}

std::uint64_t require_count(const json& j, const char* key, std::string_view what) {
    const auto& v = require(j, key, what);
    if (!v.is_number_integer()) throw invalid(std::string(what) + ": field '" + key + "' must be an integer");
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    auto value = v.get<std::int64_t>();
    if (value < 0) throw invalid(std::string(what) + ": field '" + key + "' must be non-negative");
    return static_cast<std::uint64_t>(value);
}

}  // namespace

const std::vector<std::string>& syslog_event_types() {
    static const std::vector<std::string> types = {
        "smb_access", "nfs_access", "login", "logout", "process_start", "service_restart",
    };
    return types;
}

bool is_peer_event(std::string_view event_type) {
    return event_type == "smb_access" || event_type == "nfs_access";
}

HttpFlow parse_http_record(std::string_view line) {
    constexpr std::string_view what = "http record";
    json j = parse_object(line, what);
    HttpFlow f;
    f.ts = require_ts(j, what);
    f.src = require_string(j, "src", what);
    f.dst = require_string(j, "dst", what);
    const auto& port = require(j, "dst_port", what);
    if (!port.is_number_integer()) throw invalid("http record: field 'dst_port' must be an integer");
    auto p = port.get<std::int64_t>();
    if (p < 1 || p > 65535) throw invalid("http record: 'dst_port' outside 1..65535");
    f.dst_port = static_cast<int>(p);
    f.host_header = require_string(j, "host_header", what);
    f.uri = require_string(j, "uri", what);
    f.bytes_out = require_count(j, "bytes_out", what);
    f.bytes_in = require_count(j, "bytes_in", what);
    if (f.src == f.dst) throw invalid("http record: src and dst are the same host '" + f.src + "'");
    return f;
}

SyslogEvent parse_syslog_record(std::string_view line, ParseMode mode, std::vector<std::string>* warnings) {
    constexpr std::string_view what = "syslog record";
    json j = parse_object(line, what);
    SyslogEvent e;
    e.ts = require_ts(j, what);
    e.host = require_string(j, "host", what);
    e.process = require_string(j, "process", what);
    e.event_type = require_string(j, "event_type", what);
    if (auto it = j.find("peer"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw invalid("syslog record: field 'peer' must be a string");
        e.peer = it->get<std::string>();
    }
    e.message = j.value("message", std::string{});
    const auto& known = syslog_event_types();
    if (std::find(known.begin(), known.end(), e.event_type) == known.end()) {
        std::string msg = "syslog record: unknown event_type '" + e.event_type + "'";
        if (mode == ParseMode::strict) throw invalid(msg);
        if (warnings) warnings->push_back(msg);
    }
    if (is_peer_event(e.event_type) && !e.peer)
        throw invalid("syslog record: event_type '" + e.event_type + "' requires a 'peer'");
    return e;
}

ForensicInventory parse_inventory(const json& doc) {
    if (!doc.is_object()) throw invalid("inventory: expected a JSON object");
    ForensicInventory inv;
    inv.host = require_string(doc, "host", "inventory");
    for (const auto& a : doc.value("artifacts", json::array())) {
        Artifact art;
        art.sha256 = require_string(a, "sha256", "inventory artifact");
        art.path = require_string(a, "path", "inventory artifact");
        std::transform(art.sha256.begin(), art.sha256.end(), art.sha256.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        inv.artifacts.push_back(std::move(art));
    }
    return inv;
}

json to_json(const HttpFlow& f) {
    return json{{"ts", f.ts},
                {"src", f.src},
                {"dst", f.dst},
                {"dst_port", f.dst_port},
                {"host_header", f.host_header},
                {"uri", f.uri},
                {"bytes_out", f.bytes_out},
                {"bytes_in", f.bytes_in}};
}

json to_json(const SyslogEvent& e) {
    json j{{"ts", e.ts}, {"host", e.host}, {"process", e.process}, {"event_type", e.event_type},
           {"message", e.message}};
    if (e.peer) j["peer"] = *e.peer;
    return j;
}

json to_json(const ForensicInventory& inv) {
    json arts = json::array();
    for (const auto& a : inv.artifacts) arts.push_back({{"sha256", a.sha256}, {"path", a.path}});
    return json{{"host", inv.host}, {"artifacts", arts}};
}

std::string serialize(const HttpFlow& f) { return to_json(f).dump(); }
std::string serialize(const SyslogEvent& e) { return to_json(e).dump(); }

std::size_t ingest_ndjson(TelemetryCorpus& corpus, std::string_view text, ParseMode mode) {
    std::size_t n = 0;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            if (end == text.size()) break;
            continue;
        }
        try {
            if (line.find("\"event_type\"") != std::string_view::npos)
                corpus.syslog.push_back(parse_syslog_record(line, mode));
            else
                corpus.http.push_back(parse_http_record(line));
        } catch (const HuntError& e) {
            throw HuntError(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
        }
        ++n;
        if (end == text.size()) break;
    }
    return n;
}

namespace {

std::vector<std::filesystem::path> files_with_suffix(const std::filesystem::path& dir, std::string_view suffix) {
    std::vector<std::filesystem::path> out;
    if (!std::filesystem::is_directory(dir)) return out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto name = entry.path().filename().string();
        if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
            out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

template <typename Fn>
void for_each_line(const std::filesystem::path& file, Fn&& fn) {
    std::ifstream in(file);
    if (!in) throw HuntError(ErrorCode::io, "cannot open " + file.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            fn(line);
        } catch (const HuntError& e) {
            throw HuntError(e.code(), file.filename().string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

}  // namespace

TelemetryCorpus load_corpus(const std::filesystem::path& dir, ParseMode mode) {
    if (!std::filesystem::is_directory(dir))
        throw not_found("telemetry directory not found: " + dir.string());
    TelemetryCorpus corpus;
    for (const auto& f : files_with_suffix(dir, ".http.ndjson"))
        for_each_line(f, [&](const std::string& l) { corpus.http.push_back(parse_http_record(l)); });
    for (const auto& f : files_with_suffix(dir, ".syslog.ndjson"))
        for_each_line(f, [&](const std::string& l) { corpus.syslog.push_back(parse_syslog_record(l, mode)); });
    auto inventories = files_with_suffix(dir, ".inventory.json");
    auto forensics = files_with_suffix(dir / "forensics", ".json");
    inventories.insert(inventories.end(), forensics.begin(), forensics.end());
    for (const auto& f : inventories) {
        std::ifstream in(f);
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw invalid(f.filename().string() + ": malformed JSON: " + e.what());
        }
        auto inv = parse_inventory(doc);
        corpus.inventories[inv.host] = std::move(inv);
    }
    return corpus;
}

void write_corpus(const TelemetryCorpus& corpus, const std::filesystem::path& dir, std::string_view stem) {
    std::filesystem::create_directories(dir / "forensics");
    auto open = [](const std::filesystem::path& p) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw HuntError(ErrorCode::io, "cannot write " + p.string());
        return out;
    };
    {
        auto out = open(dir / (std::string(stem) + ".http.ndjson"));
        for (const auto& f : corpus.http) out << serialize(f) << '\n';
    }
    {
        auto out = open(dir / (std::string(stem) + ".syslog.ndjson"));
        for (const auto& e : corpus.syslog) out << serialize(e) << '\n';
    }
    for (const auto& [host, inv] : corpus.inventories) {
        auto out = open(dir / "forensics" / (host + ".json"));
        out << to_json(inv).dump(2) << '\n';
    }
}

std::uint64_t PeerSeries::total() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
}

PeerSeries build_peer_series(std::span<const HttpFlow> flows, std::string_view src, std::string_view dst,
                             double t0, double t1, double bin_width) {
    if (!(t1 > t0)) throw invalid("peer series: empty window");
    if (!(bin_width > 0)) throw invalid("peer series: bin width must be positive");
    double bins = (t1 - t0) / bin_width;
    double rounded = std::round(bins);
    if (rounded < 1 || std::abs(bins - rounded) > 1e-9 * std::max(1.0, bins))
        throw invalid("peer series: bin width does not divide the window");
    PeerSeries s;
    s.src = std::string(src);
    s.dst = std::string(dst);
    s.bin_width = bin_width;
    s.t0 = t0;
    s.counts.assign(static_cast<std::size_t>(rounded), 0);
    for (const auto& f : flows) {
        if (f.src != src || f.dst != dst || f.ts < t0 || f.ts >= t1) continue;
        auto idx = static_cast<std::size_t>(std::floor((f.ts - t0) / bin_width));
        if (idx >= s.counts.size()) idx = s.counts.size() - 1;
        ++s.counts[idx];
    }
    return s;
}

}  // namespace huntforge::telemetry
