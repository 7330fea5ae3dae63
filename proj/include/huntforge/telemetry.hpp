#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace huntforge::telemetry {

/// One HTTP/S flow record from the network monitor.
struct HttpFlow {
    double ts = 0.0;  // epoch seconds
    std::string src;
    std::string dst;
    int dst_port = 0;
    std::string host_header;
    std::string uri;
    std::uint64_t bytes_out = 0;
    std::uint64_t bytes_in = 0;

    bool operator==(const HttpFlow&) const = default;
};

/// One endpoint system-log event.
struct SyslogEvent {
    double ts = 0.0;
    std::string host;
    std::string process;
    std::string event_type;
    std::optional<std::string> peer;
    std::string message;

    bool operator==(const SyslogEvent&) const = default;
};

struct Artifact {
    std::string sha256;
    std::string path;

    bool operator==(const Artifact&) const = default;
};

/// Files collected from a host by endpoint forensics.
struct ForensicInventory {
    std::string host;
    std::vector<Artifact> artifacts;

    bool operator==(const ForensicInventory&) const = default;
};

using ForensicInventorySet = std::map<std::string, ForensicInventory>;

enum class ParseMode { strict, lenient };

/// Event types understood by the syslog parser.
const std::vector<std::string>& syslog_event_types();
/// Event types that describe host-to-host access and therefore need a peer.
bool is_peer_event(std::string_view event_type);

HttpFlow parse_http_record(std::string_view line);
SyslogEvent parse_syslog_record(std::string_view line, ParseMode mode = ParseMode::strict,
                                std::vector<std::string>* warnings = nullptr);
ForensicInventory parse_inventory(const nlohmann::json& doc);

nlohmann::json to_json(const HttpFlow& f);
nlohmann::json to_json(const SyslogEvent& e);
nlohmann::json to_json(const ForensicInventory& inv);
std::string serialize(const HttpFlow& f);
std::string serialize(const SyslogEvent& e);

/// Flow counts of one directed peer pair over a binned window.
struct PeerSeries {
    std::string src;
    std::string dst;
    double bin_width = 0.0;
    double t0 = 0.0;
    std::vector<std::uint32_t> counts;

    std::uint64_t total() const;
    double window() const { return bin_width * static_cast<double>(counts.size()); }
};

/// Bins flows src->dst into [t0, t1) with the given bin width.
/// Throws if the window is empty or bin_width does not divide it.
PeerSeries build_peer_series(std::span<const HttpFlow> flows, std::string_view src, std::string_view dst,
                             double t0, double t1, double bin_width);

/// The telemetry a hunt can see: HTTP flows, syslog events and forensic inventories.
/// Record offsets into `http` and `syslog` are the evidence coordinates.
struct TelemetryCorpus {
    std::vector<HttpFlow> http;
    std::vector<SyslogEvent> syslog;
    ForensicInventorySet inventories;

    bool operator==(const TelemetryCorpus&) const = default;
};

/// Loads `*.http.ndjson`, `*.syslog.ndjson`, `*.inventory.json` and `forensics/*.json`
/// from a directory, files in name order.
TelemetryCorpus load_corpus(const std::filesystem::path& dir, ParseMode mode = ParseMode::strict);

/// Appends NDJSON records to a corpus; the record type is chosen per line
/// (`event_type` marks syslog). Returns the number of records read.
std::size_t ingest_ndjson(TelemetryCorpus& corpus, std::string_view text, ParseMode mode = ParseMode::strict);

void write_corpus(const TelemetryCorpus& corpus, const std::filesystem::path& dir, std::string_view stem);

}  // namespace huntforge::telemetry
