#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "huntforge/detectors.hpp"

namespace huntforge::detectors {

namespace {

using PairKey = std::pair<std::string, std::string>;

Hypothesis beacon_hypothesis(const PairKey& pair, double confidence, std::vector<EvidenceRef> evidence,
                             std::string origin) {
    Hypothesis h;
    h.kind = HypothesisKind::detection;
    // Remote host first: beacon(remote, client).
    h.predicate = Predicate("beacon", {pair.second, pair.first});
    h.confidence = confidence;
    h.evidence = std::move(evidence);
    h.origin = std::move(origin);
    return h;
}

}  // namespace

std::vector<Hypothesis> detect_beacons(std::span<const telemetry::HttpFlow> flows,
                                       const BeaconDetectionParams& params) {
    params.validate();
    std::vector<Hypothesis> out;
    if (flows.empty()) return out;

    double t0 = 0.0;
    if (params.window_start) {
        t0 = *params.window_start;
    } else {
        double first = std::numeric_limits<double>::infinity();
        for (const auto& f : flows) first = std::min(first, f.ts);
        t0 = std::floor(first / params.bin_width) * params.bin_width;
    }
    const double t1 = t0 + params.window;

    std::map<PairKey, std::vector<std::uint64_t>> pairs;
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const auto& f = flows[i];
        if (f.ts < t0 || f.ts >= t1) continue;
        pairs[{f.src, f.dst}].push_back(i);
    }
    for (const auto& [pair, offsets] : pairs) {
        if (offsets.size() < params.min_events) continue;
        auto series = telemetry::build_peer_series(flows, pair.first, pair.second, t0, t1, params.bin_width);
        auto res = periodicity_score(series, params);
        if (res.score < params.score_threshold) continue;
        std::vector<EvidenceRef> evidence;
        evidence.reserve(offsets.size());
        for (auto off : offsets) evidence.push_back(EvidenceRef::telemetry("http", off));
        out.push_back(beacon_hypothesis(pair, res.score, std::move(evidence), "beac"));
    }
    return out;
}

std::vector<Hypothesis> histogram_baseline(std::span<const telemetry::HttpFlow> flows,
                                           std::uint64_t count_threshold) {
    if (count_threshold < 1) count_threshold = 1;
    std::map<PairKey, std::vector<std::uint64_t>> pairs;
    for (std::size_t i = 0; i < flows.size(); ++i) pairs[{flows[i].src, flows[i].dst}].push_back(i);
    std::vector<Hypothesis> out;
    for (const auto& [pair, offsets] : pairs) {
        if (offsets.size() < count_threshold) continue;
        std::vector<EvidenceRef> evidence;
        for (auto off : offsets) evidence.push_back(EvidenceRef::telemetry("http", off));
        out.push_back(beacon_hypothesis(pair, 0.5, std::move(evidence), "histogram"));
    }
    return out;
}

}  // namespace huntforge::detectors
