#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "huntforge/detectors.hpp"
#include "huntforge/errors.hpp"

using namespace huntforge;
using namespace huntforge::detectors;
using huntforge::telemetry::HttpFlow;
using huntforge::telemetry::PeerSeries;

namespace {

PeerSeries series_of(std::vector<std::uint32_t> counts, double bin = 300.0) {
    return {"client1", "c2", bin, 0.0, std::move(counts)};
}

PeerSeries impulse_train(std::size_t n, std::size_t period, std::size_t phase = 0) {
    std::vector<std::uint32_t> c(n, 0);
    for (std::size_t i = phase; i < n; i += period) c[i] = 1;
    return series_of(c);
}

PeerSeries poisson_series(std::mt19937_64& rng, std::size_t n, std::uint64_t events) {
    std::vector<std::uint32_t> c(n, 0);
    std::uniform_int_distribution<std::size_t> bin(0, n - 1);
    for (std::uint64_t i = 0; i < events; ++i) ++c[bin(rng)];
    return series_of(c);
}

std::vector<HttpFlow> periodic_flows(const std::string& src, const std::string& dst, double t0, double period,
                                     double span, double jitter, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> j(-jitter * period, jitter * period);
    std::vector<HttpFlow> out;
    for (double t = t0 + period / 2; t < t0 + span; t += period) out.push_back({t + j(rng), src, dst, 443, "", "", 1, 1});
    return out;
}

}  // namespace

TEST_SUITE("detectors") {

TEST_CASE("noiseless two-hour impulse train") {
    BeaconDetectionParams p;
    auto r = periodicity_score(impulse_train(2016, 24), p);
    CHECK(r.score >= 0.9);
    REQUIRE(r.dominant_period);
    CHECK(std::abs(*r.dominant_period - 7200.0) <= 300.0);
    CHECK(r.n_events == 84);
}

TEST_CASE("all-zero series scores zero") {
    BeaconDetectionParams p;
    auto r = periodicity_score(series_of(std::vector<std::uint32_t>(2016, 0)), p);
    CHECK(r.score == 0.0);
    CHECK_FALSE(r.dominant_period);
}

TEST_CASE("too few events scores zero") {
    BeaconDetectionParams p;
    auto r = periodicity_score(impulse_train(2016, 400), p);
    CHECK(r.n_events < p.min_events);
    CHECK(r.score == 0.0);
    CHECK_FALSE(r.dominant_period);
}

TEST_CASE("series shorter than two bins is an error") {
    BeaconDetectionParams p;
    CHECK_THROWS_AS(periodicity_score(series_of({1}), p), HuntError);
    CHECK_THROWS_AS(autocorrelation_oracle(series_of({1, 0, 1})), HuntError);
}

TEST_CASE("poisson null of matched volume stays low") {
    BeaconDetectionParams p;
    std::mt19937_64 rng(2024);
    int below = 0;
    std::vector<double> scores;
    for (int trial = 0; trial < 1000; ++trial) {
        auto r = periodicity_score(poisson_series(rng, 2016, 84), p);
        scores.push_back(r.score);
        if (r.score < 0.35) ++below;
    }
    std::sort(scores.begin(), scores.end());
    MESSAGE("null 99th percentile: " << scores[989]);
    CHECK(below >= 990);
}

TEST_CASE("params invariants") {
    BeaconDetectionParams p;
    CHECK_NOTHROW(p.validate());
    p.min_events = 3;
    CHECK_THROWS_AS(p.validate(), HuntError);
    p = {};
    p.window = p.max_period * 1.5;
    CHECK_THROWS_AS(p.validate(), HuntError);
    p = {};
    p.score_threshold = 0.0;
    CHECK_THROWS_AS(p.validate(), HuntError);
}

TEST_CASE("seed 42 corpus yields exactly one beacon") {
    auto s = telemetry::generate_scenario(42);
    BeaconDetectionParams p;
    auto hs = detect_beacons(s.corpus.http, p);
    REQUIRE(hs.size() == 1);
    CHECK(hs[0].predicate == Predicate("beacon", {"203.0.113.7", "client1"}));
    CHECK(hs[0].kind == HypothesisKind::detection);
    CHECK(hs[0].confidence >= p.score_threshold);
    CHECK(hs[0].evidence.size() >= p.min_events);
    for (const auto& e : hs[0].evidence) {
        CHECK(e.kind == EvidenceKind::telemetry);
        const auto& f = s.corpus.http.at(e.offset);
        CHECK(f.src == "client1");
        CHECK(f.dst == "203.0.113.7");
    }
}

TEST_CASE("empty flow list yields nothing") {
    CHECK(detect_beacons({}, BeaconDetectionParams{}).empty());
}

TEST_CASE("two planted pairs yield two hypotheses") {
    std::mt19937_64 rng(5);
    const double t0 = 1609459200.0, span = 7 * 86400.0;
    auto flows = periodic_flows("client3", "198.51.100.20", t0, 3600, span, 0.02, rng);
    auto more = periodic_flows("client5", "203.0.113.99", t0, 10800, span, 0.02, rng);
    flows.insert(flows.end(), more.begin(), more.end());
    BeaconDetectionParams p;
    p.window_start = t0;
    auto hs = detect_beacons(flows, p);
    REQUIRE(hs.size() == 2);
    CHECK(hs[0].predicate == Predicate("beacon", {"198.51.100.20", "client3"}));
    CHECK(hs[1].predicate == Predicate("beacon", {"203.0.113.99", "client5"}));
    for (auto [src, dst, period] : {std::tuple{"client3", "198.51.100.20", 3600.0},
                                    std::tuple{"client5", "203.0.113.99", 10800.0}}) {
        auto o = autocorrelation_oracle(telemetry::build_peer_series(flows, src, dst, t0, t0 + span, 300));
        REQUIRE(o.dominant_period);
        CHECK(std::abs(*o.dominant_period - period) <= 300.0);
    }
}

TEST_CASE("histogram baseline") {
    auto s = telemetry::generate_scenario(42);
    std::map<std::pair<std::string, std::string>, std::uint64_t> counts;
    for (const auto& f : s.corpus.http) ++counts[{f.src, f.dst}];
    std::uint64_t max = 0;
    for (const auto& [k, n] : counts) max = std::max(max, n);

    auto flagged = histogram_baseline(s.corpus.http, 80);
    CHECK(flagged.size() >= 2);
    bool chatty = false, beacon = false;
    for (const auto& h : flagged) {
        CHECK(h.confidence == 0.5);
        chatty |= h.predicate == Predicate("beacon", {"198.51.100.50", "client3"});
        beacon |= h.predicate == Predicate("beacon", {"203.0.113.7", "client1"});
    }
    CHECK(chatty);
    CHECK(beacon);
    CHECK(histogram_baseline(s.corpus.http, max + 1).empty());
    CHECK(histogram_baseline(s.corpus.http, 1).size() == counts.size());
}

TEST_CASE("oracle on canonical series") {
    auto r = autocorrelation_oracle(impulse_train(2016, 24));
    REQUIRE(r.dominant_period);
    CHECK(*r.dominant_period == 24 * 300.0);
    auto flat = autocorrelation_oracle(series_of(std::vector<std::uint32_t>(500, 3)));
    CHECK(flat.score == 0.0);
    CHECK_FALSE(flat.dominant_period);
}

TEST_CASE("oracle tolerates five percent jitter") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        auto flows = periodic_flows("a", "b", 0.0, 7200, 7 * 86400.0, 0.05, rng);
        auto r = autocorrelation_oracle(telemetry::build_peer_series(flows, "a", "b", 0.0, 7 * 86400.0, 300));
        REQUIRE(r.dominant_period);
        CHECK(std::abs(*r.dominant_period / 300.0 - 24.0) <= 1.0);
    }
}

TEST_CASE("spectral and oracle periods agree on a coarse sweep") {
    BeaconDetectionParams p;
    for (std::size_t period = 4; period <= 504; period += 20) {
        auto s = impulse_train(2016, period);
        auto a = periodicity_score(s, p);
        auto o = autocorrelation_oracle(s);
        if (s.total() < p.min_events) continue;
        REQUIRE(a.dominant_period);
        REQUIRE(o.dominant_period);
        CHECK(std::abs(*a.dominant_period - *o.dominant_period) <= 300.0);
    }
}

TEST_CASE("lowering the threshold never removes a pair") {
    for (std::uint64_t seed : {1, 42, 77}) {
        auto s = telemetry::generate_scenario(seed);
        std::vector<Predicate> prev;
        for (double theta : {0.95, 0.8, 0.6, 0.4, 0.2, 0.05}) {
            BeaconDetectionParams p;
            p.score_threshold = theta;
            std::vector<Predicate> now;
            for (const auto& h : detect_beacons(s.corpus.http, p)) now.push_back(h.predicate);
            std::sort(now.begin(), now.end());
            CHECK(std::includes(now.begin(), now.end(), prev.begin(), prev.end()));
            prev = now;
        }
    }
}

TEST_CASE("shuffled bins of a detected series fall below threshold") {
    auto s = telemetry::generate_scenario(42);
    BeaconDetectionParams p;
    auto series = telemetry::build_peer_series(s.corpus.http, "client1", "203.0.113.7", 1609459200.0,
                                               1609459200.0 + p.window, p.bin_width);
    REQUIRE(periodicity_score(series, p).score >= p.score_threshold);
    std::mt19937_64 rng(99);
    int dropped = 0;
    for (int i = 0; i < 500; ++i) {
        auto shuffled = series;
        std::shuffle(shuffled.counts.begin(), shuffled.counts.end(), rng);
        if (periodicity_score(shuffled, p).score < p.score_threshold) ++dropped;
    }
    CHECK(dropped >= 495);
}

TEST_CASE("detection is bit-identical across runs") {
    auto s = telemetry::generate_scenario(9);
    BeaconDetectionParams p;
    p.score_threshold = 0.1;
    CHECK(detect_beacons(s.corpus.http, p) == detect_beacons(s.corpus.http, p));
}

}
