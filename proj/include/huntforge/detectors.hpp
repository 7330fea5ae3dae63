#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "huntforge/hypothesis.hpp"
#include "huntforge/telemetry.hpp"

namespace huntforge::detectors {

struct BeaconDetectionParams {
    double bin_width = 300.0;
    double window = 7 * 86400.0;
    std::uint64_t min_events = 8;
    double score_threshold = 0.6;
    double max_period = 86400.0;
    /// Gaussian smoothing of the power spectrum, in bins; absorbs per-beacon jitter.
    double smoothing_bins = 2.0;
    /// Start of the analysis window; defaults to the first flow, aligned down to a bin.
    std::optional<double> window_start;

    /// Throws HuntError(invalid_argument) when the invariants do not hold.
    void validate() const;
};

struct PeriodicityResult {
    double score = 0.0;
    std::optional<double> dominant_period;  // seconds
    std::uint64_t n_events = 0;
};

/// Spectral periodicity of a peer series.
///
/// The mean-centred counts are taken to the frequency domain. The fundamental
/// is the lowest strong peak of an 8x zero-padded, smoothed power spectrum,
/// refined on the continuous transform. The score is the share of non-DC power
/// that sits on the fundamental and its harmonics; the period is bin_width * N / f.
PeriodicityResult periodicity_score(const telemetry::PeerSeries& series, const BeaconDetectionParams& params);

/// Brute-force periodicity from the autocorrelation over lags 2..N/2.
/// Independent of the spectral path; used as a test oracle.
PeriodicityResult autocorrelation_oracle(const telemetry::PeerSeries& series);

/// The `beac` detector: one `beacon(dst, src)` detection hypothesis per directed pair
/// whose periodicity score reaches the threshold. Results are in (src, dst) order.
std::vector<Hypothesis> detect_beacons(std::span<const telemetry::HttpFlow> flows,
                                       const BeaconDetectionParams& params);

/// Naive count-threshold detector kept for comparison.
std::vector<Hypothesis> histogram_baseline(std::span<const telemetry::HttpFlow> flows,
                                           std::uint64_t count_threshold);

}  // namespace huntforge::detectors
