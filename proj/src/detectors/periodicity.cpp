#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "huntforge/detectors.hpp"
#include "huntforge/errors.hpp"
#include "spectrum.hpp"

namespace huntforge::detectors {

namespace {

constexpr std::size_t kPadding = 8;
constexpr double kPeakFraction = 0.9;
constexpr int kRefineIterations = 48;

}  // namespace

void BeaconDetectionParams::validate() const {
    if (!(bin_width > 0)) throw invalid("beacon params: bin_width must be positive");
    if (!(max_period > 0)) throw invalid("beacon params: max_period must be positive");
    if (!(window >= 2 * max_period)) throw invalid("beacon params: window must cover at least two max_period cycles");
    if (min_events < 4) throw invalid("beacon params: min_events must be >= 4");
    if (!(score_threshold > 0 && score_threshold <= 1)) throw invalid("beacon params: threshold must be in (0,1]");
    if (!(smoothing_bins >= 0)) throw invalid("beacon params: smoothing_bins must be >= 0");
    double bins = window / bin_width;
    if (std::abs(bins - std::round(bins)) > 1e-9 * bins) throw invalid("beacon params: bin_width must divide window");
}

PeriodicityResult periodicity_score(const telemetry::PeerSeries& series, const BeaconDetectionParams& params) {
    const std::size_t n = series.counts.size();
    if (n < 2) throw invalid("periodicity: series shorter than 2 bins");

    PeriodicityResult result;
    result.n_events = series.total();
    if (result.n_events < params.min_events) return result;

    const double mean = static_cast<double>(result.n_events) / static_cast<double>(n);
    std::vector<double> centred(n);
    double energy = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        centred[t] = series.counts[t] - mean;
        energy += centred[t] * centred[t];
    }
    if (energy <= 0.0) return result;

    const double big_n = static_cast<double>(n);
    const double sigma = params.smoothing_bins;
    auto weight = [&](double f) {
        double a = 2.0 * std::numbers::pi * f * sigma / big_n;
        return std::exp(-a * a);
    };

    const std::size_t padded = n * kPadding;
    auto spectrum = real_dft(centred, padded);
    std::vector<double> power(spectrum.size());
    for (std::size_t i = 0; i < spectrum.size(); ++i)
        power[i] = std::norm(spectrum[i]) * weight(static_cast<double>(i) / kPadding);

    // Lowest admissible fundamental: periods longer than max_period are ignored.
    double kmin = std::ceil(big_n * series.bin_width / params.max_period - 1e-9);
    std::size_t lo = static_cast<std::size_t>(std::max(1.0, kmin)) * kPadding;
    const std::size_t hi = power.size() - 1;
    if (lo > hi) return result;

    std::vector<std::size_t> peaks;
    for (std::size_t i = lo; i <= hi; ++i) {
        bool rising = i == lo || power[i] >= power[i - 1];
        bool falling = i == hi || power[i] >= power[i + 1];
        if (rising && falling) peaks.push_back(i);
    }
    double strongest = 0.0;
    for (auto i : peaks) strongest = std::max(strongest, power[i]);
    if (peaks.empty() || strongest <= 0.0) return result;
    std::size_t pick = *std::find_if(peaks.begin(), peaks.end(),
                                     [&](std::size_t i) { return power[i] >= kPeakFraction * strongest; });

    // Refine on the continuous transform of the raw counts.
    std::vector<std::pair<double, double>> events;
    for (std::size_t t = 0; t < n; ++t)
        if (series.counts[t]) events.emplace_back(static_cast<double>(t), static_cast<double>(series.counts[t]));
    auto dtft_power = [&](double f) {
        std::complex<double> acc{0.0, 0.0};
        for (auto [t, c] : events) acc += c * std::polar(1.0, -2.0 * std::numbers::pi * f * t / big_n);
        return std::norm(acc);
    };
    const double step = 1.0 / kPadding;
    double a = std::max(static_cast<double>(pick) * step - step, 1e-9);
    double b = std::min(static_cast<double>(pick) * step + step, big_n / 2.0);
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - golden * (b - a);
    double d = a + golden * (b - a);
    double fc = dtft_power(c), fd = dtft_power(d);
    for (int it = 0; it < kRefineIterations; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - golden * (b - a);
            fc = dtft_power(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + golden * (b - a);
            fd = dtft_power(d);
        }
    }
    const double fundamental = (a + b) / 2.0;

    // Unpadded bins are every kPadding-th padded bin.
    const std::size_t half = n / 2;
    double total = 0.0;
    for (std::size_t k = 1; k <= half; ++k) total += power[k * kPadding];
    if (total <= 0.0) return result;
    std::vector<std::size_t> comb;
    for (int m = 1;; ++m) {
        auto k = static_cast<std::size_t>(std::llround(m * fundamental));
        if (k > half) break;
        if (k >= 1 && (comb.empty() || comb.back() != k)) comb.push_back(k);
    }
    double harmonic = 0.0;
    for (auto k : comb) harmonic += power[k * kPadding];

    result.score = std::clamp(harmonic / total, 0.0, 1.0);
    if (result.score > 0.0) result.dominant_period = series.bin_width * big_n / fundamental;
    return result;
}

PeriodicityResult autocorrelation_oracle(const telemetry::PeerSeries& series) {
    const std::size_t n = series.counts.size();
    if (n < 4) throw invalid("autocorrelation oracle: series too short");
    PeriodicityResult result;
    result.n_events = series.total();
    const double mean = static_cast<double>(result.n_events) / static_cast<double>(n);
    std::vector<double> y(n);
    double energy = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        y[t] = series.counts[t] - mean;
        energy += y[t] * y[t];
    }
    if (energy <= 0.0) return result;

    const std::size_t max_lag = n / 2;
    // r[l] for l = 1 .. max_lag + 1 (neighbours of the scanned range included).
    std::vector<double> r(max_lag + 2, 0.0);
    for (std::size_t lag = 1; lag <= std::min(max_lag + 1, n - 1); ++lag) {
        double acc = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) acc += y[t] * y[t + lag];
        r[lag] = acc / energy;
    }
    std::vector<double> smooth(max_lag + 1, 0.0);
    double best = -1.0;
    for (std::size_t lag = 2; lag <= max_lag; ++lag) {
        smooth[lag] = 0.5 * r[lag - 1] + r[lag] + 0.5 * r[lag + 1];
        best = std::max(best, smooth[lag]);
    }
    if (best <= 0.0) return result;
    for (std::size_t lag = 2; lag <= max_lag; ++lag) {
        if (smooth[lag] < 0.8 * best) continue;
        bool left = lag == 2 || smooth[lag] >= smooth[lag - 1];
        bool right = lag == max_lag || smooth[lag] >= smooth[lag + 1];
        if (!left || !right) continue;
        result.score = std::clamp(smooth[lag] / 2.0, 0.0, 1.0);
        if (result.score > 0.0) result.dominant_period = static_cast<double>(lag) * series.bin_width;
        break;
    }
    return result;
}

}  // namespace huntforge::detectors
