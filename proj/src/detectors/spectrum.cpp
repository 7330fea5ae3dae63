#include "spectrum.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

namespace huntforge::detectors {

namespace {

// FFTW's planner is not thread-safe; plans are created once per length and reused
// through the new-array execute interface, which is.
std::mutex planner_mutex;

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

fftw_plan plan_for(std::size_t n) {
    static std::map<std::size_t, std::unique_ptr<fftw_plan_s, PlanDeleter>> plans;
    std::lock_guard lock(planner_mutex);
    auto& slot = plans[n];
    if (!slot) {
        double* in = fftw_alloc_real(n);
        fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
        slot.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE));
        fftw_free(in);
        fftw_free(out);
    }
    return slot.get();
}

}  // namespace

std::vector<std::complex<double>> real_dft(std::span<const double> input, std::size_t length) {
    if (length < input.size()) length = input.size();
    auto plan = plan_for(length);
    double* in = fftw_alloc_real(length);
    fftw_complex* out = fftw_alloc_complex(length / 2 + 1);
    std::fill(in, in + length, 0.0);
    std::copy(input.begin(), input.end(), in);
    fftw_execute_dft_r2c(plan, in, out);
    std::vector<std::complex<double>> result(length / 2 + 1);
    for (std::size_t k = 0; k < result.size(); ++k) result[k] = {out[k][0], out[k][1]};
    fftw_free(in);
    fftw_free(out);
    return result;
}

}  // namespace huntforge::detectors
