#pragma once

#include <complex>
#include <span>
#include <vector>

namespace huntforge::detectors {

/// Real-input DFT of `input` zero-padded to `length`; returns bins 0..length/2.
std::vector<std::complex<double>> real_dft(std::span<const double> input, std::size_t length);

}  // namespace huntforge::detectors
