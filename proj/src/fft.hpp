#pragma once

#include <complex>
#include <vector>

namespace speckle::detail {

using cvec = std::vector<std::complex<double>>;

// Unnormalized in-place DFTs of any length. Safe to call from several threads.
void fft_forward(cvec& data);
void fft_inverse(cvec& data);

// Forward DFT reordered so the zero frequency sits at index n/2.
cvec fft_centered(const cvec& data);

} // namespace speckle::detail
