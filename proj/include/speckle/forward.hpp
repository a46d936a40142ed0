#pragma once

#include "speckle/autocorr.hpp"
#include "speckle/optics.hpp"
#include "speckle/psd.hpp"
#include "speckle/surface.hpp"

#include <cstdint>
#include <vector>

namespace speckle {

struct ForwardConfig {
    double beam_diameter_um = 4800.0;
    std::vector<double> u_grid;
    bool normalize = true; // divide by (sum m r)^2 so the zero-lag value is 1
};

ForwardConfig forward_config(const OpticsConfig& optics, std::vector<double> u_grid);

// 4 sin^2(D u / 2) / (D u)^2, equal to 1 at u = 0.
double envelope(double u, double beam_diameter_um);
std::vector<double> envelope(const std::vector<double>& u_grid, double beam_diameter_um);

// (sum_i m_i sin(r_i u) / u)^2 with the u -> 0 limit (sum m_i r_i)^2.
std::vector<double> size_kernel(const ParticleSizeDistribution& psd, const std::vector<double>& u_grid);

// Ensemble-averaged autocorrelation of a number-basis distribution.
AutocorrProfile forward(const ParticleSizeDistribution& psd, const ForwardConfig& cfg);

// |sum_i sin(r_i u) / u * exp(j u x_i)|^2 for one arrangement of particles.
std::vector<double> stochastic_forward(const std::vector<Particle>& particles, const std::vector<double>& u_grid);

// Monte Carlo mean of exp(-j u (x1 - x2)) for x1, x2 uniform over the beam (real part).
std::vector<double> position_average_factor(std::size_t n_pairs, double beam_diameter_um,
                                            const std::vector<double>& u_grid, std::uint64_t seed);

// Rescales f3 by target_r_min / current_r_min, which keeps r * u fixed at each detector lag.
OpticsConfig tune_range(double target_r_min, const OpticsConfig& cfg, double current_r_min = 50.0);

// Indices with 2 pi first_zero / D <= u <= 2 pi last_zero / D.
std::vector<std::size_t> band_indices(const std::vector<double>& u_grid, double beam_diameter_um,
                                      double first_zero, double last_zero);

// 2nd to 5th envelope lobes, [4 pi / D, 12 pi / D].
inline std::vector<std::size_t> lobe_band(const std::vector<double>& u_grid, double beam_diameter_um) {
    return band_indices(u_grid, beam_diameter_um, 2.0, 6.0);
}

} // namespace speckle
