#pragma once

#include <cstddef>
#include <vector>

namespace speckle {

/// Optical system and object sampling. Lengths in micrometres.
/// Spatial frequency u is in rad/um: u = 2*pi*x_detector / (wavelength * f3).
struct OpticsConfig {
    double wavelength_um = 0.532;
    double f3_um = 250000.0;
    double beam_diameter_um = 4800.0;
    std::size_t object_samples = 4096;
    double object_extent_um = 9600.0;

    void validate() const;

    double object_pitch_um() const { return object_extent_um / static_cast<double>(object_samples); }
    double detector_pitch_um() const { return wavelength_um * f3_um / object_extent_um; }
    double speckle_size_um() const { return wavelength_um * f3_um / beam_diameter_um; }
    // rad/um per detector sample of lag at the given pitch
    double u_per_lag(double detector_pitch_um) const;
};

// n samples from 0 to u_max inclusive.
std::vector<double> make_u_grid(std::size_t n, double u_max);

// u at detector lags 0..n-1 for the given detector pitch.
std::vector<double> detector_u_grid(const OpticsConfig& cfg, std::size_t n, double detector_pitch_um);

} // namespace speckle
