#pragma once

#include "speckle/optics.hpp"
#include "speckle/psd.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace speckle {

struct Particle {
    double x_um;
    double r_um;
};

struct PlacementOptions {
    double fill_fraction = 0.9;       // stop once this fraction of the beam is covered
    std::size_t max_rejections = 200; // stop after this many consecutive overlaps
};

struct RoughnessConfig {
    double fluctuation_fraction = 0.01; // roughness RMS as a fraction of particle size 2r
    std::size_t texture_samples = 1;    // moving-average width of the roughness
};

/// One illuminated object. mask/height/phase are sampled on the object grid
/// x_j = (j - N/2) * pitch.
struct SurfaceRealization {
    std::vector<Particle> particles;
    std::vector<double> mask;
    std::vector<double> height_um;
    std::vector<std::complex<double>> phase;
};

struct SpeckleFrame {
    std::vector<double> intensity;
    double detector_pitch_um = 0.0;
    std::uint64_t frame_index = 0;
};

std::vector<double> object_coordinates(const OpticsConfig& cfg);

std::vector<Particle> place_particles(const ParticleSizeDistribution& psd, const OpticsConfig& cfg,
                                      std::uint64_t seed, const PlacementOptions& opts = {});

std::vector<double> build_mask(const std::vector<Particle>& particles, const OpticsConfig& cfg);

// Fills height_um and phase of `surface` from its particles and mask.
void rough_phase(SurfaceRealization& surface, const OpticsConfig& cfg, const RoughnessConfig& rough,
                 std::uint64_t seed);

SurfaceRealization realize(const ParticleSizeDistribution& psd, const OpticsConfig& cfg,
                           const RoughnessConfig& rough, std::uint64_t seed);

// Far-field intensity |FT(a w)|^2 / (wavelength f3), zero frequency at the center sample.
SpeckleFrame propagate(const std::vector<double>& mask, const std::vector<std::complex<double>>& phase,
                       const OpticsConfig& cfg, double read_noise_sigma = 0.0, std::uint64_t noise_seed = 0);

// Frame i of a run uses seed mix_seed(seed, i).
SpeckleFrame simulate_frame(const ParticleSizeDistribution& psd, const OpticsConfig& cfg,
                            const RoughnessConfig& rough, std::uint64_t seed, std::uint64_t frame_index);

std::vector<SpeckleFrame> simulate_frames(const ParticleSizeDistribution& psd, const OpticsConfig& cfg,
                                          const RoughnessConfig& rough, std::uint64_t seed, std::size_t n_frames);

/// Normalized phase correlation W(tau) = <w(s) w*(s + tau)> over the valid s, tau = 0..n-1.
struct PhaseCorrelation {
    double pitch_um = 1.0;
    std::vector<std::complex<double>> values;
};

PhaseCorrelation phase_correlation(const std::vector<std::complex<double>>& phase, double pitch_um = 1.0);

} // namespace speckle
