#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace speckle {

/// Uniform cell-centered radius grid on [r_min, r_max] (micrometres).
/// Cell i has center r_min + (i + 1/2) * spacing().
struct RadiusGrid {
    double r_min = 50.0;
    double r_max = 1000.0;
    std::size_t n_bins = 192;

    static RadiusGrid make(double r_min, double r_max, std::size_t n_bins);

    double spacing() const { return (r_max - r_min) / static_cast<double>(n_bins); }
    double center(std::size_t i) const { return r_min + (static_cast<double>(i) + 0.5) * spacing(); }
    std::vector<double> centers() const;
    // Same range, n_out cells; n_out must divide n_bins.
    RadiusGrid coarsened(std::size_t n_out) const;

    bool operator==(const RadiusGrid& other) const;
};

enum class Basis { Number, Volume };

/// Density per micrometre on a RadiusGrid. Each cell carries mass density[i] * spacing,
/// placed at the cell center. Masses sum to one.
struct ParticleSizeDistribution {
    RadiusGrid grid;
    std::vector<double> density;
    Basis basis = Basis::Number;

    std::vector<double> masses() const;
    double mean_radius() const;
};

/// values[i] is the mass at or below the center of cell i; last value is 1.
struct CumulativeDistribution {
    RadiusGrid grid;
    std::vector<double> values;
};

ParticleSizeDistribution make_psd(const RadiusGrid& grid, const std::vector<double>& weights);
ParticleSizeDistribution delta_psd(const RadiusGrid& grid, double radius);
ParticleSizeDistribution band_psd(const RadiusGrid& grid, double lo, double hi);

CumulativeDistribution cumulative_of(const ParticleSizeDistribution& psd);
ParticleSizeDistribution psd_of_cumulative(const CumulativeDistribution& cdf, std::size_t output_bins);

// Linear ramp, the cold start of the estimator.
CumulativeDistribution ramp_cumulative(const RadiusGrid& grid);

double wasserstein_1d(const CumulativeDistribution& a, const CumulativeDistribution& b);
double cumulative_mae(const CumulativeDistribution& a, const CumulativeDistribution& b);

std::vector<double> sample_radii(const ParticleSizeDistribution& psd, std::size_t n, std::uint64_t seed);

ParticleSizeDistribution to_volume_basis(const ParticleSizeDistribution& psd);
ParticleSizeDistribution to_number_basis(const ParticleSizeDistribution& psd);

// (sum of mass * radius)^2, the normalization of the forward operator.
double normalization_constant(const ParticleSizeDistribution& psd);

} // namespace speckle
