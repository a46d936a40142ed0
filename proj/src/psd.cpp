#include "speckle/psd.hpp"

#include "speckle/error.hpp"
#include "speckle/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace speckle {

RadiusGrid RadiusGrid::make(double r_min, double r_max, std::size_t n_bins) {
    if (!(r_min > 0.0) || !(r_max > r_min) || !std::isfinite(r_max))
        throw Error(ErrorCode::InvalidArgument, "radius grid needs 0 < r_min < r_max");
    if (n_bins < 1)
        throw Error(ErrorCode::InvalidArgument, "radius grid needs at least one bin");
    return RadiusGrid{r_min, r_max, n_bins};
}

std::vector<double> RadiusGrid::centers() const {
    std::vector<double> out(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i)
        out[i] = center(i);
    return out;
}

RadiusGrid RadiusGrid::coarsened(std::size_t n_out) const {
    if (n_out == 0 || n_bins % n_out != 0)
        throw Error(ErrorCode::InvalidArgument, "output bins must divide the grid size");
    return RadiusGrid{r_min, r_max, n_out};
}

bool RadiusGrid::operator==(const RadiusGrid& other) const {
    return n_bins == other.n_bins && r_min == other.r_min && r_max == other.r_max;
}

std::vector<double> ParticleSizeDistribution::masses() const {
    const double h = grid.spacing();
    std::vector<double> m(density.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        m[i] = density[i] * h;
    return m;
}

double ParticleSizeDistribution::mean_radius() const {
    const auto m = masses();
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        s += m[i] * grid.center(i);
    return s;
}

namespace {

ParticleSizeDistribution from_masses(const RadiusGrid& grid, std::vector<double> m, Basis basis) {
    double total = 0.0;
    for (double v : m)
        total += v;
    if (!(total > 0.0))
        throw Error(ErrorCode::AllZero, "distribution has no mass");
    const double h = grid.spacing();
    for (double& v : m)
        v /= total * h;
    return ParticleSizeDistribution{grid, std::move(m), basis};
}

} // namespace

ParticleSizeDistribution make_psd(const RadiusGrid& grid, const std::vector<double>& weights) {
    if (weights.size() != grid.n_bins)
        throw Error(ErrorCode::GridMismatch, "weights do not match the radius grid");
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!std::isfinite(weights[i]))
            throw IndexedError(ErrorCode::InvalidArgument, i, "non-finite weight");
        if (weights[i] < 0.0)
            throw IndexedError(ErrorCode::NegativeWeight, i, "negative weight");
    }
    return from_masses(grid, weights, Basis::Number);
}

ParticleSizeDistribution delta_psd(const RadiusGrid& grid, double radius) {
    if (radius < grid.r_min || radius > grid.r_max)
        throw Error(ErrorCode::InvalidArgument, "delta radius outside the grid");
    auto idx = static_cast<std::size_t>((radius - grid.r_min) / grid.spacing());
    idx = std::min(idx, grid.n_bins - 1);
    std::vector<double> w(grid.n_bins, 0.0);
    w[idx] = 1.0;
    return make_psd(grid, w);
}

ParticleSizeDistribution band_psd(const RadiusGrid& grid, double lo, double hi) {
    std::vector<double> w(grid.n_bins, 0.0);
    for (std::size_t i = 0; i < grid.n_bins; ++i) {
        const double r = grid.center(i);
        if (r >= lo && r <= hi)
            w[i] = 1.0;
    }
    return make_psd(grid, w);
}

CumulativeDistribution cumulative_of(const ParticleSizeDistribution& psd) {
    const auto m = psd.masses();
    CumulativeDistribution out{psd.grid, std::vector<double>(m.size())};
    std::partial_sum(m.begin(), m.end(), out.values.begin());
    const double total = out.values.back();
    if (!(total > 0.0))
        throw Error(ErrorCode::AllZero, "distribution has no mass");
    for (double& v : out.values)
        v = std::min(v / total, 1.0);
    out.values.back() = 1.0;
    return out;
}

ParticleSizeDistribution psd_of_cumulative(const CumulativeDistribution& cdf, std::size_t output_bins) {
    const auto& c = cdf.values;
    if (c.size() != cdf.grid.n_bins)
        throw Error(ErrorCode::GridMismatch, "cumulative does not match its grid");
    constexpr double tol = 1e-12;
    if (c.empty() || c.front() < -tol)
        throw Error(ErrorCode::NonMonotoneInput, "cumulative starts below zero");
    for (std::size_t i = 1; i < c.size(); ++i)
        if (c[i] < c[i - 1] - tol)
            throw IndexedError(ErrorCode::NonMonotoneInput, i, "cumulative decreases");

    const RadiusGrid out_grid = cdf.grid.coarsened(output_bins);
    const std::size_t group = cdf.grid.n_bins / output_bins;
    std::vector<double> m(output_bins, 0.0);
    double prev = 0.0;
    for (std::size_t g = 0; g < output_bins; ++g) {
        const double hi = c[(g + 1) * group - 1];
        m[g] = std::max(hi - prev, 0.0);
        prev = hi;
    }
    return from_masses(out_grid, std::move(m), Basis::Number);
}

CumulativeDistribution ramp_cumulative(const RadiusGrid& grid) {
    CumulativeDistribution out{grid, std::vector<double>(grid.n_bins)};
    for (std::size_t i = 0; i < grid.n_bins; ++i)
        out.values[i] = static_cast<double>(i + 1) / static_cast<double>(grid.n_bins);
    return out;
}

double wasserstein_1d(const CumulativeDistribution& a, const CumulativeDistribution& b) {
    if (!(a.grid == b.grid) || a.values.size() != b.values.size())
        throw Error(ErrorCode::GridMismatch, "cumulatives on different grids");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        s += std::abs(a.values[i] - b.values[i]);
    return s * a.grid.spacing();
}

double cumulative_mae(const CumulativeDistribution& a, const CumulativeDistribution& b) {
    if (!(a.grid == b.grid) || a.values.size() != b.values.size())
        throw Error(ErrorCode::GridMismatch, "cumulatives on different grids");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        s += std::abs(a.values[i] - b.values[i]);
    return s / static_cast<double>(a.values.size());
}

std::vector<double> sample_radii(const ParticleSizeDistribution& psd, std::size_t n, std::uint64_t seed) {
    const auto cdf = cumulative_of(psd);
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& r : out) {
        const double u = uniform01(rng);
        auto it = std::upper_bound(cdf.values.begin(), cdf.values.end(), u);
        auto idx = static_cast<std::size_t>(it - cdf.values.begin());
        r = psd.grid.center(std::min(idx, psd.grid.n_bins - 1));
    }
    return out;
}

ParticleSizeDistribution to_volume_basis(const ParticleSizeDistribution& psd) {
    if (psd.basis == Basis::Volume)
        return psd;
    auto m = psd.masses();
    for (std::size_t i = 0; i < m.size(); ++i)
        m[i] *= std::pow(psd.grid.center(i), 3);
    return from_masses(psd.grid, std::move(m), Basis::Volume);
}

ParticleSizeDistribution to_number_basis(const ParticleSizeDistribution& psd) {
    if (psd.basis == Basis::Number)
        return psd;
    auto m = psd.masses();
    for (std::size_t i = 0; i < m.size(); ++i)
        m[i] /= std::pow(psd.grid.center(i), 3);
    return from_masses(psd.grid, std::move(m), Basis::Number);
}

double normalization_constant(const ParticleSizeDistribution& psd) {
    const double first = psd.mean_radius();
    if (!(first > 0.0))
        throw Error(ErrorCode::ZeroFirstMoment, "first moment of the distribution is zero");
    return first * first;
}

} // namespace speckle
