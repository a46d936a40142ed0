#include "speckle/forward.hpp"

#include "speckle/error.hpp"
#include "speckle/rng.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace speckle {

namespace {

// Returns the step if u_grid[i] == i * step for all i, else 0.
double uniform_step(const std::vector<double>& u) {
    if (u.size() < 2 || u[0] != 0.0)
        return 0.0;
    const double step = u[1];
    if (!(step > 0.0))
        return 0.0;
    for (std::size_t i = 2; i < u.size(); ++i)
        if (std::abs(u[i] - step * static_cast<double>(i)) > 1e-12 * u[i])
            return 0.0;
    return step;
}

} // namespace

ForwardConfig forward_config(const OpticsConfig& optics, std::vector<double> u_grid) {
    return ForwardConfig{optics.beam_diameter_um, std::move(u_grid), true};
}

double envelope(double u, double beam_diameter_um) {
    const double a = beam_diameter_um * u;
    if (std::abs(a) < 1e-4)
        return 1.0 - a * a / 12.0;
    const double s = std::sin(0.5 * a);
    return 4.0 * s * s / (a * a);
}

std::vector<double> envelope(const std::vector<double>& u_grid, double beam_diameter_um) {
    std::vector<double> out(u_grid.size());
    for (std::size_t i = 0; i < u_grid.size(); ++i)
        out[i] = envelope(u_grid[i], beam_diameter_um);
    return out;
}

std::vector<double> size_kernel(const ParticleSizeDistribution& psd, const std::vector<double>& u_grid) {
    const auto m = psd.masses();
    const auto r = psd.grid.centers();
    std::vector<double> out(u_grid.size());
    for (std::size_t k = 0; k < u_grid.size(); ++k) {
        const double u = u_grid[k];
        double acc = 0.0;
        if (u == 0.0) {
            for (std::size_t i = 0; i < m.size(); ++i)
                acc += m[i] * r[i];
        } else {
            for (std::size_t i = 0; i < m.size(); ++i)
                if (m[i] != 0.0)
                    acc += m[i] * std::sin(r[i] * u);
            acc /= u;
        }
        out[k] = acc * acc;
    }
    return out;
}

AutocorrProfile forward(const ParticleSizeDistribution& psd, const ForwardConfig& cfg) {
    if (psd.basis != Basis::Number)
        throw Error(ErrorCode::InvalidArgument, "forward needs a number-basis distribution");
    if (!(cfg.beam_diameter_um > 0.0))
        throw Error(ErrorCode::InvalidArgument, "beam diameter must be positive");
    const double norm = cfg.normalize ? normalization_constant(psd) : 1.0;
    const auto kernel = size_kernel(psd, cfg.u_grid);
    AutocorrProfile p;
    p.u_grid = cfg.u_grid;
    p.values.resize(kernel.size());
    for (std::size_t k = 0; k < kernel.size(); ++k)
        p.values[k] = envelope(cfg.u_grid[k], cfg.beam_diameter_um) * kernel[k] / norm;
    return p;
}

std::vector<double> stochastic_forward(const std::vector<Particle>& particles, const std::vector<double>& u_grid) {
    const std::size_t nu = u_grid.size();
    const std::size_t np = particles.size();
    std::vector<double> out(nu, 0.0);
    const double step = uniform_step(u_grid);
    if (step > 0.0) {
        // sin(r u) exp(j u x) = (exp(j u (x + r)) - exp(j u (x - r))) / 2j, advanced by rotation
        std::vector<double> re(2 * np), im(2 * np), cr(2 * np), ci(2 * np);
        double r_sum = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
            const auto& p = particles[i];
            r_sum += p.r_um;
            for (int s = 0; s < 2; ++s) {
                const double pos = s == 0 ? p.x_um + p.r_um : p.x_um - p.r_um;
                re[2 * i + s] = 1.0;
                im[2 * i + s] = 0.0;
                cr[2 * i + s] = std::cos(step * pos);
                ci[2 * i + s] = std::sin(step * pos);
            }
        }
        out[0] = r_sum * r_sum;
        for (std::size_t k = 1; k < nu; ++k) {
            double sr = 0.0, si = 0.0;
            for (std::size_t q = 0; q < 2 * np; ++q) {
                const double nr = re[q] * cr[q] - im[q] * ci[q];
                const double ni = re[q] * ci[q] + im[q] * cr[q];
                re[q] = nr;
                im[q] = ni;
                const double sign = (q & 1) ? -1.0 : 1.0;
                sr += sign * nr;
                si += sign * ni;
            }
            // divide by 2 j u
            const double u = u_grid[k];
            out[k] = (sr * sr + si * si) / (4.0 * u * u);
        }
        return out;
    }
    for (std::size_t k = 0; k < nu; ++k) {
        const double u = u_grid[k];
        std::complex<double> acc{0.0, 0.0};
        for (const auto& p : particles) {
            const double amp = u == 0.0 ? p.r_um : std::sin(p.r_um * u) / u;
            acc += amp * std::polar(1.0, u * p.x_um);
        }
        out[k] = std::norm(acc);
    }
    return out;
}

std::vector<double> position_average_factor(std::size_t n_pairs, double beam_diameter_um,
                                            const std::vector<double>& u_grid, std::uint64_t seed) {
    if (n_pairs < 1000)
        throw Error(ErrorCode::InvalidArgument, "position average needs at least 1000 pairs");
    Rng rng(seed);
    std::vector<double> diff(n_pairs);
    for (auto& d : diff) {
        const double x1 = (uniform01(rng) - 0.5) * beam_diameter_um;
        const double x2 = (uniform01(rng) - 0.5) * beam_diameter_um;
        d = x1 - x2;
    }
    std::vector<double> out(u_grid.size(), 0.0);
    const double step = uniform_step(u_grid);
    if (step > 0.0) {
        std::vector<double> re(n_pairs, 1.0), im(n_pairs, 0.0), cr(n_pairs), ci(n_pairs);
        for (std::size_t q = 0; q < n_pairs; ++q) {
            cr[q] = std::cos(step * diff[q]);
            ci[q] = -std::sin(step * diff[q]);
        }
        out[0] = 1.0;
        for (std::size_t k = 1; k < u_grid.size(); ++k) {
            double acc = 0.0;
            for (std::size_t q = 0; q < n_pairs; ++q) {
                const double nr = re[q] * cr[q] - im[q] * ci[q];
                const double ni = re[q] * ci[q] + im[q] * cr[q];
                re[q] = nr;
                im[q] = ni;
                acc += nr;
            }
            out[k] = acc / static_cast<double>(n_pairs);
        }
        return out;
    }
    for (std::size_t k = 0; k < u_grid.size(); ++k) {
        double acc = 0.0;
        for (double d : diff)
            acc += std::cos(u_grid[k] * d);
        out[k] = acc / static_cast<double>(n_pairs);
    }
    return out;
}

OpticsConfig tune_range(double target_r_min, const OpticsConfig& cfg, double current_r_min) {
    if (!(target_r_min > 0.0) || !(current_r_min > 0.0))
        throw Error(ErrorCode::InvalidArgument, "radii must be positive");
    OpticsConfig out = cfg;
    out.f3_um = cfg.f3_um * target_r_min / current_r_min;
    return out;
}

std::vector<std::size_t> band_indices(const std::vector<double>& u_grid, double beam_diameter_um,
                                      double first_zero, double last_zero) {
    const double lo = 2.0 * std::numbers::pi * first_zero / beam_diameter_um;
    const double hi = 2.0 * std::numbers::pi * last_zero / beam_diameter_um;
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < u_grid.size(); ++k)
        if (u_grid[k] >= lo * (1.0 - 1e-12) && u_grid[k] <= hi * (1.0 + 1e-12))
            out.push_back(k);
    return out;
}

} // namespace speckle
