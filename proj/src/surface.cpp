#include "speckle/surface.hpp"

#include "fft.hpp"
#include "parallel.hpp"
#include "speckle/error.hpp"
#include "speckle/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace speckle {

namespace {

constexpr double kEdgeSlack = 1e-9;

// Inclusive object-sample range covered by a particle, or first > last if none.
std::pair<long, long> sample_span(const Particle& p, const OpticsConfig& cfg) {
    const double dx = cfg.object_pitch_um();
    const double half = static_cast<double>(cfg.object_samples / 2);
    long first = static_cast<long>(std::ceil((p.x_um - p.r_um) / dx + half - kEdgeSlack));
    long last = static_cast<long>(std::floor((p.x_um + p.r_um) / dx + half + kEdgeSlack));
    first = std::max(first, 0L);
    last = std::min(last, static_cast<long>(cfg.object_samples) - 1);
    return {first, last};
}

} // namespace

std::vector<double> object_coordinates(const OpticsConfig& cfg) {
    const double dx = cfg.object_pitch_um();
    const auto n = cfg.object_samples;
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j)
        x[j] = (static_cast<double>(j) - static_cast<double>(n / 2)) * dx;
    return x;
}

std::vector<Particle> place_particles(const ParticleSizeDistribution& psd, const OpticsConfig& cfg,
                                      std::uint64_t seed, const PlacementOptions& opts) {
    cfg.validate();
    const double beam = cfg.beam_diameter_um;
    const double mean_size = 2.0 * psd.mean_radius();
    if (beam / mean_size < 1.0)
        throw Error(ErrorCode::BeamTooSmall, "the beam holds less than one particle of mean size");
    if (opts.fill_fraction * beam / mean_size < 10.0)
        warn("fewer than 10 particles fit in the beam; the position average will be poor");

    const auto cdf = cumulative_of(psd);
    Rng rng(seed);
    std::vector<Particle> placed;
    double covered = 0.0;
    std::size_t rejections = 0;
    while (covered < opts.fill_fraction * beam && rejections < opts.max_rejections) {
        const double u = uniform01(rng);
        auto it = std::upper_bound(cdf.values.begin(), cdf.values.end(), u);
        const auto idx = std::min(static_cast<std::size_t>(it - cdf.values.begin()), psd.grid.n_bins - 1);
        const double r = psd.grid.center(idx);
        const double x = (uniform01(rng) - 0.5) * beam;
        const bool overlaps = std::any_of(placed.begin(), placed.end(), [&](const Particle& p) {
            return std::abs(p.x_um - x) <= p.r_um + r;
        });
        if (overlaps) {
            ++rejections;
            continue;
        }
        rejections = 0;
        placed.push_back({x, r});
        covered += 2.0 * r;
    }
    std::sort(placed.begin(), placed.end(), [](const Particle& a, const Particle& b) { return a.x_um < b.x_um; });
    return placed;
}

std::vector<double> build_mask(const std::vector<Particle>& particles, const OpticsConfig& cfg) {
    cfg.validate();
    std::vector<double> mask(cfg.object_samples, 0.0);
    for (const auto& p : particles) {
        auto [first, last] = sample_span(p, cfg);
        for (long j = first; j <= last; ++j)
            mask[static_cast<std::size_t>(j)] = 1.0;
    }
    return mask;
}

void rough_phase(SurfaceRealization& surface, const OpticsConfig& cfg, const RoughnessConfig& rough,
                 std::uint64_t seed) {
    cfg.validate();
    if (rough.fluctuation_fraction < 0.0 || rough.texture_samples < 1)
        throw Error(ErrorCode::InvalidArgument, "roughness needs fraction >= 0 and texture >= 1");
    const std::size_t n = cfg.object_samples;

    std::vector<double> noise(n, 0.0);
    if (rough.fluctuation_fraction > 0.0) {
        Rng rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> white(n);
        for (auto& v : white)
            v = normal(rng);
        // circular moving average
        const std::size_t t = std::min(rough.texture_samples, n);
        double acc = 0.0;
        for (std::size_t k = 0; k < t; ++k)
            acc += white[k];
        for (std::size_t j = 0; j < n; ++j) {
            noise[(j + t / 2) % n] = acc / static_cast<double>(t);
            acc += white[(j + t) % n] - white[j];
        }
    }

    surface.height_um.assign(n, 0.0);
    surface.phase.assign(n, {1.0, 0.0});
    const double k0 = 2.0 * std::numbers::pi / cfg.wavelength_um;
    for (const auto& p : surface.particles) {
        auto [first, last] = sample_span(p, cfg);
        if (first > last)
            continue;
        const auto count = static_cast<double>(last - first + 1);
        double mean = 0.0;
        for (long j = first; j <= last; ++j)
            mean += noise[static_cast<std::size_t>(j)];
        mean /= count;
        double ss = 0.0;
        for (long j = first; j <= last; ++j) {
            const double d = noise[static_cast<std::size_t>(j)] - mean;
            ss += d * d;
        }
        const double rms = std::sqrt(ss / count);
        const double target = rough.fluctuation_fraction * 2.0 * p.r_um;
        const double scale = rms > 0.0 ? target / rms : 0.0;
        for (long j = first; j <= last; ++j) {
            const auto js = static_cast<std::size_t>(j);
            surface.height_um[js] = 2.0 * p.r_um + scale * (noise[js] - mean);
            surface.phase[js] = std::polar(1.0, k0 * surface.height_um[js]);
        }
    }
}

SurfaceRealization realize(const ParticleSizeDistribution& psd, const OpticsConfig& cfg,
                           const RoughnessConfig& rough, std::uint64_t seed) {
    SurfaceRealization s;
    s.particles = place_particles(psd, cfg, mix_seed(seed, 0));
    s.mask = build_mask(s.particles, cfg);
    rough_phase(s, cfg, rough, mix_seed(seed, 1));
    return s;
}

SpeckleFrame propagate(const std::vector<double>& mask, const std::vector<std::complex<double>>& phase,
                       const OpticsConfig& cfg, double read_noise_sigma, std::uint64_t noise_seed) {
    cfg.validate();
    const std::size_t n = cfg.object_samples;
    if (mask.size() != n || phase.size() != n)
        throw Error(ErrorCode::GridMismatch, "mask and phase must have object_samples entries");
    detail::cvec field(n);
    for (std::size_t j = 0; j < n; ++j)
        field[j] = mask[j] * phase[j];
    const auto far = detail::fft_centered(field);
    const double scale = cfg.object_pitch_um() * cfg.object_pitch_um() / (cfg.wavelength_um * cfg.f3_um);
    SpeckleFrame frame;
    frame.detector_pitch_um = cfg.detector_pitch_um();
    frame.intensity.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        frame.intensity[k] = std::norm(far[k]) * scale;
    if (read_noise_sigma > 0.0) {
        Rng rng(noise_seed);
        std::normal_distribution<double> normal(0.0, read_noise_sigma);
        for (auto& v : frame.intensity)
            v += normal(rng);
    }
    return frame;
}

SpeckleFrame simulate_frame(const ParticleSizeDistribution& psd, const OpticsConfig& cfg,
                            const RoughnessConfig& rough, std::uint64_t seed, std::uint64_t frame_index) {
    const auto s = realize(psd, cfg, rough, mix_seed(seed, frame_index));
    auto frame = propagate(s.mask, s.phase, cfg);
    frame.frame_index = frame_index;
    return frame;
}

std::vector<SpeckleFrame> simulate_frames(const ParticleSizeDistribution& psd, const OpticsConfig& cfg,
                                          const RoughnessConfig& rough, std::uint64_t seed, std::size_t n_frames) {
    std::vector<SpeckleFrame> frames(n_frames);
    detail::parallel_for(n_frames, [&](std::size_t i) { frames[i] = simulate_frame(psd, cfg, rough, seed, i); });
    return frames;
}

PhaseCorrelation phase_correlation(const std::vector<std::complex<double>>& phase, double pitch_um) {
    const std::size_t n = phase.size();
    if (n == 0)
        throw Error(ErrorCode::InvalidArgument, "empty phase field");
    detail::cvec buf(2 * n, {0.0, 0.0});
    std::copy(phase.begin(), phase.end(), buf.begin());
    detail::fft_forward(buf);
    for (auto& v : buf)
        v = std::norm(v);
    detail::fft_inverse(buf);
    // buf[t] / (2n) = sum_s w(s + t) conj(w(s)); the wanted sum is its conjugate.
    PhaseCorrelation out{pitch_um, std::vector<std::complex<double>>(n)};
    const double m = static_cast<double>(2 * n);
    for (std::size_t t = 0; t < n; ++t)
        out.values[t] = std::conj(buf[t]) / (m * static_cast<double>(n - t));
    const auto zero = out.values[0];
    for (auto& v : out.values)
        v /= zero;
    out.values[0] = {1.0, 0.0};
    return out;
}

} // namespace speckle
