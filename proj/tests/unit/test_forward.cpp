#include <doctest.h>

#include "speckle/error.hpp"
#include "speckle/forward.hpp"
#include "speckle/rng.hpp"

#include <cmath>
#include <functional>
#include <numbers>

using namespace speckle;

namespace {

constexpr double pi = std::numbers::pi;

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
    const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double adaptive(const std::function<double(double)>& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

// peak of v over u in [lo, hi]
double peak_in(const AutocorrProfile& p, double lo, double hi) {
    double best = 0.0;
    for (std::size_t k = 0; k < p.u_grid.size(); ++k)
        if (p.u_grid[k] >= lo && p.u_grid[k] <= hi)
            best = std::max(best, p.values[k]);
    return best;
}

} // namespace

TEST_CASE("envelope") {
    const double d = 4800.0;
    CHECK(envelope(0.0, d) == 1.0);
    CHECK(envelope(2.0 * pi / d, d) < 1e-30);
    const long double ref = 4.0L / (3.14159265358979323846264338327950288L * 3.14159265358979323846264338327950288L);
    CHECK(std::abs(envelope(pi / d, d) - static_cast<double>(ref)) < 1e-15);
    CHECK(envelope(pi / d, d) == doctest::Approx(0.4053).epsilon(1e-4));
    CHECK(envelope(1e-12, d) == doctest::Approx(1.0));
}

TEST_CASE("size kernel") {
    const RadiusGrid g;
    const auto psd = delta_psd(g, 300.0);
    const double r0 = psd.grid.center(static_cast<std::size_t>((300.0 - g.r_min) / g.spacing()));
    const auto u = make_u_grid(200, 0.05);
    const auto k = size_kernel(psd, u);
    CHECK(k[0] == doctest::Approx(r0 * r0));
    for (std::size_t i = 1; i < u.size(); ++i)
        CHECK(k[i] == doctest::Approx(std::pow(std::sin(r0 * u[i]) / u[i], 2)).epsilon(1e-12));
    const auto zero = size_kernel(psd, {pi / r0, 2.0 * pi / r0});
    CHECK(zero[0] < 1e-20);
    CHECK(zero[1] < 1e-20);

    // uniform on [a, b] against adaptive quadrature of the same integral
    const double a = 200.0, b = 300.0;
    const auto fine = RadiusGrid::make(a, b, 20000);
    const auto uni = make_psd(fine, std::vector<double>(20000, 1.0));
    std::vector<double> us;
    for (int i = 1; i <= 40; ++i)
        us.push_back(0.0005 * i);
    const auto ks = size_kernel(uni, us);
    for (std::size_t i = 0; i < us.size(); ++i) {
        const double uu = us[i];
        const double integral = adaptive([&](double r) { return std::sin(r * uu) / uu / (b - a); }, a, b, 1e-14);
        const double oracle = integral * integral;
        if (oracle < 1e-3 * 250.0 * 250.0 * 1e-2)
            continue; // near a zero of the kernel a relative bound is meaningless
        CHECK(std::abs(ks[i] - oracle) <= 1e-6 * oracle);
    }
}

TEST_CASE("forward of a delta") {
    const RadiusGrid g;
    const double d = 4800.0;
    const auto psd = delta_psd(g, 300.0);
    const double r0 = psd.mean_radius();
    const auto p = forward(psd, ForwardConfig{d, make_u_grid(512, 0.04), true});
    CHECK(p.values[0] == doctest::Approx(1.0).epsilon(1e-12));
    const auto z = forward(psd, ForwardConfig{d, {pi / r0, 2.0 * pi / d, 4.0 * pi / d}, true});
    for (double v : z.values)
        CHECK(v < 1e-15);
    const auto raw = forward(psd, ForwardConfig{d, {0.0}, false});
    CHECK(raw.values[0] == doctest::Approx(r0 * r0));
    for (double v : p.values)
        CHECK(std::isfinite(v));
}

TEST_CASE("side lobes decrease with particle size") {
    const RadiusGrid g;
    const double d = 4800.0;
    const ForwardConfig cfg{d, make_u_grid(4001, 8.0 * pi / d), true};
    const auto small = forward(band_psd(g, 106, 180), cfg);
    const auto large = forward(band_psd(g, 425, 500), cfg);
    CHECK(peak_in(large, 2 * pi / d, 4 * pi / d) < peak_in(small, 2 * pi / d, 4 * pi / d));
    CHECK(peak_in(large, 4 * pi / d, 6 * pi / d) < peak_in(small, 4 * pi / d, 6 * pi / d));

    double prev = 2.0;
    for (double r : {60.0, 100.0, 200.0, 400.0, 800.0}) {
        const double lobe = peak_in(forward(delta_psd(g, r), cfg), 2 * pi / d, 4 * pi / d);
        CHECK(lobe < prev);
        prev = lobe;
    }
}

TEST_CASE("stochastic forward closed forms") {
    const auto u = make_u_grid(300, 0.05);
    const auto a = stochastic_forward({{0.0, 120.0}}, u);
    const auto b = stochastic_forward({{1234.5, 120.0}}, u);
    CHECK(a[0] == doctest::Approx(120.0 * 120.0));
    for (std::size_t k = 1; k < u.size(); ++k) {
        const double s = std::sin(120.0 * u[k]) / u[k];
        CHECK(a[k] == doctest::Approx(s * s).epsilon(1e-9));
        CHECK(b[k] == doctest::Approx(a[k]).epsilon(1e-9));
    }

    const double r = 80.0, sep = 700.0;
    const auto two = stochastic_forward({{-sep / 2, r}, {sep / 2, r}}, u);
    for (std::size_t k = 1; k < u.size(); ++k) {
        const double s = std::sin(r * u[k]) / u[k];
        CHECK(std::abs(two[k] - 2.0 * s * s * (1.0 + std::cos(sep * u[k]))) <= 1e-9 * 4.0 * r * r);
    }

    // uniform-grid recurrence against a direct sum on many particles
    Rng rng(3);
    std::vector<Particle> ps;
    for (int i = 0; i < 200; ++i)
        ps.push_back({(uniform01(rng) - 0.5) * 4800.0, 50.0 + 200.0 * uniform01(rng)});
    const auto fast = stochastic_forward(ps, u);
    for (std::size_t k = 0; k < u.size(); k += 7) {
        std::complex<double> acc{};
        for (const auto& p : ps)
            acc += (k == 0 ? p.r_um : std::sin(p.r_um * u[k]) / u[k]) * std::polar(1.0, u[k] * p.x_um);
        CHECK(std::abs(fast[k] - std::norm(acc)) <= 1e-9 * fast[0]);
    }
}

TEST_CASE("finite-count expectation of the stochastic sum") {
    // E|sum s_i e^{j u x_i}|^2 = N E[s^2] + N (N - 1) envelope E[s]^2 for independent uniform positions
    const double d = 4800.0;
    const std::size_t n = 6;
    const double r1 = 100.0, r2 = 180.0;
    const auto u = make_u_grid(40, 6.0 * pi / d);
    std::vector<double> sum(u.size(), 0.0), sq(u.size(), 0.0);
    const int reps = 20000;
    Rng rng(8);
    for (int t = 0; t < reps; ++t) {
        std::vector<Particle> ps;
        for (std::size_t i = 0; i < n; ++i)
            ps.push_back({(uniform01(rng) - 0.5) * d, uniform01(rng) < 0.5 ? r1 : r2});
        const auto v = stochastic_forward(ps, u);
        for (std::size_t k = 0; k < u.size(); ++k) {
            sum[k] += v[k];
            sq[k] += v[k] * v[k];
        }
    }
    for (std::size_t k = 1; k < u.size(); ++k) {
        const double mean = sum[k] / reps;
        const double sd = std::sqrt(std::max(sq[k] / reps - mean * mean, 0.0));
        const double s1 = std::sin(r1 * u[k]) / u[k], s2 = std::sin(r2 * u[k]) / u[k];
        const double es = 0.5 * (s1 + s2), es2 = 0.5 * (s1 * s1 + s2 * s2);
        const double expect = n * es2 + n * (n - 1.0) * envelope(u[k], d) * es * es;
        CHECK(std::abs(mean - expect) <= 4.0 * sd / std::sqrt(static_cast<double>(reps)));
    }
}

TEST_CASE("position average factor") {
    const double d = 4800.0;
    const auto u = make_u_grid(200, 12.0 * pi / d);
    const auto env = envelope(u, d);
    const auto mc = position_average_factor(1000000, d, u, 1);
    CHECK(mc[0] == 1.0);
    for (std::size_t k = 0; k < u.size(); ++k)
        CHECK(std::abs(mc[k] - env[k]) < 0.005);
    CHECK(position_average_factor(1000, d, {0.0, 0.001}, 9)[0] == 1.0);
    CHECK_THROWS_AS(position_average_factor(999, d, u, 1), Error);

    // root-mean-square error shrinks by sqrt(2) when the pair count doubles
    double e1 = 0.0, e2 = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto a = position_average_factor(10000, d, u, 100 + s);
        const auto b = position_average_factor(20000, d, u, 200 + s);
        for (std::size_t k = 1; k < u.size(); ++k) {
            e1 += (a[k] - env[k]) * (a[k] - env[k]);
            e2 += (b[k] - env[k]) * (b[k] - env[k]);
        }
    }
    const double ratio = std::sqrt(e1 / e2);
    CHECK(ratio > std::sqrt(2.0) * 0.7);
    CHECK(ratio < std::sqrt(2.0) * 1.3);
}

TEST_CASE("range tuning") {
    const OpticsConfig cfg;
    const auto same = tune_range(50.0, cfg, 50.0);
    CHECK(same.f3_um == cfg.f3_um);
    const auto half = tune_range(25.0, cfg, 50.0);
    CHECK(half.f3_um == doctest::Approx(125000.0));

    // the first kernel zero of a half-size particle sits at the same detector lag after tuning
    const RadiusGrid g = RadiusGrid::make(10.0, 1000.0, 990);
    const auto psd = delta_psd(g, 200.0);
    const double pitch = 5.0;
    auto first_zero = [&](const OpticsConfig& o) {
        const auto u = detector_u_grid(o, 20000, pitch);
        const auto k = size_kernel(psd, u);
        for (std::size_t i = 1; i + 1 < k.size(); ++i)
            if (k[i] <= k[i - 1] && k[i] <= k[i + 1])
                return i;
        return std::size_t{0};
    };
    const auto before = first_zero(cfg);
    const auto after = first_zero(half);
    CHECK(before > 0);
    CHECK(std::abs(static_cast<double>(before) - 2.0 * static_cast<double>(after)) <= 1.0);
}
