#include <doctest.h>

#include "speckle/error.hpp"
#include "speckle/forward.hpp"
#include "speckle/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace speckle;

namespace {

const std::vector<double>& u_grid() {
    static const auto u = make_u_grid(512, 0.04);
    return u;
}

AutocorrProfile noiseless(const ParticleSizeDistribution& psd) {
    return forward(psd, ForwardConfig{4800.0, u_grid(), true});
}

std::size_t step_index(const CumulativeDistribution& c) {
    return static_cast<std::size_t>(
        std::find_if(c.values.begin(), c.values.end(), [](double v) { return v >= 0.5; }) - c.values.begin());
}

void check_feasible(const CumulativeDistribution& c) {
    for (std::size_t i = 0; i < c.values.size(); ++i) {
        CHECK(c.values[i] >= 0.0);
        CHECK(c.values[i] <= 1.0);
        if (i > 0)
            CHECK(c.values[i] >= c.values[i - 1]);
    }
    CHECK(c.values.back() == 1.0);
}

} // namespace

TEST_CASE("noiseless delta inversion lands within one bin") {
    const EstimatorConfig cfg;
    for (double r : {300.0, 150.0, 700.0}) {
        const auto truth = delta_psd(cfg.grid, r);
        const auto res = estimate(noiseless(truth), cfg);
        const auto want = step_index(cumulative_of(truth));
        const auto got = step_index(res.cumulative);
        CHECK(std::max(want, got) - std::min(want, got) <= 1);
        check_feasible(res.cumulative);
        CHECK(res.psd.grid.n_bins == cfg.output_bins);
        CHECK(res.status != EstimateStatus::NoConvergence);
    }
}

TEST_CASE("best-loss history never increases") {
    const EstimatorConfig cfg;
    const auto res = estimate(noiseless(band_psd(cfg.grid, 200, 260)), cfg);
    REQUIRE(!res.loss_history.empty());
    for (std::size_t i = 1; i < res.loss_history.size(); ++i)
        CHECK(res.loss_history[i] <= res.loss_history[i - 1]);
    CHECK(res.loss == doctest::Approx(res.loss_history.back()));
}

TEST_CASE("feasible output even on garbage input") {
    EstimatorConfig cfg;
    cfg.max_iterations = 200;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    AutocorrProfile p{u_grid(), std::vector<double>(u_grid().size()), 0};
    for (auto& v : p.values)
        v = u(rng);
    p.values[0] = 1.0;
    const auto res = estimate(p, cfg);
    check_feasible(res.cumulative);
    CHECK(res.status == EstimateStatus::NoConvergence);
}

TEST_CASE("correction model path") {
    const EstimatorConfig cfg;
    CorrectionModel m = CorrectionModel::initial();
    m.alpha = 1.0;
    m.beta = -2.0;
    m.noise_amplitude = 0.0;
    const auto truth = delta_psd(cfg.grid, 400.0);
    auto p = noiseless(truth);
    p.values = speckle::apply(m, p.values);
    const auto res = estimate(p, cfg, &m);
    const auto want = step_index(cumulative_of(truth));
    const auto got = step_index(res.cumulative);
    CHECK(std::max(want, got) - std::min(want, got) <= 1);
}

TEST_CASE("validation") {
    EstimatorConfig cfg;
    auto p = noiseless(delta_psd(cfg.grid, 300.0));
    auto bad = p;
    bad.values.pop_back();
    CHECK_THROWS_AS(estimate(bad, cfg), Error);

    const auto wrong = ramp_cumulative(RadiusGrid{50, 1000, 96});
    try {
        estimate(p, cfg, nullptr, &wrong);
        FAIL("expected GridMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::GridMismatch);
    }

    cfg.output_bins = 50;
    CHECK_THROWS_AS(estimate(p, cfg), Error);

    // grid that stops short of the lobe band
    EstimatorConfig lobe;
    lobe.lobe_weighting = true;
    const AutocorrProfile short_grid = forward(delta_psd(lobe.grid, 300.0),
                                               ForwardConfig{4800.0, make_u_grid(20, 3.0 / 4800.0), true});
    try {
        estimate(short_grid, lobe);
        FAIL("expected EmptyBand");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyBand);
    }
}

TEST_CASE("warm start") {
    const EstimatorConfig cfg;
    const auto p = noiseless(band_psd(cfg.grid, 300, 340));
    const auto cold = estimate(p, cfg);
    const auto warm = estimate(p, cfg, nullptr, &cold.cumulative);
    CHECK(warm.loss <= cold.loss);

    const auto stream = timelapse({p, p, p}, cfg);
    REQUIRE(stream.size() == 3);
    CHECK(cumulative_mae(stream[1].cumulative, stream[2].cumulative) < 1e-3);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(stream[i].index == i);
}

TEST_CASE("warm start never loses to a cold start along a drift") {
    const EstimatorConfig cfg;
    const auto radii = cfg.grid.centers();
    std::vector<AutocorrProfile> stream;
    for (int step = 0; step < 20; ++step) {
        const double center = 150.0 + 150.0 * (1.0 - std::abs(2.0 * step / 19.0 - 1.0));
        std::vector<double> w(radii.size());
        for (std::size_t k = 0; k < radii.size(); ++k)
            w[k] = std::exp(-0.5 * std::pow((radii[k] - center) / 20.0, 2));
        stream.push_back(noiseless(make_psd(cfg.grid, w)));
    }
    const auto warm = timelapse(stream, cfg);
    for (std::size_t i = 0; i < stream.size(); ++i) {
        CAPTURE(i);
        CHECK(warm[i].loss <= estimate(stream[i], cfg).loss);
    }
}

TEST_CASE("synthetic dataset") {
    SyntheticOptions opts;
    opts.u_grid = u_grid();
    CHECK_THROWS_AS(make_synthetic_dataset(0, nullptr, 1, opts), Error);

    CorrectionModel m = CorrectionModel::initial();
    m.noise_amplitude = 0.01;
    const auto a = make_synthetic_dataset(5, &m, 7, opts);
    const auto b = make_synthetic_dataset(5, &m, 7, opts);
    REQUIRE(a.size() == 5);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].psd.density == b[i].psd.density);
        CHECK(a[i].profile.values == b[i].profile.values);
        // regenerate from the stored psd and seed
        const auto again = speckle::apply(m, forward(a[i].psd, ForwardConfig{4800.0, opts.u_grid, true}).values, a[i].seed);
        CHECK(again == a[i].profile.values);
    }
    const auto one = make_synthetic_dataset(1, nullptr, 3, opts);
    CHECK(one.size() == 1);
    CHECK(one[0].profile.values == make_synthetic_dataset(1, nullptr, 3, opts)[0].profile.values);
}

TEST_CASE("dataset centers average to the grid midpoint") {
    SyntheticOptions opts;
    opts.u_grid = make_u_grid(4, 0.001);
    const auto ds = make_synthetic_dataset(10000, nullptr, 21, opts);
    double mean = 0.0;
    for (const auto& e : ds)
        mean += e.psd.mean_radius();
    mean /= static_cast<double>(ds.size());
    CHECK(std::abs(mean - 525.0) <= 0.05 * 525.0);
}

TEST_CASE("evaluation report is permutation invariant") {
    SyntheticOptions opts;
    opts.u_grid = make_u_grid(128, 0.01);
    EstimatorConfig cfg;
    cfg.max_iterations = 300;
    auto ds = make_synthetic_dataset(4, nullptr, 5, opts);
    const auto rep = evaluate(ds, cfg);
    std::reverse(ds.begin(), ds.end());
    const auto rev = evaluate(ds, cfg);
    CHECK(rep.mean_mae == doctest::Approx(rev.mean_mae).epsilon(1e-12));
    CHECK(rep.mean_wasserstein == doctest::Approx(rev.mean_wasserstein).epsilon(1e-12));
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(rep.mae[i] == rev.mae[3 - i]);
    CHECK_THROWS_AS(evaluate({}, cfg), Error);
}

TEST_CASE("small radii are harder to recover") {
    const EstimatorConfig cfg;
    auto error_at = [&](double r) {
        const auto truth = delta_psd(cfg.grid, r);
        double total = 0.0;
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            auto p = noiseless(truth);
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> noise(0.0, 1e-4);
            for (std::size_t k = 1; k < p.values.size(); ++k)
                p.values[k] += noise(rng);
            total += cumulative_mae(estimate(p, cfg).cumulative, cumulative_of(truth));
        }
        return total / 4.0;
    };
    CHECK(error_at(60.0) >= error_at(500.0));
}
