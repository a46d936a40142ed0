#include "speckle/inverse.hpp"

#include "parallel.hpp"
#include "speckle/error.hpp"
#include "speckle/forward.hpp"
#include "speckle/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace speckle {

namespace {

// Nondecreasing least-squares fit, pool adjacent violators.
void pava(double* y, std::size_t n) {
    std::vector<double> val;
    std::vector<double> wt;
    std::vector<std::size_t> len;
    for (std::size_t i = 0; i < n; ++i) {
        val.push_back(y[i]);
        wt.push_back(1.0);
        len.push_back(1);
        while (val.size() > 1 && val[val.size() - 2] > val.back()) {
            const double v = val.back(), w = wt.back();
            const std::size_t l = len.back();
            val.pop_back();
            wt.pop_back();
            len.pop_back();
            val.back() = (val.back() * wt.back() + v * w) / (wt.back() + w);
            wt.back() += w;
            len.back() += l;
        }
    }
    std::size_t k = 0;
    for (std::size_t b = 0; b < val.size(); ++b)
        for (std::size_t j = 0; j < len[b]; ++j)
            y[k++] = val[b];
}

// Euclidean projection onto nondecreasing sequences in [0, 1] ending at 1.
void project(std::vector<double>& c) {
    const std::size_t n = c.size();
    pava(c.data(), n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        c[i] = std::clamp(c[i], 0.0, 1.0);
    c[n - 1] = 1.0;
}

struct Problem {
    std::size_t cells = 0;
    std::size_t rows = 0; // active prefix of the samples
    std::vector<double> u;
    std::vector<double> sine; // rows x cells, sin(r u) / u (r at u = 0)
    std::vector<double> radii;
    std::vector<double> target;
    std::vector<double> env;
    std::vector<double> weight; // mean 1 over all samples
    std::vector<double> soft;   // sigma / env; zero gives the plain amplitude |f|
    const CorrectionModel* model = nullptr; // noiseless copy below when set
    CorrectionModel noiseless;
    double delta = 1e-3;
};

// x / sqrt(|x| + c) of x = f^2: |f| when c = 0, linear in f^2 below c.
double soften(double x, double c) { return x / std::sqrt(std::abs(x) + c); }

double soft_amplitude(double f, double c, double* slope) {
    if (c == 0.0) {
        if (slope)
            *slope = f >= 0.0 ? 1.0 : -1.0;
        return std::abs(f);
    }
    const double x = f * f;
    if (slope)
        *slope = 2.0 * f * (0.5 * x + c) / std::pow(x + c, 1.5);
    return soften(x, c);
}

// In place to zero mean and unit population deviation; returns the deviation.
double standardize(std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    const double sd = std::max(std::sqrt(ss / n), 1e-300);
    for (double& x : v)
        x = (x - mean) / sd;
    return sd;
}

struct Value {
    double smooth = 0.0;
    double mae = 0.0;
};

Value evaluate_at(const Problem& p, const std::vector<double>& c, std::vector<double>* grad) {
    const std::size_t n = p.cells, rows = p.rows;
    std::vector<double> mass(n);
    double first = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mass[i] = c[i] - (i ? c[i - 1] : 0.0);
        first += mass[i] * p.radii[i];
    }
    first = std::max(first, 1e-12);

    std::vector<double> k(rows);
    for (std::size_t s = 0; s < rows; ++s) {
        const double* row = &p.sine[s * n];
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            acc += row[i] * mass[i];
        k[s] = acc;
    }

    Value v;
    std::vector<double> pred(rows);
    std::vector<double> g(rows);
    if (p.model) {
        for (std::size_t s = 0; s < rows; ++s)
            g[s] = std::clamp(p.env[s] * k[s] * k[s] / (first * first), 0.0, 1.0);
        pred = speckle::apply(p.noiseless, g);
    } else {
        for (std::size_t s = 0; s < rows; ++s)
            pred[s] = soft_amplitude(k[s] / first, p.soft[s], nullptr);
    }
    // The correction model is fitted up to scale and offset, so compare standardized profiles.
    double pred_sd = 1.0;
    std::vector<double> tgt(p.target.begin(), p.target.begin() + static_cast<std::ptrdiff_t>(rows));
    if (p.model) {
        standardize(tgt);
        pred_sd = standardize(pred);
    }
    const double d2 = p.delta * p.delta;
    std::vector<double> w(rows);
    for (std::size_t s = 0; s < rows; ++s) {
        const double r = pred[s] - tgt[s];
        const double root = std::sqrt(1.0 + r * r / d2);
        v.mae += p.weight[s] * std::abs(r);
        v.smooth += p.weight[s] * d2 * (root - 1.0);
        w[s] = p.weight[s] * r / root / static_cast<double>(rows);
    }
    v.mae /= static_cast<double>(rows);
    v.smooth /= static_cast<double>(rows);
    if (!grad)
        return v;

    // gradient with respect to the masses
    std::vector<double> gm(n, 0.0);
    double g_first = 0.0; // coefficient of radii
    if (p.model) {
        // back through the standardization
        double w_mean = 0.0, wz = 0.0;
        for (std::size_t s = 0; s < rows; ++s) {
            w_mean += w[s] / static_cast<double>(rows);
            wz += w[s] * pred[s];
        }
        for (std::size_t s = 0; s < rows; ++s)
            w[s] = (w[s] - w_mean - pred[s] * wz / static_cast<double>(rows)) / pred_sd;
        const auto gg = apply_vjp(p.noiseless, g, w);
        const double c2 = first * first, c3 = c2 * first;
        for (std::size_t s = 0; s < rows; ++s) {
            const double a = gg[s] * p.env[s] * 2.0 * k[s] / c2;
            const double* row = &p.sine[s * n];
            for (std::size_t i = 0; i < n; ++i)
                gm[i] += a * row[i];
            g_first -= gg[s] * p.env[s] * 2.0 * k[s] * k[s] / c3;
        }
    } else {
        for (std::size_t s = 0; s < rows; ++s) {
            const double f = k[s] / first;
            double slope = 0.0;
            soft_amplitude(f, p.soft[s], &slope);
            const double a = w[s] * slope / first;
            const double* row = &p.sine[s * n];
            for (std::size_t i = 0; i < n; ++i)
                gm[i] += a * row[i];
            g_first -= a * f;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        gm[i] += g_first * p.radii[i];
    grad->resize(n);
    for (std::size_t i = 0; i < n; ++i)
        (*grad)[i] = gm[i] - (i + 1 < n ? gm[i + 1] : 0.0);
    return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

struct StageResult {
    std::vector<double> best;
    double best_mae = 0.0;
    std::size_t iterations = 0;
    bool stalled = false;
};

// Accelerated projected gradient with backtracking; keeps the iterate of least true misfit.
StageResult run_stage(const Problem& p, std::vector<double> x, std::size_t budget, const EstimatorConfig& cfg,
                      double& lipschitz, std::vector<double>* history) {
    const std::size_t n = x.size();
    project(x);
    StageResult res;
    res.best = x;
    res.best_mae = evaluate_at(p, x, nullptr).mae;
    std::vector<double> track{res.best_mae};
    if (history)
        history->push_back(res.best_mae);

    std::vector<double> y = x, gy, z(n), d(n);
    double t = 1.0, previous = evaluate_at(p, x, nullptr).smooth;
    for (std::size_t it = 0; it < budget; ++it) {
        const double fy = evaluate_at(p, y, &gy).smooth;
        Value fz;
        for (int tries = 0; tries < 60; ++tries) {
            for (std::size_t i = 0; i < n; ++i)
                z[i] = y[i] - gy[i] / lipschitz;
            project(z);
            fz = evaluate_at(p, z, nullptr);
            for (std::size_t i = 0; i < n; ++i)
                d[i] = z[i] - y[i];
            if (fz.smooth <= fy + dot(gy, d) + 0.5 * lipschitz * dot(d, d) + 1e-15)
                break;
            lipschitz *= 2.0;
        }
        if (fz.mae < res.best_mae) {
            res.best_mae = fz.mae;
            res.best = z;
        }
        ++res.iterations;
        track.push_back(res.best_mae);
        if (history)
            history->push_back(res.best_mae);

        // restart momentum when the objective rises
        if (fz.smooth > previous)
            t = 1.0;
        previous = fz.smooth;
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double momentum = (t - 1.0) / t_next;
        for (std::size_t i = 0; i < n; ++i)
            y[i] = z[i] + momentum * (z[i] - x[i]);
        x = z;
        t = t_next;
        lipschitz *= 0.9;

        if (track.size() > cfg.stall_window &&
            track[track.size() - 1 - cfg.stall_window] - track.back() < cfg.tolerance) {
            res.stalled = true;
            break;
        }
    }
    return res;
}

Problem build_problem(const AutocorrProfile& measured, const EstimatorConfig& cfg, const CorrectionModel* model) {
    if (measured.u_grid.size() != measured.values.size() || measured.values.empty())
        throw Error(ErrorCode::GridMismatch, "profile values and u grid differ in length");
    std::vector<double> values = measured.values;
    // a corrected profile is already on the model's output scale
    if (!model && measured.u_grid[0] == 0.0) {
        if (!(values[0] > 0.0))
            throw Error(ErrorCode::AllZero, "measured zero-lag value is not positive");
        const double ref = values[0];
        for (double& v : values)
            v /= ref;
    }
    const double beam = cfg.beam_diameter_um;
    const double lo = 4.0 * std::numbers::pi / beam, hi = 12.0 * std::numbers::pi / beam;

    std::vector<std::size_t> keep;
    for (std::size_t s = 0; s < values.size(); ++s) {
        const double u = measured.u_grid[s];
        if (u < 0.0)
            continue;
        if (cfg.lobe_weighting && (u < lo * (1.0 - 1e-12) || u > hi * (1.0 + 1e-12)))
            continue;
        if (!model) {
            const double s2 = std::pow(std::sin(0.5 * beam * u), 2);
            if (u == 0.0 || s2 < cfg.envelope_floor)
                continue;
        }
        keep.push_back(s);
    }
    if (keep.empty())
        throw Error(ErrorCode::EmptyBand, "no usable samples in the measured profile");
    std::stable_sort(keep.begin(), keep.end(),
                     [&](std::size_t a, std::size_t b) { return measured.u_grid[a] < measured.u_grid[b]; });

    // Additive noise of std sigma on A is sigma / env on x = A / env. The misfit compares
    // x / sqrt(|x| + sigma / env): the amplitude where the signal dominates, linear in x where
    // the noise does, so noisy samples are not rectified. Weights are the inverse noise spread.
    double sigma = 0.0;
    if (!model) {
        sigma = cfg.noise_sigma;
        if (sigma < 0.0) {
            // The noiseless profile is nonnegative, so negative samples in the top quarter of u
            // are noise; half of a symmetric noise falls below zero.
            const double u_cut = 0.75 * measured.u_grid[keep.back()];
            double ss = 0.0;
            std::size_t count = 0;
            for (std::size_t s : keep)
                if (measured.u_grid[s] >= u_cut) {
                    ss += std::pow(std::min(values[s], 0.0), 2);
                    ++count;
                }
            sigma = count ? std::sqrt(2.0 * ss / static_cast<double>(count)) : 0.0;
        }
    }

    // beyond the last sample clearly above the noise there is nothing left to fit
    if (sigma > 0.0 && cfg.noise_cutoff > 0.0) {
        double u_last = 0.0;
        for (std::size_t s : keep)
            if (values[s] >= cfg.noise_cutoff * sigma)
                u_last = std::max(u_last, measured.u_grid[s]);
        std::vector<std::size_t> informative;
        for (std::size_t s : keep)
            if (measured.u_grid[s] <= u_last)
                informative.push_back(s);
        if (informative.empty())
            throw Error(ErrorCode::EmptyBand, "every sample is below the noise floor");
        keep = std::move(informative);
    }

    Problem p;
    p.model = model;
    if (model) {
        p.noiseless = *model;
        p.noiseless.noise_amplitude = 0.0;
    }
    p.delta = cfg.huber_delta;
    p.cells = cfg.grid.n_bins;
    p.radii = cfg.grid.centers();
    p.rows = keep.size();
    p.sine.resize(p.rows * p.cells);
    for (std::size_t s = 0; s < p.rows; ++s) {
        const double u = measured.u_grid[keep[s]];
        const double e = envelope(u, beam);
        p.u.push_back(u);
        p.env.push_back(e);
        const double c = sigma / e;
        const double x = values[keep[s]] / e;
        p.soft.push_back(c);
        p.target.push_back(model ? values[keep[s]] : (c > 0.0 ? soften(x, c) : std::sqrt(std::max(x, 0.0))));
        double spread = 0.0;
        if (c > 0.0) {
            const double ax = std::abs(x);
            spread = c * (0.5 * ax + c) / std::pow(ax + c, 1.5);
        }
        p.weight.push_back(1.0 / (spread + cfg.amplitude_floor));
        for (std::size_t i = 0; i < p.cells; ++i)
            p.sine[s * p.cells + i] = u == 0.0 ? p.radii[i] : std::sin(p.radii[i] * u) / u;
    }
    const double mean_w = std::accumulate(p.weight.begin(), p.weight.end(), 0.0) / static_cast<double>(p.rows);
    for (double& w : p.weight)
        w /= mean_w;
    return p;
}

} // namespace

EstimateResult estimate(const AutocorrProfile& measured, const EstimatorConfig& cfg, const CorrectionModel* model,
                        const CumulativeDistribution* warm_start) {
    if (cfg.grid.n_bins < 2 || cfg.output_bins == 0 || cfg.grid.n_bins % cfg.output_bins != 0)
        throw Error(ErrorCode::InvalidArgument, "output bins must divide the cumulative samples");
    if (warm_start && (!(warm_start->grid == cfg.grid) || warm_start->values.size() != cfg.grid.n_bins))
        throw Error(ErrorCode::GridMismatch, "warm start is on a different grid");
    if (measured.frames_averaged > 0 && measured.frames_averaged < 50)
        warn("profile averages fewer than 50 frames");
    if (model)
        model->validate();

    Problem p = build_problem(measured, cfg, model);
    const std::size_t all_rows = p.rows;

    std::vector<double> c = warm_start ? warm_start->values : ramp_cumulative(cfg.grid).values;
    std::vector<double> cutoffs;
    const double u_max = p.u.back();
    const std::size_t stages = warm_start ? 1 : std::max<std::size_t>(cfg.continuation_stages, 1);
    const double u_start = std::numbers::pi / cfg.grid.r_max;
    for (std::size_t s = 0; s + 1 < stages; ++s)
        cutoffs.push_back(u_start + (u_max - u_start) * static_cast<double>(s) / static_cast<double>(stages - 1));
    cutoffs.push_back(u_max);

    EstimateResult res;
    double lipschitz = 1.0;
    std::size_t used = 0;
    StageResult last;
    for (std::size_t s = 0; s < cutoffs.size(); ++s) {
        const bool final_stage = s + 1 == cutoffs.size();
        p.rows = static_cast<std::size_t>(std::upper_bound(p.u.begin(), p.u.end(), cutoffs[s]) - p.u.begin());
        if (final_stage)
            p.rows = all_rows;
        if (p.rows < 3 && !final_stage)
            continue;
        const std::size_t remaining = cfg.max_iterations - std::min(used, cfg.max_iterations);
        const std::size_t budget = final_stage ? remaining : std::min(remaining, cfg.max_iterations / stages);
        last = run_stage(p, c, budget, cfg, lipschitz, final_stage ? &res.loss_history : nullptr);
        used += last.iterations;
        c = last.best;
    }

    res.cumulative = CumulativeDistribution{cfg.grid, c};
    res.psd = psd_of_cumulative(res.cumulative, cfg.output_bins);
    res.loss = last.best_mae;
    res.iterations = used;
    if (res.loss > cfg.loss_threshold)
        res.status = EstimateStatus::NoConvergence;
    else
        res.status = last.stalled ? EstimateStatus::Converged : EstimateStatus::MaxIterations;
    return res;
}

std::vector<DatasetEntry> make_synthetic_dataset(std::size_t n, const CorrectionModel* model, std::uint64_t seed,
                                                 const SyntheticOptions& opts) {
    if (n == 0)
        throw Error(ErrorCode::InvalidArgument, "dataset size must be at least 1");
    if (opts.u_grid.empty())
        throw Error(ErrorCode::InvalidArgument, "synthetic dataset needs a u grid");
    if (!(opts.max_width_um >= opts.min_width_um) || !(opts.min_width_um > 0.0))
        throw Error(ErrorCode::InvalidArgument, "width range must be positive and ordered");
    Rng rng(seed);
    const auto radii = opts.grid.centers();
    std::vector<DatasetEntry> out;
    out.reserve(n);
    const ForwardConfig fwd{opts.beam_diameter_um, opts.u_grid, true};
    for (std::size_t i = 0; i < n; ++i) {
        const double center = opts.grid.r_min + uniform01(rng) * (opts.grid.r_max - opts.grid.r_min);
        const double width = opts.min_width_um + uniform01(rng) * (opts.max_width_um - opts.min_width_um);
        std::vector<double> w(radii.size());
        for (std::size_t k = 0; k < radii.size(); ++k)
            w[k] = std::exp(-0.5 * std::pow((radii[k] - center) / width, 2));
        DatasetEntry e;
        e.seed = mix_seed(seed, i);
        e.psd = make_psd(opts.grid, w);
        e.profile = forward(e.psd, fwd);
        if (model)
            e.profile.values = speckle::apply(*model, e.profile.values, e.seed);
        out.push_back(std::move(e));
    }
    return out;
}

EvaluationReport evaluate(const std::vector<DatasetEntry>& dataset, const EstimatorConfig& cfg,
                          const CorrectionModel* model) {
    if (dataset.empty())
        throw Error(ErrorCode::InvalidArgument, "empty dataset");
    EvaluationReport rep;
    rep.mae.resize(dataset.size());
    rep.wasserstein.resize(dataset.size());
    detail::parallel_for(dataset.size(), [&](std::size_t i) {
        const auto& e = dataset[i];
        const auto res = estimate(e.profile, cfg, model);
        const auto truth = cumulative_of(e.psd);
        rep.mae[i] = cumulative_mae(res.cumulative, truth);
        rep.wasserstein[i] = wasserstein_1d(res.cumulative, truth);
    });
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        rep.mean_mae += rep.mae[i];
        rep.mean_wasserstein += rep.wasserstein[i];
    }
    rep.mean_mae /= static_cast<double>(dataset.size());
    rep.mean_wasserstein /= static_cast<double>(dataset.size());
    return rep;
}

std::vector<TimelapseEntry> timelapse(const std::vector<AutocorrProfile>& profiles, const EstimatorConfig& cfg,
                                      const CorrectionModel* model) {
    std::vector<TimelapseEntry> out;
    out.reserve(profiles.size());
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const CumulativeDistribution* start = out.empty() ? nullptr : &out.back().cumulative;
        auto res = estimate(profiles[i], cfg, model, start);
        out.push_back({i, std::move(res.cumulative), std::move(res.psd), res.loss, res.status});
    }
    return out;
}

} // namespace speckle
