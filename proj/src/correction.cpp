#include "speckle/correction.hpp"

#include "speckle/error.hpp"
#include "speckle/rng.hpp"

#include <cmath>

namespace speckle {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }

std::size_t reflect(long idx, std::size_t n) {
    const long last = static_cast<long>(n) - 1;
    if (idx < 0)
        idx = -idx;
    if (idx > last)
        idx = 2 * last - idx;
    if (idx < 0)
        idx = 0;
    if (idx > last)
        idx = last;
    return static_cast<std::size_t>(idx);
}

void check_normalized(const std::vector<double>& g) {
    if (g.empty())
        throw Error(ErrorCode::InvalidArgument, "empty profile");
    for (double v : g)
        if (!(v >= -1e-9 && v <= 1.0 + 1e-9))
            throw Error(ErrorCode::UnnormalizedInput, "calculated profile must lie in [0, 1]");
}

struct Pass {
    std::vector<double> soft; // softplus(g)
    std::vector<double> blur; // kernel * soft
    std::vector<double> out;  // logistic(z)
};

Pass run(const CorrectionModel& m, const std::vector<double>& g, const std::vector<double>* noise) {
    const std::size_t n = g.size();
    const long c = static_cast<long>(m.kernel.size() / 2);
    Pass p;
    p.soft.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        p.soft[k] = softplus(g[k]);
    p.blur.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < m.kernel.size(); ++j)
            p.blur[k] += m.kernel[j] * p.soft[reflect(static_cast<long>(k + j) - c, n)];
    p.out.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        double z = g[k] + m.alpha * p.blur[k] + m.beta;
        if (noise)
            z += (*noise)[k];
        p.out[k] = logistic(z);
    }
    return p;
}

// d(-pearson(a, b)) / da
std::vector<double> npcc_grad(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    const double root = std::sqrt(saa * sbb);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = -((b[i] - mb) / root - sab * (a[i] - ma) / (saa * root));
    return g;
}

} // namespace

CorrectionModel CorrectionModel::initial(std::size_t taps) {
    if (taps % 2 == 0)
        throw Error(ErrorCode::InvalidArgument, "kernel length must be odd");
    CorrectionModel m;
    m.kernel.resize(taps);
    const double c = static_cast<double>(taps / 2);
    double sum = 0.0;
    for (std::size_t j = 0; j < taps; ++j) {
        m.kernel[j] = c + 1.0 - std::abs(static_cast<double>(j) - c);
        sum += m.kernel[j];
    }
    for (double& k : m.kernel)
        k /= sum;
    return m;
}

std::vector<double> CorrectionModel::parameters() const {
    std::vector<double> p = kernel;
    p.push_back(alpha);
    p.push_back(beta);
    return p;
}

void CorrectionModel::set_parameters(const std::vector<double>& p) {
    if (p.size() != parameter_count())
        throw Error(ErrorCode::InvalidArgument, "parameter vector has the wrong length");
    std::copy(p.begin(), p.end() - 2, kernel.begin());
    alpha = p[p.size() - 2];
    beta = p[p.size() - 1];
}

void CorrectionModel::validate() const {
    if (kernel.empty() || kernel.size() % 2 == 0)
        throw Error(ErrorCode::InvalidArgument, "kernel length must be odd");
    if (parameter_count() > 50)
        throw Error(ErrorCode::InvalidArgument, "correction model is limited to 50 parameters");
    if (noise_amplitude < 0.0)
        throw Error(ErrorCode::InvalidArgument, "noise amplitude must be nonnegative");
}

std::vector<double> apply(const CorrectionModel& model, const std::vector<double>& calculated, std::uint64_t seed) {
    model.validate();
    check_normalized(calculated);
    if (model.noise_amplitude > 0.0) {
        Rng rng(seed);
        std::vector<double> noise(calculated.size());
        for (double& v : noise)
            v = model.noise_amplitude * uniform01(rng);
        return run(model, calculated, &noise).out;
    }
    return run(model, calculated, nullptr).out;
}

std::vector<double> apply_vjp(const CorrectionModel& model, const std::vector<double>& calculated,
                              const std::vector<double>& grad_out) {
    const std::size_t n = calculated.size();
    if (grad_out.size() != n)
        throw Error(ErrorCode::GridMismatch, "gradient and profile differ in length");
    const auto p = run(model, calculated, nullptr);
    const long c = static_cast<long>(model.kernel.size() / 2);
    std::vector<double> gz(n), gsoft(n, 0.0), gg(n);
    for (std::size_t k = 0; k < n; ++k)
        gz[k] = grad_out[k] * p.out[k] * (1.0 - p.out[k]);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < model.kernel.size(); ++j)
            gsoft[reflect(static_cast<long>(k + j) - c, n)] += model.alpha * model.kernel[j] * gz[k];
    for (std::size_t k = 0; k < n; ++k)
        gg[k] = gz[k] + gsoft[k] * logistic(calculated[k]);
    return gg;
}

double npcc(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::GridMismatch, "profiles differ in length");
    if (a.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "npcc needs at least two samples");
    const auto n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0)
        throw Error(ErrorCode::ZeroVariance, "npcc of a constant profile");
    return -sab / std::sqrt(saa * sbb);
}

double correction_loss(const CorrectionModel& model, const std::vector<CorrectionPair>& pairs,
                       std::vector<double>* gradient) {
    model.validate();
    if (pairs.empty())
        throw Error(ErrorCode::InvalidArgument, "no training pairs");
    const std::size_t taps = model.kernel.size();
    const long c = static_cast<long>(taps / 2);
    if (gradient)
        gradient->assign(model.parameter_count(), 0.0);
    double loss = 0.0;
    for (const auto& pair : pairs) {
        check_normalized(pair.calculated);
        if (pair.measured.size() != pair.calculated.size())
            throw Error(ErrorCode::GridMismatch, "pair profiles differ in length");
        const auto p = run(model, pair.calculated, nullptr);
        loss += npcc(p.out, pair.measured);
        if (!gradient)
            continue;
        const auto go = npcc_grad(p.out, pair.measured);
        const std::size_t n = go.size();
        auto& g = *gradient;
        for (std::size_t k = 0; k < n; ++k) {
            const double gz = go[k] * p.out[k] * (1.0 - p.out[k]);
            for (std::size_t j = 0; j < taps; ++j)
                g[j] += gz * model.alpha * p.soft[reflect(static_cast<long>(k + j) - c, n)];
            g[taps] += gz * p.blur[k];
            g[taps + 1] += gz;
        }
    }
    const auto count = static_cast<double>(pairs.size());
    if (gradient)
        for (double& v : *gradient)
            v /= count;
    return loss / count;
}

FitResult fit(const std::vector<CorrectionPair>& pairs, const FitOptions& opts, const CorrectionModel& start) {
    if (opts.learning_rate < 0.0)
        throw Error(ErrorCode::InvalidArgument, "learning rate must be nonnegative");
    FitResult res;
    res.model = start;
    std::vector<double> grad;
    res.initial_loss = correction_loss(res.model, pairs, &grad);
    double loss = res.initial_loss;
    res.history.reserve(opts.epochs + 1);
    res.history.push_back(loss);
    auto params = res.model.parameters();
    for (std::size_t e = 0; e < opts.epochs; ++e) {
        for (std::size_t i = 0; i < params.size(); ++i)
            params[i] -= opts.learning_rate * grad[i];
        res.model.set_parameters(params);
        loss = correction_loss(res.model, pairs, &grad);
        res.history.push_back(loss);
    }
    res.final_loss = loss;
    if (!std::isfinite(loss) || loss > res.initial_loss + 1e-12)
        throw Error(ErrorCode::DivergedLoss, "training loss ended above its starting value");
    return res;
}

} // namespace speckle
