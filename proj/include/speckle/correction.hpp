#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace speckle {

/// measured ~ logistic(g + alpha * (kernel * softplus(g)) + beta + noise_amplitude * U[0,1))
/// The kernel is odd-length and centered; the profile is mirrored at u = 0.
struct CorrectionModel {
    std::vector<double> kernel;
    double alpha = 0.1;
    double beta = 0.0;
    double noise_amplitude = 0.0;

    // Normalized triangle kernel.
    static CorrectionModel initial(std::size_t taps = 9);

    std::size_t parameter_count() const { return kernel.size() + 2; }
    std::vector<double> parameters() const;            // kernel..., alpha, beta
    void set_parameters(const std::vector<double>& p); // same layout
    void validate() const;
};

std::vector<double> apply(const CorrectionModel& model, const std::vector<double>& calculated, std::uint64_t seed = 0);

// Gradient of sum_k grad_out[k] * apply(model, g)[k] with respect to g (noise off).
std::vector<double> apply_vjp(const CorrectionModel& model, const std::vector<double>& calculated,
                              const std::vector<double>& grad_out);

// Negative Pearson correlation.
double npcc(const std::vector<double>& a, const std::vector<double>& b);

struct CorrectionPair {
    std::vector<double> calculated;
    std::vector<double> measured;
};

// Mean NPCC of the noiseless model over pairs; fills the parameter gradient if asked.
double correction_loss(const CorrectionModel& model, const std::vector<CorrectionPair>& pairs,
                       std::vector<double>* gradient = nullptr);

struct FitOptions {
    std::size_t epochs = 2000;
    double learning_rate = 1e-2;
};

struct FitResult {
    CorrectionModel model;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::vector<double> history;
};

FitResult fit(const std::vector<CorrectionPair>& pairs, const FitOptions& opts = {},
              const CorrectionModel& start = CorrectionModel::initial());

} // namespace speckle
