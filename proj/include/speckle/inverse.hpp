#pragma once

#include "speckle/autocorr.hpp"
#include "speckle/correction.hpp"
#include "speckle/psd.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace speckle {

struct EstimatorConfig {
    RadiusGrid grid{50.0, 1000.0, 192};
    std::size_t output_bins = 64;
    double beam_diameter_um = 4800.0;
    std::size_t max_iterations = 5000;
    std::size_t continuation_stages = 10;
    double tolerance = 1e-6;       // best-loss improvement needed within stall_window iterations
    std::size_t stall_window = 50;
    double huber_delta = 1e-3;     // smoothing of the absolute misfit for the gradient steps
    double envelope_floor = 0.05;  // drop samples with sin^2(D u / 2) below this
    double noise_sigma = -1.0;     // noise std of the normalized profile; < 0 estimates it from negative tail samples
    double amplitude_floor = 1e-3; // amplitude misfit tolerated regardless of noise
    double noise_cutoff = 8.0;     // fit u only up to the last sample above noise_cutoff * noise
    double loss_threshold = 0.05;  // best loss above this after the budget means NoConvergence
    bool lobe_weighting = false;   // fit only the 2nd-5th envelope lobes
};

enum class EstimateStatus { Converged, MaxIterations, NoConvergence };

struct EstimateResult {
    CumulativeDistribution cumulative;
    ParticleSizeDistribution psd; // output_bins cells
    double loss = 0.0;            // mean absolute misfit of the returned iterate
    std::size_t iterations = 0;
    EstimateStatus status = EstimateStatus::Converged;
    std::vector<double> loss_history; // best loss so far, final stage
};

// Without a model the misfit compares amplitudes sqrt(A / envelope), weighted by the inverse
// of their noise spread; with one it compares apply(model, forward) to the measurement after
// standardizing both, since the model is only fitted up to scale and offset.
EstimateResult estimate(const AutocorrProfile& measured, const EstimatorConfig& cfg,
                        const CorrectionModel* model = nullptr,
                        const CumulativeDistribution* warm_start = nullptr);

struct SyntheticOptions {
    RadiusGrid grid{50.0, 1000.0, 192};
    std::vector<double> u_grid;
    double beam_diameter_um = 4800.0;
    double min_width_um = 10.0;
    double max_width_um = 80.0;
};

struct DatasetEntry {
    ParticleSizeDistribution psd;
    AutocorrProfile profile;
    std::uint64_t seed = 0;
};

// Single-peak Gaussian distributions with uniform centers over the grid and uniform widths.
std::vector<DatasetEntry> make_synthetic_dataset(std::size_t n, const CorrectionModel* model, std::uint64_t seed,
                                                 const SyntheticOptions& opts);

struct EvaluationReport {
    std::vector<double> mae;
    std::vector<double> wasserstein;
    double mean_mae = 0.0;
    double mean_wasserstein = 0.0;
};

EvaluationReport evaluate(const std::vector<DatasetEntry>& dataset, const EstimatorConfig& cfg,
                          const CorrectionModel* model = nullptr);

struct TimelapseEntry {
    std::size_t index = 0;
    CumulativeDistribution cumulative;
    ParticleSizeDistribution psd;
    double loss = 0.0;
    EstimateStatus status = EstimateStatus::Converged;
};

// Each estimate starts from the previous one.
std::vector<TimelapseEntry> timelapse(const std::vector<AutocorrProfile>& profiles, const EstimatorConfig& cfg,
                                      const CorrectionModel* model = nullptr);

} // namespace speckle
