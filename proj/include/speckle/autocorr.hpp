#pragma once

#include "speckle/optics.hpp"
#include "speckle/surface.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace speckle {

/// Autocorrelation on the nonnegative-u half. frames_averaged == 0 marks an analytic profile.
struct AutocorrProfile {
    std::vector<double> u_grid;
    std::vector<double> values;
    std::size_t frames_averaged = 0;
};

struct AutocorrOptions {
    // Correlate I - mean(I). Removes the flat (sum I)^2 / N pedestal.
    bool subtract_mean = false;
};

constexpr std::size_t kDirectAutocorrLimit = 16384;

// A(k) = sum_x I(x) I(x + k) * pitch over the periodic frame, k = 0..n/2.
AutocorrProfile autocorrelate(const SpeckleFrame& frame, const OpticsConfig& cfg, const AutocorrOptions& opts = {});
AutocorrProfile autocorrelate_direct(const SpeckleFrame& frame, const OpticsConfig& cfg,
                                     const AutocorrOptions& opts = {});
// Full periodic autocorrelation over all n lags, for symmetry checks.
std::vector<double> circular_autocorrelation(const std::vector<double>& signal);

/// Frame-count weighted running mean of profiles. merge() is associative.
class ProfileAccumulator {
public:
    void add(const AutocorrProfile& p);
    void merge(const ProfileAccumulator& other);
    bool empty() const { return count_ == 0; }
    std::size_t frames() const { return count_; }
    AutocorrProfile result() const;

private:
    void check_grid(const std::vector<double>& u) const;

    std::vector<double> u_grid_;
    std::vector<double> mean_;
    std::size_t count_ = 0;
};

AutocorrProfile ensemble_average(const std::vector<AutocorrProfile>& profiles);

struct WindowPlan {
    std::size_t window = 200;
    std::size_t step = 40;
};

/// Emits the mean of frames [s, s + window) for s = 0, step, 2 step, ...
/// Holds at most window / step open accumulators.
class SlidingWindowAverager {
public:
    explicit SlidingWindowAverager(WindowPlan plan);
    std::vector<AutocorrProfile> push(const AutocorrProfile& p);

private:
    struct Open {
        std::size_t start;
        ProfileAccumulator acc;
    };
    WindowPlan plan_;
    std::size_t seen_ = 0;
    std::vector<Open> open_;
};

std::vector<AutocorrProfile> sliding_windows(const std::vector<AutocorrProfile>& frames, WindowPlan plan);

struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels; // row-major
};

// Mean over annuli round(distance) == k around (cx, cy); u_grid[k] = k * u_per_pixel.
AutocorrProfile radial_profile(const Image& img, double cx, double cy, double u_per_pixel = 1.0);

// Scale by the zero-lag value; display applies the 1/8 power.
AutocorrProfile normalize_profile(const AutocorrProfile& p, bool display = false);

} // namespace speckle
