#include "speckle/autocorr.hpp"

#include "fft.hpp"
#include "speckle/error.hpp"

#include <algorithm>
#include <cmath>

namespace speckle {

namespace {

std::vector<double> prepared(const SpeckleFrame& frame, const AutocorrOptions& opts) {
    if (frame.intensity.empty())
        throw Error(ErrorCode::InvalidArgument, "empty frame");
    std::vector<double> s = frame.intensity;
    if (opts.subtract_mean) {
        double mean = 0.0;
        for (double v : s)
            mean += v;
        mean /= static_cast<double>(s.size());
        for (double& v : s)
            v -= mean;
    }
    return s;
}

AutocorrProfile half_profile(const std::vector<double>& full, const SpeckleFrame& frame, const OpticsConfig& cfg) {
    const std::size_t half = full.size() / 2 + 1;
    AutocorrProfile p;
    p.u_grid = detector_u_grid(cfg, half, frame.detector_pitch_um);
    p.values.assign(full.begin(), full.begin() + static_cast<long>(half));
    for (double& v : p.values)
        v *= frame.detector_pitch_um;
    p.frames_averaged = 1;
    return p;
}

} // namespace

std::vector<double> circular_autocorrelation(const std::vector<double>& signal) {
    const std::size_t n = signal.size();
    detail::cvec buf(signal.begin(), signal.end());
    detail::fft_forward(buf);
    for (auto& v : buf)
        v = std::norm(v);
    detail::fft_inverse(buf);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = buf[k].real() / static_cast<double>(n);
    return out;
}

AutocorrProfile autocorrelate(const SpeckleFrame& frame, const OpticsConfig& cfg, const AutocorrOptions& opts) {
    return half_profile(circular_autocorrelation(prepared(frame, opts)), frame, cfg);
}

AutocorrProfile autocorrelate_direct(const SpeckleFrame& frame, const OpticsConfig& cfg,
                                     const AutocorrOptions& opts) {
    const std::size_t n = frame.intensity.size();
    if (n > kDirectAutocorrLimit)
        throw Error(ErrorCode::FrameTooLarge, "direct autocorrelation is limited to 16384 samples");
    const auto s = prepared(frame, opts);
    std::vector<double> full(n, 0.0);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        double acc = 0.0;
        for (std::size_t x = 0; x < n; ++x)
            acc += s[x] * s[(x + k) % n];
        full[k] = acc;
    }
    return half_profile(full, frame, cfg);
}

void ProfileAccumulator::check_grid(const std::vector<double>& u) const {
    if (u.size() != u_grid_.size())
        throw Error(ErrorCode::GridMismatch, "profiles have different lengths");
    for (std::size_t i = 0; i < u.size(); ++i)
        if (std::abs(u[i] - u_grid_[i]) > 1e-12 * std::max(1.0, std::abs(u_grid_[i])))
            throw Error(ErrorCode::GridMismatch, "profiles have different u grids");
}

void ProfileAccumulator::add(const AutocorrProfile& p) {
    if (p.values.size() != p.u_grid.size())
        throw Error(ErrorCode::GridMismatch, "profile values and u grid differ in length");
    ProfileAccumulator single;
    single.u_grid_ = p.u_grid;
    single.mean_ = p.values;
    single.count_ = std::max<std::size_t>(p.frames_averaged, 1);
    merge(single);
}

void ProfileAccumulator::merge(const ProfileAccumulator& other) {
    if (other.count_ == 0)
        return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    check_grid(other.u_grid_);
    const double total = static_cast<double>(count_ + other.count_);
    const double w = static_cast<double>(other.count_) / total;
    for (std::size_t i = 0; i < mean_.size(); ++i)
        mean_[i] += (other.mean_[i] - mean_[i]) * w;
    count_ += other.count_;
}

AutocorrProfile ProfileAccumulator::result() const {
    if (count_ == 0)
        throw Error(ErrorCode::InsufficientFrames, "no profiles accumulated");
    return AutocorrProfile{u_grid_, mean_, count_};
}

AutocorrProfile ensemble_average(const std::vector<AutocorrProfile>& profiles) {
    ProfileAccumulator acc;
    for (const auto& p : profiles)
        acc.add(p);
    return acc.result();
}

SlidingWindowAverager::SlidingWindowAverager(WindowPlan plan) : plan_(plan) {
    if (plan.window < 1 || plan.step < 1)
        throw Error(ErrorCode::InvalidArgument, "window and step must be positive");
}

std::vector<AutocorrProfile> SlidingWindowAverager::push(const AutocorrProfile& p) {
    const std::size_t index = seen_++;
    if (index % plan_.step == 0)
        open_.push_back({index, {}});
    std::vector<AutocorrProfile> done;
    for (auto& w : open_)
        w.acc.add(p);
    while (!open_.empty() && open_.front().start + plan_.window == index + 1) {
        done.push_back(open_.front().acc.result());
        open_.erase(open_.begin());
    }
    return done;
}

std::vector<AutocorrProfile> sliding_windows(const std::vector<AutocorrProfile>& frames, WindowPlan plan) {
    if (frames.size() < plan.window)
        throw Error(ErrorCode::InsufficientFrames, "fewer frames than one window");
    SlidingWindowAverager avg(plan);
    std::vector<AutocorrProfile> out;
    for (const auto& f : frames)
        for (auto& w : avg.push(f))
            out.push_back(std::move(w));
    return out;
}

AutocorrProfile radial_profile(const Image& img, double cx, double cy, double u_per_pixel) {
    if (img.width == 0 || img.height == 0 || img.pixels.size() != img.width * img.height)
        throw Error(ErrorCode::InvalidArgument, "image size does not match its pixels");
    if (cx < 0.0 || cy < 0.0 || cx > static_cast<double>(img.width - 1) || cy > static_cast<double>(img.height - 1))
        throw Error(ErrorCode::CenterOutOfBounds, "center lies outside the image");

    std::vector<double> sum;
    std::vector<std::size_t> count;
    for (std::size_t y = 0; y < img.height; ++y) {
        for (std::size_t x = 0; x < img.width; ++x) {
            const double d = std::hypot(static_cast<double>(x) - cx, static_cast<double>(y) - cy);
            const auto k = static_cast<std::size_t>(std::lround(d));
            if (k >= sum.size()) {
                sum.resize(k + 1, 0.0);
                count.resize(k + 1, 0);
            }
            sum[k] += img.pixels[y * img.width + x];
            ++count[k];
        }
    }
    AutocorrProfile p;
    p.values.resize(sum.size());
    p.u_grid.resize(sum.size());
    for (std::size_t k = 0; k < sum.size(); ++k) {
        p.u_grid[k] = static_cast<double>(k) * u_per_pixel;
        // an empty ring can only follow a filled one
        p.values[k] = count[k] ? sum[k] / static_cast<double>(count[k]) : p.values[k - 1];
    }
    p.frames_averaged = 1;
    return p;
}

AutocorrProfile normalize_profile(const AutocorrProfile& p, bool display) {
    if (p.values.empty())
        throw Error(ErrorCode::InvalidArgument, "empty profile");
    const double peak = *std::max_element(p.values.begin(), p.values.end());
    if (!(peak > 0.0))
        throw Error(ErrorCode::AllZero, "profile has no positive value");
    const bool has_zero_lag = !p.u_grid.empty() && p.u_grid[0] == 0.0 && p.values[0] > 0.0;
    const double ref = has_zero_lag ? p.values[0] : peak;
    AutocorrProfile out = p;
    for (double& v : out.values) {
        v /= ref;
        if (display)
            v = std::pow(std::max(v, 0.0), 0.125);
    }
    return out;
}

} // namespace speckle
