#include "speckle/optics.hpp"

#include "speckle/error.hpp"

#include <cmath>
#include <numbers>

namespace speckle {

void OpticsConfig::validate() const {
    if (!(wavelength_um > 0.0) || !(f3_um > 0.0) || !(beam_diameter_um > 0.0) || !(object_extent_um > 0.0))
        throw Error(ErrorCode::InvalidArgument, "optical lengths must be positive");
    if (object_samples < 2 || (object_samples & (object_samples - 1)) != 0)
        throw Error(ErrorCode::InvalidArgument, "object_samples must be a power of two");
    if (beam_diameter_um > object_extent_um)
        throw Error(ErrorCode::InvalidArgument, "beam wider than the object extent");
}

double OpticsConfig::u_per_lag(double detector_pitch_um) const {
    return 2.0 * std::numbers::pi * detector_pitch_um / (wavelength_um * f3_um);
}

std::vector<double> make_u_grid(std::size_t n, double u_max) {
    if (n < 2 || !(u_max > 0.0))
        throw Error(ErrorCode::InvalidArgument, "u grid needs n >= 2 and u_max > 0");
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i)
        u[i] = u_max * static_cast<double>(i) / static_cast<double>(n - 1);
    return u;
}

std::vector<double> detector_u_grid(const OpticsConfig& cfg, std::size_t n, double detector_pitch_um) {
    const double step = cfg.u_per_lag(detector_pitch_um);
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i)
        u[i] = step * static_cast<double>(i);
    return u;
}

} // namespace speckle
