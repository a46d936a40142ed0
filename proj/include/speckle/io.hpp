#pragma once

#include "speckle/autocorr.hpp"
#include "speckle/correction.hpp"
#include "speckle/inverse.hpp"
#include "speckle/optics.hpp"
#include "speckle/psd.hpp"
#include "speckle/surface.hpp"

#include <filesystem>
#include <vector>

namespace speckle::io {

namespace fs = std::filesystem;

// foo.csv -> foo.json
fs::path sidecar_path(const fs::path& data);

void write_psd(const fs::path& csv, const ParticleSizeDistribution& psd);
ParticleSizeDistribution read_psd(const fs::path& csv);

void write_cumulative(const fs::path& csv, const CumulativeDistribution& cdf);
CumulativeDistribution read_cumulative(const fs::path& csv);

struct ProfileMeta {
    double wavelength_um = 0.532;
    double f3_um = 250000.0;
    double beam_diameter_um = 4800.0;
    bool normalized = false;
};

void write_profile(const fs::path& csv, const AutocorrProfile& p, const ProfileMeta& meta);
AutocorrProfile read_profile(const fs::path& csv, ProfileMeta* meta = nullptr);

struct FrameHeader {
    std::size_t n_samples = 0;
    double detector_pitch_um = 0.0;
    double wavelength_um = 0.532;
    double f3_um = 250000.0;
    double beam_diameter_um = 4800.0;
    std::uint64_t seed = 0;
    std::uint64_t frame_index = 0;
};

// Writes <dir>/frame_NNNNNN.f32 (float32 little endian) and its .json header.
fs::path write_frame(const fs::path& dir, const SpeckleFrame& frame, const OpticsConfig& cfg, std::uint64_t seed);
SpeckleFrame read_frame(const fs::path& f32, FrameHeader* header = nullptr);
std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension);

void write_image(const fs::path& f32, const Image& img);
Image read_image(const fs::path& f32);

struct OpticsFile {
    OpticsConfig optics;
    std::size_t n_u_samples = 512;
    double u_max_per_um = 0.04;
};

OpticsFile read_optics(const fs::path& json);
void write_optics(const fs::path& json, const OpticsFile& f);

void write_model(const fs::path& json, const CorrectionModel& m);
CorrectionModel read_model(const fs::path& json);

void write_psd_map(const fs::path& csv, const std::vector<TimelapseEntry>& entries);

std::vector<float> read_f32(const fs::path& path);
void write_f32(const fs::path& path, const std::vector<double>& values);

} // namespace speckle::io
