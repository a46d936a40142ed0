#include "speckle/io.hpp"

#include "speckle/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace speckle::io {

using nlohmann::json;

namespace {

json read_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + p.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Io, p.string() + ": " + e.what());
    }
}

void write_json(const fs::path& p, const json& j) {
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + p.string());
    out << j.dump(2) << '\n';
}

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + p.string());
    out << std::setprecision(17);
    return out;
}

// Two-column CSV with a header line.
void read_columns(const fs::path& p, std::vector<double>& a, std::vector<double>& b) {
    std::ifstream in(p);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + p.string());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x, y;
        if (!(ss >> x >> y))
            throw Error(ErrorCode::Io, "malformed row in " + p.string() + ": " + line);
        a.push_back(x);
        b.push_back(y);
    }
}

std::string basis_name(Basis b) { return b == Basis::Volume ? "volume" : "number"; }

Basis basis_of(const std::string& s) {
    if (s == "number")
        return Basis::Number;
    if (s == "volume")
        return Basis::Volume;
    throw Error(ErrorCode::Io, "unknown basis " + s);
}

void write_grid_csv(const fs::path& csv, const RadiusGrid& grid, const std::vector<double>& values, Basis basis,
                    const char* kind) {
    auto out = open_out(csv);
    out << "r_um,value\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        out << grid.center(i) << ',' << values[i] << '\n';
    write_json(sidecar_path(csv), json{{"r_min", grid.r_min},
                                       {"r_max", grid.r_max},
                                       {"n_bins", grid.n_bins},
                                       {"basis", basis_name(basis)},
                                       {"kind", kind}});
}

RadiusGrid read_grid_csv(const fs::path& csv, std::vector<double>& values, Basis& basis) {
    const auto meta = read_json(sidecar_path(csv));
    const auto grid = RadiusGrid::make(meta.at("r_min").get<double>(), meta.at("r_max").get<double>(),
                                       meta.at("n_bins").get<std::size_t>());
    basis = basis_of(meta.value("basis", std::string("number")));
    std::vector<double> r;
    read_columns(csv, r, values);
    if (values.size() != grid.n_bins)
        throw Error(ErrorCode::GridMismatch, csv.string() + " row count differs from its sidecar");
    return grid;
}

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bits = std::bit_cast<std::uint32_t>(v);
        bits = __builtin_bswap32(bits);
        return std::bit_cast<T>(bits);
    }
    return v;
}

} // namespace

fs::path sidecar_path(const fs::path& data) {
    fs::path p = data;
    p.replace_extension(".json");
    return p;
}

void write_psd(const fs::path& csv, const ParticleSizeDistribution& psd) {
    write_grid_csv(csv, psd.grid, psd.density, psd.basis, "density");
}

ParticleSizeDistribution read_psd(const fs::path& csv) {
    std::vector<double> v;
    Basis basis;
    const auto grid = read_grid_csv(csv, v, basis);
    auto psd = make_psd(grid, v);
    psd.basis = basis;
    return psd;
}

void write_cumulative(const fs::path& csv, const CumulativeDistribution& cdf) {
    write_grid_csv(csv, cdf.grid, cdf.values, Basis::Number, "cumulative");
}

CumulativeDistribution read_cumulative(const fs::path& csv) {
    std::vector<double> v;
    Basis basis;
    const auto grid = read_grid_csv(csv, v, basis);
    return CumulativeDistribution{grid, v};
}

void write_profile(const fs::path& csv, const AutocorrProfile& p, const ProfileMeta& meta) {
    auto out = open_out(csv);
    out << "u_per_um,value\n";
    for (std::size_t i = 0; i < p.values.size(); ++i)
        out << p.u_grid[i] << ',' << p.values[i] << '\n';
    write_json(sidecar_path(csv), json{{"frames_averaged", p.frames_averaged},
                                       {"lambda_nm", meta.wavelength_um * 1e3},
                                       {"f3_mm", meta.f3_um * 1e-3},
                                       {"D_mm", meta.beam_diameter_um * 1e-3},
                                       {"normalized", meta.normalized}});
}

AutocorrProfile read_profile(const fs::path& csv, ProfileMeta* meta) {
    AutocorrProfile p;
    read_columns(csv, p.u_grid, p.values);
    const auto side = sidecar_path(csv);
    if (fs::exists(side)) {
        const auto j = read_json(side);
        p.frames_averaged = j.value("frames_averaged", std::size_t{0});
        if (meta) {
            meta->wavelength_um = j.value("lambda_nm", 532.0) * 1e-3;
            meta->f3_um = j.value("f3_mm", 250.0) * 1e3;
            meta->beam_diameter_um = j.value("D_mm", 4.8) * 1e3;
            meta->normalized = j.value("normalized", false);
        }
    }
    return p;
}

std::vector<float> read_f32(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    if (bytes % 4 != 0)
        throw Error(ErrorCode::Io, path.string() + " is not a float32 array");
    std::vector<float> v(bytes / 4);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
    for (auto& x : v)
        x = to_little(x);
    return v;
}

void write_f32(const fs::path& path, const std::vector<double>& values) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    std::vector<float> v(values.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = to_little(static_cast<float>(values[i]));
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 4));
}

fs::path write_frame(const fs::path& dir, const SpeckleFrame& frame, const OpticsConfig& cfg, std::uint64_t seed) {
    std::ostringstream name;
    name << "frame_" << std::setw(6) << std::setfill('0') << frame.frame_index << ".f32";
    const fs::path f32 = dir / name.str();
    write_f32(f32, frame.intensity);
    write_json(sidecar_path(f32), json{{"n_samples", frame.intensity.size()},
                                       {"detector_pitch_um", frame.detector_pitch_um},
                                       {"wavelength_nm", cfg.wavelength_um * 1e3},
                                       {"f3_mm", cfg.f3_um * 1e-3},
                                       {"D_mm", cfg.beam_diameter_um * 1e-3},
                                       {"seed", seed},
                                       {"frame_index", frame.frame_index}});
    return f32;
}

SpeckleFrame read_frame(const fs::path& f32, FrameHeader* header) {
    const auto j = read_json(sidecar_path(f32));
    const auto raw = read_f32(f32);
    FrameHeader h;
    h.n_samples = j.at("n_samples").get<std::size_t>();
    h.detector_pitch_um = j.at("detector_pitch_um").get<double>();
    h.wavelength_um = j.value("wavelength_nm", 532.0) * 1e-3;
    h.f3_um = j.value("f3_mm", 250.0) * 1e3;
    h.beam_diameter_um = j.value("D_mm", 4.8) * 1e3;
    h.seed = j.value("seed", std::uint64_t{0});
    h.frame_index = j.value("frame_index", std::uint64_t{0});
    if (raw.size() != h.n_samples)
        throw Error(ErrorCode::Io, f32.string() + " length differs from its header");
    if (header)
        *header = h;
    SpeckleFrame f;
    f.intensity.assign(raw.begin(), raw.end());
    f.detector_pitch_um = h.detector_pitch_um;
    f.frame_index = h.frame_index;
    return f;
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension) {
    if (!fs::is_directory(dir))
        throw Error(ErrorCode::Io, dir.string() + " is not a directory");
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == extension)
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

void write_image(const fs::path& f32, const Image& img) {
    write_f32(f32, img.pixels);
    write_json(sidecar_path(f32), json{{"width", img.width}, {"height", img.height}});
}

Image read_image(const fs::path& f32) {
    const auto j = read_json(sidecar_path(f32));
    Image img;
    img.width = j.at("width").get<std::size_t>();
    img.height = j.at("height").get<std::size_t>();
    const auto raw = read_f32(f32);
    if (raw.size() != img.width * img.height)
        throw Error(ErrorCode::Io, f32.string() + " size differs from its header");
    img.pixels.assign(raw.begin(), raw.end());
    return img;
}

OpticsFile read_optics(const fs::path& path) {
    const auto j = read_json(path);
    OpticsFile f;
    f.optics.wavelength_um = j.value("lambda_nm", 532.0) * 1e-3;
    f.optics.f3_um = j.value("f3_mm", 250.0) * 1e3;
    f.optics.beam_diameter_um = j.value("D_mm", 4.8) * 1e3;
    f.optics.object_samples = j.value("object_samples", std::size_t{4096});
    f.optics.object_extent_um = j.value("object_extent_mm", 2.0 * f.optics.beam_diameter_um * 1e-3) * 1e3;
    f.n_u_samples = j.value("n_u_samples", std::size_t{512});
    f.u_max_per_um = j.value("u_max_per_um", 0.04);
    f.optics.validate();
    return f;
}

void write_optics(const fs::path& path, const OpticsFile& f) {
    write_json(path, json{{"lambda_nm", f.optics.wavelength_um * 1e3},
                          {"f3_mm", f.optics.f3_um * 1e-3},
                          {"D_mm", f.optics.beam_diameter_um * 1e-3},
                          {"object_samples", f.optics.object_samples},
                          {"object_extent_mm", f.optics.object_extent_um * 1e-3},
                          {"n_u_samples", f.n_u_samples},
                          {"u_max_per_um", f.u_max_per_um}});
}

void write_model(const fs::path& path, const CorrectionModel& m) {
    write_json(path, json{{"kernel", m.kernel},
                          {"alpha", m.alpha},
                          {"beta", m.beta},
                          {"noise_amplitude", m.noise_amplitude},
                          {"inner", "softplus"}});
}

CorrectionModel read_model(const fs::path& path) {
    const auto j = read_json(path);
    if (j.value("inner", std::string("softplus")) != "softplus")
        throw Error(ErrorCode::Io, "only the softplus inner map is supported");
    CorrectionModel m;
    m.kernel = j.at("kernel").get<std::vector<double>>();
    m.alpha = j.at("alpha").get<double>();
    m.beta = j.at("beta").get<double>();
    m.noise_amplitude = j.value("noise_amplitude", 0.0);
    m.validate();
    return m;
}

void write_psd_map(const fs::path& csv, const std::vector<TimelapseEntry>& entries) {
    auto out = open_out(csv);
    out << "frame_index,r_um,density\n";
    for (const auto& e : entries)
        for (std::size_t i = 0; i < e.psd.density.size(); ++i)
            out << e.index << ',' << e.psd.grid.center(i) << ',' << e.psd.density[i] << '\n';
}

} // namespace speckle::io
