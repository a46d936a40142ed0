#include <doctest.h>

#include "speckle/error.hpp"
#include "speckle/io.hpp"

#include <fstream>
#include <random>

using namespace speckle;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("speckle_io_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("psd and cumulative round trip") {
    TempDir tmp;
    const auto psd = band_psd(RadiusGrid{50, 1000, 64}, 200, 300);
    io::write_psd(tmp.path / "psd.csv", psd);
    CHECK(fs::exists(tmp.path / "psd.json"));
    const auto back = io::read_psd(tmp.path / "psd.csv");
    CHECK(back.grid == psd.grid);
    CHECK(back.density == psd.density);

    const auto vol = to_volume_basis(psd);
    io::write_psd(tmp.path / "vol.csv", vol);
    CHECK(io::read_psd(tmp.path / "vol.csv").basis == Basis::Volume);

    const auto cdf = cumulative_of(psd);
    io::write_cumulative(tmp.path / "c.csv", cdf);
    const auto c = io::read_cumulative(tmp.path / "c.csv");
    CHECK(c.values == cdf.values);
    CHECK(c.grid == cdf.grid);
}

TEST_CASE("profile round trip") {
    TempDir tmp;
    AutocorrProfile p{make_u_grid(32, 0.01), std::vector<double>(32), 200};
    for (std::size_t i = 0; i < 32; ++i)
        p.values[i] = 1.0 / (1.0 + static_cast<double>(i) * 0.1);
    io::ProfileMeta meta;
    meta.f3_um = 125000.0;
    meta.normalized = true;
    io::write_profile(tmp.path / "p.csv", p, meta);
    io::ProfileMeta got;
    const auto back = io::read_profile(tmp.path / "p.csv", &got);
    CHECK(back.values == p.values);
    CHECK(back.u_grid == p.u_grid);
    CHECK(back.frames_averaged == 200);
    CHECK(got.f3_um == doctest::Approx(125000.0));
    CHECK(got.normalized);
}

TEST_CASE("frame round trip and listing") {
    TempDir tmp;
    const OpticsConfig cfg;
    for (std::uint64_t k : {3u, 1u, 2u}) {
        SpeckleFrame f{std::vector<double>{0.5, 1.25, 2.0, 1e-3}, cfg.detector_pitch_um(), k};
        io::write_frame(tmp.path, f, cfg, 99);
    }
    const auto files = io::list_files(tmp.path, ".f32");
    REQUIRE(files.size() == 3);
    CHECK(files[0].filename() == "frame_000001.f32");
    io::FrameHeader h;
    const auto f = io::read_frame(files[2], &h);
    CHECK(f.frame_index == 3);
    CHECK(h.seed == 99);
    CHECK(h.n_samples == 4);
    CHECK(f.intensity[1] == 1.25);
    CHECK(f.intensity[3] == doctest::Approx(1e-3).epsilon(1e-7));
    CHECK(f.detector_pitch_um == doctest::Approx(cfg.detector_pitch_um()));
    CHECK(fs::file_size(files[0]) == 16);

    std::ofstream(tmp.path / "odd.f32", std::ios::binary) << "abc";
    CHECK_THROWS_AS(io::read_f32(tmp.path / "odd.f32"), Error);
    CHECK_THROWS_AS(io::list_files(tmp.path / "missing", ".f32"), Error);
}

TEST_CASE("image, optics and model round trip") {
    TempDir tmp;
    Image img{3, 2, {1, 2, 3, 4, 5, 6}};
    io::write_image(tmp.path / "img.f32", img);
    const auto im = io::read_image(tmp.path / "img.f32");
    CHECK(im.width == 3);
    CHECK(im.height == 2);
    CHECK(im.pixels == img.pixels);

    io::OpticsFile o;
    o.optics.f3_um = 125000.0;
    o.n_u_samples = 100;
    io::write_optics(tmp.path / "optics.json", o);
    const auto ob = io::read_optics(tmp.path / "optics.json");
    CHECK(ob.optics.f3_um == doctest::Approx(125000.0));
    CHECK(ob.n_u_samples == 100);
    CHECK(ob.optics.object_samples == o.optics.object_samples);

    std::ofstream(tmp.path / "minimal.json") << R"({"lambda_nm": 633, "f3_mm": 200, "D_mm": 2.4})";
    const auto mn = io::read_optics(tmp.path / "minimal.json");
    CHECK(mn.optics.wavelength_um == doctest::Approx(0.633));
    CHECK(mn.optics.object_extent_um == doctest::Approx(4800.0));

    CorrectionModel m = CorrectionModel::initial(5);
    m.alpha = 0.7;
    m.beta = -1.5;
    m.noise_amplitude = 0.02;
    io::write_model(tmp.path / "model.json", m);
    const auto mb = io::read_model(tmp.path / "model.json");
    CHECK(mb.parameters() == m.parameters());
    CHECK(mb.noise_amplitude == 0.02);

    std::ofstream(tmp.path / "relu.json") << R"({"kernel": [1], "alpha": 0, "beta": 0, "inner": "relu"})";
    CHECK_THROWS_AS(io::read_model(tmp.path / "relu.json"), Error);
}

TEST_CASE("psd map rows") {
    TempDir tmp;
    const auto psd = delta_psd(RadiusGrid{50, 1000, 4}, 300);
    std::vector<TimelapseEntry> entries{{0, cumulative_of(psd), psd, 0.0, EstimateStatus::Converged},
                                        {1, cumulative_of(psd), psd, 0.0, EstimateStatus::Converged}};
    io::write_psd_map(tmp.path / "map.csv", entries);
    std::ifstream in(tmp.path / "map.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "frame_index,r_um,density");
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    CHECK(rows == 8);
}
