#include "speckle/autocorr.hpp"
#include "speckle/correction.hpp"
#include "speckle/error.hpp"
#include "speckle/forward.hpp"
#include "speckle/inverse.hpp"
#include "speckle/psd.hpp"
#include "speckle/surface.hpp"

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace speckle;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Speckle autocorrelation forward model and size-distribution inversion";

    static py::exception<Error> speckle_error(m, "SpeckleError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(speckle_error, e.what());
        }
    });

    py::class_<RadiusGrid>(m, "RadiusGrid")
        .def(py::init(&RadiusGrid::make), py::arg("r_min") = 50.0, py::arg("r_max") = 1000.0,
             py::arg("n_bins") = 192)
        .def_readonly("r_min", &RadiusGrid::r_min)
        .def_readonly("r_max", &RadiusGrid::r_max)
        .def_readonly("n_bins", &RadiusGrid::n_bins)
        .def_property_readonly("spacing", &RadiusGrid::spacing)
        .def("centers", &RadiusGrid::centers);

    py::class_<ParticleSizeDistribution>(m, "ParticleSizeDistribution")
        .def_readonly("grid", &ParticleSizeDistribution::grid)
        .def_readonly("density", &ParticleSizeDistribution::density)
        .def("masses", &ParticleSizeDistribution::masses)
        .def("mean_radius", &ParticleSizeDistribution::mean_radius);

    py::class_<CumulativeDistribution>(m, "CumulativeDistribution")
        .def(py::init<RadiusGrid, std::vector<double>>(), py::arg("grid"), py::arg("values"))
        .def_readonly("grid", &CumulativeDistribution::grid)
        .def_readonly("values", &CumulativeDistribution::values);

    m.def("make_psd", &make_psd, py::arg("grid"), py::arg("weights"));
    m.def("delta_psd", &delta_psd, py::arg("grid"), py::arg("radius"));
    m.def("band_psd", &band_psd, py::arg("grid"), py::arg("lo"), py::arg("hi"));
    m.def("cumulative_of", &cumulative_of);
    m.def("psd_of_cumulative", &psd_of_cumulative, py::arg("cdf"), py::arg("output_bins") = 64);
    m.def("wasserstein_1d", &wasserstein_1d);
    m.def("sample_radii", &sample_radii, py::arg("psd"), py::arg("n"), py::arg("seed"));
    m.def("to_volume_basis", &to_volume_basis);

    py::class_<OpticsConfig>(m, "OpticsConfig")
        .def(py::init<>())
        .def_readwrite("wavelength_um", &OpticsConfig::wavelength_um)
        .def_readwrite("f3_um", &OpticsConfig::f3_um)
        .def_readwrite("beam_diameter_um", &OpticsConfig::beam_diameter_um)
        .def_readwrite("object_samples", &OpticsConfig::object_samples)
        .def_readwrite("object_extent_um", &OpticsConfig::object_extent_um)
        .def_property_readonly("speckle_size_um", &OpticsConfig::speckle_size_um)
        .def_property_readonly("detector_pitch_um", &OpticsConfig::detector_pitch_um);

    py::class_<RoughnessConfig>(m, "RoughnessConfig")
        .def(py::init<>())
        .def_readwrite("fluctuation_fraction", &RoughnessConfig::fluctuation_fraction)
        .def_readwrite("texture_samples", &RoughnessConfig::texture_samples);

    py::class_<Particle>(m, "Particle")
        .def_readonly("x_um", &Particle::x_um)
        .def_readonly("r_um", &Particle::r_um);

    py::class_<SpeckleFrame>(m, "SpeckleFrame")
        .def_readonly("intensity", &SpeckleFrame::intensity)
        .def_readonly("detector_pitch_um", &SpeckleFrame::detector_pitch_um)
        .def_readonly("frame_index", &SpeckleFrame::frame_index);

    m.def("place_particles",
          [](const ParticleSizeDistribution& psd, const OpticsConfig& cfg, std::uint64_t seed) {
              return place_particles(psd, cfg, seed);
          },
          py::arg("psd"), py::arg("cfg"), py::arg("seed"));
    m.def("simulate_frames", &simulate_frames, py::arg("psd"), py::arg("cfg"), py::arg("rough"), py::arg("seed"),
          py::arg("n_frames"));

    py::class_<AutocorrProfile>(m, "AutocorrProfile")
        .def(py::init<>())
        .def(py::init([](std::vector<double> u, std::vector<double> v, std::size_t frames) {
                 return AutocorrProfile{std::move(u), std::move(v), frames};
             }),
             py::arg("u_grid"), py::arg("values"), py::arg("frames_averaged") = 0)
        .def_readwrite("u_grid", &AutocorrProfile::u_grid)
        .def_readwrite("values", &AutocorrProfile::values)
        .def_readwrite("frames_averaged", &AutocorrProfile::frames_averaged);

    m.def("autocorrelate",
          [](const SpeckleFrame& f, const OpticsConfig& cfg, bool subtract_mean) {
              return autocorrelate(f, cfg, AutocorrOptions{subtract_mean});
          },
          py::arg("frame"), py::arg("cfg"), py::arg("subtract_mean") = false);
    m.def("ensemble_average", &ensemble_average);
    m.def("sliding_windows",
          [](const std::vector<AutocorrProfile>& frames, std::size_t window, std::size_t step) {
              return sliding_windows(frames, WindowPlan{window, step});
          },
          py::arg("frames"), py::arg("window") = 200, py::arg("step") = 40);
    m.def("normalize_profile", &normalize_profile, py::arg("profile"), py::arg("display") = false);

    m.def("make_u_grid", &make_u_grid, py::arg("n"), py::arg("u_max"));
    m.def("envelope", py::overload_cast<const std::vector<double>&, double>(&envelope), py::arg("u_grid"),
          py::arg("beam_diameter_um"));
    m.def("size_kernel", &size_kernel, py::arg("psd"), py::arg("u_grid"));
    m.def("forward",
          [](const ParticleSizeDistribution& psd, const std::vector<double>& u, double beam, bool normalize) {
              return forward(psd, ForwardConfig{beam, u, normalize});
          },
          py::arg("psd"), py::arg("u_grid"), py::arg("beam_diameter_um") = 4800.0, py::arg("normalize") = true);
    m.def("stochastic_forward", &stochastic_forward, py::arg("particles"), py::arg("u_grid"));
    m.def("tune_range", &tune_range, py::arg("target_r_min"), py::arg("cfg"), py::arg("current_r_min") = 50.0);

    py::class_<CorrectionModel>(m, "CorrectionModel")
        .def(py::init([]() { return CorrectionModel::initial(); }))
        .def_readwrite("kernel", &CorrectionModel::kernel)
        .def_readwrite("alpha", &CorrectionModel::alpha)
        .def_readwrite("beta", &CorrectionModel::beta)
        .def_readwrite("noise_amplitude", &CorrectionModel::noise_amplitude);
    m.def("apply", &apply, py::arg("model"), py::arg("calculated"), py::arg("seed") = 0);
    m.def("npcc", &npcc);
    m.def("fit",
          [](const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs, std::size_t epochs,
             double lr) {
              std::vector<CorrectionPair> p;
              for (const auto& [c, meas] : pairs)
                  p.push_back({c, meas});
              const auto res = fit(p, FitOptions{epochs, lr});
              return py::make_tuple(res.model, res.final_loss);
          },
          py::arg("pairs"), py::arg("epochs") = 2000, py::arg("lr") = 1e-2);

    py::class_<EstimatorConfig>(m, "EstimatorConfig")
        .def(py::init<>())
        .def_readwrite("grid", &EstimatorConfig::grid)
        .def_readwrite("output_bins", &EstimatorConfig::output_bins)
        .def_readwrite("beam_diameter_um", &EstimatorConfig::beam_diameter_um)
        .def_readwrite("max_iterations", &EstimatorConfig::max_iterations)
        .def_readwrite("lobe_weighting", &EstimatorConfig::lobe_weighting);

    py::class_<EstimateResult>(m, "EstimateResult")
        .def_readonly("cumulative", &EstimateResult::cumulative)
        .def_readonly("psd", &EstimateResult::psd)
        .def_readonly("loss", &EstimateResult::loss)
        .def_readonly("iterations", &EstimateResult::iterations);

    m.def("estimate",
          [](const AutocorrProfile& p, const EstimatorConfig& cfg, const CorrectionModel* model) {
              return estimate(p, cfg, model);
          },
          py::arg("measured"), py::arg("cfg") = EstimatorConfig{}, py::arg("model") = nullptr);
}
