#include "speckle/autocorr.hpp"
#include "speckle/correction.hpp"
#include "speckle/error.hpp"
#include "speckle/forward.hpp"
#include "speckle/inverse.hpp"
#include "speckle/io.hpp"
#include "speckle/surface.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <optional>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace speckle;

namespace {

std::string numbered(const std::string& stem, std::size_t i, const std::string& suffix) {
    std::ostringstream s;
    s << stem << std::setw(6) << std::setfill('0') << i << suffix;
    return s.str();
}

io::OpticsFile load_optics(const std::string& path) {
    return path.empty() ? io::OpticsFile{} : io::read_optics(path);
}

io::ProfileMeta meta_of(const OpticsConfig& o, bool normalized) {
    return io::ProfileMeta{o.wavelength_um, o.f3_um, o.beam_diameter_um, normalized};
}

std::optional<CorrectionModel> load_model(const std::string& path) {
    if (path.empty())
        return std::nullopt;
    return io::read_model(path);
}

std::string status_name(EstimateStatus s) {
    switch (s) {
    case EstimateStatus::Converged: return "converged";
    case EstimateStatus::MaxIterations: return "max_iterations";
    case EstimateStatus::NoConvergence: return "no_convergence";
    }
    return "unknown";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Particle size distribution from laser speckle autocorrelation"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate speckle frames for a size distribution");
    std::string sim_psd, sim_out, sim_optics;
    std::size_t sim_frames = 1;
    std::uint64_t sim_seed = 0;
    RoughnessConfig rough;
    sim->add_option("--psd", sim_psd, "PSD csv")->required();
    sim->add_option("--frames", sim_frames, "number of frames")->required();
    sim->add_option("--seed", sim_seed, "base seed");
    sim->add_option("--out", sim_out, "output directory")->required();
    sim->add_option("--optics", sim_optics, "optics json");
    sim->add_option("--fluctuation", rough.fluctuation_fraction, "roughness RMS as a fraction of particle size");
    sim->add_option("--texture", rough.texture_samples, "roughness smoothing width in samples");

    // autocorr
    auto* ac = app.add_subcommand("autocorr", "Autocorrelate frames and average over sliding windows");
    std::string ac_frames, ac_out;
    WindowPlan plan;
    bool keep_pedestal = false;
    ac->add_option("--frames", ac_frames, "frame directory")->required();
    ac->add_option("--window", plan.window, "frames per window");
    ac->add_option("--step", plan.step, "frames between window starts");
    ac->add_option("--out", ac_out, "profile directory")->required();
    ac->add_flag("--keep-pedestal", keep_pedestal, "correlate raw intensity instead of I - mean(I)");

    // forward
    auto* fw = app.add_subcommand("forward", "Evaluate the analytic forward operator");
    std::string fw_psd, fw_cfg, fw_out;
    bool fw_raw = false;
    fw->add_option("--psd", fw_psd, "PSD csv")->required();
    fw->add_option("--config", fw_cfg, "optics json");
    fw->add_option("--out", fw_out, "profile csv")->required();
    fw->add_flag("--no-normalize", fw_raw, "skip division by the squared first moment");

    // fit-correction
    auto* fc = app.add_subcommand("fit-correction", "Fit the correction model on calculated/measured pairs");
    std::string fc_pairs, fc_out;
    FitOptions fit_opts;
    fc->add_option("--pairs", fc_pairs, "directory of <name>_calculated.csv / <name>_measured.csv")->required();
    fc->add_option("--out", fc_out, "model json")->required();
    fc->add_option("--epochs", fit_opts.epochs, "gradient steps");
    fc->add_option("--lr", fit_opts.learning_rate, "learning rate");

    // estimate
    auto* es = app.add_subcommand("estimate", "Invert an averaged profile to a cumulative distribution");
    std::string es_profile, es_model, es_out, es_psd_out;
    EstimatorConfig ecfg;
    es->add_option("--profile", es_profile, "profile csv")->required();
    es->add_option("--model", es_model, "correction model json");
    es->add_option("--out", es_out, "cumulative csv")->required();
    es->add_option("--psd-out", es_psd_out, "binned PSD csv");
    es->add_option("--max-iters", ecfg.max_iterations, "iteration budget");
    es->add_flag("--lobe-weighting", ecfg.lobe_weighting, "fit only the 2nd-5th lobe band");

    // dataset
    auto* ds = app.add_subcommand("dataset", "Generate a synthetic single-peak dataset");
    std::size_t ds_n = 0;
    std::uint64_t ds_seed = 0;
    std::string ds_out, ds_model, ds_cfg;
    ds->add_option("--n", ds_n, "entries")->required();
    ds->add_option("--seed", ds_seed, "seed");
    ds->add_option("--out", ds_out, "output directory")->required();
    ds->add_option("--model", ds_model, "correction model json");
    ds->add_option("--config", ds_cfg, "optics json");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Estimate every dataset entry and report errors");
    std::string ev_ds, ev_model, ev_out;
    bool ev_lobe = false;
    ev->add_option("--dataset", ev_ds, "dataset directory")->required();
    ev->add_option("--model", ev_model, "correction model json");
    ev->add_option("--out", ev_out, "report json");
    ev->add_flag("--lobe-weighting", ev_lobe, "fit only the 2nd-5th lobe band");

    // timelapse
    auto* tl = app.add_subcommand("timelapse", "Warm-started estimates over a sequence of profiles");
    std::string tl_profiles, tl_out, tl_model;
    tl->add_option("--profiles", tl_profiles, "profile directory (sorted by name)")->required();
    tl->add_option("--out", tl_out, "psd_map csv")->required();
    tl->add_option("--model", tl_model, "correction model json");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            const auto optics = load_optics(sim_optics);
            const auto psd = io::read_psd(sim_psd);
            fs::create_directories(sim_out);
            const auto frames = simulate_frames(psd, optics.optics, rough, sim_seed, sim_frames);
            for (const auto& f : frames)
                io::write_frame(sim_out, f, optics.optics, sim_seed);
            std::cout << "wrote " << frames.size() << " frames to " << sim_out << '\n';
        } else if (*ac) {
            const auto files = io::list_files(ac_frames, ".f32");
            if (files.size() < plan.window)
                throw Error(ErrorCode::InsufficientFrames, "fewer frames than one window");
            fs::create_directories(ac_out);
            SlidingWindowAverager avg(plan);
            std::size_t written = 0;
            for (const auto& path : files) {
                io::FrameHeader h;
                const auto frame = io::read_frame(path, &h);
                OpticsConfig cfg;
                cfg.wavelength_um = h.wavelength_um;
                cfg.f3_um = h.f3_um;
                cfg.beam_diameter_um = h.beam_diameter_um;
                const auto p = autocorrelate(frame, cfg, AutocorrOptions{!keep_pedestal});
                for (const auto& w : avg.push(p))
                    io::write_profile(fs::path(ac_out) / numbered("window_", written++, ".csv"), w,
                                      meta_of(cfg, false));
            }
            std::cout << "wrote " << written << " window profiles to " << ac_out << '\n';
        } else if (*fw) {
            const auto optics = load_optics(fw_cfg);
            const auto psd = to_number_basis(io::read_psd(fw_psd));
            ForwardConfig cfg{optics.optics.beam_diameter_um, make_u_grid(optics.n_u_samples, optics.u_max_per_um),
                              !fw_raw};
            io::write_profile(fw_out, forward(psd, cfg), meta_of(optics.optics, !fw_raw));
        } else if (*fc) {
            std::vector<CorrectionPair> pairs;
            for (const auto& calc : io::list_files(fc_pairs, ".csv")) {
                const std::string name = calc.filename().string();
                const std::string tag = "_calculated.csv";
                if (name.size() <= tag.size() || name.compare(name.size() - tag.size(), tag.size(), tag) != 0)
                    continue;
                const auto meas = calc.parent_path() / (name.substr(0, name.size() - tag.size()) + "_measured.csv");
                pairs.push_back({normalize_profile(io::read_profile(calc)).values,
                                 normalize_profile(io::read_profile(meas)).values});
            }
            if (pairs.size() < 4)
                warn("fewer than 4 calibration pairs");
            const auto res = fit(pairs, fit_opts);
            io::write_model(fc_out, res.model);
            std::cout << "initial npcc " << res.initial_loss << ", final npcc " << res.final_loss << '\n';
        } else if (*es) {
            io::ProfileMeta meta;
            const auto profile = io::read_profile(es_profile, &meta);
            ecfg.beam_diameter_um = meta.beam_diameter_um;
            const auto model = load_model(es_model);
            const auto t0 = std::chrono::steady_clock::now();
            const auto res = estimate(profile, ecfg, model ? &*model : nullptr);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            io::write_cumulative(es_out, res.cumulative);
            if (!es_psd_out.empty())
                io::write_psd(es_psd_out, res.psd);
            std::cout << "loss " << res.loss << ", iterations " << res.iterations << ", status "
                      << status_name(res.status) << ", " << secs << " s\n";
        } else if (*ds) {
            if (ds_n == 0)
                throw Error(ErrorCode::InvalidArgument, "dataset needs n >= 1");
            const auto optics = load_optics(ds_cfg);
            const auto model = load_model(ds_model);
            SyntheticOptions opts;
            opts.u_grid = make_u_grid(optics.n_u_samples, optics.u_max_per_um);
            opts.beam_diameter_um = optics.optics.beam_diameter_um;
            const auto entries = make_synthetic_dataset(ds_n, model ? &*model : nullptr, ds_seed, opts);
            fs::create_directories(ds_out);
            nlohmann::json index = nlohmann::json::array();
            for (std::size_t i = 0; i < entries.size(); ++i) {
                const auto psd_name = numbered("entry_", i, "_psd.csv");
                const auto prof_name = numbered("entry_", i, "_profile.csv");
                io::write_psd(fs::path(ds_out) / psd_name, entries[i].psd);
                io::write_profile(fs::path(ds_out) / prof_name, entries[i].profile, meta_of(optics.optics, true));
                index.push_back({{"psd", psd_name}, {"profile", prof_name}, {"seed", entries[i].seed}});
            }
            std::ofstream(fs::path(ds_out) / "index.json")
                << nlohmann::json{{"n", ds_n}, {"seed", ds_seed}, {"entries", index}}.dump(2) << '\n';
            std::cout << "wrote " << entries.size() << " entries to " << ds_out << '\n';
        } else if (*ev) {
            std::ifstream in(fs::path(ev_ds) / "index.json");
            if (!in)
                throw Error(ErrorCode::Io, "dataset index.json not found");
            const auto index = nlohmann::json::parse(in);
            std::vector<DatasetEntry> entries;
            double beam = 4800.0;
            for (const auto& e : index.at("entries")) {
                io::ProfileMeta meta;
                DatasetEntry d;
                d.psd = io::read_psd(fs::path(ev_ds) / e.at("psd").get<std::string>());
                d.profile = io::read_profile(fs::path(ev_ds) / e.at("profile").get<std::string>(), &meta);
                d.seed = e.at("seed").get<std::uint64_t>();
                beam = meta.beam_diameter_um;
                entries.push_back(std::move(d));
            }
            EstimatorConfig cfg;
            cfg.beam_diameter_um = beam;
            cfg.lobe_weighting = ev_lobe;
            const auto model = load_model(ev_model);
            const auto rep = evaluate(entries, cfg, model ? &*model : nullptr);
            const nlohmann::json out{{"mean_mae", rep.mean_mae},
                                     {"mean_wasserstein_um", rep.mean_wasserstein},
                                     {"mae", rep.mae},
                                     {"wasserstein_um", rep.wasserstein}};
            if (ev_out.empty())
                std::cout << out.dump(2) << '\n';
            else
                std::ofstream(ev_out) << out.dump(2) << '\n';
        } else if (*tl) {
            std::vector<AutocorrProfile> profiles;
            double beam = 4800.0;
            for (const auto& p : io::list_files(tl_profiles, ".csv")) {
                io::ProfileMeta meta;
                profiles.push_back(io::read_profile(p, &meta));
                beam = meta.beam_diameter_um;
            }
            EstimatorConfig cfg;
            cfg.beam_diameter_um = beam;
            const auto model = load_model(tl_model);
            const auto entries = timelapse(profiles, cfg, model ? &*model : nullptr);
            io::write_psd_map(tl_out, entries);
            std::cout << "wrote " << entries.size() << " rows of the PSD map to " << tl_out << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
