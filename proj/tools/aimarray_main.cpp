// aimarray: design and evaluate sparse receive-array layouts for
// interferometric millimeter-wave imaging.
//
// Subcommands map onto the library modules: grid-validate / layout-eval
// (geometry + metrics), psf (imaging + metrics), optimize (random search or
// genetic algorithm), scene-study (SSIM over random scenes), signalsim
// (Monte-Carlo visibility estimation, optional calibration, reconstruction).
//
// Exit codes: 0 success, 2 input or validation error, 3 infeasible request.
// Every run is deterministic for a fixed flag set (seeds included), and all
// file outputs are written atomically.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aim/error.hpp"
#include "aim/geometry.hpp"
#include "aim/imaging.hpp"
#include "aim/io.hpp"
#include "aim/metrics.hpp"
#include "aim/optimize.hpp"
#include "aim/raster.hpp"
#include "aim/signalsim.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOpts {
    std::string grid_path;
    double freq_ghz = 38.0;
    double cell = 0.5;
    std::size_t raster = 256;
};

void add_common(CLI::App* cmd, const std::shared_ptr<CommonOpts>& o, bool with_raster = true) {
    cmd->add_option("--grid", o->grid_path, "Receiver position grid CSV (id,x_mm,y_mm)")
        ->required();
    cmd->add_option("--freq-ghz", o->freq_ghz, "Operating frequency in GHz")
        ->capture_default_str();
    cmd->add_option("--cell", o->cell, "UV cell size in wavelengths")->capture_default_str();
    if (with_raster)
        cmd->add_option("--raster", o->raster, "Image raster size (power of two)")
            ->capture_default_str();
}

void check_common(const CommonOpts& o) {
    if (o.freq_ghz <= 0.0) throw aim::ValidationError("frequency must be positive");
    if (o.cell <= 0.0) throw aim::ValidationError("cell size must be positive");
    if (o.raster < 32 || !aim::is_pow2(o.raster))
        throw aim::ValidationError("raster size must be a power of two, at least 32");
}

fs::path prepare_out_dir(const std::string& out_dir) {
    if (out_dir.empty()) throw aim::ValidationError("an output directory is required");
    fs::path p(out_dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw aim::ValidationError("cannot create output directory '" + out_dir + "'");
    return p;
}

std::string layout_display_name(const std::string& path) {
    const auto stem = fs::path(path).stem().string();
    return stem.empty() ? path : stem;
}

json aperture_json(const aim::geometry::ApertureFigures& ap) {
    json j;
    const auto axis = [](const std::optional<aim::geometry::AxisFigures>& a) -> json {
        if (!a) return nullptr;
        return json{{"largest_baseline_mm", a->largest_baseline_mm},
                    {"smallest_spacing_mm", a->smallest_spacing_mm},
                    {"resolution_rad", a->resolution_rad},
                    {"fov_halfwidth", a->fov_halfwidth}};
    };
    j["alpha_axis"] = axis(ap.x);
    j["beta_axis"] = axis(ap.y);
    j["feasible"] = ap.feasible();
    if (ap.feasible()) {
        j["worst_resolution_rad"] = ap.worst_resolution_rad();
        j["worst_fov_halfwidth"] = ap.worst_fov_halfwidth();
    } else {
        j["worst_resolution_rad"] = nullptr;
        j["worst_fov_halfwidth"] = nullptr;
    }
    return j;
}

aim::Raster<double> magnitude_raster(const aim::imaging::ComplexImage& img) {
    aim::Raster<double> out(img.pixels.rows(), img.pixels.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::abs(img.pixels.data()[i]);
    return out;
}

// ---------------------------------------------------------------- commands

void register_grid_validate(CLI::App& app) {
    auto cmd = app.add_subcommand("grid-validate",
                                  "Check a position grid against spacing and extent limits");
    auto grid_path = std::make_shared<std::string>();
    cmd->add_option("--grid", *grid_path, "Receiver position grid CSV")->required();
    cmd->callback([grid_path] {
        const auto grid = aim::geometry::load_grid(*grid_path);
        std::printf("%zu slots, %.6gx%.6g mm, min %.1f mm, OK\n", grid.slots.size(),
                    grid.extent_x_mm(), grid.extent_y_mm(), grid.min_pairwise_spacing_mm());
    });
}

void register_layout_eval(CLI::App& app) {
    auto cmd = app.add_subcommand(
        "layout-eval", "Report sample counts, sidelobe metrics and aperture figures for a layout");
    auto o = std::make_shared<CommonOpts>();
    auto layout_path = std::make_shared<std::string>();
    add_common(cmd, o);
    cmd->add_option("--layout", *layout_path, "Layout JSON")->required();
    cmd->callback([o, layout_path] {
        check_common(*o);
        const auto grid = aim::geometry::load_grid(o->grid_path);
        const auto layout = aim::geometry::load_layout(*layout_path);
        aim::geometry::validate_layout(layout, grid);
        const double lambda = aim::geometry::wavelength_mm_from_ghz(o->freq_ghz);

        const auto s = aim::geometry::sampling_function(layout, grid, lambda, o->cell);
        const auto counts = aim::metrics::count_unique(s);
        const auto aperture = aim::geometry::aperture_figures(layout, grid, lambda);
        const auto beam = aim::imaging::psf(s, o->raster);
        const auto profile = aim::metrics::sll_profile(beam);

        json j;
        j["grid"] = grid.name;
        j["layout"] = layout_display_name(*layout_path);
        j["n_elements"] = layout.n();
        j["unique_samples"] = counts.unique_samples;
        j["redundant_samples"] = counts.redundant_samples;
        j["avg_sll_db"] = aim::metrics::avg_sll_db(profile);
        j["psl_db"] = aim::metrics::psl_db(profile);
        j["aperture"] = aperture_json(aperture);
        std::cout << j.dump(2) << "\n";
    });
}

void register_psf(CLI::App& app) {
    auto cmd = app.add_subcommand(
        "psf", "Write the point spread function image and its sidelobe profile");
    auto o = std::make_shared<CommonOpts>();
    auto layout_path = std::make_shared<std::string>();
    auto out_dir = std::make_shared<std::string>();
    auto step_deg = std::make_shared<double>(1.0);
    add_common(cmd, o);
    cmd->add_option("--layout", *layout_path, "Layout JSON")->required();
    cmd->add_option("--out-dir", *out_dir, "Output directory")->required();
    cmd->add_option("--step-deg", *step_deg, "Sidelobe scan step in degrees")
        ->capture_default_str();
    cmd->callback([o, layout_path, out_dir, step_deg] {
        check_common(*o);
        const auto out = prepare_out_dir(*out_dir);
        const auto grid = aim::geometry::load_grid(o->grid_path);
        const auto layout = aim::geometry::load_layout(*layout_path);
        aim::geometry::validate_layout(layout, grid);
        const double lambda = aim::geometry::wavelength_mm_from_ghz(o->freq_ghz);

        const auto s = aim::geometry::sampling_function(layout, grid, lambda, o->cell);
        const auto beam = aim::imaging::psf(s, o->raster);
        const auto profile = aim::metrics::sll_profile(beam, *step_deg);
        const double avg = aim::metrics::avg_sll_db(profile);
        const double psl = aim::metrics::psl_db(profile);

        aim::io::write_pgm16((out / "psf.pgm").string(), magnitude_raster(beam));
        aim::io::write_image_sidecar((out / "psf_meta.json").string(), o->cell, o->raster, lambda);
        aim::io::write_sll_csv((out / "sll.csv").string(), profile);
        json j;
        j["layout"] = layout_display_name(*layout_path);
        j["unique_samples"] = s.unique_cells();
        j["avg_sll_db"] = avg;
        j["psl_db"] = psl;
        j["step_deg"] = *step_deg;
        aim::io::atomic_write_text((out / "psf_metrics.json").string(), j.dump(2) + "\n");
        std::printf("avg SLL %.4f dB, PSL %.4f dB\n", avg, psl);
    });
}

void register_optimize(CLI::App& app) {
    auto cmd = app.add_subcommand(
        "optimize", "Search layouts by random sampling or a multi-objective genetic algorithm");
    auto o = std::make_shared<CommonOpts>();
    struct Opts {
        std::string mode;
        int n_elements = 24;
        std::string out_dir;
        std::uint64_t seed = 1;
        long long trials = 100000;
        aim::optimize::GaParams ga;
        bool full_scale = false;
        int checkpoint_every = 0;
        std::string resume;
    };
    auto x = std::make_shared<Opts>();
    add_common(cmd, o, /*with_raster=*/false);
    cmd->add_option("--mode", x->mode, "Search mode")
        ->required()
        ->check(CLI::IsMember({"random", "ga"}));
    cmd->add_option("--n", x->n_elements, "Number of array elements to select")
        ->capture_default_str();
    cmd->add_option("--out-dir", x->out_dir, "Output directory")->required();
    cmd->add_option("--seed", x->seed, "Random seed")->capture_default_str();
    cmd->add_option("--trials", x->trials, "Random-search trial count")->capture_default_str();
    cmd->add_option("--pop", x->ga.population, "GA population size")->capture_default_str();
    cmd->add_option("--gens", x->ga.generations, "GA generation count")->capture_default_str();
    cmd->add_option("--crossover", x->ga.crossover_fraction, "GA crossover fraction")
        ->capture_default_str();
    cmd->add_option("--pareto-fraction", x->ga.pareto_fraction,
                    "Fraction of the population returned as the front")
        ->capture_default_str();
    cmd->add_option("--mutation", x->ga.mutation_rate,
                    "Per-gene mutation probability (negative = 2/n)");
    cmd->add_flag("--full-scale", x->full_scale,
                  "Use the large preset: population 500, 200 generations");
    cmd->add_option("--checkpoint-every", x->checkpoint_every,
                    "Write a resumable checkpoint every K generations (0 = off)");
    cmd->add_option("--resume", x->resume, "Resume a GA run from a checkpoint file");
    cmd->callback([o, x] {
        if (o->freq_ghz <= 0.0) throw aim::ValidationError("frequency must be positive");
        if (o->cell <= 0.0) throw aim::ValidationError("cell size must be positive");
        const auto out = prepare_out_dir(x->out_dir);
        const auto grid = aim::geometry::load_grid(o->grid_path);
        const double lambda = aim::geometry::wavelength_mm_from_ghz(o->freq_ghz);

        if (x->mode == "random") {
            const auto result = aim::optimize::random_search(grid, x->n_elements, x->trials,
                                                             lambda, o->cell, x->seed);
            aim::io::atomic_write_text(
                (out / "random_report.json").string(),
                aim::optimize::random_report_json(result, grid, x->n_elements, x->seed));
            aim::geometry::save_layout(result.layout, (out / "best_layout.json").string());
            std::printf("random search: unique samples %ld, worst resolution %s rad, "
                        "worst FOV %s\n",
                        result.objectives.unique(),
                        aim::io::format_double(result.objectives.worst_res).c_str(),
                        aim::io::format_double(-result.objectives.neg_worst_fov).c_str());
            return;
        }

        auto params = x->ga;
        params.seed = x->seed;
        if (x->full_scale) {
            params.population = 500;
            params.generations = 200;
        }
        params.checkpoint_every = x->checkpoint_every;
        if (x->checkpoint_every > 0)
            params.checkpoint_path = (out / "ga_checkpoint.json").string();
        params.resume_from = x->resume;
        const auto result =
            aim::optimize::ga_multiobjective(grid, x->n_elements, params, lambda, o->cell);
        aim::io::atomic_write_text((out / "ga_report.json").string(),
                                   aim::optimize::ga_report_json(result, params, grid,
                                                                 x->n_elements));
        const auto& selected = aim::optimize::select_final(result.front);
        aim::geometry::save_layout(selected.layout, (out / "selected_layout.json").string());
        std::printf("ga: front size %zu, selected unique samples %ld\n", result.front.size(),
                    selected.objectives.unique());
    });
}

void register_scene_study(CLI::App& app) {
    auto cmd = app.add_subcommand(
        "scene-study", "Score layouts by SSIM between random scenes and their reconstructions");
    auto o = std::make_shared<CommonOpts>();
    struct Opts {
        std::vector<std::string> layouts;
        int n_scenes = 4;
        std::uint64_t seed = 1;
        std::string out_dir;
    };
    auto x = std::make_shared<Opts>();
    add_common(cmd, o);
    cmd->add_option("--layout", x->layouts, "Layout JSON (repeatable)")->required();
    cmd->add_option("--scenes", x->n_scenes, "Number of random scenes")->capture_default_str();
    cmd->add_option("--seed", x->seed, "Scene generator seed")->capture_default_str();
    cmd->add_option("--out-dir", x->out_dir, "Output directory")->required();
    cmd->callback([o, x] {
        check_common(*o);
        if (x->n_scenes < 0) throw aim::ValidationError("scene count must be non-negative");
        const auto out = prepare_out_dir(x->out_dir);
        const auto grid = aim::geometry::load_grid(o->grid_path);
        const double lambda = aim::geometry::wavelength_mm_from_ghz(o->freq_ghz);

        struct Entry {
            std::string name;
            aim::imaging::ComplexImage beam;
            double fov = 1.0;
            std::vector<double> ssim_values;
        };
        std::vector<Entry> entries;
        for (const auto& path : x->layouts) {
            const auto layout = aim::geometry::load_layout(path);
            aim::geometry::validate_layout(layout, grid);
            const auto s = aim::geometry::sampling_function(layout, grid, lambda, o->cell);
            const auto aperture = aim::geometry::aperture_figures(layout, grid, lambda);
            if (!aperture.feasible())
                throw aim::InfeasibleError("layout '" + layout_display_name(path) +
                                           "' has a degenerate aperture axis");
            Entry e;
            e.name = layout_display_name(path);
            e.beam = aim::imaging::psf(s, o->raster);
            // Alias-free half-width actually achieved by the layout, clamped
            // to the rendered direction-cosine span.
            const double dmin = aim::geometry::layout_min_spacing_mm(layout, grid);
            e.fov = std::min(lambda / (2.0 * dmin), 1.0);
            entries.push_back(std::move(e));
        }
        // All layouts are compared over the same window: the region every
        // one of them can image without ambiguity.
        double study_fov = 1.0;
        for (const auto& e : entries) study_fov = std::min(study_fov, e.fov);
        std::printf("study field of view: |alpha|,|beta| <= %s\n",
                    aim::io::format_double(study_fov).c_str());

        std::string csv = "scene";
        for (const auto& e : entries) csv += "," + e.name;
        csv += "\n";
        for (int i = 0; i < x->n_scenes; ++i) {
            aim::imaging::SceneSpec spec;
            spec.raster = o->raster;
            spec.cell_size = o->cell;
            const auto scene =
                aim::imaging::generate_random_scene(x->seed + static_cast<std::uint64_t>(i), spec);
            csv += std::to_string(i + 1);
            for (auto& e : entries) {
                const auto recon = aim::imaging::simulate_reconstruction(scene, e.beam);
                const double value = aim::metrics::fov_ssim(scene, recon, study_fov, study_fov);
                e.ssim_values.push_back(value);
                csv += "," + aim::io::format_double(value);
            }
            csv += "\n";
        }
        if (x->n_scenes > 0) {
            csv += "mean";
            for (const auto& e : entries) {
                double sum = 0.0;
                for (double v : e.ssim_values) sum += v;
                const double mean = sum / static_cast<double>(e.ssim_values.size());
                csv += "," + aim::io::format_double(mean);
                std::printf("layout %s: mean SSIM %s over %d scenes\n", e.name.c_str(),
                            aim::io::format_double(mean).c_str(), x->n_scenes);
            }
            csv += "\n";
        }
        aim::io::atomic_write_text((out / "ssim_table.csv").string(), csv);
    });
}

void register_signalsim(CLI::App& app) {
    auto cmd = app.add_subcommand(
        "signalsim",
        "Monte-Carlo visibility estimation, optional calibration, and image reconstruction");
    auto o = std::make_shared<CommonOpts>();
    struct Opts {
        std::string scene_path;
        std::string layout_path;
        std::string channel_path;
        long snapshots = 100000;
        bool calibrate = false;
        std::uint64_t seed = 1;
        std::string out_dir;
    };
    auto x = std::make_shared<Opts>();
    add_common(cmd, o);
    cmd->add_option("--scene", x->scene_path, "Emitter scene JSON")->required();
    cmd->add_option("--layout", x->layout_path, "Layout JSON")->required();
    cmd->add_option("--channel", x->channel_path, "Channel model JSON (default: unit gains)");
    cmd->add_option("--snapshots", x->snapshots, "Number of Monte-Carlo snapshots")
        ->capture_default_str();
    cmd->add_flag("--calibrate", x->calibrate,
                  "Apply point-source calibration (boresight source) before gridding");
    cmd->add_option("--seed", x->seed, "Simulation seed")->capture_default_str();
    cmd->add_option("--out-dir", x->out_dir, "Output directory")->required();
    cmd->callback([o, x] {
        check_common(*o);
        if (x->snapshots < 1) throw aim::ValidationError("snapshot count must be at least 1");
        const auto out = prepare_out_dir(x->out_dir);
        const auto grid = aim::geometry::load_grid(o->grid_path);
        const auto layout = aim::geometry::load_layout(x->layout_path);
        aim::geometry::validate_layout(layout, grid);
        const double lambda = aim::geometry::wavelength_mm_from_ghz(o->freq_ghz);
        const auto scene = aim::signalsim::load_emitter_scene(x->scene_path);
        const auto channel = x->channel_path.empty()
                                 ? aim::signalsim::ChannelModel::unit(layout.n())
                                 : aim::signalsim::load_channel(x->channel_path);
        channel.validate(layout.n());
        if (x->snapshots < 100)
            std::fprintf(stderr,
                         "warning: %ld snapshots give high-variance visibility estimates\n",
                         x->snapshots);

        auto estimate = aim::signalsim::simulate_visibility(scene, layout, grid, lambda, channel,
                                                            x->snapshots, x->seed);
        if (x->calibrate) {
            const auto weights =
                aim::signalsim::calibrate_point_source(estimate, layout, grid, lambda);
            estimate = aim::signalsim::apply_weights(estimate, weights);
            aim::signalsim::ChannelModel w;
            w.gains = weights;
            aim::signalsim::save_channel(w, (out / "calibration_weights.json").string());
        }
        aim::signalsim::save_visibility_csv(estimate, (out / "visibility.csv").string());

        const auto vis = aim::signalsim::grid_estimate(estimate, layout, grid, lambda, o->cell,
                                                       o->raster);
        const auto image = aim::imaging::reconstruct(vis);
        aim::io::write_pgm16((out / "reconstruction.pgm").string(), image.pixels);
        aim::io::write_image_sidecar((out / "reconstruction_meta.json").string(), o->cell,
                                     o->raster, lambda);

        std::size_t peak_r = 0, peak_c = 0;
        double peak = -1.0;
        for (std::size_t r = 0; r < image.pixels.rows(); ++r)
            for (std::size_t c = 0; c < image.pixels.cols(); ++c)
                if (image.pixels(r, c) > peak) {
                    peak = image.pixels(r, c);
                    peak_r = r;
                    peak_c = c;
                }
        std::printf("reconstruction peak at pixel (%zu, %zu), alpha %s, beta %s\n", peak_r,
                    peak_c, aim::io::format_double(image.alpha[peak_c]).c_str(),
                    aim::io::format_double(image.beta[peak_r]).c_str());
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse receive-array design and evaluation for incoherent "
                 "millimeter-wave interferometric imaging"};
    app.require_subcommand(1);
    register_grid_validate(app);
    register_layout_eval(app);
    register_psf(app);
    register_optimize(app);
    register_scene_study(app);
    register_signalsim(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const aim::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const aim::InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
