// Command-line front end: simulation, calibration, consistency checking
// and Monte-Carlo experiment tables. Exit codes: 0 success, 2 invalid or
// unreadable input, 3 solver degeneracy, 4 experiment level with no
// surviving realization, 5 consistency-check failure.

#include <CLI11.hpp>
#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tomocal/dcc.hpp"
#include "tomocal/errors.hpp"
#include "tomocal/fanbeam_calib.hpp"
#include "tomocal/fanbeam_sim.hpp"
#include "tomocal/harness.hpp"
#include "tomocal/io.hpp"
#include "tomocal/parallel_calib.hpp"
#include "tomocal/parallel_sim.hpp"

namespace {

using tomocal::CalibError;
using tomocal::ErrorCode;
using tomocal::Geometry;
using json = nlohmann::json;

int emit_error(int exit_code, const CalibError& e) {
    json j;
    j["error"]["code"] = tomocal::to_string(e.code());
    j["error"]["message"] = e.what();
    if (e.view_index()) j["error"]["view_index"] = *e.view_index();
    std::cerr << j.dump() << "\n";
    return exit_code;
}

Geometry parse_geometry(const std::string& name) {
    if (name == "parallel") return Geometry::Parallel;
    if (name == "fanbeam") return Geometry::FanBeam;
    throw CalibError(ErrorCode::InvalidArgument,
                     fmt::format("unknown geometry \"{}\"", name));
}

std::optional<std::uint64_t> seed_from_env() {
    const char* env = std::getenv("TOMOCAL_SEED");
    if (env == nullptr || *env == '\0') return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const unsigned long long value = std::strtoull(env, &end, 10);
    if (errno != 0 || *end != '\0') {
        throw CalibError(ErrorCode::InvalidArgument,
                         "TOMOCAL_SEED must be a decimal integer");
    }
    return value;
}

void require_valid_rig(const tomocal::io::RigFile& rig) {
    std::vector<tomocal::RigViolation> violations;
    if (rig.geometry == Geometry::Parallel) {
        violations = tomocal::validate_rig(rig.parallel);
    } else {
        violations = tomocal::validate_rig(rig.fanbeam);
    }
    if (violations.empty()) return;
    std::string message = "invalid rig:";
    for (const auto& v : violations) message += fmt::format(" [{}] {}", v.code, v.message);
    throw CalibError(ErrorCode::InvalidArgument, message);
}

json manifest_base(const std::string& command, const std::vector<std::string>& argv,
                   const json& config, const std::vector<std::string>& inputs,
                   const std::vector<std::string>& outputs) {
    json m;
    m["command"] = command;
    m["argv"] = argv;
    m["version"] = tomocal::io::kToolkitVersion;
    m["created_utc"] = tomocal::io::iso8601_utc_now();
    m["config_hash"] = tomocal::io::config_hash_hex(config);
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    return m;
}

// ================================================================ simulate

struct SimulateArgs {
    std::string rig_path;
    std::string geometry;
    std::string views_path;
    int random_views = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_path;
};

int run_simulate(const SimulateArgs& args, const std::vector<std::string>& argv) {
    namespace io = tomocal::io;
    try {
        io::RigFile rig = io::load_rig(args.rig_path);
        if (!args.geometry.empty() && parse_geometry(args.geometry) != rig.geometry) {
            throw CalibError(ErrorCode::InvalidArgument,
                             "--geometry disagrees with the rig file");
        }
        require_valid_rig(rig);
        if (args.views_path.empty() && args.random_views == 0) {
            throw CalibError(ErrorCode::InvalidArgument,
                             "either --views or --random-views is required");
        }

        io::RigFile effective = rig;
        json views_spec;
        std::vector<std::string> inputs = {args.rig_path};
        std::optional<std::uint64_t> seed;

        std::vector<tomocal::ParallelView> parallel_views;
        std::vector<tomocal::FanBeamView> fanbeam_views;
        if (!args.views_path.empty()) {
            const json views_json = io::read_json_file(args.views_path);
            if (rig.geometry == Geometry::Parallel) {
                parallel_views = io::parallel_views_from_json(views_json);
            } else {
                fanbeam_views = io::fanbeam_views_from_json(views_json);
            }
            views_spec = views_json;
            inputs.push_back(args.views_path);
        } else {
            seed = args.seed_given ? args.seed
                                   : seed_from_env().value_or(tomocal::kDefaultExperimentSeed);
            tomocal::ExperimentConfig config;
            config.geometry = rig.geometry;
            config.parallel_rig = rig.parallel;
            config.fanbeam_rig = rig.fanbeam;
            config.view_count = args.random_views;
            config.seed = *seed;
            std::mt19937_64 rng(*seed);
            if (rig.geometry == Geometry::Parallel) {
                auto scenario = tomocal::sample_parallel_scenario(config, rng);
                effective.parallel = scenario.rig;
                parallel_views = std::move(scenario.views);
            } else {
                auto scenario = tomocal::sample_fanbeam_scenario(config, rng);
                effective.fanbeam = scenario.rig;
                fanbeam_views = std::move(scenario.views);
            }
            views_spec = {{"random_views", args.random_views}, {"seed", *seed}};
        }

        json truth;
        truth["rig_effective"] = io::rig_to_json(effective);
        if (rig.geometry == Geometry::Parallel) {
            auto detections = tomocal::project_rig_parallel(effective.parallel, parallel_views);
            io::save_parallel_projections(args.out_path, detections);
            truth["views"] = io::views_to_json(std::span<const tomocal::ParallelView>(
                parallel_views.data(), parallel_views.size()));
        } else {
            auto detections = tomocal::project_rig_fanbeam(effective.fanbeam, fanbeam_views);
            io::save_fanbeam_projections(args.out_path, detections);
            truth["views"] = io::views_to_json(std::span<const tomocal::FanBeamView>(
                fanbeam_views.data(), fanbeam_views.size()));
        }

        json manifest = manifest_base(
            "simulate", argv, json{{"rig", io::rig_to_json(rig)}, {"views", views_spec}},
            inputs, {args.out_path});
        if (seed) manifest["seed"] = *seed;
        manifest["truth"] = truth;
        io::write_json_file(args.out_path + ".manifest.json", manifest);
        return 0;
    } catch (const CalibError& e) {
        return emit_error(2, e);
    }
}

// =============================================================== calibrate

struct CalibrateArgs {
    std::string geometry;
    std::string input;
    std::string branch = "I";
    double D = 0.0;
    bool d_given = false;
    double L = 0.0;
    bool l_given = false;
    double k1 = 0.0, k2 = 0.0, k3 = 0.0;
    bool k_given = false;
    int reference_view = 0;
    bool ref_given = false;
    std::string out_path;
};

int run_calibrate(const CalibrateArgs& args, const std::vector<std::string>& argv) {
    namespace io = tomocal::io;
    Geometry geometry = Geometry::Parallel;
    std::vector<tomocal::ParallelDetections> parallel_data;
    std::vector<tomocal::FanBeamDetections> fanbeam_data;
    try {
        geometry = parse_geometry(args.geometry);
        if (geometry == Geometry::Parallel) {
            parallel_data = io::load_parallel_projections(args.input);
        } else {
            if (!args.d_given || !args.l_given || !args.k_given) {
                throw CalibError(ErrorCode::InvalidArgument,
                                 "fan-beam calibration needs --D, --L, --k1, --k2, --k3 "
                                 "(the rig construction constants)");
            }
            fanbeam_data = io::load_fanbeam_projections(args.input);
        }
    } catch (const CalibError& e) {
        return emit_error(2, e);
    }

    try {
        json result;
        if (geometry == Geometry::Parallel) {
            for (std::size_t i = 1; i < parallel_data.size(); ++i) {
                if (parallel_data[i].h.positions.size() !=
                        parallel_data[0].h.positions.size() ||
                    parallel_data[i].v.positions.size() !=
                        parallel_data[0].v.positions.size()) {
                    throw CalibError(
                        ErrorCode::InvalidArgument,
                        fmt::format("view {} has {}+{} markers, view 0 has {}+{}", i,
                                    parallel_data[i].h.positions.size(),
                                    parallel_data[i].v.positions.size(),
                                    parallel_data[0].h.positions.size(),
                                    parallel_data[0].v.positions.size()),
                        static_cast<int>(i));
                }
            }
            const tomocal::Branch branch =
                args.branch == "II" ? tomocal::Branch::II : tomocal::Branch::I;
            tomocal::ParallelCalibOptions options;
            options.scan_view_pairs = true;
            tomocal::ParallelCalibResult r =
                tomocal::calibrate_parallel(parallel_data, branch, options);

            tomocal::GroupMoments h = tomocal::group_moments(parallel_data, tomocal::MarkerGroup::H);
            tomocal::GroupMoments v = tomocal::group_moments(parallel_data, tomocal::MarkerGroup::V);
            double max_dev = 0.0;
            for (double d : r.unit_circle_deviation) max_dev = std::max(max_dev, std::abs(d));

            result["geometry"] = "parallel";
            result["branch"] = args.branch;
            result["alpha0"] = r.alpha0;
            result["view_pair"] = json::array({r.view_pair.first, r.view_pair.second});
            result["coefficients"] = {{"a20", r.coefficients.a20},
                                      {"a02", r.coefficients.a02},
                                      {"a30", r.coefficients.a30},
                                      {"a03", r.coefficients.a03}};
            result["estimates"] = {{"angles", r.angles}, {"shifts", r.shifts_all}};
            result["diagnostics"] = {{"shifts_h", r.shifts_h},
                                     {"shifts_v", r.shifts_v},
                                     {"unit_circle_deviation", r.unit_circle_deviation},
                                     {"max_abs_unit_circle_deviation", max_dev}};
            result["intermediates"] = {
                {"m2_h", h.m2}, {"m3_h", h.m3}, {"m2_v", v.m2}, {"m3_v", v.m3}};
            result["note"] =
                "Angles carry a mirror ambiguity (branch II is pi minus branch I); shifts "
                "assume the all-marker centroid sits at the frame origin.";
        } else {
            tomocal::FanBeamCalibConfig config;
            config.D = args.D;
            config.L = args.L;
            config.k1 = args.k1;
            config.k2 = args.k2;
            config.k3 = args.k3;
            if (args.ref_given) config.reference_view = args.reference_view;
            tomocal::FanBeamCalibResult r = tomocal::calibrate_fanbeam(fanbeam_data, config);

            std::vector<double> dm_a, dm_b;
            for (std::size_t i = 0; i < fanbeam_data.size(); ++i) {
                dm_a.push_back(tomocal::delta_m1(fanbeam_data[i].a.positions,
                                                 fanbeam_data[0].a.positions));
                dm_b.push_back(tomocal::delta_m1(fanbeam_data[i].b.positions,
                                                 fanbeam_data[0].b.positions));
            }

            result["geometry"] = "fanbeam";
            result["config"] = {{"D", args.D},
                                {"L", args.L},
                                {"k1", args.k1},
                                {"k2", args.k2},
                                {"k3", args.k3}};
            result["estimates"] = {{"r_a", r.r_a},     {"r_b", r.r_b}, {"C_a", r.C_a},
                                   {"C_b", r.C_b},     {"p_a", r.p_a}, {"p_b", r.p_b},
                                   {"lambdas", r.lambdas}, {"jitters", r.jitters}};
            result["reference_view"] = r.reference_view;
            result["diagnostics"] = {{"delta_m1_a", dm_a}, {"delta_m1_b", dm_b}};
            result["note"] = r.frame_note;
        }

        io::write_json_file(args.out_path, result);
        json config_json = {{"geometry", args.geometry}, {"input", args.input},
                            {"branch", args.branch},     {"D", args.D},
                            {"L", args.L},               {"k1", args.k1},
                            {"k2", args.k2},             {"k3", args.k3}};
        if (args.ref_given) config_json["reference_view"] = args.reference_view;
        io::write_json_file(args.out_path + ".manifest.json",
                            manifest_base("calibrate", argv, config_json, {args.input},
                                          {args.out_path}));
        return 0;
    } catch (const CalibError& e) {
        return emit_error(3, e);
    }
}

// =============================================================== dcc-check

struct DccArgs {
    std::string geometry;
    std::string input;
    std::string views_path;
    int k_max = 3;
    bool subtract_view_means = false;
    std::string out_path;
};

json evenness_to_json(const tomocal::EvennessCheck& e) {
    return {{"testable", e.testable}, {"pair_count", e.pair_count},
            {"max_mismatch", e.max_mismatch}, {"pass", e.pass}, {"note", e.note}};
}

json report_to_json(const std::string& geometry, const tomocal::ConsistencyReport& report) {
    json orders = json::array();
    for (const auto& fit : report.orders) {
        orders.push_back({{"order", fit.order},
                          {"coefficients", fit.coefficients},
                          {"rms_residual", fit.rms_residual},
                          {"moment_scale", fit.moment_scale},
                          {"pass", fit.pass}});
    }
    json j;
    j["geometry"] = geometry;
    j["k_max"] = report.k_max;
    j["orders"] = orders;
    j["all_pass"] = report.all_pass;
    j["localization_order"] = report.localization_order;
    j["loo_residuals"] = report.loo_residuals;
    if (report.flagged_view) {
        j["flagged_view"] = *report.flagged_view;
    } else {
        j["flagged_view"] = nullptr;
    }
    j["evenness"] = evenness_to_json(report.evenness);
    j["note"] = report.note;
    return j;
}

int run_dcc_check(const DccArgs& args, const std::vector<std::string>& argv) {
    namespace io = tomocal::io;
    try {
        const Geometry geometry = parse_geometry(args.geometry);
        tomocal::ConsistencyReport report;
        if (geometry == Geometry::Parallel) {
            auto data = io::load_parallel_projections(args.input);
            auto views = io::parallel_views_from_json(io::read_json_file(args.views_path));
            if (views.size() != data.size()) {
                throw CalibError(ErrorCode::InvalidArgument,
                                 fmt::format("{} views in the projection file, {} in the "
                                             "view list",
                                             data.size(), views.size()));
            }
            std::vector<tomocal::ParallelDccView> dcc_views(data.size());
            for (std::size_t i = 0; i < data.size(); ++i) {
                dcc_views[i].alpha = views[i].alpha;
                auto& pos = dcc_views[i].positions;
                pos.insert(pos.end(), data[i].h.positions.begin(), data[i].h.positions.end());
                pos.insert(pos.end(), data[i].v.positions.begin(), data[i].v.positions.end());
                if (args.subtract_view_means && !pos.empty()) {
                    double mean = 0.0;
                    for (double p : pos) mean += p;
                    mean /= static_cast<double>(pos.size());
                    for (double& p : pos) p -= mean;
                }
            }
            report = tomocal::parallel_moment_consistency(dcc_views, args.k_max);
        } else {
            auto data = io::load_fanbeam_projections(args.input);
            auto views = io::fanbeam_views_from_json(io::read_json_file(args.views_path));
            if (views.size() != data.size()) {
                throw CalibError(ErrorCode::InvalidArgument,
                                 fmt::format("{} views in the projection file, {} in the "
                                             "view list",
                                             data.size(), views.size()));
            }
            std::vector<tomocal::FanBeamDccView> dcc_views(data.size());
            for (std::size_t i = 0; i < data.size(); ++i) {
                if (data[i].a.weights.size() != data[i].a.positions.size() ||
                    data[i].b.weights.size() != data[i].b.positions.size()) {
                    throw CalibError(ErrorCode::InvalidArgument,
                                     "fan-beam consistency checking needs the weight column",
                                     static_cast<int>(i));
                }
                dcc_views[i].lambda = views[i].lambda;
                auto& v = dcc_views[i];
                v.positions.insert(v.positions.end(), data[i].a.positions.begin(),
                                   data[i].a.positions.end());
                v.positions.insert(v.positions.end(), data[i].b.positions.begin(),
                                   data[i].b.positions.end());
                v.weights.insert(v.weights.end(), data[i].a.weights.begin(),
                                 data[i].a.weights.end());
                v.weights.insert(v.weights.end(), data[i].b.weights.begin(),
                                 data[i].b.weights.end());
            }
            report = tomocal::fanbeam_moment_consistency(dcc_views, args.k_max);
        }

        io::write_json_file(args.out_path, report_to_json(args.geometry, report));
        json config_json = {{"geometry", args.geometry},
                            {"input", args.input},
                            {"views", args.views_path},
                            {"k_max", args.k_max},
                            {"subtract_view_means", args.subtract_view_means}};
        io::write_json_file(args.out_path + ".manifest.json",
                            manifest_base("dcc-check", argv, config_json,
                                          {args.input, args.views_path}, {args.out_path}));
        return report.all_pass ? 0 : 5;
    } catch (const CalibError& e) {
        return emit_error(2, e);
    }
}

// ============================================================== experiment

struct ExperimentArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

int run_experiment_cmd(const ExperimentArgs& args, const std::vector<std::string>& argv) {
    namespace io = tomocal::io;
    tomocal::ExperimentConfig config;
    try {
        config = io::experiment_config_from_json(io::read_json_file(args.config_path));
        if (args.seed_given) {
            config.seed = args.seed;
        } else if (auto env = seed_from_env()) {
            config.seed = *env;
        }
        io::RigFile rig;
        rig.geometry = config.geometry;
        rig.parallel = config.parallel_rig;
        rig.fanbeam = config.fanbeam_rig;
        require_valid_rig(rig);
        std::filesystem::create_directories(args.out_dir);
    } catch (const CalibError& e) {
        return emit_error(2, e);
    } catch (const std::filesystem::filesystem_error& e) {
        return emit_error(2, CalibError(ErrorCode::IoError, e.what()));
    }

    const std::filesystem::path out_dir(args.out_dir);
    try {
        tomocal::ExperimentTable table;
        {
            std::ofstream logs(out_dir / "logs.jsonl", std::ios::binary | std::ios::trunc);
            if (!logs) {
                throw CalibError(ErrorCode::IoError,
                                 (out_dir / "logs.jsonl").string() + ": cannot open");
            }
            std::vector<std::string> names;
            auto observer = [&](const tomocal::RealizationRecord& record) {
                json line;
                line["level_index"] = record.level_index;
                line["noise_level"] = record.noise_level;
                line["realization"] = record.realization;
                line["ok"] = record.ok;
                if (record.ok) {
                    for (std::size_t m = 0; m < record.metrics.size(); ++m) {
                        line[names[m]] = record.metrics[m];
                    }
                } else {
                    line["error"] = record.error;
                }
                logs << line.dump() << "\n";
            };
            names = config.geometry == Geometry::Parallel
                        ? std::vector<std::string>{"ErrS", "ErrA_I", "ErrA_II"}
                        : std::vector<std::string>{"ErrLambda", "ErrY", "ErrP", "ErrC"};
            table = tomocal::run_experiment(config, observer);
        }

        std::string summary = "noise_level,noise_std_cm";
        for (const auto& name : table.metric_names) summary += "," + name;
        summary += ",failed_realizations\n";
        for (const auto& row : table.rows) {
            summary += fmt::format("{},{}", io::format_double(row.noise_level),
                                   io::format_double(row.noise_std));
            for (double metric : row.metrics) summary += "," + io::format_double(metric);
            summary += fmt::format(",{}\n", row.failed_realizations);
        }
        io::write_text_file(out_dir / "summary.csv", summary);

        std::string plot = "noise_level,metric,value\n";
        for (const auto& row : table.rows) {
            for (std::size_t m = 0; m < table.metric_names.size(); ++m) {
                plot += fmt::format("{},{},{}\n", io::format_double(row.noise_level),
                                    table.metric_names[m], io::format_double(row.metrics[m]));
            }
        }
        io::write_text_file(out_dir / "plot.csv", plot);

        json manifest = manifest_base("experiment", argv,
                                      io::experiment_config_to_json(config),
                                      {args.config_path},
                                      {(out_dir / "summary.csv").string(),
                                       (out_dir / "plot.csv").string(),
                                       (out_dir / "logs.jsonl").string()});
        manifest["seed"] = config.seed;
        io::write_json_file(out_dir / "manifest.json", manifest);

        for (const auto& row : table.rows) {
            if (row.failed_realizations == row.realizations) return 4;
        }
        return 0;
    } catch (const CalibError& e) {
        return emit_error(2, e);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Marker-rig projection simulation, per-view geometric calibration, "
                 "data-consistency checking and Monte-Carlo error tables for 2D "
                 "parallel and fan-beam scans."};
    app.require_subcommand(1);
    app.set_version_flag("--version", tomocal::io::kToolkitVersion);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Project a marker rig into per-view detector positions (CSV)");
    simulate->add_option("--rig", sim.rig_path, "Rig JSON file")->required();
    simulate->add_option("--geometry", sim.geometry, "parallel or fanbeam (cross-check)")
        ->check(CLI::IsMember({"parallel", "fanbeam"}));
    auto* sim_views = simulate->add_option("--views", sim.views_path,
                                           "View list JSON (explicit truth)");
    auto* sim_random = simulate->add_option("--random-views", sim.random_views,
                                            "Sample this many views instead");
    auto* sim_seed = simulate->add_option("--seed", sim.seed, "Seed for --random-views");
    sim_views->excludes(sim_random);
    sim_random->excludes(sim_views);
    sim_seed->needs(sim_random);
    simulate->add_option("--out", sim.out_path, "Output CSV path")->required();

    CalibrateArgs cal;
    CLI::App* calibrate = app.add_subcommand(
        "calibrate", "Recover per-view geometry from a projection CSV");
    calibrate->add_option("--geometry", cal.geometry, "parallel or fanbeam")
        ->required()
        ->check(CLI::IsMember({"parallel", "fanbeam"}));
    calibrate->add_option("--input", cal.input, "Projection CSV")->required();
    calibrate->add_option("--branch", cal.branch, "Angle branch, I or II (parallel)")
        ->check(CLI::IsMember({"I", "II"}));
    calibrate->add_option("--D", cal.D, "Source-line distance (fan-beam)");
    calibrate->add_option("--L", cal.L, "Pattern length unit (fan-beam)");
    calibrate->add_option("--k1", cal.k1, "Line-a pattern multiple (fan-beam)");
    calibrate->add_option("--k2", cal.k2, "Line-b inner multiple (fan-beam)");
    calibrate->add_option("--k3", cal.k3, "Line-b outer multiple (fan-beam)");
    calibrate->add_option("--reference-view", cal.reference_view,
                          "Reference view for the magnification solve (fan-beam)");
    calibrate->add_option("--out", cal.out_path, "Result JSON path")->required();

    DccArgs dcc;
    CLI::App* dcc_check = app.add_subcommand(
        "dcc-check", "Test projection moments against the geometry's polynomial laws");
    dcc_check->add_option("--geometry", dcc.geometry, "parallel or fanbeam")
        ->required()
        ->check(CLI::IsMember({"parallel", "fanbeam"}));
    dcc_check->add_option("--input", dcc.input, "Projection CSV")->required();
    dcc_check->add_option("--views", dcc.views_path, "View list JSON (angles or lambdas)")
        ->required();
    dcc_check->add_option("--k-max", dcc.k_max, "Highest moment order (default 3)")
        ->check(CLI::NonNegativeNumber);
    dcc_check->add_flag("--subtract-view-means", dcc.subtract_view_means,
                        "Remove each view's mean position first (also removes any "
                        "constant corruption)");
    dcc_check->add_option("--out", dcc.out_path, "Report JSON path")->required();

    ExperimentArgs exp;
    CLI::App* experiment = app.add_subcommand(
        "experiment", "Monte-Carlo noise table: simulate, perturb, calibrate, aggregate");
    experiment->add_option("--config", exp.config_path, "Experiment config JSON")->required();
    experiment->add_option("--out-dir", exp.out_dir, "Output directory")->required();
    experiment->add_option("--seed", exp.seed,
                           "Override the config seed (flag beats TOMOCAL_SEED beats config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return emit_error(2, CalibError(ErrorCode::InvalidArgument, e.what()));
    }

    sim.seed_given = sim_seed->count() > 0;
    cal.d_given = calibrate->count("--D") > 0;
    cal.l_given = calibrate->count("--L") > 0;
    cal.k_given = calibrate->count("--k1") > 0 && calibrate->count("--k2") > 0 &&
                  calibrate->count("--k3") > 0;
    cal.ref_given = calibrate->count("--reference-view") > 0;
    exp.seed_given = experiment->count("--seed") > 0;

    std::vector<std::string> argv_vec(argv, argv + argc);
    if (simulate->parsed()) return run_simulate(sim, argv_vec);
    if (calibrate->parsed()) return run_calibrate(cal, argv_vec);
    if (dcc_check->parsed()) return run_dcc_check(dcc, argv_vec);
    if (experiment->parsed()) return run_experiment_cmd(exp, argv_vec);
    return 2;
}
