#include "tomocal/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tomocal/errors.hpp"

namespace tomocal {

namespace {

constexpr std::uint64_t kScenarioTag = 0x5343454eULL;  // "SCEN"
constexpr std::uint64_t kNoiseTag = 0x4e4f4953ULL;     // "NOIS"

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    return splitmix64(h ^ (v * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL));
}

// One standard normal deviate from a stream key, via Box-Muller on the two
// next mixer outputs. u1 is pushed into (0, 1] so the log stays finite.
double gaussian_at(std::uint64_t key) {
    const std::uint64_t a = splitmix64(key);
    const std::uint64_t b = splitmix64(a);
    const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double uniform_on(Interval range, std::mt19937_64& rng) {
    return range.lo + (range.hi - range.lo) * uniform_unit(rng);
}

void validate_config(const ExperimentConfig& config) {
    if (config.view_count < 2) {
        throw CalibError(ErrorCode::InvalidArgument,
                         "experiment config: need at least two views");
    }
    if (!(config.pixel_size > 0.0)) {
        throw CalibError(ErrorCode::InvalidArgument,
                         "experiment config: pixel_size must be positive");
    }
    if (config.n_realizations < 1) {
        throw CalibError(ErrorCode::InvalidArgument,
                         "experiment config: need at least one realization");
    }
    for (double level : config.noise_levels) {
        if (!(level >= 0.0)) {
            throw CalibError(ErrorCode::InvalidArgument,
                             "experiment config: noise levels must be >= 0");
        }
    }
}

std::mt19937_64 scenario_rng(const ExperimentConfig& config, int realization) {
    std::uint64_t h = mix(splitmix64(config.seed), kScenarioTag);
    if (config.resample_scenario) h = mix(h, static_cast<std::uint64_t>(realization));
    return std::mt19937_64(h);
}

std::uint64_t noise_key(std::uint64_t seed, int level_index, int realization, int view,
                        MarkerGroup group, std::size_t marker) {
    std::uint64_t h = mix(splitmix64(seed), kNoiseTag);
    h = mix(h, static_cast<std::uint64_t>(level_index));
    h = mix(h, static_cast<std::uint64_t>(realization));
    h = mix(h, static_cast<std::uint64_t>(view));
    h = mix(h, static_cast<std::uint64_t>(group));
    return mix(h, static_cast<std::uint64_t>(marker));
}

void perturb_group(DiracProjection& proj, double sigma, std::uint64_t seed, int level_index,
                   int realization) {
    for (std::size_t j = 0; j < proj.positions.size(); ++j) {
        const std::uint64_t key =
            noise_key(seed, level_index, realization, proj.view_index, proj.group, j);
        proj.positions[j] += sigma * gaussian_at(key);
    }
}

struct RealizationOutcome {
    bool ok = true;
    std::string error;
    std::vector<double> metrics;
};

// Shared level/realization loop. `realize(level_index, realization, sigma)`
// simulates, perturbs and solves one realization.
template <typename RealizeFn>
ExperimentTable run_levels(const ExperimentConfig& config, Geometry geometry,
                           std::vector<std::string> metric_names, RealizeFn realize,
                           const RealizationObserver& observer) {
    ExperimentTable table;
    table.geometry = geometry;
    table.metric_names = std::move(metric_names);

    for (std::size_t level_index = 0; level_index < config.noise_levels.size(); ++level_index) {
        const double level = config.noise_levels[level_index];
        const double sigma = level * config.pixel_size;

        LevelSummary row;
        row.noise_level = level;
        row.noise_std = sigma;
        row.realizations = config.n_realizations;
        std::vector<double> sums(table.metric_names.size(), 0.0);
        int included = 0;

        for (int k = 0; k < config.n_realizations; ++k) {
            RealizationOutcome outcome = realize(static_cast<int>(level_index), k, sigma);
            if (outcome.ok) {
                for (std::size_t m = 0; m < sums.size(); ++m) sums[m] += outcome.metrics[m];
                included += 1;
            } else {
                row.failed_realizations += 1;
            }
            if (observer) {
                RealizationRecord record;
                record.level_index = static_cast<int>(level_index);
                record.noise_level = level;
                record.realization = k;
                record.ok = outcome.ok;
                record.error = std::move(outcome.error);
                record.metrics = std::move(outcome.metrics);
                observer(record);
            }
        }

        row.metrics.resize(sums.size());
        for (std::size_t m = 0; m < sums.size(); ++m) {
            row.metrics[m] = included > 0 ? sums[m] / included
                                          : std::numeric_limits<double>::quiet_NaN();
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

ExperimentTable run_parallel(const ExperimentConfig& config, const RealizationObserver& observer) {
    auto rng = scenario_rng(config, 0);
    ParallelScenario base = sample_parallel_scenario(config, rng);
    std::vector<ParallelDetections> base_clean = project_rig_parallel(base.rig, base.views);

    auto realize = [&](int level_index, int k, double sigma) {
        RealizationOutcome outcome;
        const ParallelScenario* scenario = &base;
        std::vector<ParallelDetections> clean;
        ParallelScenario resampled;
        if (config.resample_scenario) {
            auto rng_k = scenario_rng(config, k);
            resampled = sample_parallel_scenario(config, rng_k);
            clean = project_rig_parallel(resampled.rig, resampled.views);
            scenario = &resampled;
        } else {
            clean = base_clean;
        }

        if (sigma > 0.0) {
            for (auto& view : clean) {
                perturb_group(view.h, sigma, config.seed, level_index, k);
                perturb_group(view.v, sigma, config.seed, level_index, k);
            }
        }

        try {
            ParallelCalibResult branch_i = calibrate_parallel(clean, Branch::I);
            ParallelCalibResult branch_ii = calibrate_parallel(clean, Branch::II);
            ParallelRealizationErrors errors =
                parallel_realization_errors(branch_i, branch_ii, scenario->views);
            outcome.metrics = {errors.err_s, errors.err_a_branch_i, errors.err_a_branch_ii};
        } catch (const CalibError& e) {
            outcome.ok = false;
            outcome.error = e.what();
        }
        return outcome;
    };

    return run_levels(config, Geometry::Parallel, {"ErrS", "ErrA_I", "ErrA_II"}, realize,
                      observer);
}

ExperimentTable run_fanbeam(const ExperimentConfig& config, const RealizationObserver& observer) {
    auto rng = scenario_rng(config, 0);
    FanBeamScenario base = sample_fanbeam_scenario(config, rng);
    std::vector<FanBeamDetections> base_clean = project_rig_fanbeam(base.rig, base.views);

    FanBeamCalibConfig calib;
    calib.D = config.fanbeam_rig.D;
    calib.L = config.fanbeam_rig.L;
    calib.k1 = config.fanbeam_rig.k1;
    calib.k2 = config.fanbeam_rig.k2;
    calib.k3 = config.fanbeam_rig.k3;

    auto realize = [&](int level_index, int k, double sigma) {
        RealizationOutcome outcome;
        const FanBeamScenario* scenario = &base;
        std::vector<FanBeamDetections> clean;
        FanBeamScenario resampled;
        if (config.resample_scenario) {
            auto rng_k = scenario_rng(config, k);
            resampled = sample_fanbeam_scenario(config, rng_k);
            clean = project_rig_fanbeam(resampled.rig, resampled.views);
            scenario = &resampled;
        } else {
            clean = base_clean;
        }

        if (sigma > 0.0) {
            for (auto& view : clean) {
                perturb_group(view.a, sigma, config.seed, level_index, k);
                perturb_group(view.b, sigma, config.seed, level_index, k);
            }
        }

        try {
            FanBeamCalibResult result = calibrate_fanbeam(clean, calib);
            FanBeamRealizationErrors errors =
                fanbeam_realization_errors(result, scenario->rig, scenario->views);
            outcome.metrics = {errors.err_lambda, errors.err_jitter, errors.err_center,
                               errors.err_depth};
        } catch (const CalibError& e) {
            outcome.ok = false;
            outcome.error = e.what();
        }
        return outcome;
    };

    return run_levels(config, Geometry::FanBeam, {"ErrLambda", "ErrY", "ErrP", "ErrC"}, realize,
                      observer);
}

}  // namespace

const char* to_string(Geometry g) {
    return g == Geometry::Parallel ? "parallel" : "fanbeam";
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

ParallelScenario sample_parallel_scenario(const ExperimentConfig& config, std::mt19937_64& rng) {
    validate_config(config);
    ParallelScenario scenario;
    scenario.rig = config.parallel_rig;

    // Center the rig on the all-marker centroid; the per-view mean of the
    // detector positions then equals the shift, which is what the
    // calibration reports.
    Point2 centroid{};
    const auto total = static_cast<double>(scenario.rig.h_markers.size() +
                                           scenario.rig.v_markers.size());
    for (Point2 p : scenario.rig.h_markers) centroid = centroid + p;
    for (Point2 p : scenario.rig.v_markers) centroid = centroid + p;
    centroid = (1.0 / total) * centroid;
    for (Point2& p : scenario.rig.h_markers) p = p - centroid;
    for (Point2& p : scenario.rig.v_markers) p = p - centroid;

    const double half_pi = std::numbers::pi / 2.0;
    const int first_half = config.view_count - config.view_count / 2;
    scenario.views.resize(config.view_count);
    for (int i = 0; i < config.view_count; ++i) {
        const double lo = i < first_half ? 0.0 : half_pi;
        const double hi = lo + half_pi;
        double alpha = 0.0;
        do {
            alpha = lo + half_pi * uniform_unit(rng);
        } while (alpha - lo < config.angle_margin || hi - alpha < config.angle_margin);
        scenario.views[i].alpha = alpha;
    }
    for (int i = 0; i < config.view_count; ++i) {
        scenario.views[i].shift = uniform_on(config.shift_range, rng);
    }
    return scenario;
}

FanBeamScenario sample_fanbeam_scenario(const ExperimentConfig& config, std::mt19937_64& rng) {
    validate_config(config);
    FanBeamScenario scenario;
    scenario.rig = config.fanbeam_rig;
    scenario.views.resize(config.view_count);
    for (auto& view : scenario.views) view.lambda = uniform_on(config.lambda_range, rng);
    for (auto& view : scenario.views) view.jitter = uniform_on(config.jitter_range, rng);
    return scenario;
}

void add_detection_noise(std::span<double> positions, double noise_level, double pixel_size,
                         std::mt19937_64& rng) {
    if (noise_level < 0.0) {
        throw CalibError(ErrorCode::InvalidArgument,
                         "add_detection_noise: noise level must be >= 0");
    }
    const double sigma = noise_level * pixel_size;
    if (sigma == 0.0) return;
    for (double& p : positions) {
        const std::uint64_t a = rng();
        const std::uint64_t b = rng();
        const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
        p += sigma * std::sqrt(-2.0 * std::log(u1)) *
             std::cos(2.0 * std::numbers::pi * u2);
    }
}

double circular_abs_diff(double a, double b) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double d = std::fmod(std::abs(a - b), two_pi);
    return std::min(d, two_pi - d);
}

ParallelRealizationErrors parallel_realization_errors(const ParallelCalibResult& branch_i,
                                                      const ParallelCalibResult& branch_ii,
                                                      std::span<const ParallelView> truth) {
    const std::size_t count = truth.size();
    if (branch_i.angles.size() != count || branch_ii.angles.size() != count ||
        branch_i.shifts_all.size() != count) {
        throw CalibError(ErrorCode::InvalidArgument,
                         "parallel_realization_errors: estimate/truth sizes differ");
    }
    ParallelRealizationErrors errors;
    for (std::size_t i = 0; i < count; ++i) {
        errors.err_s += std::abs(branch_i.shifts_all[i] - truth[i].shift);
        errors.err_a_branch_i += circular_abs_diff(branch_i.angles[i], truth[i].alpha);
        errors.err_a_branch_ii +=
            circular_abs_diff(branch_ii.angles[i], std::numbers::pi - truth[i].alpha);
    }
    const auto n = static_cast<double>(count);
    errors.err_s /= n;
    errors.err_a_branch_i /= n;
    errors.err_a_branch_ii /= n;
    return errors;
}

FanBeamRealizationErrors fanbeam_realization_errors(const FanBeamCalibResult& result,
                                                    const FanBeamRig& rig,
                                                    std::span<const FanBeamView> truth) {
    const std::size_t count = truth.size();
    if (result.lambdas.size() != count || result.jitters.size() != count || count == 0) {
        throw CalibError(ErrorCode::InvalidArgument,
                         "fanbeam_realization_errors: estimate/truth sizes differ");
    }
    const double lambda0 = truth[0].lambda;
    const double jitter0 = truth[0].jitter;

    FanBeamRealizationErrors errors;
    for (std::size_t i = 0; i < count; ++i) {
        errors.err_lambda += std::abs(result.lambdas[i] - (truth[i].lambda - lambda0));
        errors.err_jitter += std::abs(result.jitters[i] - (truth[i].jitter - jitter0));
    }
    const auto n = static_cast<double>(count);
    errors.err_lambda /= n;
    errors.err_jitter /= n;

    errors.err_depth = 0.5 * (std::abs(result.C_a - rig.C_a) + std::abs(result.C_b - rig.C_b));
    const double p_a_truth = sheared_ordinate(rig.p_a, rig.C_a, rig.D, lambda0, jitter0);
    const double p_b_truth = sheared_ordinate(rig.p_b, rig.C_b, rig.D, lambda0, jitter0);
    errors.err_center =
        0.5 * (std::abs(result.p_a - p_a_truth) + std::abs(result.p_b - p_b_truth));
    return errors;
}

ExperimentTable run_experiment(const ExperimentConfig& config,
                               const RealizationObserver& observer) {
    validate_config(config);
    if (config.geometry == Geometry::Parallel) return run_parallel(config, observer);
    return run_fanbeam(config, observer);
}

}  // namespace tomocal
