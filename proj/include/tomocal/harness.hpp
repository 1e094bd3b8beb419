#pragma once

/// @file
/// Monte-Carlo experiment runner: seeded scenario sampling, Gaussian
/// detection noise, per-realization error metrics, and per-noise-level
/// summary tables for both geometries.
///
/// Reproducibility. The scenario (rig placement, view parameters) is
/// sampled once per experiment from the seed and held fixed across noise
/// levels, so levels stay comparable; only the noise is redrawn. Every
/// noise deviate comes from its own counter-based stream keyed by
/// (seed, level, realization, view, group, marker), which makes the run
/// independent of evaluation order.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tomocal/fanbeam_calib.hpp"
#include "tomocal/fanbeam_sim.hpp"
#include "tomocal/geometry.hpp"
#include "tomocal/parallel_calib.hpp"
#include "tomocal/parallel_sim.hpp"

namespace tomocal {

enum class Geometry { Parallel, FanBeam };

const char* to_string(Geometry g);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

inline constexpr std::uint64_t kDefaultExperimentSeed = 45;

struct ExperimentConfig {
    Geometry geometry = Geometry::Parallel;
    ParallelRig parallel_rig;  ///< used when geometry == Parallel
    FanBeamRig fanbeam_rig;    ///< used when geometry == FanBeam
    int view_count = 80;
    /// Sampled angles keep this distance from {0, pi/2, pi}.
    double angle_margin = 1e-3;
    Interval shift_range{-0.05, 0.05};
    Interval lambda_range{-5.0, 5.0};
    Interval jitter_range{-0.05, 0.05};
    /// Noise standard deviation is level * pixel_size.
    std::vector<double> noise_levels{0.0, 0.1, 0.5, 1.0, 2.0};
    double pixel_size = 0.01;
    int n_realizations = 100;
    std::uint64_t seed = kDefaultExperimentSeed;
    /// Draw a fresh scenario per realization (shared across levels)
    /// instead of one scenario per experiment.
    bool resample_scenario = false;
};

// ================================================================ sampling

/// Stateless 64-bit mixer used to derive independent noise streams.
std::uint64_t splitmix64(std::uint64_t x);

/// Uniform draw on [0, 1) from the generator's top 53 bits.
double uniform_unit(std::mt19937_64& rng);

/// The configured rig re-centered on its all-marker centroid (so the mean
/// detector position of a view estimates the shift exactly), plus sampled
/// views: the first half of the angles in (0, pi/2), the rest in
/// (pi/2, pi), all away from the axes by the margin; shifts uniform.
struct ParallelScenario {
    ParallelRig rig;
    std::vector<ParallelView> views;
};

ParallelScenario sample_parallel_scenario(const ExperimentConfig& config, std::mt19937_64& rng);

/// Source ordinates and jitters sampled uniformly; the rig is used as
/// configured.
struct FanBeamScenario {
    FanBeamRig rig;
    std::vector<FanBeamView> views;
};

FanBeamScenario sample_fanbeam_scenario(const ExperimentConfig& config, std::mt19937_64& rng);

/// Adds independent N(0, noise_level * pixel_size) to every position.
/// Level zero leaves the values bit-identical. The Gaussian is produced by
/// Box-Muller on raw 64-bit draws, so any standard library reproduces it.
void add_detection_noise(std::span<double> positions, double noise_level, double pixel_size,
                         std::mt19937_64& rng);

// ================================================================== errors

/// Distance between two angles on the circle, in [0, pi].
double circular_abs_diff(double a, double b);

/// Mean absolute errors of one parallel realization: shifts against truth,
/// branch-I angles against the true angles, branch-II angles against their
/// mirror images pi - alpha. Angle differences are circular.
struct ParallelRealizationErrors {
    double err_s = 0.0;
    double err_a_branch_i = 0.0;
    double err_a_branch_ii = 0.0;
};

ParallelRealizationErrors parallel_realization_errors(const ParallelCalibResult& branch_i,
                                                      const ParallelCalibResult& branch_ii,
                                                      std::span<const ParallelView> truth);

/// Mean absolute errors of one fan-beam realization, with the truth mapped
/// into the solver frame first: lambda and jitter relative to view 0, and
/// pattern centers sheared by the true view-0 parameters.
struct FanBeamRealizationErrors {
    double err_lambda = 0.0;
    double err_jitter = 0.0;  ///< ErrY
    double err_center = 0.0;  ///< ErrP, pattern centers
    double err_depth = 0.0;   ///< ErrC, line depths
};

FanBeamRealizationErrors fanbeam_realization_errors(const FanBeamCalibResult& result,
                                                    const FanBeamRig& rig,
                                                    std::span<const FanBeamView> truth);

// ============================================================== experiment

struct LevelSummary {
    double noise_level = 0.0;
    double noise_std = 0.0;
    /// Aligned with ExperimentTable::metric_names; NaN when every
    /// realization of the level failed.
    std::vector<double> metrics;
    int failed_realizations = 0;
    int realizations = 0;
};

struct RealizationRecord {
    int level_index = 0;
    double noise_level = 0.0;
    int realization = 0;
    bool ok = true;
    std::string error;            ///< failure reason when !ok
    std::vector<double> metrics;  ///< empty when !ok
};

using RealizationObserver = std::function<void(const RealizationRecord&)>;

struct ExperimentTable {
    Geometry geometry = Geometry::Parallel;
    std::vector<std::string> metric_names;
    std::vector<LevelSummary> rows;
};

/// Runs the configured Monte-Carlo experiment. Solver failures at high
/// noise are excluded from the means and counted per level. The observer,
/// when given, sees every realization in deterministic order.
ExperimentTable run_experiment(const ExperimentConfig& config,
                               const RealizationObserver& observer = {});

}  // namespace tomocal
