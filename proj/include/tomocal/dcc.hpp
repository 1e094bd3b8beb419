#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tomocal {

// One view of parallel-beam Dirac data: the angle and the detector
// positions of every marker seen in that view.
struct ParallelDccView {
    double alpha = 0.0;
    std::vector<double> positions;
};

// One view of fan-beam Dirac data. Weights are required: the moment law
// being tested is about the weighted comb produced by the projector.
struct FanBeamDccView {
    double lambda = 0.0;
    std::vector<double> positions;
    std::vector<double> weights;
};

struct LeastSquaresFit {
    std::vector<double> coefficients;
    double rms_residual = 0.0;
};

// Least-squares fit of ys against an arbitrary design matrix given as
// rows (one row per observation). Throws RankDeficient when the design
// matrix does not have full column rank.
LeastSquaresFit basis_fit(const std::vector<std::vector<double>>& rows,
                          std::span<const double> ys);

// Convenience wrapper: fit ys as a polynomial of the given degree in xs.
LeastSquaresFit polynomial_fit(std::span<const double> xs,
                               std::span<const double> ys, int degree);

struct OrderFitResult {
    int order = 0;
    std::vector<double> coefficients;
    double rms_residual = 0.0;
    double moment_scale = 0.0;  // RMS of the moment values being fitted
    bool pass = false;
};

// Result of the paired-view symmetry test: views whose angles differ by
// pi must show mirrored marker positions. Only meaningful when such
// pairs exist in the data.
struct EvennessCheck {
    bool testable = false;
    int pair_count = 0;
    double max_mismatch = 0.0;
    bool pass = true;
    std::string note;
};

struct ConsistencyReport {
    int k_max = 0;
    std::vector<OrderFitResult> orders;
    bool all_pass = false;

    // Leave-one-out diagnostics at `localization_order` (the smallest
    // failing order, or k_max when everything passes). When some order
    // fails, `flagged_view` is the view whose removal shrinks the
    // residual the most.
    int localization_order = 0;
    std::vector<double> loo_residuals;
    std::optional<int> flagged_view;

    EvennessCheck evenness;  // parallel only; untestable for fan-beam
    std::string note;
};

// Checks that the order-k position moments, view by view, stay on the
// span of {cos^(k-j)(alpha) sin^j(alpha)} for every k <= k_max. Passing
// does not certify the data (the conditions are necessary, not
// sufficient); failing proves inconsistency.
ConsistencyReport parallel_moment_consistency(
    std::span<const ParallelDccView> views, int k_max);

// Same idea for fan-beam data: the weighted order-k moments must follow
// a polynomial of degree <= k in the source parameter lambda.
ConsistencyReport fanbeam_moment_consistency(
    std::span<const FanBeamDccView> views, int k_max);

}  // namespace tomocal
