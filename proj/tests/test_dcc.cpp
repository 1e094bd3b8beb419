#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tomocal/dcc.hpp"
#include "tomocal/errors.hpp"
#include "tomocal/fanbeam_sim.hpp"
#include "tomocal/geometry.hpp"
#include "tomocal/parallel_sim.hpp"

using namespace tomocal;

namespace {

constexpr double kPi = 3.14159265358979323846;

ParallelRig parallel_rig() {
    return {{{-2.4, 0.0}, {0.4, 0.0}, {2.3, 0.0}},
            {{-0.1, -2.5}, {-0.1, 0.5}, {-0.1, 2.0}}};
}

FanBeamRig fanbeam_rig() {
    return {10.0, 1.5, 0.0, 0.5, 3.2, 0.4, 3.0, 1.0, 2.0};
}

std::vector<ParallelDccView> parallel_views(const std::vector<double>& alphas, double shift) {
    const auto rig = parallel_rig();
    std::vector<ParallelDccView> out;
    for (double alpha : alphas) {
        const auto det = project_markers_parallel(rig, {alpha, shift});
        ParallelDccView view;
        view.alpha = alpha;
        view.positions = det.h.positions;
        view.positions.insert(view.positions.end(), det.v.positions.begin(),
                              det.v.positions.end());
        out.push_back(std::move(view));
    }
    return out;
}

std::vector<FanBeamDccView> fanbeam_views(const std::vector<double>& lambdas,
                                          const std::vector<double>& jitters) {
    const auto rig = fanbeam_rig();
    std::vector<FanBeamDccView> out;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const auto det = project_rig_fanbeam(rig, {lambdas[i], jitters[i]});
        FanBeamDccView view;
        view.lambda = lambdas[i];
        view.positions = det.a.positions;
        view.positions.insert(view.positions.end(), det.b.positions.begin(),
                              det.b.positions.end());
        view.weights = det.a.weights;
        view.weights.insert(view.weights.end(), det.b.weights.begin(), det.b.weights.end());
        out.push_back(std::move(view));
    }
    return out;
}

std::vector<double> random_alphas(int count, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.1, kPi - 0.1);
    std::vector<double> v(count);
    for (auto& a : v) a = u(rng);
    return v;
}

}  // namespace

TEST_CASE("polynomial fit basics") {
    const std::vector<double> xs{1.0, 2.0, 3.0};
    const std::vector<double> ys{1.0, 2.0, 3.0};
    const auto fit = polynomial_fit(xs, ys, 0);
    REQUIRE(fit.coefficients.size() == 1);
    CHECK(fit.coefficients[0] == doctest::Approx(2.0));
    CHECK(fit.rms_residual == doctest::Approx(std::sqrt(2.0 / 3.0)));

    const auto exact = polynomial_fit(xs, ys, 1);
    CHECK(exact.coefficients[0] == doctest::Approx(0.0));
    CHECK(exact.coefficients[1] == doctest::Approx(1.0));
    CHECK(exact.rms_residual < 1e-14);

    CHECK_THROWS_AS(polynomial_fit(xs, ys, -1), CalibError);
    CHECK_THROWS_AS(polynomial_fit(xs, ys, 3), CalibError);
}

TEST_CASE("basis fit solves and guards rank") {
    std::vector<std::vector<double>> rows;
    std::vector<double> ys;
    for (double x : {0.0, 1.0, 2.0, 3.0}) {
        rows.push_back({1.0, x, x * x});
        ys.push_back(2.0 - x + 0.5 * x * x);
    }
    const auto fit = basis_fit(rows, ys);
    CHECK(fit.coefficients[0] == doctest::Approx(2.0));
    CHECK(fit.coefficients[1] == doctest::Approx(-1.0));
    CHECK(fit.coefficients[2] == doctest::Approx(0.5));
    CHECK(fit.rms_residual < 1e-12);

    std::vector<std::vector<double>> degenerate;
    for (double x : {0.0, 1.0, 2.0, 3.0}) degenerate.push_back({x, x});
    CHECK_THROWS_AS(basis_fit(degenerate, ys), CalibError);
    try {
        basis_fit(degenerate, ys);
    } catch (const CalibError& e) {
        CHECK(e.code() == ErrorCode::RankDeficient);
    }

    const std::vector<std::vector<double>> wide{{1.0, 2.0, 3.0}};
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(basis_fit(wide, one), CalibError);
}

TEST_CASE("consistent parallel views pass every order") {
    std::mt19937_64 rng(3);
    const auto views = parallel_views(random_alphas(12, rng), 0.0);
    const auto report = parallel_moment_consistency(views, 3);
    CHECK(report.all_pass);
    REQUIRE(report.orders.size() == 4);
    for (const auto& o : report.orders) {
        CHECK(o.pass);
        CHECK(o.rms_residual < 1e-10);
    }
    CHECK(report.localization_order == 3);
    CHECK(!report.flagged_view.has_value());
    CHECK(!report.evenness.testable);
}

TEST_CASE("views half a turn apart mirror each other") {
    const std::vector<double> alphas{0.7, 0.7 + kPi, 1.3, 1.3 + kPi, 2.1, 2.1 + kPi};
    auto views = parallel_views(alphas, 0.0);
    auto report = parallel_moment_consistency(views, 2);
    CHECK(report.evenness.testable);
    CHECK(report.evenness.pair_count == 3);
    CHECK(report.evenness.pass);
    CHECK(report.evenness.max_mismatch < 1e-12);
    CHECK(report.all_pass);

    for (auto& p : views[2].positions) p += 0.05;
    report = parallel_moment_consistency(views, 2);
    CHECK(!report.all_pass);
    CHECK(!report.evenness.pass);
    CHECK(report.evenness.max_mismatch == doctest::Approx(0.05));
}

TEST_CASE("random per-view shifts violate the parallel law") {
    std::mt19937_64 rng(9);
    const auto alphas = random_alphas(15, rng);
    const auto rig = parallel_rig();
    std::uniform_real_distribution<double> su(-0.05, 0.05);

    std::vector<ParallelDccView> views;
    for (double alpha : alphas) {
        const auto det = project_markers_parallel(rig, {alpha, su(rng)});
        ParallelDccView v;
        v.alpha = alpha;
        v.positions = det.h.positions;
        v.positions.insert(v.positions.end(), det.v.positions.begin(), det.v.positions.end());
        views.push_back(std::move(v));
    }
    const auto raw = parallel_moment_consistency(views, 3);
    CHECK(!raw.all_pass);
    CHECK(raw.orders[0].pass);  // marker count is shift-free
    CHECK(!raw.orders[1].pass);

    // subtracting each view's mean removes the shifts and restores consistency
    auto centered = views;
    for (auto& v : centered) {
        double mean = 0.0;
        for (double p : v.positions) mean += p;
        mean /= static_cast<double>(v.positions.size());
        for (auto& p : v.positions) p -= mean;
    }
    CHECK(parallel_moment_consistency(centered, 3).all_pass);
}

TEST_CASE("a shifted parallel view is flagged by leave-one-out") {
    std::mt19937_64 rng(21);
    auto views = parallel_views(random_alphas(16, rng), 0.0);
    for (auto& p : views[7].positions) p += 0.05;

    const auto report = parallel_moment_consistency(views, 3);
    CHECK(!report.all_pass);
    CHECK(report.localization_order == 1);
    REQUIRE(report.flagged_view.has_value());
    CHECK(*report.flagged_view == 7);
    REQUIRE(report.loo_residuals.size() == views.size());
    CHECK(report.loo_residuals[7] < 1e-10);
}

TEST_CASE("consistent fan-beam views pass and expose the weight sum") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> lu(-5.0, 5.0);
    std::vector<double> lambdas(12);
    for (auto& l : lambdas) l = lu(rng);
    const std::vector<double> zero(lambdas.size(), 0.0);

    const auto report = fanbeam_moment_consistency(fanbeam_views(lambdas, zero), 3);
    CHECK(report.all_pass);
    for (const auto& o : report.orders) CHECK(o.rms_residual < 1e-10);

    // order-0 weighted moment: sum of weights 4/(D - C_a) + 4/(D - C_b)
    REQUIRE(!report.orders[0].coefficients.empty());
    CHECK(report.orders[0].coefficients[0] ==
          doctest::Approx(4.0 / 8.5 + 4.0 / 9.5).epsilon(1e-12));
    CHECK(!report.evenness.testable);
}

TEST_CASE("random jitters violate the fan-beam law") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> lu(-5.0, 5.0);
    std::uniform_real_distribution<double> ju(-0.05, 0.05);
    std::vector<double> lambdas(12), jitters(12);
    for (auto& l : lambdas) l = lu(rng);
    for (auto& j : jitters) j = ju(rng);

    const auto report = fanbeam_moment_consistency(fanbeam_views(lambdas, jitters), 3);
    CHECK(!report.all_pass);
    CHECK(report.orders[0].pass);  // the weight sum ignores jitter
    CHECK(!report.orders[1].pass);
    CHECK(report.localization_order == 1);
}

TEST_CASE("a corrupted fan-beam view is flagged") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> lu(-5.0, 5.0);
    std::vector<double> lambdas(14);
    for (auto& l : lambdas) l = lu(rng);
    auto views = fanbeam_views(lambdas, std::vector<double>(lambdas.size(), 0.0));
    for (auto& p : views[4].positions) p += 0.05;

    const auto report = fanbeam_moment_consistency(views, 3);
    CHECK(!report.all_pass);
    REQUIRE(report.flagged_view.has_value());
    CHECK(*report.flagged_view == 4);
}

TEST_CASE("checker argument validation") {
    std::mt19937_64 rng(51);
    const auto views = parallel_views(random_alphas(3, rng), 0.0);
    CHECK_THROWS_AS(parallel_moment_consistency(views, -1), CalibError);
    try {
        parallel_moment_consistency(views, 3);  // 3 distinct angles cannot pin 4 functions
        FAIL("expected InsufficientViews");
    } catch (const CalibError& e) {
        CHECK(e.code() == ErrorCode::InsufficientViews);
    }

    std::uniform_real_distribution<double> lu(-5.0, 5.0);
    std::vector<double> lambdas(6);
    for (auto& l : lambdas) l = lu(rng);
    auto fb = fanbeam_views(lambdas, std::vector<double>(lambdas.size(), 0.0));
    fb[2].weights.pop_back();
    try {
        fanbeam_moment_consistency(fb, 2);
        FAIL("expected InvalidArgument");
    } catch (const CalibError& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
        REQUIRE(e.view_index().has_value());
        CHECK(*e.view_index() == 2);
    }
}
