#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "stconv/estimators.hpp"
#include "stat_utils.hpp"

using namespace stconv;

namespace {

ModeSet power_modes(std::size_t n, double beta_decay = 2.5) {
    std::vector<Mode> entries;
    for (std::size_t k = 1; k <= n; ++k)
        entries.push_back({static_cast<int>(k), static_cast<double>(k * k),
                           std::pow(static_cast<double>(k), -beta_decay)});
    return ModeSet(std::move(entries));
}

ModeSet single_mode(double gamma, double beta) { return ModeSet({{1, gamma, beta}}); }

ModeSet zero_beta_modes(std::size_t n) {
    std::vector<Mode> entries;
    for (std::size_t k = 1; k <= n; ++k)
        entries.push_back({static_cast<int>(k), static_cast<double>(k * k), 0.0});
    return ModeSet(std::move(entries));
}

MomentReport synthetic_report(const std::vector<double>& horizons,
                              const std::vector<double>& estimates) {
    MomentReport report;
    for (std::size_t i = 0; i < horizons.size(); ++i)
        report.points.push_back(LadderPoint{horizons[i], estimates[i], 0.0, estimates[i], 100, 0});
    return report;
}

}  // namespace

TEST_CASE("fit_scaling_exponent: exact power law, noisy power law, constants") {
    const std::vector<double> ladder{1.0 / 512, 1.0 / 256, 1.0 / 128, 1.0 / 64, 1.0 / 32};

    std::vector<double> exact;
    for (double T : ladder) exact.push_back(3.7 * std::pow(T, 0.5));
    const SlopeFit clean = fit_scaling_exponent(synthetic_report(ladder, exact));
    CHECK(clean.slope == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(clean.std_error < 1e-10);

    RngStream noise(314, 0, 0);
    std::vector<double> noisy;
    for (double T : ladder) noisy.push_back(3.7 * std::pow(T, 0.5) * std::exp(0.1 * noise.normal()));
    const SlopeFit fit = fit_scaling_exponent(synthetic_report(ladder, noisy));
    CHECK(fit.slope == doctest::Approx(0.5).epsilon(0.1));

    std::vector<double> constant(ladder.size(), 2.5);
    const SlopeFit flat = fit_scaling_exponent(synthetic_report(ladder, constant));
    CHECK(flat.slope == doctest::Approx(0.0).epsilon(1e-12));

    CHECK_THROWS_AS(fit_scaling_exponent(synthetic_report({1.0, 2.0, 4.0}, {1.0, 2.0, 4.0})),
                    std::invalid_argument);
}

TEST_CASE("khintchine: exact atoms and the enumeration oracle") {
    // single entry: |r c|^p = c^p for every sign, ratio exactly 1
    const KhintchineReport single = khintchine_check({3.7}, 1.3, 2000, 42);
    CHECK(single.ratio == doctest::Approx(1.0).epsilon(1e-12));

    // h = [1,1], p = 2: E (r1 + r2)^2 = 2 by enumeration
    CHECK(testutil::khintchine_enumerate({1.0, 1.0}, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
    const KhintchineReport pair = khintchine_check({1.0, 1.0}, 2.0, 100000, 43);
    CHECK(pair.lp_mean == doctest::Approx(2.0).epsilon(0.03));
    CHECK(pair.ratio == doctest::Approx(1.0).epsilon(0.02));

    // h = [1,1,1,1], p = 1: E|sum| = 1.5 over the 16 patterns, ratio 4/3
    const double enumerated = testutil::khintchine_enumerate({1.0, 1.0, 1.0, 1.0}, 1.0);
    CHECK(enumerated == doctest::Approx(1.5).epsilon(1e-14));
    const KhintchineReport quad = khintchine_check({1.0, 1.0, 1.0, 1.0}, 1.0, 100000, 44);
    CHECK(quad.lp_mean == doctest::Approx(enumerated).epsilon(0.02));
    CHECK(quad.ratio == doctest::Approx(4.0 / 3.0).epsilon(0.02));

    CHECK_THROWS_AS(khintchine_check({0.0, 0.0}, 1.0, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(khintchine_check({1.0}, 0.0, 10, 1), std::invalid_argument);
}

TEST_CASE("khintchine: ratio >= 1 for p <= 2") {
    RngStream gen(777, 0, 0);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> h(3 + trial);
        for (double& v : h) v = 2.0 * gen.uniform01() - 1.0 + 0.1;
        for (double p : {0.5, 1.0, 1.5, 2.0}) {
            const KhintchineReport r = khintchine_check(h, p, 20000, 1000 + trial);
            CHECK(r.ratio > 1.0 - 0.03);
        }
    }
}

TEST_CASE("wilson lower bound") {
    CHECK(wilson_lower_bound(0, 5000) == 0.0);
    CHECK(wilson_lower_bound(1, 5000) > 0.0);
    CHECK(wilson_lower_bound(5000, 5000) > 0.95);
    CHECK(wilson_lower_bound(2500, 5000) == doctest::Approx(0.483).epsilon(0.01));
    CHECK(wilson_lower_bound(10, 10) > 0.6);
}

TEST_CASE("small ball: huge epsilon catches every path") {
    const ModeSet modes = power_modes(4);
    const StableLaw law(1.5);
    const SmallBallReport r = small_ball(modes, law, 0.0, 1e9, 1.0, 128, 1000, 7);
    CHECK(r.hits == 1000);
    CHECK(r.wilson_lower > 0.95);
}

TEST_CASE("small ball: Cauchy single mode stays positive") {
    const ModeSet modes = single_mode(1.0, 1.0);
    const StableLaw law(1.0);
    const SmallBallReport r = small_ball(modes, law, 0.0, 0.5, 1.0, 512, 2000, 99);
    CHECK(r.hits > 0);
    CHECK(r.wilson_lower > 0.0);
    CHECK(r.hits < r.replicas);  // and the event is nontrivial
}

TEST_CASE("small ball: monotone in epsilon and in horizon for nested drivers") {
    const ModeSet modes = power_modes(4);
    const StableLaw law(1.5);
    const SmallBallReport narrow = small_ball(modes, law, 0.0, 0.25, 1.0, 256, 1500, 31);
    const SmallBallReport middle = small_ball(modes, law, 0.0, 0.5, 1.0, 256, 1500, 31);
    const SmallBallReport wide = small_ball(modes, law, 0.0, 1.0, 1.0, 256, 1500, 31);
    CHECK(narrow.hits <= middle.hits);
    CHECK(middle.hits <= wide.hits);

    // same step size, doubled horizon: the same replica paths extended
    const SmallBallReport shorter = small_ball(modes, law, 0.0, 0.5, 1.0, 256, 1500, 31);
    const SmallBallReport longer = small_ball(modes, law, 0.0, 0.5, 2.0, 512, 1500, 31);
    CHECK(longer.hits <= shorter.hits);
}

TEST_CASE("doob: stable case respects the maximal inequality bound") {
    const StableLaw law(1.5);
    const double p = 1.5;  // boundary case p = alpha, the bound constant 3^{3/2}
    for (const ModeSet& modes : {single_mode(1.0, 1.0), power_modes(16)}) {
        const DoobReport r = doob_check(modes, law, 0.0, p, 1.0, 512, 2000, 1212);
        CHECK(r.bound == doctest::Approx(5.196152422706632).epsilon(1e-12));
        CHECK_FALSE(r.degenerate_ratio);
        CHECK(r.ratio >= 1.0);  // sup dominates the terminal value pathwise
        CHECK(r.ratio <= r.bound + 3.0 * r.ratio_std_error);
    }
}

TEST_CASE("doob: Brownian cross-check at p = 2") {
    const StableLaw law(2.0);
    const DoobReport r = doob_check(single_mode(1.0, 1.0), law, 0.0, 2.0, 1.0, 512, 2000, 8888);
    CHECK(r.bound == doctest::Approx(4.0));
    CHECK(r.ratio > 1.05);
    CHECK(r.ratio < 4.0 + 3.0 * r.ratio_std_error);
}

TEST_CASE("doob: domain errors and the degenerate case") {
    const StableLaw law(1.5);
    CHECK_THROWS_AS(doob_check(single_mode(1.0, 1.0), law, 0.0, 1.0, 1.0, 64, 100, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(doob_check(single_mode(1.0, 1.0), law, 0.0, 1.6, 1.0, 64, 100, 1),
                    std::invalid_argument);
    const DoobReport r = doob_check(zero_beta_modes(3), law, 0.0, 1.2, 1.0, 64, 200, 2);
    CHECK(r.degenerate_ratio);
}

TEST_CASE("moment formula: single mode matches the scalar law") {
    const ModeSet modes = single_mode(1.0, 1.0);
    const StableLaw law(1.5);
    const double p = 0.6, t = 0.7;
    const MomentFormulaReport r = moment_formula_check(modes, law, 0.0, t, p, 50000, 2023);
    CHECK(r.scale == doctest::Approx(std::pow(t, 1.0 / 1.5)).epsilon(1e-12));
    const double rel_se_agg = r.aggregate_std_error / r.exact_moment;
    const double rel_se_norm = r.norm_std_error / r.exact_moment;
    CHECK(std::abs(r.aggregate_ratio - 1.0) < 4.0 * rel_se_agg);
    CHECK(std::abs(r.norm_ratio - 1.0) < 4.0 * rel_se_norm);
}

TEST_CASE("moment formula: multimode aggregate is exact, time scaling is p/alpha") {
    const ModeSet modes = power_modes(8);
    const StableLaw law(1.5);
    const double p = 0.5, t = 0.3;
    const MomentFormulaReport at_t = moment_formula_check(modes, law, 0.2, t, p, 60000, 6060);
    const MomentFormulaReport at_2t = moment_formula_check(modes, law, 0.2, 2.0 * t, p, 60000, 6061);

    const double rel_se = at_t.aggregate_std_error / at_t.exact_moment;
    CHECK(std::abs(at_t.aggregate_ratio - 1.0) < 4.0 * rel_se);

    const double measured = at_2t.aggregate_moment / at_t.aggregate_moment;
    const double expected = std::pow(2.0, p / 1.5);
    CHECK(measured == doctest::Approx(expected).epsilon(0.03));

    CHECK_THROWS_AS(moment_formula_check(modes, law, 0.0, 1.0, 0.8, 100, 1),
                    std::invalid_argument);  // p >= alpha/2
}

TEST_CASE("moment formula: zero coefficients give zero") {
    const MomentFormulaReport r =
        moment_formula_check(zero_beta_modes(4), StableLaw(1.5), 0.0, 1.0, 0.5, 500, 3);
    CHECK(r.exact_moment == 0.0);
    CHECK(r.aggregate_moment == 0.0);
    CHECK(r.norm_moment == 0.0);
}

TEST_CASE("sup moment: zero noise, domain guard, degenerate gate") {
    const StableLaw law(1.5);
    const std::vector<double> ladder{0.125, 0.25, 0.5, 1.0};
    const MomentReport zero = sup_moment(zero_beta_modes(4), law, 0.0, 1.0, ladder, 64, 50, 11);
    for (const LadderPoint& pt : zero.points) CHECK(pt.estimate == 0.0);
    CHECK_FALSE(zero.degenerate_gate_failed);

    CHECK_THROWS_AS(sup_moment(power_modes(4), law, 0.0, 1.5, ladder, 64, 50, 11),
                    std::invalid_argument);
    CHECK_THROWS_AS(sup_moment(power_modes(4), law, 0.0, 1.6, ladder, 64, 50, 11),
                    std::invalid_argument);
}

TEST_CASE("sup moment: estimates nondecreasing in T for nested drivers") {
    const ModeSet modes = power_modes(6);
    const StableLaw law(1.5);
    const GridSpec grid(1.0, 512);
    const std::size_t replicas = 300;
    double mean_quarter = 0.0, mean_half = 0.0, mean_full = 0.0;
    for (std::size_t r = 0; r < replicas; ++r) {
        const DrivingPath driving =
            simulate_driving(modes, law, grid, 4242, static_cast<std::uint32_t>(r));
        const FieldPath z = convolve_direct(driving);
        double sup = 0.0;
        for (std::size_t j = 0; j <= 512; ++j) {
            double norm2 = 0.0;
            for (std::size_t k = 0; k < modes.size(); ++k)
                norm2 += z.values.at(k, j) * z.values.at(k, j);
            sup = std::max(sup, norm2);
            if (j == 128) mean_quarter += std::sqrt(sup);
            if (j == 256) mean_half += std::sqrt(sup);
        }
        mean_full += std::sqrt(sup);
    }
    CHECK(mean_quarter <= mean_half);
    CHECK(mean_half <= mean_full);
}

TEST_CASE("sup moment: threading does not change the result") {
    const ModeSet modes = power_modes(4);
    const StableLaw law(1.5);
    const std::vector<double> ladder{0.25, 0.5};
    const MomentReport serial = sup_moment(modes, law, 0.0, 1.0, ladder, 128, 64, 777, 1);
    const MomentReport threaded = sup_moment(modes, law, 0.0, 1.0, ladder, 128, 64, 777, 4);
    REQUIRE(serial.points.size() == threaded.points.size());
    for (std::size_t i = 0; i < serial.points.size(); ++i) {
        CHECK(serial.points[i].estimate == threaded.points[i].estimate);
        CHECK(serial.points[i].std_error == threaded.points[i].std_error);
    }
}

TEST_CASE("wiener sup moment: positive p required, small ladder runs") {
    const ModeSet modes = power_modes(4);
    CHECK_THROWS_AS(sup_moment_wiener(modes, 0.0, 0.0, {0.5}, 64, 10, 1), std::invalid_argument);
    const MomentReport r = sup_moment_wiener(modes, 0.0, 2.0, {0.25, 0.5}, 128, 200, 55);
    CHECK(r.points[0].estimate > 0.0);
    CHECK(r.points[0].estimate < r.points[1].estimate);  // larger horizon, larger sup moment
}
