#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cyclodet/run_length.hpp"

using namespace cyclodet;

namespace {

IpidModel day24() {
    Eigen::ArrayXd theta(4);
    theta << 2.0, 5.0, 10.0, 4.0;
    return IpidModel(DistributionFamily::poisson(), BatchPartition(24, {6, 12, 18, 24}), theta);
}

PostChangeGrid doubling(const IpidModel& m) {
    const double mult[] = {2.0};
    return PostChangeGrid::multiplicative(m, {mult, 1}, 1e-6);
}

IpidModel unit_gaussian() {
    Eigen::ArrayXd theta(1);
    theta << 0.0;
    return IpidModel(DistributionFamily::gaussian(1.0), BatchPartition(1, {1}), theta);
}

PostChangeGrid unit_shift(const IpidModel& m) {
    std::vector<Eigen::ArrayXd> alts(1);
    alts[0] = Eigen::ArrayXd(1);
    alts[0] << 1.0;
    return PostChangeGrid(m, alts, 1e-6);
}

}  // namespace

TEST_CASE("log-beta design rule") {
    CalibrationConfig cfg;
    cfg.beta = std::exp(1.0);
    CHECK(calibrate_threshold(cfg) == 1.0);
    cfg.beta = 1000.0;
    CHECK(calibrate_threshold(cfg) == 6.907755278982137);
    cfg.beta = 100.0;
    CHECK(calibrate_threshold(cfg) == 4.605170185988092);
}

TEST_CASE("calibration config validation") {
    CalibrationConfig cfg;
    cfg.beta = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.beta = 0.5;
    CHECK_THROWS_AS(calibrate_threshold(cfg), std::invalid_argument);

    cfg.beta = 100.0;
    cfg.method = CalibrationMethod::MonteCarloBisection;
    cfg.reps = 50;  // too few
    cfg.horizon = 1000;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.reps = 200;
    cfg.horizon = 500;  // must cover 10 * beta
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.horizon = 1000;
    cfg.tolerance = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.tolerance = 0.1;
    CHECK_NOTHROW(cfg.validate());

    // bisection configs must use the Monte Carlo entry point
    CHECK_THROWS_AS(calibrate_threshold(cfg), std::invalid_argument);
}

TEST_CASE("degenerate thresholds pin the run length estimates") {
    const auto m = day24();
    const DetectorTemplate tmpl{DetectorKind::AllBatch, doubling(m), {}};

    const auto never = estimate_mtfa(m, tmpl, 1e12, 25, 40, 3);
    CHECK(never.mean == 40.0);
    CHECK(never.censored == 25);
    CHECK(never.replications == 25);
    CHECK(never.std_error == 0.0);
    CHECK(never.horizon == 40);

    const auto instant = estimate_mtfa(m, tmpl, -1e12, 25, 40, 3);
    CHECK(instant.mean == 1.0);
    CHECK(instant.censored == 0);
    CHECK(instant.std_error == 0.0);
}

TEST_CASE("run length estimates are seed-reproducible") {
    const auto m = day24();
    const DetectorTemplate tmpl{DetectorKind::SingleBatch, doubling(m), {}};
    const auto a = estimate_mtfa(m, tmpl, 2.5, 60, 400, 11);
    const auto b = estimate_mtfa(m, tmpl, 2.5, 60, 400, 11);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    CHECK(a.censored == b.censored);
    const auto c = estimate_mtfa(m, tmpl, 2.5, 60, 400, 12);
    CHECK(a.mean != c.mean);
}

TEST_CASE("common random numbers make the MTFA monotone in the threshold") {
    const auto m = day24();
    const DetectorTemplate tmpl{DetectorKind::SingleBatch, doubling(m), {}};
    double prev = 0.0;
    for (double a : {1.0, 2.0, 3.0, 4.0}) {
        const auto est = estimate_mtfa(m, tmpl, a, 50, 500, 77);
        CHECK(est.mean >= prev);
        prev = est.mean;
    }
}

TEST_CASE("log-beta thresholds meet the false alarm budget on the reference model") {
    const auto m = day24();
    const double beta = 100.0;
    const double a = std::log(beta);
    for (const DetectorKind kind : {DetectorKind::SingleBatch, DetectorKind::AllBatch}) {
        const DetectorTemplate tmpl{kind, doubling(m), {}};
        const auto est = estimate_mtfa(m, tmpl, a, 2000, 2000, 9001);
        CHECK(est.mean >= beta);
        CHECK(est.censored <= est.replications / 5);
    }
}

TEST_CASE("a huge post-change signal is caught almost immediately") {
    Eigen::ArrayXd theta(1);
    theta << 1.0;
    const IpidModel m(DistributionFamily::poisson(), BatchPartition(1, {1}), theta);
    std::vector<Eigen::ArrayXd> alts(1);
    alts[0] = Eigen::ArrayXd(1);
    alts[0] << 100.0;
    const PostChangeGrid g(m, alts, 1e-6);
    const DetectorTemplate tmpl{DetectorKind::SingleBatch, g, {}};
    const auto est = estimate_delay(m, tmpl, ChangeSpec::single_batch(1, 0, 100.0),
                                    std::log(100.0), 400, 1000, 5);
    CHECK(est.censored == 0);
    CHECK(est.mean <= 3.0);
}

TEST_CASE("estimate_delay requires an actual change") {
    const auto m = day24();
    const DetectorTemplate tmpl{DetectorKind::AllBatch, doubling(m), {}};
    CHECK_THROWS_AS(estimate_delay(m, tmpl, ChangeSpec::none(), 1.0, 10, 100, 1),
                    std::invalid_argument);
    // change must be valid for this model
    CHECK_THROWS_AS(estimate_delay(m, tmpl, ChangeSpec::single_batch(1, 9, 4.0), 1.0, 10, 100, 1),
                    std::invalid_argument);
}

TEST_CASE("kappa factor") {
    CHECK(kappa_factor(BatchPartition(5, {5}), 0) == 1.0);
    CHECK(kappa_factor(BatchPartition(24, {6, 12, 18, 24}), 1) == 4.0);
    const BatchPartition day(6598, {1500, 3000, 4500, 6598});
    CHECK(kappa_factor(day, 3) == doctest::Approx(1.0 + 4500.0 / 2098.0).epsilon(1e-12));
    CHECK_THROWS_AS(kappa_factor(day, 4), std::invalid_argument);
    CHECK_THROWS_AS(kappa_factor(day, -1), std::invalid_argument);
}

TEST_CASE("average information of an all-batch change") {
    const auto m = day24();
    const double expect = 0.25 * (kl_divergence(m.family(), 4.0, 2.0) +
                                  kl_divergence(m.family(), 10.0, 5.0) +
                                  kl_divergence(m.family(), 20.0, 10.0) +
                                  kl_divergence(m.family(), 8.0, 4.0));
    CHECK(average_kl(m, m.baseline() * 2.0) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(std::abs(average_kl(m, m.baseline() * 2.0) - 2.0280453958794253) <= 1e-12);
    Eigen::ArrayXd wrong(3);
    wrong << 1.0, 2.0, 3.0;
    CHECK_THROWS_AS(average_kl(m, wrong), std::invalid_argument);
}

TEST_CASE("first-order delay bound") {
    const auto fam = DistributionFamily::poisson();
    const BatchPartition part(24, {6, 12, 18, 24});
    const double b = theoretical_delay_bound(fam, part, 1, 10.0, 5.0, 1000.0);
    CHECK(std::abs(b - 14.305681830728542) <= 1e-12);
    // a single batch covering the cycle reduces to ln(beta) / KL
    const BatchPartition whole(7, {7});
    CHECK(theoretical_delay_bound(fam, whole, 0, 4.0, 2.0, 100.0) ==
          doctest::Approx(std::log(100.0) / kl_divergence(fam, 4.0, 2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(theoretical_delay_bound(fam, part, 1, 5.0, 5.0, 1000.0), std::domain_error);
    CHECK_THROWS_AS(theoretical_delay_bound(fam, part, 1, 10.0, 5.0, 1.0), std::domain_error);
}

TEST_CASE("Monte Carlo bisection meets the budget it was asked for") {
    const auto m = unit_gaussian();
    const DetectorTemplate tmpl{DetectorKind::SingleBatch, unit_shift(m), {}};
    CalibrationConfig cfg;
    cfg.beta = 20.0;
    cfg.method = CalibrationMethod::MonteCarloBisection;
    cfg.reps = 400;
    cfg.horizon = 300;
    cfg.tolerance = 0.10;
    cfg.seed = 21;
    const double a = calibrate_threshold_mc(m, tmpl, cfg);
    CHECK(a > 0.0);
    CHECK(a <= 2.0 * std::log(cfg.beta));

    // replaying the calibration's own streams must land at or above the budget
    const auto crn = estimate_mtfa(m, tmpl, a, cfg.reps, cfg.horizon, cfg.seed);
    CHECK(crn.mean >= cfg.beta);
    CHECK(crn.mean <= 1.5 * cfg.beta);

    // fresh streams agree up to sampling noise
    const auto fresh = estimate_mtfa(m, tmpl, a, 5000, 2000, 1234);
    CHECK(fresh.mean >= 0.8 * cfg.beta);
    CHECK(fresh.mean <= 1.6 * cfg.beta);
}

TEST_CASE("Monte Carlo thresholds are ordered across budgets") {
    const auto m = unit_gaussian();
    const DetectorTemplate tmpl{DetectorKind::SingleBatch, unit_shift(m), {}};
    CalibrationConfig lo;
    lo.method = CalibrationMethod::MonteCarloBisection;
    lo.beta = 30.0;
    lo.reps = 100;
    lo.horizon = 3000;  // shared horizon keeps the empirical MTFA curve identical
    lo.seed = 4;
    CalibrationConfig hi = lo;
    hi.beta = 300.0;
    CHECK(calibrate_threshold_mc(m, tmpl, lo) < calibrate_threshold_mc(m, tmpl, hi));
}

TEST_CASE("Monte Carlo calibration stays under the design-rule envelope on sparse counts") {
    Eigen::ArrayXd theta(4);
    theta << 0.10, 0.28, 0.18, 0.08;
    const IpidModel m(DistributionFamily::poisson(), BatchPartition(4, {1, 2, 3, 4}), theta);
    const DetectorTemplate tmpl{DetectorKind::AllBatch, doubling(m), {}};
    CalibrationConfig cfg;
    cfg.beta = 50.0;
    cfg.method = CalibrationMethod::MonteCarloBisection;
    cfg.reps = 200;
    cfg.horizon = 600;
    cfg.seed = 8;
    const double a = calibrate_threshold_mc(m, tmpl, cfg);
    CHECK(a > 0.0);
    CHECK(a <= 2.0 * std::log(cfg.beta));
}

TEST_CASE("efficiency report on the unit gaussian shift") {
    const auto m = unit_gaussian();
    const DetectorTemplate tmpl{DetectorKind::SingleBatch, unit_shift(m), {}};
    EfficiencyOptions opts;
    opts.reps = 400;
    opts.seed = 2;
    const std::vector<double> betas = {20.0, 55.0, 150.0};
    const auto r = efficiency_report(m, tmpl, ChangeSpec::single_batch(1, 0, 1.0), betas, opts);

    REQUIRE(r.betas == betas);
    REQUIRE(r.thresholds.size() == 3);
    for (std::size_t i = 0; i < betas.size(); ++i) {
        CHECK(r.thresholds[i] == std::log(betas[i]));
        CHECK(r.mtfa[i].mean >= betas[i]);
    }
    CHECK(r.kappa == 1.0);
    CHECK(r.i_bar == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.theory_slope == doctest::Approx(2.0).epsilon(1e-12));
    // delay grows with the budget
    CHECK(r.delay[0].mean < r.delay[1].mean);
    CHECK(r.delay[1].mean < r.delay[2].mean);
    // fitted slope lands near kappa / I
    CHECK(r.slope_fit > 1.0);
    CHECK(r.slope_fit < 3.0);
    CHECK(r.pass);
}

TEST_CASE("efficiency report metadata for a single-batch change") {
    const auto m = day24();
    const DetectorTemplate tmpl{DetectorKind::SingleBatch, doubling(m), {}};
    EfficiencyOptions opts;
    opts.reps = 60;
    opts.seed = 5;
    const auto r = efficiency_report(m, tmpl, ChangeSpec::single_batch(1, 1, 10.0), {10.0, 30.0},
                                     opts);
    CHECK(r.kappa == kappa_factor(m.partition(), 1));
    CHECK(r.i_bar == doctest::Approx(kl_divergence(m.family(), 10.0, 5.0)).epsilon(1e-12));
    CHECK(r.theory_slope == doctest::Approx(4.0 / 1.9314718055994531).epsilon(1e-9));

    const DetectorTemplate all{DetectorKind::AllBatch, doubling(m), {}};
    const auto ra = efficiency_report(m, all, ChangeSpec::all_batch(1, m.baseline() * 2.0),
                                      {10.0, 30.0}, opts);
    CHECK(ra.kappa == 1.0);
    CHECK(std::abs(ra.i_bar - 2.0280453958794253) <= 1e-12);
    CHECK(std::abs(ra.theory_slope - 1.0 / 2.0280453958794253) <= 1e-12);
}

TEST_CASE("instantiate builds a pristine detector per replication") {
    const auto m = day24();
    DetectorOptions opts;
    opts.start_index = 42;        // replication harness always starts streams at 1
    opts.record_trajectory = true;
    const DetectorTemplate tmpl{DetectorKind::AllBatch, doubling(m), opts};
    auto det = instantiate(tmpl, m, 3.0);
    CHECK(det.clock() == 1);
    CHECK_FALSE(det.fired());
    CHECK(det.kind() == DetectorKind::AllBatch);
}
