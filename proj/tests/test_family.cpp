#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "cyclodet/family.hpp"
#include "cyclodet/rng.hpp"

using namespace cyclodet;

TEST_CASE("poisson log_pmf matches closed form") {
    const auto fam = DistributionFamily::poisson();
    CHECK(log_pmf(fam, 1.0, 0.0) == doctest::Approx(-1.0).epsilon(1e-12));
    // 3 ln2 - 2 - ln6, i.e. ln(e^-2 * 2^3 / 3!)
    CHECK(log_pmf(fam, 2.0, 3.0) == doctest::Approx(-1.7123179275482192).epsilon(1e-12));
}

TEST_CASE("gaussian log density") {
    const auto fam = DistributionFamily::gaussian(1.0);
    CHECK(log_pmf(fam, 0.0, 0.0) == doctest::Approx(-0.9189385332046727).epsilon(1e-12));
    const auto wide = DistributionFamily::gaussian(2.0);
    CHECK(log_pmf(wide, 1.0, 3.0) ==
          doctest::Approx(-0.5 - std::log(2.0) - 0.9189385332046727).epsilon(1e-12));
}

TEST_CASE("log_pmf rejects bad inputs") {
    const auto fam = DistributionFamily::poisson();
    CHECK_THROWS_AS(log_pmf(fam, 0.0, 1.0), std::domain_error);   // theta must be > 0
    CHECK_THROWS_AS(log_pmf(fam, -2.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(log_pmf(fam, 2.0, -1.0), std::domain_error);  // negative count
    CHECK_THROWS_AS(log_pmf(fam, 2.0, 1.5), std::domain_error);   // fractional count
    CHECK_THROWS_AS(DistributionFamily::gaussian(0.0), std::domain_error);
    CHECK_THROWS_AS(DistributionFamily::gaussian(-1.0), std::domain_error);
    const auto g = DistributionFamily::gaussian(1.0);
    CHECK_NOTHROW(log_pmf(g, -3.5, -7.25));  // any finite real is fine for gaussian
}

TEST_CASE("llr pinned values") {
    const auto fam = DistributionFamily::poisson();
    CHECK(llr(fam, 2.0, 2.0, 5.0) == 0.0);
    CHECK(llr(fam, 2.0, 4.0, 3.0) == doctest::Approx(0.07944154167983575).epsilon(1e-12));
    CHECK(llr(fam, 2.0, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    const auto g = DistributionFamily::gaussian(1.0);
    CHECK(llr(g, 0.0, 0.0, 1.7) == 0.0);
}

TEST_CASE("llr simplified form agrees with log_pmf difference") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> par(0.5, 20.0);
    for (int trial = 0; trial < 500; ++trial) {
        const bool poisson = trial % 2 == 0;
        const auto fam = poisson ? DistributionFamily::poisson()
                                 : DistributionFamily::gaussian(par(rng) / 4.0);
        const double theta = par(rng);
        const double lambda = par(rng);
        double y;
        if (poisson) {
            y = static_cast<double>(std::poisson_distribution<int>(theta)(rng));
        } else {
            y = std::normal_distribution<double>(theta, fam.fixed_scale)(rng);
        }
        const double generic = log_pmf(fam, lambda, y) - log_pmf(fam, theta, y);
        CHECK(llr(fam, theta, lambda, y) == doctest::Approx(generic).epsilon(1e-12));
        // antisymmetry
        CHECK(llr(fam, theta, lambda, y) == doctest::Approx(-llr(fam, lambda, theta, y)).epsilon(1e-12));
    }
}

TEST_CASE("kl_divergence pinned values and properties") {
    const auto fam = DistributionFamily::poisson();
    CHECK(kl_divergence(fam, 3.0, 3.0) == 0.0);
    CHECK(kl_divergence(fam, 4.0, 2.0) == doctest::Approx(0.7725887222397811).epsilon(1e-12));
    const auto g = DistributionFamily::gaussian(1.0);
    CHECK(kl_divergence(g, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-12));

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> par(0.5, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = par(rng), b = par(rng);
        CHECK(kl_divergence(fam, a, b) >= 0.0);
        CHECK(kl_divergence(g, a, b) >= 0.0);
    }
}

TEST_CASE("poisson kl matches the truncated expectation of llr") {
    // E_lambda[llr] summed over y = 0..400 (tail mass is negligible here)
    const auto fam = DistributionFamily::poisson();
    const double lambda = 4.0, theta = 2.0;
    double series = 0.0;
    for (int y = 0; y <= 400; ++y) {
        const double logp = -lambda + y * std::log(lambda) - std::lgamma(y + 1.0);
        series += std::exp(logp) * llr(fam, theta, lambda, static_cast<double>(y));
    }
    CHECK(kl_divergence(fam, lambda, theta) == doctest::Approx(series).epsilon(1e-6));
}

TEST_CASE("sample_one is exact and seed-deterministic") {
    const auto fam = DistributionFamily::poisson();
    auto e1 = make_engine(7);
    auto e2 = make_engine(7);
    for (int i = 0; i < 100; ++i) {
        const double a = sample_one(fam, 0.3, e1);
        const double b = sample_one(fam, 0.3, e2);
        CHECK(a == b);
        CHECK(a >= 0.0);
        CHECK(std::floor(a) == a);
    }
}

TEST_CASE("derive_seed separates streams") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(5, 3) == derive_seed(5, 3));
}
