#pragma once

#include <random>
#include <string>

namespace cyclodet {

enum class FamilyKind { Poisson, GaussianKnownVariance };

/// Parametric observation family p(y; theta). Poisson is parameterized by its
/// mean; the Gaussian family has a fixed, known standard deviation and theta
/// is the mean.
struct DistributionFamily {
    FamilyKind kind = FamilyKind::Poisson;
    double fixed_scale = 1.0;  // standard deviation, Gaussian only

    static DistributionFamily poisson() { return {FamilyKind::Poisson, 1.0}; }
    static DistributionFamily gaussian(double sigma);

    bool valid_parameter(double theta) const;
    void require_parameter(double theta) const;  // throws std::domain_error
    bool in_support(double y) const;
    void require_support(double y) const;  // throws std::domain_error

    std::string name() const;
    bool operator==(const DistributionFamily& other) const;
};

/// log p(y; theta). Poisson: y*log(theta) - theta - lgamma(y+1).
/// Gaussian: -(y-theta)^2/(2 sigma^2) - log(sigma sqrt(2 pi)).
double log_pmf(const DistributionFamily& family, double theta, double y);

/// log p(y; lambda) - log p(y; theta), in closed form per family.
double llr(const DistributionFamily& family, double theta, double lambda, double y);

/// KL divergence between p(.; lambda) and p(.; theta). Nonnegative, zero iff
/// lambda == theta. Poisson: theta - lambda + lambda*log(lambda/theta).
/// Gaussian: (lambda-theta)^2 / (2 sigma^2).
double kl_divergence(const DistributionFamily& family, double lambda, double theta);

/// One exact draw from p(.; theta).
double sample_one(const DistributionFamily& family, double theta, std::mt19937_64& engine);

}  // namespace cyclodet
