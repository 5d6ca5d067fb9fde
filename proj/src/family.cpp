#include "cyclodet/family.hpp"

#include <cmath>
#include <stdexcept>

namespace cyclodet {

namespace {
constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364;  // log(sqrt(2*pi))
}

DistributionFamily DistributionFamily::gaussian(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::domain_error("gaussian family requires fixed_scale > 0, got " +
                                std::to_string(sigma));
    }
    return {FamilyKind::GaussianKnownVariance, sigma};
}

bool DistributionFamily::valid_parameter(double theta) const {
    if (!std::isfinite(theta)) return false;
    return kind == FamilyKind::Poisson ? theta > 0.0 : true;
}

void DistributionFamily::require_parameter(double theta) const {
    if (!valid_parameter(theta)) {
        throw std::domain_error("invalid parameter " + std::to_string(theta) +
                                " for " + name() + " family");
    }
}

bool DistributionFamily::in_support(double y) const {
    if (!std::isfinite(y)) return false;
    if (kind == FamilyKind::Poisson) return y >= 0.0 && std::floor(y) == y;
    return true;
}

void DistributionFamily::require_support(double y) const {
    if (!in_support(y)) {
        throw std::domain_error("observation " + std::to_string(y) +
                                " outside the support of the " + name() + " family");
    }
}

std::string DistributionFamily::name() const {
    return kind == FamilyKind::Poisson ? "poisson" : "gaussian";
}

bool DistributionFamily::operator==(const DistributionFamily& other) const {
    if (kind != other.kind) return false;
    return kind == FamilyKind::Poisson || fixed_scale == other.fixed_scale;
}

double log_pmf(const DistributionFamily& family, double theta, double y) {
    family.require_parameter(theta);
    family.require_support(y);
    if (family.kind == FamilyKind::Poisson) {
        // lgamma keeps log(y!) exact for counts far beyond factorial range.
        return y * std::log(theta) - theta - std::lgamma(y + 1.0);
    }
    const double sigma = family.fixed_scale;
    const double z = (y - theta) / sigma;
    return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

double llr(const DistributionFamily& family, double theta, double lambda, double y) {
    family.require_parameter(theta);
    family.require_parameter(lambda);
    family.require_support(y);
    if (family.kind == FamilyKind::Poisson) {
        return y * std::log(lambda / theta) - (lambda - theta);
    }
    const double s2 = family.fixed_scale * family.fixed_scale;
    return (lambda - theta) * (2.0 * y - theta - lambda) / (2.0 * s2);
}

double kl_divergence(const DistributionFamily& family, double lambda, double theta) {
    family.require_parameter(theta);
    family.require_parameter(lambda);
    if (lambda == theta) return 0.0;
    if (family.kind == FamilyKind::Poisson) {
        return theta - lambda + lambda * std::log(lambda / theta);
    }
    const double d = lambda - theta;
    const double s2 = family.fixed_scale * family.fixed_scale;
    return d * d / (2.0 * s2);
}

double sample_one(const DistributionFamily& family, double theta, std::mt19937_64& engine) {
    family.require_parameter(theta);
    if (family.kind == FamilyKind::Poisson) {
        std::poisson_distribution<long long> dist(theta);
        return static_cast<double>(dist(engine));
    }
    std::normal_distribution<double> dist(theta, family.fixed_scale);
    return dist(engine);
}

}  // namespace cyclodet
