#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "cyclodet/family.hpp"
#include "cyclodet/partition.hpp"

namespace cyclodet {

/// A contiguous run of observations. start_index is the 1-based global time of
/// the first sample, so a sequence knows its own phase alignment.
struct ObservationSequence {
    std::vector<double> values;
    std::int64_t start_index = 1;

    std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
    bool empty() const { return values.empty(); }
};

/// Periodic baseline: one family, a batch partition of the cycle, and one
/// parameter per batch (the step-wise constant parameter sequence).
class IpidModel {
public:
    IpidModel(DistributionFamily family, BatchPartition partition, Eigen::ArrayXd baseline);

    const DistributionFamily& family() const { return family_; }
    const BatchPartition& partition() const { return partition_; }
    const Eigen::ArrayXd& baseline() const { return baseline_; }
    int num_batches() const { return partition_.num_batches(); }
    std::int64_t period() const { return partition_.period(); }

    /// Baseline parameter governing global sample k.
    double param_at(std::int64_t k) const { return baseline_[partition_.batch_of(k)]; }

    bool same_shape(const IpidModel& other) const;

private:
    DistributionFamily family_;
    BatchPartition partition_;
    Eigen::ArrayXd baseline_;
};

enum class ChangeMode { None, SingleBatch, AllBatch };

/// Change-point description: nothing changes (gamma = infinity), one batch's
/// parameter moves to lambda from time gamma on, or every batch moves to its
/// own post-change parameter.
class ChangeSpec {
public:
    static constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();

    static ChangeSpec none();
    static ChangeSpec single_batch(std::int64_t gamma, int batch, double lambda);
    static ChangeSpec all_batch(std::int64_t gamma, Eigen::ArrayXd lambdas);

    ChangeMode mode() const { return mode_; }
    std::int64_t gamma() const { return gamma_; }
    int batch() const { return batch_; }
    double lambda() const { return lambda_; }
    const Eigen::ArrayXd& lambdas() const { return lambdas_; }

    /// Throws std::invalid_argument when inconsistent with the model
    /// (batch out of range, invalid or baseline-equal post-change parameter).
    void validate_against(const IpidModel& model) const;

    /// Effective parameter at global time k under this change model.
    double param_at(const IpidModel& model, std::int64_t k) const;

private:
    ChangeSpec() = default;

    ChangeMode mode_ = ChangeMode::None;
    std::int64_t gamma_ = kNever;
    int batch_ = -1;
    double lambda_ = 0.0;
    Eigen::ArrayXd lambdas_;
};

/// Lazy sampler for a (model, change) pair: emits Y_k, Y_{k+1}, ... from the
/// appropriate per-time parameter. Deterministic given the engine seed.
class StreamSampler {
public:
    StreamSampler(const IpidModel& model, const ChangeSpec& change, std::uint64_t seed,
                  std::int64_t start_index = 1);

    double next();
    std::int64_t index() const { return next_index_; }

private:
    const IpidModel* model_;
    ChangeSpec change_;
    std::int64_t next_index_;
    std::mt19937_64 engine_;
};

/// n independent draws starting at global time start_index.
ObservationSequence sample(const IpidModel& model, const ChangeSpec& change, std::int64_t n,
                           std::uint64_t seed, std::int64_t start_index = 1);

/// Per-batch maximum-likelihood fit (the pooled per-batch sample mean for both
/// families). Streams are pooled; each contributes at the phases its
/// start_index implies. Throws FitError when a batch receives no data or a
/// Poisson batch is all zeros.
Eigen::ArrayXd mle_fit(const DistributionFamily& family, const BatchPartition& partition,
                       std::span<const ObservationSequence> training);

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cyclodet
