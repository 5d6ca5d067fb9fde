#include "cyclodet/model.hpp"

#include <stdexcept>
#include <string>

#include "cyclodet/rng.hpp"

namespace cyclodet {

IpidModel::IpidModel(DistributionFamily family, BatchPartition partition, Eigen::ArrayXd baseline)
    : family_(family), partition_(std::move(partition)), baseline_(std::move(baseline)) {
    if (baseline_.size() != partition_.num_batches()) {
        throw std::invalid_argument("baseline has " + std::to_string(baseline_.size()) +
                                    " parameters but the partition has " +
                                    std::to_string(partition_.num_batches()) + " batches");
    }
    for (double theta : baseline_) family_.require_parameter(theta);
}

bool IpidModel::same_shape(const IpidModel& other) const {
    return family_ == other.family_ && partition_ == other.partition_ &&
           (baseline_ == other.baseline_).all();
}

ChangeSpec ChangeSpec::none() {
    ChangeSpec c;
    c.mode_ = ChangeMode::None;
    c.gamma_ = kNever;
    return c;
}

ChangeSpec ChangeSpec::single_batch(std::int64_t gamma, int batch, double lambda) {
    if (gamma < 1 || gamma == kNever) {
        throw std::invalid_argument("single-batch change needs a finite change point >= 1");
    }
    ChangeSpec c;
    c.mode_ = ChangeMode::SingleBatch;
    c.gamma_ = gamma;
    c.batch_ = batch;
    c.lambda_ = lambda;
    return c;
}

ChangeSpec ChangeSpec::all_batch(std::int64_t gamma, Eigen::ArrayXd lambdas) {
    if (gamma < 1 || gamma == kNever) {
        throw std::invalid_argument("all-batch change needs a finite change point >= 1");
    }
    ChangeSpec c;
    c.mode_ = ChangeMode::AllBatch;
    c.gamma_ = gamma;
    c.lambdas_ = std::move(lambdas);
    return c;
}

void ChangeSpec::validate_against(const IpidModel& model) const {
    switch (mode_) {
        case ChangeMode::None:
            return;
        case ChangeMode::SingleBatch: {
            if (batch_ < 0 || batch_ >= model.num_batches()) {
                throw std::invalid_argument("change batch " + std::to_string(batch_ + 1) +
                                            " outside 1.." + std::to_string(model.num_batches()));
            }
            model.family().require_parameter(lambda_);
            if (lambda_ == model.baseline()[batch_]) {
                throw std::invalid_argument("post-change parameter equals the baseline of batch " +
                                            std::to_string(batch_ + 1));
            }
            return;
        }
        case ChangeMode::AllBatch: {
            if (lambdas_.size() != model.num_batches()) {
                throw std::invalid_argument("all-batch change has " + std::to_string(lambdas_.size()) +
                                            " parameters for " + std::to_string(model.num_batches()) +
                                            " batches");
            }
            for (int e = 0; e < model.num_batches(); ++e) {
                model.family().require_parameter(lambdas_[e]);
                if (lambdas_[e] == model.baseline()[e]) {
                    throw std::invalid_argument(
                        "post-change parameter equals the baseline of batch " + std::to_string(e + 1));
                }
            }
            return;
        }
    }
}

double ChangeSpec::param_at(const IpidModel& model, std::int64_t k) const {
    const int b = model.partition().batch_of(k);
    if (k < gamma_) return model.baseline()[b];
    switch (mode_) {
        case ChangeMode::None:
            return model.baseline()[b];
        case ChangeMode::SingleBatch:
            return b == batch_ ? lambda_ : model.baseline()[b];
        case ChangeMode::AllBatch:
            return lambdas_[b];
    }
    return model.baseline()[b];
}

StreamSampler::StreamSampler(const IpidModel& model, const ChangeSpec& change, std::uint64_t seed,
                             std::int64_t start_index)
    : model_(&model), change_(change), next_index_(start_index), engine_(make_engine(seed)) {
    if (start_index < 1) throw std::invalid_argument("start index must be >= 1");
    change_.validate_against(model);
}

double StreamSampler::next() {
    const double theta = change_.param_at(*model_, next_index_);
    ++next_index_;
    return sample_one(model_->family(), theta, engine_);
}

ObservationSequence sample(const IpidModel& model, const ChangeSpec& change, std::int64_t n,
                           std::uint64_t seed, std::int64_t start_index) {
    if (n < 0) throw std::invalid_argument("sample count must be >= 0");
    StreamSampler sampler(model, change, seed, start_index);
    ObservationSequence seq;
    seq.start_index = start_index;
    seq.values.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) seq.values.push_back(sampler.next());
    return seq;
}

Eigen::ArrayXd mle_fit(const DistributionFamily& family, const BatchPartition& partition,
                       std::span<const ObservationSequence> training) {
    const int num_batches = partition.num_batches();
    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(num_batches);
    Eigen::ArrayX<std::int64_t> count = Eigen::ArrayX<std::int64_t>::Zero(num_batches);

    for (const ObservationSequence& seq : training) {
        if (seq.start_index < 1) throw FitError("training stream start index must be >= 1");
        for (std::int64_t i = 0; i < seq.size(); ++i) {
            const double y = seq.values[static_cast<std::size_t>(i)];
            family.require_support(y);
            const int b = partition.batch_of(seq.start_index + i);
            sum[b] += y;
            ++count[b];
        }
    }

    Eigen::ArrayXd theta(num_batches);
    for (int e = 0; e < num_batches; ++e) {
        if (count[e] == 0) {
            throw FitError("batch " + std::to_string(e + 1) + " received no training observations");
        }
        theta[e] = sum[e] / static_cast<double>(count[e]);
        if (!family.valid_parameter(theta[e])) {
            throw FitError("batch " + std::to_string(e + 1) + " fit gives invalid parameter " +
                           std::to_string(theta[e]) +
                           (family.kind == FamilyKind::Poisson ? " (all-zero Poisson batch?)" : ""));
        }
    }
    return theta;
}

}  // namespace cyclodet
