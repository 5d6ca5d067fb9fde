#include "cyclodet/grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cyclodet {

PostChangeGrid::PostChangeGrid(const IpidModel& model, std::vector<Eigen::ArrayXd> per_batch,
                               double epsilon)
    : per_batch_(std::move(per_batch)), epsilon_(epsilon) {
    if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_)) {
        throw std::invalid_argument("grid epsilon must be a positive real, got " +
                                    std::to_string(epsilon_));
    }
    if (static_cast<int>(per_batch_.size()) != model.num_batches()) {
        throw std::invalid_argument("grid has " + std::to_string(per_batch_.size()) +
                                    " batches, model has " + std::to_string(model.num_batches()));
    }
    for (int e = 0; e < model.num_batches(); ++e) {
        if (per_batch_[e].size() == 0) {
            throw std::invalid_argument("batch " + std::to_string(e + 1) +
                                        " has an empty post-change grid");
        }
        const double theta = model.baseline()[e];
        for (double lambda : per_batch_[e]) {
            model.family().require_parameter(lambda);
            if (std::abs(lambda - theta) < epsilon_) {
                throw std::invalid_argument("post-change parameter " + std::to_string(lambda) +
                                            " for batch " + std::to_string(e + 1) +
                                            " is closer than epsilon=" + std::to_string(epsilon_) +
                                            " to the baseline " + std::to_string(theta));
            }
        }
    }
}

PostChangeGrid PostChangeGrid::multiplicative(const IpidModel& model,
                                              std::span<const double> multipliers, double epsilon) {
    if (multipliers.empty()) {
        throw std::invalid_argument("multiplicative grid needs at least one multiplier");
    }
    std::vector<Eigen::ArrayXd> per_batch;
    per_batch.reserve(static_cast<std::size_t>(model.num_batches()));
    for (int e = 0; e < model.num_batches(); ++e) {
        Eigen::ArrayXd lambdas(static_cast<Eigen::Index>(multipliers.size()));
        for (std::size_t j = 0; j < multipliers.size(); ++j) {
            lambdas[static_cast<Eigen::Index>(j)] = multipliers[j] * model.baseline()[e];
        }
        per_batch.push_back(std::move(lambdas));
    }
    return PostChangeGrid(model, std::move(per_batch), epsilon);
}

std::int64_t PostChangeGrid::total_cells() const {
    std::int64_t total = 0;
    for (const auto& g : per_batch_) total += g.size();
    return total;
}

std::int64_t PostChangeGrid::product_cells() const {
    std::int64_t prod = 1;
    for (const auto& g : per_batch_) {
        if (prod > std::numeric_limits<std::int64_t>::max() / g.size()) {
            return std::numeric_limits<std::int64_t>::max();
        }
        prod *= g.size();
    }
    return prod;
}

bool PostChangeGrid::operator==(const PostChangeGrid& other) const {
    if (epsilon_ != other.epsilon_ || per_batch_.size() != other.per_batch_.size()) return false;
    for (std::size_t e = 0; e < per_batch_.size(); ++e) {
        if (per_batch_[e].size() != other.per_batch_[e].size()) return false;
        if (!(per_batch_[e] == other.per_batch_[e]).all()) return false;
    }
    return true;
}

}  // namespace cyclodet
