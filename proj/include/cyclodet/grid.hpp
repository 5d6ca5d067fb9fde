#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "cyclodet/model.hpp"

namespace cyclodet {

/// Finite post-change alternatives per batch. Every alternative must sit at
/// least epsilon away from the paired model's baseline parameter.
class PostChangeGrid {
public:
    PostChangeGrid(const IpidModel& model, std::vector<Eigen::ArrayXd> per_batch, double epsilon);

    /// Symmetric multiplicative grid: Lambda^e = { m * theta^e : m in multipliers }.
    static PostChangeGrid multiplicative(const IpidModel& model, std::span<const double> multipliers,
                                         double epsilon);

    int num_batches() const { return static_cast<int>(per_batch_.size()); }
    const Eigen::ArrayXd& alternatives(int batch) const { return per_batch_[batch]; }
    double epsilon() const { return epsilon_; }

    /// Total number of (batch, lambda) cells, sum of per-batch grid sizes.
    std::int64_t total_cells() const;
    /// Size of the product grid prod_e |Lambda^e| (saturates at int64 max).
    std::int64_t product_cells() const;

    bool operator==(const PostChangeGrid& other) const;

private:
    std::vector<Eigen::ArrayXd> per_batch_;
    double epsilon_;
};

}  // namespace cyclodet
