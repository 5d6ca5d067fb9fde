#pragma once

#include <cstdint>
#include <vector>

namespace cyclodet {

/// 1-based phase of global sample k within a cycle of length T: ((k-1) mod T) + 1.
/// Phase T maps to the last batch rather than wrapping to 0.
std::int64_t phase_of(std::int64_t k, std::int64_t period);

/// Partition of the phases {1..T} into E contiguous batches. boundaries holds the
/// 1-based inclusive right endpoints N_1 < ... < N_E with N_E == T, so batch e
/// (0-based here; batch e+1 in user-facing text) covers phases (N_{e-1}, N_e].
class BatchPartition {
public:
    BatchPartition(std::int64_t period, std::vector<std::int64_t> boundaries);

    std::int64_t period() const { return period_; }
    int num_batches() const { return static_cast<int>(boundaries_.size()); }
    const std::vector<std::int64_t>& boundaries() const { return boundaries_; }

    std::int64_t batch_size(int batch) const;

    /// 0-based batch containing global sample k (any k >= 1).
    int batch_of(std::int64_t k) const;

    /// 0-based batch containing phase p in 1..T.
    int batch_of_phase(std::int64_t phase) const;

    bool operator==(const BatchPartition& other) const {
        return period_ == other.period_ && boundaries_ == other.boundaries_;
    }

private:
    std::int64_t period_;
    std::vector<std::int64_t> boundaries_;
};

}  // namespace cyclodet
