#include "cyclodet/partition.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cyclodet {

std::int64_t phase_of(std::int64_t k, std::int64_t period) {
    if (k < 1) throw std::invalid_argument("sample index must be >= 1, got " + std::to_string(k));
    if (period < 1) throw std::invalid_argument("period must be >= 1, got " + std::to_string(period));
    return (k - 1) % period + 1;
}

BatchPartition::BatchPartition(std::int64_t period, std::vector<std::int64_t> boundaries)
    : period_(period), boundaries_(std::move(boundaries)) {
    if (period_ < 1) {
        throw std::invalid_argument("partition period must be >= 1, got " + std::to_string(period_));
    }
    if (boundaries_.empty()) {
        throw std::invalid_argument("partition needs at least one batch boundary");
    }
    std::int64_t prev = 0;
    for (std::int64_t b : boundaries_) {
        if (b <= prev) {
            throw std::invalid_argument("batch boundaries must be strictly increasing positive integers");
        }
        prev = b;
    }
    if (boundaries_.back() != period_) {
        throw std::invalid_argument("last batch boundary (" + std::to_string(boundaries_.back()) +
                                    ") must equal the period (" + std::to_string(period_) + ")");
    }
}

std::int64_t BatchPartition::batch_size(int batch) const {
    if (batch < 0 || batch >= num_batches()) {
        throw std::out_of_range("batch index out of range");
    }
    return boundaries_[batch] - (batch > 0 ? boundaries_[batch - 1] : 0);
}

int BatchPartition::batch_of(std::int64_t k) const {
    return batch_of_phase(phase_of(k, period_));
}

int BatchPartition::batch_of_phase(std::int64_t phase) const {
    if (phase < 1 || phase > period_) {
        throw std::invalid_argument("phase " + std::to_string(phase) + " outside 1.." +
                                    std::to_string(period_));
    }
    auto it = std::lower_bound(boundaries_.begin(), boundaries_.end(), phase);
    return static_cast<int>(it - boundaries_.begin());
}

}  // namespace cyclodet
