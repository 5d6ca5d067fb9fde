#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <deque>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "cyclodet/grid.hpp"
#include "cyclodet/model.hpp"

namespace cyclodet {

/// One step of the change-time maximization: max(w, 0) + ell. Applying this n
/// times from 0 with increments l_1..l_n yields max over 1<=k<=n of the suffix
/// sum l_k + ... + l_n (out-of-batch steps pass ell = 0).
inline double cusum_update(double w, double ell) { return (w > 0.0 ? w : 0.0) + ell; }

struct DetectionResult {
    bool fired = false;
    std::int64_t stopping_time = 0;     // global sample index tau
    double statistic_at_stop = 0.0;
    int arg_batch = -1;                 // 0-based maximal batch; -1 for all-batch detectors
    Eigen::ArrayXd arg_lambda;          // maximizing alternative (one entry per changed batch)
    std::vector<std::pair<std::int64_t, double>> trajectory;  // (n, statistic), when recorded
};

struct DetectorOptions {
    std::optional<std::int64_t> window;   // forces the window-limited all-batch mode
    std::int64_t product_cap = 4096;      // largest product grid run exactly
    std::int64_t start_index = 1;
    bool record_trajectory = false;
};

/// Bank of per-(batch, lambda) CUSUM statistics. The bank statistic for batch e
/// is W_n^e = max over lambda of the (e, lambda) cell; the detector fires as
/// soon as any batch statistic exceeds the threshold.
class SingleBatchDetector {
public:
    SingleBatchDetector(IpidModel model, PostChangeGrid grid, double threshold,
                        DetectorOptions options = {});

    /// Update statistics with the next observation, ignoring the threshold.
    /// Returns the current statistic max_e W_n^e.
    double advance(double y);

    /// Stopping-rule step: advance, then fire on threshold crossing. Throws
    /// std::logic_error if the detector already fired and was not reset.
    std::optional<DetectionResult> step(double y);

    void reset(std::int64_t start_index = 1);

    double statistic() const;
    double batch_statistic(int batch) const { return cells_[batch].maxCoeff(); }
    double threshold() const { return threshold_; }
    bool fired() const { return fired_; }
    std::int64_t clock() const { return clock_; }  // global index of the next sample
    const IpidModel& model() const { return model_; }
    const PostChangeGrid& grid() const { return grid_; }
    const std::vector<std::pair<std::int64_t, double>>& trajectory() const { return trajectory_; }

private:
    DetectionResult make_result() const;

    IpidModel model_;
    PostChangeGrid grid_;
    double threshold_;
    DetectorOptions options_;
    std::vector<Eigen::ArrayXd> cells_;  // cells_[e][j]: CUSUM for (batch e, Lambda^e[j])
    std::int64_t clock_;
    bool fired_ = false;
    std::vector<std::pair<std::int64_t, double>> trajectory_;
};

/// Detector for changes affecting every batch. Runs one CUSUM per post-change
/// vector of the product grid when that grid is small enough; otherwise falls
/// back to a window-limited GLR over recent candidate change times, which
/// lower-bounds the exact statistic and matches it when the window covers the
/// whole past.
class AllBatchDetector {
public:
    enum class Mode { ExactProduct, Windowed };

    AllBatchDetector(IpidModel model, PostChangeGrid grid, double threshold,
                     DetectorOptions options = {});

    double advance(double y);
    std::optional<DetectionResult> step(double y);
    void reset(std::int64_t start_index = 1);

    double statistic() const;
    double threshold() const { return threshold_; }
    Mode mode() const { return mode_; }
    std::int64_t window() const { return window_; }  // meaningful in Windowed mode
    bool fired() const { return fired_; }
    std::int64_t clock() const { return clock_; }
    const IpidModel& model() const { return model_; }
    const PostChangeGrid& grid() const { return grid_; }
    const std::vector<std::pair<std::int64_t, double>>& trajectory() const { return trajectory_; }

private:
    DetectionResult make_result() const;
    Eigen::ArrayXd argmax_lambdas() const;
    double column_statistic(const Eigen::ArrayXd& column) const;

    IpidModel model_;
    PostChangeGrid grid_;
    double threshold_;
    DetectorOptions options_;
    Mode mode_;
    std::int64_t window_ = 0;

    // ExactProduct: one CUSUM per lambda-vector, enumerated with batch 0 as the
    // most significant digit. component_[e][i] is the Lambda^e index of cell i.
    Eigen::ArrayXd product_w_;
    std::vector<std::vector<int>> component_;

    // Windowed: columns_[j] holds, for candidate change time k_j, the per-cell
    // sums S_e(k_j, n, lambda) laid out batch-contiguously; offset_[e] is the
    // first cell of batch e.
    std::deque<Eigen::ArrayXd> columns_;
    std::vector<int> offset_;

    std::int64_t clock_;
    bool fired_ = false;
    std::vector<std::pair<std::int64_t, double>> trajectory_;
};

enum class DetectorKind { SingleBatch, AllBatch };

/// Uniform handle over the two detector types.
class AnyDetector {
public:
    AnyDetector(SingleBatchDetector d) : impl_(std::move(d)) {}
    AnyDetector(AllBatchDetector d) : impl_(std::move(d)) {}

    double advance(double y);
    std::optional<DetectionResult> step(double y);
    void reset(std::int64_t start_index = 1);
    double statistic() const;
    bool fired() const;
    std::int64_t clock() const;
    DetectorKind kind() const;

private:
    std::variant<SingleBatchDetector, AllBatchDetector> impl_;
};

AnyDetector make_detector(DetectorKind kind, const IpidModel& model, const PostChangeGrid& grid,
                          double threshold, DetectorOptions options = {});

/// Pathwise sandwich of the all-batch statistic: checks, at every prefix
/// length, sum_e (best fixed-lambda full sum from k = 1) <= W_n <= sum_e W_n^e
/// within the slack. Both detectors consume the prefix (thresholds are ignored
/// while checking). Throws std::invalid_argument when the detectors disagree
/// on model, grid, or clock, or when the clock does not match the prefix.
bool statistic_bounds_check(AllBatchDetector& all, SingleBatchDetector& single,
                            const ObservationSequence& prefix, double slack = 1e-9);

}  // namespace cyclodet
