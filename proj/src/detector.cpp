#include "cyclodet/detector.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cyclodet/family.hpp"

namespace cyclodet {

namespace {

void check_pairing(const IpidModel& model, const PostChangeGrid& grid,
                   const DetectorOptions& options, double threshold) {
    if (grid.num_batches() != model.num_batches())
        throw std::invalid_argument("grid covers " + std::to_string(grid.num_batches()) +
                                    " batches but the model has " +
                                    std::to_string(model.num_batches()));
    for (int e = 0; e < model.num_batches(); ++e) {
        const Eigen::ArrayXd& lams = grid.alternatives(e);
        if ((lams - model.baseline()[e]).abs().minCoeff() < grid.epsilon())
            throw std::invalid_argument("grid for batch " + std::to_string(e + 1) +
                                        " sits closer than epsilon to this model's baseline");
    }
    if (std::isnan(threshold)) throw std::invalid_argument("threshold must not be NaN");
    if (options.start_index < 1) throw std::invalid_argument("start index must be >= 1");
    if (options.product_cap < 1) throw std::invalid_argument("product cap must be >= 1");
    if (options.window && *options.window < 1)
        throw std::invalid_argument("window must be >= 1");
}

// Increments for the batch owning the current sample; llr() rejects
// out-of-support observations before any detector state is touched.
Eigen::ArrayXd batch_increments(const IpidModel& model, const PostChangeGrid& grid, int batch,
                                double y) {
    const double theta = model.baseline()[batch];
    const Eigen::ArrayXd& lams = grid.alternatives(batch);
    Eigen::ArrayXd inc(lams.size());
    for (Eigen::Index j = 0; j < lams.size(); ++j)
        inc[j] = llr(model.family(), theta, lams[j], y);
    return inc;
}

}  // namespace

SingleBatchDetector::SingleBatchDetector(IpidModel model, PostChangeGrid grid, double threshold,
                                         DetectorOptions options)
    : model_(std::move(model)),
      grid_(std::move(grid)),
      threshold_(threshold),
      options_(options),
      clock_(options.start_index) {
    check_pairing(model_, grid_, options_, threshold_);
    cells_.reserve(model_.num_batches());
    for (int e = 0; e < model_.num_batches(); ++e)
        cells_.push_back(Eigen::ArrayXd::Zero(grid_.alternatives(e).size()));
}

double SingleBatchDetector::advance(double y) {
    const int e = model_.partition().batch_of(clock_);
    const Eigen::ArrayXd inc = batch_increments(model_, grid_, e, y);
    for (int f = 0; f < model_.num_batches(); ++f) {
        if (f == e)
            cells_[f] = cells_[f].max(0.0) + inc;
        else
            cells_[f] = cells_[f].max(0.0);
    }
    ++clock_;
    const double s = statistic();
    if (options_.record_trajectory) trajectory_.emplace_back(clock_ - 1, s);
    return s;
}

std::optional<DetectionResult> SingleBatchDetector::step(double y) {
    if (fired_) throw std::logic_error("detector already fired; reset it before stepping");
    advance(y);
    if (statistic() > threshold_) {
        fired_ = true;
        return make_result();
    }
    return std::nullopt;
}

double SingleBatchDetector::statistic() const {
    double s = -std::numeric_limits<double>::infinity();
    for (const Eigen::ArrayXd& w : cells_) s = std::max(s, w.maxCoeff());
    return s;
}

DetectionResult SingleBatchDetector::make_result() const {
    DetectionResult r;
    r.fired = true;
    r.stopping_time = clock_ - 1;
    r.statistic_at_stop = statistic();
    int best_batch = 0;
    Eigen::Index best_cell = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int e = 0; e < model_.num_batches(); ++e) {
        for (Eigen::Index j = 0; j < cells_[e].size(); ++j) {
            if (cells_[e][j] > best) {  // strict: first maximum wins the tie-break
                best = cells_[e][j];
                best_batch = e;
                best_cell = j;
            }
        }
    }
    r.arg_batch = best_batch;
    r.arg_lambda = Eigen::ArrayXd::Constant(1, grid_.alternatives(best_batch)[best_cell]);
    r.trajectory = trajectory_;
    return r;
}

void SingleBatchDetector::reset(std::int64_t start_index) {
    if (start_index < 1) throw std::invalid_argument("start index must be >= 1");
    for (Eigen::ArrayXd& w : cells_) w.setZero();
    clock_ = start_index;
    fired_ = false;
    trajectory_.clear();
}

AllBatchDetector::AllBatchDetector(IpidModel model, PostChangeGrid grid, double threshold,
                                   DetectorOptions options)
    : model_(std::move(model)),
      grid_(std::move(grid)),
      threshold_(threshold),
      options_(options),
      clock_(options.start_index) {
    check_pairing(model_, grid_, options_, threshold_);
    if (options_.window) {
        mode_ = Mode::Windowed;
        window_ = *options_.window;
    } else if (grid_.product_cells() <= options_.product_cap) {
        mode_ = Mode::ExactProduct;
    } else {
        mode_ = Mode::Windowed;
        window_ = 2 * model_.period();
    }
    if (mode_ == Mode::ExactProduct) {
        const int cells = static_cast<int>(grid_.product_cells());
        product_w_ = Eigen::ArrayXd::Zero(cells);
        component_.assign(model_.num_batches(), std::vector<int>(cells));
        // Batch 0 is the most significant digit of the cell index.
        std::int64_t stride = cells;
        for (int e = 0; e < model_.num_batches(); ++e) {
            const int size = static_cast<int>(grid_.alternatives(e).size());
            stride /= size;
            for (int i = 0; i < cells; ++i)
                component_[e][i] = static_cast<int>((i / stride) % size);
        }
    } else {
        offset_.resize(model_.num_batches());
        int off = 0;
        for (int e = 0; e < model_.num_batches(); ++e) {
            offset_[e] = off;
            off += static_cast<int>(grid_.alternatives(e).size());
        }
    }
}

double AllBatchDetector::advance(double y) {
    const int e = model_.partition().batch_of(clock_);
    const Eigen::ArrayXd inc = batch_increments(model_, grid_, e, y);
    if (mode_ == Mode::ExactProduct) {
        // Every sample belongs to some batch, so each lambda-vector cell gets a
        // (generally nonzero) increment: the per-cell sums have no gaps.
        Eigen::ArrayXd cell_inc(product_w_.size());
        for (Eigen::Index i = 0; i < product_w_.size(); ++i)
            cell_inc[i] = inc[component_[e][i]];
        product_w_ = product_w_.max(0.0) + cell_inc;
    } else {
        columns_.push_back(Eigen::ArrayXd::Zero(grid_.total_cells()));
        for (Eigen::ArrayXd& col : columns_)
            col.segment(offset_[e], inc.size()) += inc;
        while (static_cast<std::int64_t>(columns_.size()) > window_) columns_.pop_front();
    }
    ++clock_;
    const double s = statistic();
    if (options_.record_trajectory) trajectory_.emplace_back(clock_ - 1, s);
    return s;
}

std::optional<DetectionResult> AllBatchDetector::step(double y) {
    if (fired_) throw std::logic_error("detector already fired; reset it before stepping");
    advance(y);
    if (statistic() > threshold_) {
        fired_ = true;
        return make_result();
    }
    return std::nullopt;
}

double AllBatchDetector::column_statistic(const Eigen::ArrayXd& column) const {
    double s = 0.0;
    for (int e = 0; e < model_.num_batches(); ++e)
        s += column.segment(offset_[e], grid_.alternatives(e).size()).maxCoeff();
    return s;
}

double AllBatchDetector::statistic() const {
    if (mode_ == Mode::ExactProduct) return product_w_.maxCoeff();
    if (columns_.empty()) return 0.0;
    double s = -std::numeric_limits<double>::infinity();
    for (const Eigen::ArrayXd& col : columns_) s = std::max(s, column_statistic(col));
    return s;
}

Eigen::ArrayXd AllBatchDetector::argmax_lambdas() const {
    Eigen::ArrayXd lams(model_.num_batches());
    if (mode_ == Mode::ExactProduct) {
        Eigen::Index best = 0;
        product_w_.maxCoeff(&best);
        for (int e = 0; e < model_.num_batches(); ++e)
            lams[e] = grid_.alternatives(e)[component_[e][best]];
    } else {
        const Eigen::ArrayXd* best_col = &columns_.front();
        double best = -std::numeric_limits<double>::infinity();
        for (const Eigen::ArrayXd& col : columns_) {
            const double s = column_statistic(col);
            if (s > best) {
                best = s;
                best_col = &col;
            }
        }
        for (int e = 0; e < model_.num_batches(); ++e) {
            Eigen::Index j = 0;
            best_col->segment(offset_[e], grid_.alternatives(e).size()).maxCoeff(&j);
            lams[e] = grid_.alternatives(e)[j];
        }
    }
    return lams;
}

DetectionResult AllBatchDetector::make_result() const {
    DetectionResult r;
    r.fired = true;
    r.stopping_time = clock_ - 1;
    r.statistic_at_stop = statistic();
    r.arg_batch = -1;
    r.arg_lambda = argmax_lambdas();
    r.trajectory = trajectory_;
    return r;
}

void AllBatchDetector::reset(std::int64_t start_index) {
    if (start_index < 1) throw std::invalid_argument("start index must be >= 1");
    if (mode_ == Mode::ExactProduct)
        product_w_.setZero();
    else
        columns_.clear();
    clock_ = start_index;
    fired_ = false;
    trajectory_.clear();
}

double AnyDetector::advance(double y) {
    return std::visit([&](auto& d) { return d.advance(y); }, impl_);
}

std::optional<DetectionResult> AnyDetector::step(double y) {
    return std::visit([&](auto& d) { return d.step(y); }, impl_);
}

void AnyDetector::reset(std::int64_t start_index) {
    std::visit([&](auto& d) { d.reset(start_index); }, impl_);
}

double AnyDetector::statistic() const {
    return std::visit([](const auto& d) { return d.statistic(); }, impl_);
}

bool AnyDetector::fired() const {
    return std::visit([](const auto& d) { return d.fired(); }, impl_);
}

std::int64_t AnyDetector::clock() const {
    return std::visit([](const auto& d) { return d.clock(); }, impl_);
}

DetectorKind AnyDetector::kind() const {
    return std::holds_alternative<SingleBatchDetector>(impl_) ? DetectorKind::SingleBatch
                                                              : DetectorKind::AllBatch;
}

AnyDetector make_detector(DetectorKind kind, const IpidModel& model, const PostChangeGrid& grid,
                          double threshold, DetectorOptions options) {
    if (kind == DetectorKind::SingleBatch)
        return AnyDetector(SingleBatchDetector(model, grid, threshold, options));
    return AnyDetector(AllBatchDetector(model, grid, threshold, options));
}

bool statistic_bounds_check(AllBatchDetector& all, SingleBatchDetector& single,
                            const ObservationSequence& prefix, double slack) {
    if (!all.model().same_shape(single.model()) || !(all.grid() == single.grid()))
        throw std::invalid_argument("bounds check requires detectors with identical model and grid");
    if (all.clock() != prefix.start_index || single.clock() != prefix.start_index)
        throw std::invalid_argument("bounds check requires both detectors clocked at the prefix start");

    const IpidModel& model = all.model();
    const PostChangeGrid& grid = all.grid();
    // Fixed-lambda sums from the first prefix sample onward, one per (e, lambda).
    std::vector<Eigen::ArrayXd> from_start;
    from_start.reserve(model.num_batches());
    for (int e = 0; e < model.num_batches(); ++e)
        from_start.push_back(Eigen::ArrayXd::Zero(grid.alternatives(e).size()));

    std::int64_t k = prefix.start_index;
    for (double y : prefix.values) {
        const int e = model.partition().batch_of(k);
        from_start[e] += batch_increments(model, grid, e, y);
        const double w = all.advance(y);
        single.advance(y);
        double lower = 0.0;
        double upper = 0.0;
        for (int f = 0; f < model.num_batches(); ++f) {
            lower += from_start[f].maxCoeff();
            upper += single.batch_statistic(f);
        }
        if (lower > w + slack || w > upper + slack) return false;
        ++k;
    }
    return true;
}

}  // namespace cyclodet
