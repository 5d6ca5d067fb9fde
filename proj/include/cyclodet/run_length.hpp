#pragma once

#include <cstdint>
#include <vector>

#include "cyclodet/detector.hpp"
#include "cyclodet/model.hpp"

namespace cyclodet {

enum class CalibrationMethod { LogBeta, MonteCarloBisection };

struct CalibrationConfig {
    double beta = 0.0;                 // false-alarm budget: target E_inf[tau] >= beta
    CalibrationMethod method = CalibrationMethod::LogBeta;
    std::int64_t reps = 2000;          // bisection only
    std::int64_t horizon = 0;          // bisection only; must cover >= 10*beta
    double tolerance = 0.10;           // bisection stops once MTFA <= (1+tolerance)*beta
    std::uint64_t seed = 1;

    void validate() const;  // throws std::invalid_argument naming the bad field
};

struct RunLengthEstimate {
    double mean = 0.0;
    double std_error = 0.0;        // sample standard deviation / sqrt(replications)
    std::int64_t replications = 0;
    std::int64_t censored = 0;     // runs that hit the horizon without stopping
    std::int64_t horizon = 0;
};

/// Recipe for building a fresh detector per replication; the grid is copied in
/// so a template is self-contained next to its model.
struct DetectorTemplate {
    DetectorKind kind = DetectorKind::SingleBatch;
    PostChangeGrid grid;
    DetectorOptions options;
};

AnyDetector instantiate(const DetectorTemplate& tmpl, const IpidModel& model, double threshold);

/// LogBeta design rule: A = ln beta. Monte Carlo configs must go through
/// calibrate_threshold_mc (this overload throws for them).
double calibrate_threshold(const CalibrationConfig& config);

/// Bisection on the empirical MTFA with common random numbers: returns A with
/// estimated MTFA in [beta, (1+tolerance)*beta], or the smallest bracketed A
/// meeting MTFA >= beta when the bracket collapses first. The initial bracket
/// [ln beta / 2, 4 ln beta] is expanded on both sides before giving up; a
/// bracket that never straddles beta raises std::runtime_error with the
/// observed endpoint MTFAs.
double calibrate_threshold_mc(const IpidModel& model, const DetectorTemplate& tmpl,
                              const CalibrationConfig& config);

/// Mean run length to false alarm over `reps` independent no-change streams.
/// Censored runs contribute the horizon value, biasing the mean downward; the
/// censored count is reported so callers can judge.
RunLengthEstimate estimate_mtfa(const IpidModel& model, const DetectorTemplate& tmpl, double threshold,
                                std::int64_t reps, std::int64_t horizon, std::uint64_t seed);

/// Mean stopping time under `change` (gamma = 1 gives the detection delay
/// E_1[tau]); same censoring convention as estimate_mtfa.
RunLengthEstimate estimate_delay(const IpidModel& model, const DetectorTemplate& tmpl,
                                 const ChangeSpec& change, double threshold, std::int64_t reps,
                                 std::int64_t horizon, std::uint64_t seed);

/// kappa = 1 + sum_{f != e} |B_f| / |B_e| for 0-based changed batch e.
double kappa_factor(const BatchPartition& partition, int batch);

/// I-bar = (1/T) sum_e |B_e| * KL(lambda^e, theta^e), the per-sample
/// information of an all-batch change.
double average_kl(const IpidModel& model, const Eigen::ArrayXd& lambdas);

/// First-order delay bound ln(beta) * kappa / KL(lambda, theta) for a change
/// confined to batch e (0-based).
double theoretical_delay_bound(const DistributionFamily& family, const BatchPartition& partition,
                               int batch, double lambda, double theta, double beta);

struct EfficiencyReport {
    std::vector<double> betas;
    std::vector<double> thresholds;            // A = ln beta per budget
    std::vector<RunLengthEstimate> mtfa;
    std::vector<RunLengthEstimate> delay;      // change at gamma = 1
    double slope_fit = 0.0;                    // least-squares slope of delay vs ln beta
    double theory_slope = 0.0;                 // kappa / I (single-batch) or 1 / I-bar (all-batch)
    double kappa = 0.0;                        // 1 for all-batch reports
    double i_bar = 0.0;                        // KL(lambda, theta) or I-bar
    bool pass = false;
};

struct EfficiencyOptions {
    std::int64_t reps = 1000;
    std::uint64_t seed = 1;
    double mtfa_horizon_factor = 20.0;   // MTFA horizon = factor * beta
    double delay_horizon_factor = 50.0;  // delay horizon = factor * theory bound
};

/// Runs the budget sweep and grades it: PASS requires every MTFA point
/// estimate >= beta, fitted slope <= 1.5 * theory slope, and censoring <= 20%
/// on every estimate.
EfficiencyReport efficiency_report(const IpidModel& model, const DetectorTemplate& tmpl,
                                   const ChangeSpec& change, const std::vector<double>& betas,
                                   const EfficiencyOptions& options = {});

}  // namespace cyclodet
