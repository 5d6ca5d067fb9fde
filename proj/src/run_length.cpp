#include "cyclodet/run_length.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cyclodet/family.hpp"
#include "cyclodet/rng.hpp"

namespace cyclodet {

void CalibrationConfig::validate() const {
    if (!(beta > 1.0)) throw std::invalid_argument("beta: must be > 1");
    if (method == CalibrationMethod::MonteCarloBisection) {
        if (reps < 100) throw std::invalid_argument("reps: bisection needs >= 100");
        if (static_cast<double>(horizon) < 10.0 * beta)
            throw std::invalid_argument("horizon: bisection needs >= 10*beta");
        if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance: must be > 0");
    }
}

AnyDetector instantiate(const DetectorTemplate& tmpl, const IpidModel& model, double threshold) {
    DetectorOptions options = tmpl.options;
    options.start_index = 1;
    options.record_trajectory = false;
    return make_detector(tmpl.kind, model, tmpl.grid, threshold, options);
}

double calibrate_threshold(const CalibrationConfig& config) {
    config.validate();
    if (config.method != CalibrationMethod::LogBeta)
        throw std::invalid_argument("method: Monte Carlo calibration needs a model; use calibrate_threshold_mc");
    return std::log(config.beta);
}

namespace {

RunLengthEstimate run_replications(const IpidModel& model, const DetectorTemplate& tmpl,
                                   const ChangeSpec& change, double threshold, std::int64_t reps,
                                   std::int64_t horizon, std::uint64_t seed) {
    if (reps < 1) throw std::invalid_argument("reps: must be >= 1");
    if (horizon < 1) throw std::invalid_argument("horizon: must be >= 1");
    RunLengthEstimate est;
    est.replications = reps;
    est.horizon = horizon;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::int64_t r = 0; r < reps; ++r) {
        StreamSampler sampler(model, change, derive_seed(seed, static_cast<std::uint64_t>(r)));
        AnyDetector det = instantiate(tmpl, model, threshold);
        std::int64_t tau = horizon;
        bool stopped = false;
        for (std::int64_t n = 1; n <= horizon; ++n) {
            if (auto res = det.step(sampler.next())) {
                tau = res->stopping_time;
                stopped = true;
                break;
            }
        }
        if (!stopped) ++est.censored;
        const double t = static_cast<double>(tau);
        sum += t;
        sum_sq += t * t;
    }
    const double n = static_cast<double>(reps);
    est.mean = sum / n;
    if (reps > 1) {
        const double var = (sum_sq - n * est.mean * est.mean) / (n - 1.0);
        est.std_error = std::sqrt(std::max(var, 0.0) / n);
    }
    return est;
}

}  // namespace

RunLengthEstimate estimate_mtfa(const IpidModel& model, const DetectorTemplate& tmpl, double threshold,
                                std::int64_t reps, std::int64_t horizon, std::uint64_t seed) {
    return run_replications(model, tmpl, ChangeSpec::none(), threshold, reps, horizon, seed);
}

RunLengthEstimate estimate_delay(const IpidModel& model, const DetectorTemplate& tmpl,
                                 const ChangeSpec& change, double threshold, std::int64_t reps,
                                 std::int64_t horizon, std::uint64_t seed) {
    if (change.mode() == ChangeMode::None || change.gamma() == ChangeSpec::kNever)
        throw std::invalid_argument("change: delay estimation needs a finite change point");
    change.validate_against(model);
    return run_replications(model, tmpl, change, threshold, reps, horizon, seed);
}

double calibrate_threshold_mc(const IpidModel& model, const DetectorTemplate& tmpl,
                              const CalibrationConfig& config) {
    CalibrationConfig cfg = config;
    cfg.method = CalibrationMethod::MonteCarloBisection;
    cfg.validate();
    const double beta = cfg.beta;
    // Same seed for every evaluation: common random numbers make the empirical
    // MTFA monotone in A, so bisection is well behaved.
    auto mtfa_at = [&](double a) {
        return estimate_mtfa(model, tmpl, a, cfg.reps, cfg.horizon, cfg.seed).mean;
    };

    double lo = std::log(beta) / 2.0;
    double hi = 4.0 * std::log(beta);
    double mtfa_lo = mtfa_at(lo);
    double mtfa_hi = mtfa_at(hi);
    for (int i = 0; i < 8 && mtfa_hi < beta; ++i) {
        hi *= 2.0;
        mtfa_hi = mtfa_at(hi);
    }
    for (int i = 0; i < 8 && mtfa_lo >= beta; ++i) {
        lo /= 2.0;
        mtfa_lo = mtfa_at(lo);
    }
    if (mtfa_hi < beta || mtfa_lo >= beta) {
        std::ostringstream msg;
        msg << "calibration bracket failed to straddle beta=" << beta << ": MTFA(" << lo
            << ")=" << mtfa_lo << ", MTFA(" << hi << ")=" << mtfa_hi
            << " over " << cfg.reps << " reps, horizon " << cfg.horizon;
        throw std::runtime_error(msg.str());
    }

    for (int i = 0; i < 60 && hi - lo > 1e-6; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double m = mtfa_at(mid);
        if (m < beta) {
            lo = mid;
        } else {
            hi = mid;
            if (m <= (1.0 + cfg.tolerance) * beta) return mid;
        }
    }
    return hi;  // smallest evaluated threshold with MTFA >= beta
}

double kappa_factor(const BatchPartition& partition, int batch) {
    if (batch < 0 || batch >= partition.num_batches())
        throw std::invalid_argument("batch: out of range");
    double kappa = 1.0;
    const double own = static_cast<double>(partition.batch_size(batch));
    for (int f = 0; f < partition.num_batches(); ++f)
        if (f != batch) kappa += static_cast<double>(partition.batch_size(f)) / own;
    return kappa;
}

double average_kl(const IpidModel& model, const Eigen::ArrayXd& lambdas) {
    if (lambdas.size() != model.num_batches())
        throw std::invalid_argument("lambdas: need one post-change parameter per batch");
    double sum = 0.0;
    for (int e = 0; e < model.num_batches(); ++e)
        sum += static_cast<double>(model.partition().batch_size(e)) *
               kl_divergence(model.family(), lambdas[e], model.baseline()[e]);
    return sum / static_cast<double>(model.period());
}

double theoretical_delay_bound(const DistributionFamily& family, const BatchPartition& partition,
                               int batch, double lambda, double theta, double beta) {
    if (!(beta > 1.0)) throw std::domain_error("beta: must be > 1");
    const double info = kl_divergence(family, lambda, theta);
    if (info <= 0.0) throw std::domain_error("lambda: coincides with theta, zero information");
    return std::log(beta) * kappa_factor(partition, batch) / info;
}

EfficiencyReport efficiency_report(const IpidModel& model, const DetectorTemplate& tmpl,
                                   const ChangeSpec& change, const std::vector<double>& betas,
                                   const EfficiencyOptions& options) {
    if (betas.empty()) throw std::invalid_argument("betas: need at least one budget");
    for (double b : betas)
        if (!(b > 1.0)) throw std::invalid_argument("betas: every budget must be > 1");
    change.validate_against(model);
    if (change.mode() == ChangeMode::None)
        throw std::invalid_argument("change: efficiency needs a real change");

    EfficiencyReport rep;
    if (change.mode() == ChangeMode::SingleBatch) {
        rep.kappa = kappa_factor(model.partition(), change.batch());
        rep.i_bar = kl_divergence(model.family(), change.lambda(), model.baseline()[change.batch()]);
    } else {
        rep.kappa = 1.0;
        rep.i_bar = average_kl(model, change.lambdas());
    }
    rep.theory_slope = rep.kappa / rep.i_bar;

    bool censor_ok = true;
    bool mtfa_ok = true;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        const double beta = betas[i];
        const double a = std::log(beta);
        rep.betas.push_back(beta);
        rep.thresholds.push_back(a);
        const auto mtfa_horizon =
            static_cast<std::int64_t>(std::llround(std::max(100.0, options.mtfa_horizon_factor * beta)));
        const auto delay_horizon = static_cast<std::int64_t>(std::llround(
            std::max(1000.0, options.delay_horizon_factor * a * rep.theory_slope)));
        rep.mtfa.push_back(estimate_mtfa(model, tmpl, a, options.reps, mtfa_horizon,
                                         derive_seed(options.seed, 2 * i)));
        rep.delay.push_back(estimate_delay(model, tmpl, change, a, options.reps, delay_horizon,
                                           derive_seed(options.seed, 2 * i + 1)));
        if (rep.mtfa.back().mean < beta) mtfa_ok = false;
        const double max_censored = 0.20 * static_cast<double>(options.reps);
        if (static_cast<double>(rep.mtfa.back().censored) > max_censored ||
            static_cast<double>(rep.delay.back().censored) > max_censored)
            censor_ok = false;
    }

    // Least-squares slope of delay against ln beta.
    const auto n = static_cast<Eigen::Index>(betas.size());
    Eigen::ArrayXd x(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x[i] = rep.thresholds[static_cast<std::size_t>(i)];
        y[i] = rep.delay[static_cast<std::size_t>(i)].mean;
    }
    const double denom = ((x - x.mean()) * (x - x.mean())).sum();
    rep.slope_fit = denom > 0.0 ? ((x - x.mean()) * (y - y.mean())).sum() / denom : 0.0;

    rep.pass = mtfa_ok && censor_ok && rep.slope_fit <= 1.5 * rep.theory_slope;
    return rep;
}

}  // namespace cyclodet
