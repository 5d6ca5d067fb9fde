#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cyclodet/config.hpp"
#include "cyclodet/csv.hpp"
#include "cyclodet/detector.hpp"
#include "cyclodet/grid.hpp"
#include "cyclodet/model.hpp"

namespace cyclodet {

struct LabeledStream {
    std::string label;
    ObservationSequence stream;
};

struct AlarmRecord {
    std::string modality;
    std::int64_t day = 0;           // 1-based day number
    std::int64_t sample_index = 0;  // global sample index n at the alarm
    double statistic = 0.0;
    int arg_batch = -1;             // 0-based diagnostic; -1 for all-batch detectors
    std::vector<double> arg_lambda;
};

struct DayVerdict {
    std::int64_t day = 0;
    bool alarm = false;
    std::int64_t samples = 0;  // samples consumed during the day
};

struct ModalityResult {
    std::string label;
    std::vector<double> baseline;  // theta the detector actually used
    std::vector<std::pair<std::int64_t, double>> trajectory;  // (n, W_n), one entry per sample
    std::vector<AlarmRecord> alarms;
    std::vector<DayVerdict> days;
};

struct ScenarioOutput {
    // Config echo.
    std::string family;
    std::int64_t period = 0;
    std::vector<std::int64_t> boundaries;
    std::string detector_kind;  // "single" | "all"
    double threshold = 0.0;
    std::string reset;          // "never" | "at-alarm" | "at-day-boundary"
    std::int64_t day_length = 0;  // 0 = whole stream treated as one day

    std::vector<ModalityResult> modalities;

    bool any_alarm() const;
};

/// Everything a modality needs at run time, with overrides applied and
/// baselines fitted from training files where requested.
struct ResolvedModality {
    std::string label;
    IpidModel model;
    PostChangeGrid grid;
    double event_multiplier = 2.0;
    std::string data;  // CSV path for detect runs; may be empty
};

/// File-loading knobs shared by every CSV the scenario touches.
struct IoPolicy {
    bool round_counts = false;
    GapPolicy gaps = GapPolicy::Error;
    std::int64_t interval_seconds = 3;
};

std::vector<std::string> modality_labels(const RunConfig& config);

/// Applies [modality:<label>] overrides on top of [model]/[grid] and fits
/// theta_from files (Poisson training data must be integer counts unless
/// round_counts). Throws ConfigError / CsvError / FitError on bad inputs.
ResolvedModality resolve_modality(const RunConfig& config, const std::string& label,
                                  const IoPolicy& io = {});

/// Explicit threshold, or ln(beta) under the budget design rule.
double resolve_threshold(const RunConfig& config);

/// Baseline scaled by `multiplier` on the selected 0-based batches.
IpidModel scaled_model(const IpidModel& model, const std::vector<int>& batches, double multiplier);

/// Synthetic streams for the configured scenario: `days` periods per modality,
/// the event day (if any) switching to the scaled model from event_gamma
/// onward. Deterministic in (config, seed); sub-seeds are derived per modality
/// segment, so one modality's draws never shift another's.
std::vector<LabeledStream> synthesize_streams(const RunConfig& config, std::uint64_t seed,
                                              const IoPolicy& io = {});

/// Runs every configured modality over its labeled stream: fits/loads the
/// baseline, builds the detector, applies the reset policy day by day, and
/// records trajectories, alarms, and per-day verdicts.
ScenarioOutput run_scenario(const RunConfig& config, const std::vector<LabeledStream>& streams,
                            const IoPolicy& io = {});

}  // namespace cyclodet
