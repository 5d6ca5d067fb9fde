#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cyclodet/detector.hpp"
#include "cyclodet/family.hpp"

namespace cyclodet {

/// Configuration documents are flat INI-style text: [model], [grid],
/// [detector], [scenario], plus optional [modality:<label>] override sections
/// (baselines, grids, data paths that differ per stream). Lists are
/// whitespace- or comma-separated. '#' and ';' start comments.

struct FamilySpec {
    FamilyKind kind = FamilyKind::Poisson;
    double sigma = 1.0;

    DistributionFamily build() const;
};

struct ModelSection {
    std::optional<FamilySpec> family;
    std::optional<std::int64_t> period;
    std::vector<std::int64_t> boundaries;
    std::vector<double> theta;      // explicit baseline; empty = unset
    std::string theta_from;         // training CSV to fit from; empty = unset
};

struct GridSection {
    std::vector<double> multipliers;           // shorthand Lambda^e = {m * theta^e}
    std::vector<std::vector<double>> lambdas;  // explicit lists, keys lambda1..lambdaE
    double epsilon = 1e-6;
};

struct DetectorSection {
    DetectorKind kind = DetectorKind::AllBatch;
    std::optional<double> threshold;   // explicit A
    std::optional<double> beta;        // or a budget, A = ln beta
    std::optional<std::int64_t> window;
    std::int64_t product_cap = 4096;
};

enum class ResetPolicy { Never, AtAlarm, AtDayBoundary };

struct ScenarioSection {
    std::optional<std::int64_t> day_length;  // unset = whole stream is one day
    ResetPolicy reset = ResetPolicy::AtDayBoundary;
    std::vector<std::string> modalities;     // processing order; defaults to section order

    // Synthetic-scenario controls, used by the simulate subcommand.
    std::int64_t days = 1;
    std::int64_t event_day = 0;        // 0 = no event
    std::int64_t event_gamma = 1;      // first affected sample within the event day
    std::vector<int> event_batches;    // 1-based; empty = every batch
    double event_multiplier = 2.0;
    std::uint64_t seed = 1;
};

struct ModalityOverride {
    std::string label;
    std::vector<double> theta;
    std::string theta_from;
    std::vector<double> multipliers;
    std::vector<std::vector<double>> lambdas;
    std::optional<double> event_multiplier;
    std::string data;                  // CSV path for the detect subcommand
};

struct RunConfig {
    ModelSection model;
    GridSection grid;
    DetectorSection detector;
    ScenarioSection scenario;
    std::vector<ModalityOverride> modalities;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses and cross-validates a config document. Violations raise ConfigError
/// naming the offending field and the broken constraint.
RunConfig parse_config(const std::string& text);

RunConfig load_config(const std::string& path);

}  // namespace cyclodet
