#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cyclodet/model.hpp"

namespace cyclodet {

enum class GapPolicy { Error, Zero, Hold };

struct IngestOptions {
    bool require_integers = false;      // Poisson strict mode: fractional counts are errors
    bool round_counts = false;          // ... unless rounding was requested explicitly
    GapPolicy gaps = GapPolicy::Error;  // missing indices: hard error unless filling opted in
    std::int64_t interval_seconds = 3;  // timestamp-to-index mapping
    std::string label;                  // modality name for error messages
};

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reads `index,value` or `timestamp,value` rows into an ObservationSequence.
/// Indices must be positive and consecutive (gap policy above); timestamps must
/// be nonnegative exact multiples of interval_seconds and map to index
/// ts/interval + 1. Errors carry the 1-based line number.
ObservationSequence ingest_csv(const std::string& path, const IngestOptions& options = {});

/// Writes `index,value` rows; inverse of ingest_csv for integer counts.
void write_counts_csv(const std::string& path, const ObservationSequence& seq);

/// Mean over each length-`window` slice: output[j] = mean(values[j..j+window-1]).
/// Visualization helper only — detectors always consume raw counts. A window
/// longer than the sequence yields an empty output (with a warning on stderr).
std::vector<double> sliding_average(const ObservationSequence& seq, std::int64_t window);

}  // namespace cyclodet
