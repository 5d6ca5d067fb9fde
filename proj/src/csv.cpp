#include "cyclodet/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cyclodet {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const IngestOptions& options, const std::string& path, const std::string& what) {
    std::string where = "csv " + path;
    if (!options.label.empty()) where += " (" + options.label + ")";
    throw CsvError(where + ": " + what);
}

std::int64_t parse_int(const IngestOptions& options, const std::string& path, int line,
                       const std::string& token, const char* what) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(token, &pos);
        if (pos != token.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        fail(options, path, std::string("malformed ") + what + " '" + token + "' at line " +
                                std::to_string(line));
    }
}

double parse_value(const IngestOptions& options, const std::string& path, int line,
                   const std::string& token) {
    double v = 0.0;
    try {
        std::size_t pos = 0;
        v = std::stod(token, &pos);
        if (pos != token.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
        fail(options, path, "malformed value '" + token + "' at line " + std::to_string(line));
    }
    if (!std::isfinite(v)) fail(options, path, "non-finite value at line " + std::to_string(line));
    if (v < 0.0) fail(options, path, "negative value at line " + std::to_string(line));
    if (options.round_counts) {
        v = std::nearbyint(v);
    } else if (options.require_integers && v != std::floor(v)) {
        fail(options, path,
             "non-integer count at line " + std::to_string(line) +
                 " (counts must be integers; pass --round-counts to round)");
    }
    return v;
}

}  // namespace

ObservationSequence ingest_csv(const std::string& path, const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) fail(options, path, "not readable");
    if (options.interval_seconds < 1) fail(options, path, "interval_seconds must be >= 1");

    std::string line;
    if (!std::getline(in, line)) fail(options, path, "missing header row");
    const std::string header = trim(line);
    bool timestamps = false;
    if (header == "timestamp,value")
        timestamps = true;
    else if (header != "index,value")
        fail(options, path,
             "header must be 'index,value' or 'timestamp,value', got '" + header + "' at line 1");

    ObservationSequence seq;
    std::int64_t prev_index = 0;  // 0 = nothing read yet
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string row = trim(line);
        if (row.empty()) continue;
        const std::size_t comma = row.find(',');
        if (comma == std::string::npos || row.find(',', comma + 1) != std::string::npos)
            fail(options, path, "expected two comma-separated fields at line " + std::to_string(line_no));
        const std::string first = trim(row.substr(0, comma));
        const std::string second = trim(row.substr(comma + 1));

        std::int64_t index = 0;
        if (timestamps) {
            const std::int64_t ts = parse_int(options, path, line_no, first, "timestamp");
            if (ts < 0) fail(options, path, "negative timestamp at line " + std::to_string(line_no));
            if (ts % options.interval_seconds != 0)
                fail(options, path,
                     "timestamp " + first + " at line " + std::to_string(line_no) +
                         " is not a multiple of the " + std::to_string(options.interval_seconds) +
                         "s sampling interval");
            index = ts / options.interval_seconds + 1;
        } else {
            index = parse_int(options, path, line_no, first, "index");
            if (index < 1)
                fail(options, path, "index must be positive at line " + std::to_string(line_no));
        }
        const double value = parse_value(options, path, line_no, second);

        if (prev_index == 0) {
            seq.start_index = index;
        } else if (index == prev_index) {
            fail(options, path,
                 "duplicate index " + std::to_string(index) + " at line " + std::to_string(line_no));
        } else if (index < prev_index) {
            fail(options, path,
                 "nonmonotone index " + std::to_string(index) + " at line " + std::to_string(line_no));
        } else if (index > prev_index + 1) {
            switch (options.gaps) {
                case GapPolicy::Error:
                    fail(options, path,
                         "gap between indices " + std::to_string(prev_index) + " and " +
                             std::to_string(index) + " at line " + std::to_string(line_no) +
                             " (pass --fill-gaps zero|hold to impute)");
                case GapPolicy::Zero:
                    seq.values.insert(seq.values.end(), static_cast<std::size_t>(index - prev_index - 1),
                                      0.0);
                    break;
                case GapPolicy::Hold:
                    seq.values.insert(seq.values.end(), static_cast<std::size_t>(index - prev_index - 1),
                                      seq.values.back());
                    break;
            }
        }
        seq.values.push_back(value);
        prev_index = index;
    }
    return seq;
}

void write_counts_csv(const std::string& path, const ObservationSequence& seq) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw CsvError("csv " + path + ": not writable");
    std::fputs("index,value\n", out);
    for (std::int64_t i = 0; i < seq.size(); ++i)
        std::fprintf(out, "%lld,%.15g\n", static_cast<long long>(seq.start_index + i),
                     seq.values[static_cast<std::size_t>(i)]);
    if (std::fclose(out) != 0) throw CsvError("csv " + path + ": write failed");
}

std::vector<double> sliding_average(const ObservationSequence& seq, std::int64_t window) {
    if (window < 1) throw std::invalid_argument("window: must be >= 1");
    const std::int64_t n = seq.size();
    std::vector<double> out;
    if (window > n) {
        std::cerr << "sliding_average: window " << window << " exceeds sequence length " << n
                  << "; returning empty output\n";
        return out;
    }
    out.reserve(static_cast<std::size_t>(n - window + 1));
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        sum += seq.values[static_cast<std::size_t>(i)];
        if (i >= window) sum -= seq.values[static_cast<std::size_t>(i - window)];
        if (i >= window - 1) out.push_back(sum / static_cast<double>(window));
    }
    return out;
}

}  // namespace cyclodet
