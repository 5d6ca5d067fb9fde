// cyclodet: change detection for periodic count streams.
//
// Subcommands: fit, detect, simulate, calibrate, evaluate, report.
// Exit codes: 0 = ran without alarm, 2 = ran and raised an alarm, 1 = error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cyclodet/config.hpp"
#include "cyclodet/csv.hpp"
#include "cyclodet/model.hpp"
#include "cyclodet/report.hpp"
#include "cyclodet/run_length.hpp"
#include "cyclodet/scenario.hpp"

namespace {

using nlohmann::json;
using namespace cyclodet;

struct IoFlags {
    bool round_counts = false;
    std::string fill_gaps;  // "", "zero", "hold"
    std::int64_t interval_seconds = 3;

    IoPolicy policy() const {
        IoPolicy io;
        io.round_counts = round_counts;
        if (fill_gaps == "zero")
            io.gaps = GapPolicy::Zero;
        else if (fill_gaps == "hold")
            io.gaps = GapPolicy::Hold;
        io.interval_seconds = interval_seconds;
        return io;
    }
};

void add_io_flags(CLI::App* cmd, IoFlags* flags) {
    cmd->add_flag("--round-counts", flags->round_counts,
                  "Round fractional values instead of rejecting them");
    cmd->add_option("--fill-gaps", flags->fill_gaps, "Impute missing indices: zero or hold")
        ->check(CLI::IsMember({"zero", "hold"}));
    cmd->add_option("--interval-seconds", flags->interval_seconds,
                    "Sampling interval for timestamp,value files (default 3)");
}

void write_or_print(const json& doc, const std::string& out) {
    const std::string text = doc.dump(2) + "\n";
    if (out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        std::ofstream file(out, std::ios::binary);
        if (!file) throw std::runtime_error("cannot write " + out);
        file << text;
        std::cout << "wrote " << out << "\n";
    }
}

ReportFormat parse_format(const std::string& format) {
    return format == "csv" ? ReportFormat::Csv : ReportFormat::Json;
}

void print_summary(const ScenarioOutput& output) {
    for (const ModalityResult& m : output.modalities) {
        if (m.alarms.empty()) {
            std::cout << "modality " << m.label << ": no alarms over " << m.days.size()
                      << " day(s)\n";
            continue;
        }
        for (const AlarmRecord& a : m.alarms) {
            std::cout << "modality " << m.label << ": alarm on day " << a.day << " at n="
                      << a.sample_index << " (W=" << a.statistic;
            if (a.arg_batch >= 0) std::cout << ", batch " << a.arg_batch + 1;
            std::cout << ")\n";
        }
    }
}

int emit_scenario(const ScenarioOutput& output, const std::string& format, std::string out) {
    if (out.empty()) out = format == "csv" ? "." : "report.json";
    for (const std::string& path : emit_report(output, parse_format(format), out))
        std::cout << "wrote " << path << "\n";
    print_summary(output);
    return output.any_alarm() ? 2 : 0;
}

// The modality an eval-style subcommand works on: explicit label or the first.
ResolvedModality pick_modality(const RunConfig& config, const std::string& label,
                               const IoPolicy& io) {
    const std::vector<std::string> labels = modality_labels(config);
    if (label.empty()) return resolve_modality(config, labels.front(), io);
    for (const std::string& l : labels)
        if (l == label) return resolve_modality(config, l, io);
    throw ConfigError("unknown modality '" + label + "'");
}

DetectorTemplate make_template(const RunConfig& config, const ResolvedModality& rm) {
    DetectorOptions options;
    options.window = config.detector.window;
    options.product_cap = config.detector.product_cap;
    return DetectorTemplate{config.detector.kind, rm.grid, options};
}

ChangeSpec event_change(const RunConfig& config, const ResolvedModality& rm) {
    const int num_batches = rm.model.num_batches();
    const double m = rm.event_multiplier;
    std::vector<int> batches = config.scenario.event_batches;
    if (batches.size() == 1) {
        const int e = batches.front() - 1;
        return ChangeSpec::single_batch(1, e, m * rm.model.baseline()[e]);
    }
    if (!batches.empty() && static_cast<int>(batches.size()) != num_batches)
        throw ConfigError(
            "scenario.event_batches: efficiency evaluation needs one batch or all batches");
    return ChangeSpec::all_batch(1, rm.model.baseline() * m);
}

int run_fit(const std::string& config_path, const std::vector<std::string>& train,
            const IoFlags& flags, const std::string& out) {
    const RunConfig config = load_config(config_path);
    const DistributionFamily family = config.model.family->build();
    const BatchPartition partition(*config.model.period, config.model.boundaries);
    IngestOptions opt;
    opt.require_integers = family.kind == FamilyKind::Poisson && !flags.round_counts;
    opt.round_counts = flags.round_counts;
    opt.gaps = flags.policy().gaps;
    opt.interval_seconds = flags.interval_seconds;

    std::vector<ObservationSequence> streams;
    for (const std::string& path : train) streams.push_back(ingest_csv(path, opt));
    const Eigen::ArrayXd theta = mle_fit(family, partition, streams);

    json doc{{"family", family.name()},
             {"period", *config.model.period},
             {"boundaries", config.model.boundaries},
             {"theta", std::vector<double>(theta.data(), theta.data() + theta.size())}};
    write_or_print(doc, out);
    return 0;
}

int run_detect(const RunConfig& config, const std::vector<std::string>& data_args,
               const IoFlags& flags, const std::string& format, const std::string& out) {
    const IoPolicy io = flags.policy();
    const DistributionFamily family = config.model.family->build();

    auto data_override = [&](const std::string& label) -> std::string {
        for (const std::string& arg : data_args) {
            const std::size_t eq = arg.find('=');
            if (eq != std::string::npos && arg.substr(0, eq) == label) return arg.substr(eq + 1);
        }
        return "";
    };

    std::vector<LabeledStream> streams;
    for (const std::string& label : modality_labels(config)) {
        std::string path = data_override(label);
        if (path.empty()) path = resolve_modality(config, label, io).data;
        if (path.empty())
            throw ConfigError("modality '" + label +
                              "': no data file (give --data " + label + "=PATH or a 'data' key)");
        IngestOptions opt;
        opt.require_integers = family.kind == FamilyKind::Poisson && !flags.round_counts;
        opt.round_counts = flags.round_counts;
        opt.gaps = io.gaps;
        opt.interval_seconds = io.interval_seconds;
        opt.label = label;
        streams.push_back(LabeledStream{label, ingest_csv(path, opt)});
    }
    return emit_scenario(run_scenario(config, streams, io), format, out);
}

int run_simulate(const RunConfig& config, std::optional<std::uint64_t> seed, const IoFlags& flags,
                 const std::string& emit_csv, const std::string& format, const std::string& out) {
    const IoPolicy io = flags.policy();
    const std::uint64_t use_seed = seed.value_or(config.scenario.seed);
    const std::vector<LabeledStream> streams = synthesize_streams(config, use_seed, io);
    if (!emit_csv.empty()) {
        std::filesystem::create_directories(emit_csv);
        for (const LabeledStream& s : streams) {
            const std::string path =
                (std::filesystem::path(emit_csv) / ("stream_" + s.label + ".csv")).string();
            write_counts_csv(path, s.stream);
            std::cout << "wrote " << path << "\n";
        }
    }
    return emit_scenario(run_scenario(config, streams, io), format, out);
}

int run_calibrate(const std::string& config_path, std::optional<double> beta_arg, bool mc,
                  std::int64_t reps, std::int64_t horizon, double tolerance,
                  std::uint64_t seed, const std::string& modality, const IoFlags& flags,
                  const std::string& out) {
    double beta = 0.0;
    RunConfig config;
    bool have_config = !config_path.empty();
    if (have_config) {
        config = load_config(config_path);
        if (config.detector.beta) beta = *config.detector.beta;
    }
    if (beta_arg) beta = *beta_arg;
    if (!(beta > 1.0)) throw ConfigError("calibrate: need a budget beta > 1 (config or --beta)");

    CalibrationConfig cal;
    cal.beta = beta;
    cal.seed = seed;
    double threshold = 0.0;
    if (mc) {
        if (!have_config) throw ConfigError("calibrate: --mc needs --config for the model");
        cal.method = CalibrationMethod::MonteCarloBisection;
        cal.reps = reps;
        cal.horizon = horizon > 0 ? horizon : static_cast<std::int64_t>(10 * beta) + 1;
        cal.tolerance = tolerance;
        const ResolvedModality rm = pick_modality(config, modality, flags.policy());
        threshold = calibrate_threshold_mc(rm.model, make_template(config, rm), cal);
    } else {
        threshold = calibrate_threshold(cal);
    }
    write_or_print(json{{"beta", beta},
                        {"method", mc ? "monte-carlo" : "log-beta"},
                        {"threshold", threshold}},
                   out);
    return 0;
}

int run_evaluate(const RunConfig& config, const std::vector<double>& betas, std::int64_t reps,
                 std::uint64_t seed, const std::string& modality, const IoFlags& flags,
                 const std::string& format, const std::string& out) {
    const ResolvedModality rm = pick_modality(config, modality, flags.policy());
    EfficiencyOptions options;
    options.reps = reps;
    options.seed = seed;
    const EfficiencyReport report = efficiency_report(rm.model, make_template(config, rm),
                                                      event_change(config, rm), betas, options);
    if (format == "csv") {
        for (const std::string& path :
             emit_report(report, ReportFormat::Csv, out.empty() ? "." : out))
            std::cout << "wrote " << path << "\n";
    } else {
        write_or_print(to_json(report), out);
    }
    std::cout << "efficiency: " << (report.pass ? "PASS" : "FAIL") << " (slope "
              << report.slope_fit << ", theory " << report.theory_slope << ")\n";
    return 0;
}

int run_report(const std::string& in, const std::string& format, const std::string& out) {
    std::ifstream file(in);
    if (!file) throw std::runtime_error("cannot read " + in);
    json doc = json::parse(file);
    if (doc.contains("modalities")) {
        const ScenarioOutput output = scenario_from_json(doc);
        const std::string dest = !out.empty() ? out : (format == "csv" ? "." : "report.json");
        for (const std::string& path : emit_report(output, parse_format(format), dest))
            std::cout << "wrote " << path << "\n";
    } else if (doc.contains("betas")) {
        const EfficiencyReport report = efficiency_from_json(doc);
        const std::string dest = !out.empty() ? out : (format == "csv" ? "." : "efficiency.json");
        for (const std::string& path : emit_report(report, parse_format(format), dest))
            std::cout << "wrote " << path << "\n";
    } else {
        throw std::runtime_error(in + ": neither a scenario nor an efficiency report");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quickest change detection for periodic count streams"};
    app.require_subcommand(1);

    std::string config_path, out, format = "json", emit_csv, report_in, modality;
    std::vector<std::string> train, data_args;
    std::vector<double> betas;
    IoFlags io;
    std::optional<std::uint64_t> seed_opt;
    std::uint64_t seed = 1;
    std::optional<double> beta_arg;
    bool mc = false;
    std::int64_t reps = 1000, horizon = 0;
    double tolerance = 0.10;

    CLI::App* fit = app.add_subcommand("fit", "Fit per-batch baselines from training CSVs");
    fit->add_option("--config", config_path, "Config file")->required();
    fit->add_option("--train", train, "Training CSV path(s)")->required();
    fit->add_option("--out", out, "Write the fitted JSON here instead of stdout");
    add_io_flags(fit, &io);

    CLI::App* detect = app.add_subcommand("detect", "Run detection over CSV streams");
    detect->add_option("--config", config_path, "Config file")->required();
    detect->add_option("--data", data_args, "Per-modality stream: LABEL=PATH");
    detect->add_option("--format", format, "Report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    detect->add_option("--out", out, "Report path (json) or directory (csv)");
    add_io_flags(detect, &io);

    CLI::App* simulate = app.add_subcommand("simulate", "Sample the configured scenario and detect");
    simulate->add_option("--config", config_path, "Config file")->required();
    simulate->add_option("--seed", seed_opt, "Override the scenario seed");
    simulate->add_option("--emit-csv", emit_csv, "Also write sampled streams to this directory");
    simulate->add_option("--format", format, "Report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    simulate->add_option("--out", out, "Report path (json) or directory (csv)");
    add_io_flags(simulate, &io);

    CLI::App* calibrate = app.add_subcommand("calibrate", "Turn a false-alarm budget into a threshold");
    calibrate->add_option("--config", config_path, "Config file (model source for --mc)");
    calibrate->add_option("--beta", beta_arg, "False-alarm budget (overrides config)");
    calibrate->add_flag("--mc", mc, "Calibrate by Monte Carlo bisection instead of ln(beta)");
    calibrate->add_option("--reps", reps, "Monte Carlo replications (default 1000)");
    calibrate->add_option("--horizon", horizon, "Simulation horizon (default 10*beta)");
    calibrate->add_option("--tolerance", tolerance, "Relative MTFA tolerance (default 0.10)");
    calibrate->add_option("--seed", seed, "Seed for --mc");
    calibrate->add_option("--modality", modality, "Modality to calibrate against (default first)");
    calibrate->add_option("--out", out, "Write the result JSON here instead of stdout");
    add_io_flags(calibrate, &io);

    CLI::App* evaluate = app.add_subcommand("evaluate", "Budget sweep: MTFA, delay, slopes");
    evaluate->add_option("--config", config_path, "Config file")->required();
    evaluate->add_option("--betas", betas, "Budgets, e.g. --betas 100 1000 10000")->required();
    evaluate->add_option("--reps", reps, "Replications per budget (default 1000)");
    evaluate->add_option("--seed", seed, "Master seed");
    evaluate->add_option("--modality", modality, "Modality to evaluate (default first)");
    evaluate->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    evaluate->add_option("--out", out, "Report path (json) or directory (csv)");
    add_io_flags(evaluate, &io);

    CLI::App* report = app.add_subcommand("report", "Re-render an emitted JSON report");
    report->add_option("--in", report_in, "Existing report JSON")->required();
    report->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    report->add_option("--out", out, "Report path (json) or directory (csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit) return run_fit(config_path, train, io, out);
        if (*detect) return run_detect(load_config(config_path), data_args, io, format, out);
        if (*simulate)
            return run_simulate(load_config(config_path), seed_opt, io, emit_csv, format, out);
        if (*calibrate)
            return run_calibrate(config_path, beta_arg, mc, reps, horizon, tolerance, seed,
                                 modality, io, out);
        if (*evaluate)
            return run_evaluate(load_config(config_path), betas, reps, seed, modality, io, format,
                                out);
        if (*report) return run_report(report_in, format, out);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
