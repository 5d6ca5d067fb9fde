#include "cyclodet/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace cyclodet {

using nlohmann::json;

namespace {

json estimate_to_json(const RunLengthEstimate& est) {
    return json{{"mean", est.mean},
                {"stderr", est.std_error},
                {"replications", est.replications},
                {"censored", est.censored},
                {"horizon", est.horizon}};
}

RunLengthEstimate estimate_from_json(const json& j) {
    RunLengthEstimate est;
    est.mean = j.at("mean").get<double>();
    est.std_error = j.at("stderr").get<double>();
    est.replications = j.at("replications").get<std::int64_t>();
    est.censored = j.at("censored").get<std::int64_t>();
    est.horizon = j.at("horizon").get<std::int64_t>();
    return est;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("report: cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("report: write failed for " + path);
}

std::FILE* open_csv(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("report: cannot write " + path);
    return f;
}

}  // namespace

json to_json(const ScenarioOutput& output) {
    json mods = json::array();
    for (const ModalityResult& m : output.modalities) {
        json traj = json::array();
        for (const auto& [n, w] : m.trajectory) traj.push_back(json::array({n, w}));
        json alarms = json::array();
        for (const AlarmRecord& a : m.alarms)
            alarms.push_back(json{{"day", a.day},
                                  {"n", a.sample_index},
                                  {"statistic", a.statistic},
                                  {"arg_batch", a.arg_batch},
                                  {"arg_lambda", a.arg_lambda}});
        json days = json::array();
        for (const DayVerdict& d : m.days)
            days.push_back(json{{"day", d.day}, {"alarm", d.alarm}, {"samples", d.samples}});
        mods.push_back(json{{"label", m.label},
                            {"baseline", m.baseline},
                            {"trajectory", traj},
                            {"alarms", alarms},
                            {"days", days}});
    }
    return json{{"family", output.family},
                {"period", output.period},
                {"boundaries", output.boundaries},
                {"detector", output.detector_kind},
                {"threshold", output.threshold},
                {"reset", output.reset},
                {"day_length", output.day_length},
                {"modalities", mods}};
}

ScenarioOutput scenario_from_json(const json& j) {
    ScenarioOutput out;
    out.family = j.at("family").get<std::string>();
    out.period = j.at("period").get<std::int64_t>();
    out.boundaries = j.at("boundaries").get<std::vector<std::int64_t>>();
    out.detector_kind = j.at("detector").get<std::string>();
    out.threshold = j.at("threshold").get<double>();
    out.reset = j.at("reset").get<std::string>();
    out.day_length = j.at("day_length").get<std::int64_t>();
    for (const json& jm : j.at("modalities")) {
        ModalityResult m;
        m.label = jm.at("label").get<std::string>();
        m.baseline = jm.at("baseline").get<std::vector<double>>();
        for (const json& p : jm.at("trajectory"))
            m.trajectory.emplace_back(p.at(0).get<std::int64_t>(), p.at(1).get<double>());
        for (const json& ja : jm.at("alarms")) {
            AlarmRecord a;
            a.modality = m.label;
            a.day = ja.at("day").get<std::int64_t>();
            a.sample_index = ja.at("n").get<std::int64_t>();
            a.statistic = ja.at("statistic").get<double>();
            a.arg_batch = ja.at("arg_batch").get<int>();
            a.arg_lambda = ja.at("arg_lambda").get<std::vector<double>>();
            m.alarms.push_back(std::move(a));
        }
        for (const json& jd : jm.at("days")) {
            DayVerdict d;
            d.day = jd.at("day").get<std::int64_t>();
            d.alarm = jd.at("alarm").get<bool>();
            d.samples = jd.at("samples").get<std::int64_t>();
            m.days.push_back(d);
        }
        out.modalities.push_back(std::move(m));
    }
    return out;
}

json to_json(const EfficiencyReport& report) {
    json mtfa = json::array();
    for (const RunLengthEstimate& e : report.mtfa) mtfa.push_back(estimate_to_json(e));
    json delay = json::array();
    for (const RunLengthEstimate& e : report.delay) delay.push_back(estimate_to_json(e));
    return json{{"betas", report.betas},
                {"thresholds", report.thresholds},
                {"mtfa", mtfa},
                {"delay", delay},
                {"slope_fit", report.slope_fit},
                {"theory_slope", report.theory_slope},
                {"kappa", report.kappa},
                {"I_bar", report.i_bar},
                {"pass", report.pass}};
}

EfficiencyReport efficiency_from_json(const json& j) {
    EfficiencyReport report;
    report.betas = j.at("betas").get<std::vector<double>>();
    report.thresholds = j.at("thresholds").get<std::vector<double>>();
    for (const json& je : j.at("mtfa")) report.mtfa.push_back(estimate_from_json(je));
    for (const json& je : j.at("delay")) report.delay.push_back(estimate_from_json(je));
    report.slope_fit = j.at("slope_fit").get<double>();
    report.theory_slope = j.at("theory_slope").get<double>();
    report.kappa = j.at("kappa").get<double>();
    report.i_bar = j.at("I_bar").get<double>();
    report.pass = j.at("pass").get<bool>();
    return report;
}

std::vector<std::string> emit_report(const ScenarioOutput& output, ReportFormat format,
                                     const std::string& dest) {
    if (format == ReportFormat::Json) {
        write_text(dest, to_json(output).dump(2) + "\n");
        return {dest};
    }
    std::filesystem::create_directories(dest);
    std::vector<std::string> written;
    for (const ModalityResult& m : output.modalities) {
        const std::string path = (std::filesystem::path(dest) / ("trajectory_" + m.label + ".csv")).string();
        std::FILE* f = open_csv(path);
        std::fputs("n,W\n", f);
        for (const auto& [n, w] : m.trajectory)
            std::fprintf(f, "%lld,%.15g\n", static_cast<long long>(n), w);
        std::fclose(f);
        written.push_back(path);
    }
    const std::string alarms_path = (std::filesystem::path(dest) / "alarms.csv").string();
    std::FILE* f = open_csv(alarms_path);
    std::fputs("modality,day,n,statistic,arg_batch,arg_lambda\n", f);
    for (const ModalityResult& m : output.modalities) {
        for (const AlarmRecord& a : m.alarms) {
            std::fprintf(f, "%s,%lld,%lld,%.15g,%d,", m.label.c_str(), static_cast<long long>(a.day),
                         static_cast<long long>(a.sample_index), a.statistic, a.arg_batch);
            for (std::size_t i = 0; i < a.arg_lambda.size(); ++i)
                std::fprintf(f, "%s%.15g", i ? ";" : "", a.arg_lambda[i]);
            std::fputc('\n', f);
        }
    }
    std::fclose(f);
    written.push_back(alarms_path);
    return written;
}

std::vector<std::string> emit_report(const EfficiencyReport& report, ReportFormat format,
                                     const std::string& dest) {
    if (format == ReportFormat::Json) {
        write_text(dest, to_json(report).dump(2) + "\n");
        return {dest};
    }
    std::filesystem::create_directories(dest);
    const std::string path = (std::filesystem::path(dest) / "efficiency.csv").string();
    std::FILE* f = open_csv(path);
    std::fputs(
        "beta,threshold,mtfa_mean,mtfa_stderr,mtfa_censored,mtfa_replications,mtfa_horizon,"
        "delay_mean,delay_stderr,delay_censored,delay_replications,delay_horizon\n",
        f);
    for (std::size_t i = 0; i < report.betas.size(); ++i) {
        const RunLengthEstimate& m = report.mtfa[i];
        const RunLengthEstimate& d = report.delay[i];
        std::fprintf(f, "%.15g,%.15g,%.15g,%.15g,%lld,%lld,%lld,%.15g,%.15g,%lld,%lld,%lld\n",
                     report.betas[i], report.thresholds[i], m.mean, m.std_error,
                     static_cast<long long>(m.censored), static_cast<long long>(m.replications),
                     static_cast<long long>(m.horizon), d.mean, d.std_error,
                     static_cast<long long>(d.censored), static_cast<long long>(d.replications),
                     static_cast<long long>(d.horizon));
    }
    std::fclose(f);
    return {path};
}

}  // namespace cyclodet
