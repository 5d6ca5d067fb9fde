#include "cyclodet/scenario.hpp"

#include <cmath>
#include <span>
#include <stdexcept>

#include "cyclodet/rng.hpp"

namespace cyclodet {

bool ScenarioOutput::any_alarm() const {
    for (const ModalityResult& m : modalities)
        if (!m.alarms.empty()) return true;
    return false;
}

std::vector<std::string> modality_labels(const RunConfig& config) {
    if (!config.scenario.modalities.empty()) return config.scenario.modalities;
    return {"stream"};
}

namespace {

const ModalityOverride* find_override(const RunConfig& config, const std::string& label) {
    for (const ModalityOverride& m : config.modalities)
        if (m.label == label) return &m;
    return nullptr;
}

IngestOptions make_ingest_options(const DistributionFamily& family, const IoPolicy& io,
                                  const std::string& label) {
    IngestOptions opt;
    opt.require_integers = family.kind == FamilyKind::Poisson && !io.round_counts;
    opt.round_counts = io.round_counts;
    opt.gaps = io.gaps;
    opt.interval_seconds = io.interval_seconds;
    opt.label = label;
    return opt;
}

std::vector<Eigen::ArrayXd> to_arrays(const std::vector<std::vector<double>>& lists) {
    std::vector<Eigen::ArrayXd> out;
    out.reserve(lists.size());
    for (const std::vector<double>& l : lists)
        out.push_back(Eigen::Map<const Eigen::ArrayXd>(l.data(), static_cast<Eigen::Index>(l.size())));
    return out;
}

// Event batches as 0-based indices; empty selection means every batch.
std::vector<int> event_batches0(const RunConfig& config, int num_batches) {
    std::vector<int> out;
    if (config.scenario.event_batches.empty()) {
        for (int e = 0; e < num_batches; ++e) out.push_back(e);
    } else {
        for (int b : config.scenario.event_batches) out.push_back(b - 1);
    }
    return out;
}

std::uint64_t segment_seed(std::uint64_t master, std::size_t modality, std::int64_t day, int part) {
    return derive_seed(master, (static_cast<std::uint64_t>(modality) * 1048576ULL +
                                static_cast<std::uint64_t>(day)) *
                                       2ULL +
                               static_cast<std::uint64_t>(part));
}

void append(ObservationSequence* dst, const ObservationSequence& src) {
    dst->values.insert(dst->values.end(), src.values.begin(), src.values.end());
}

}  // namespace

ResolvedModality resolve_modality(const RunConfig& config, const std::string& label,
                                  const IoPolicy& io) {
    const ModalityOverride* mod = find_override(config, label);
    const DistributionFamily family = config.model.family->build();
    BatchPartition partition(*config.model.period, config.model.boundaries);

    // A modality that sets any baseline source uses its own exclusively.
    std::vector<double> theta_list;
    std::string fit_path;
    if (mod && (!mod->theta.empty() || !mod->theta_from.empty())) {
        theta_list = mod->theta;
        fit_path = mod->theta_from;
    } else {
        theta_list = config.model.theta;
        fit_path = config.model.theta_from;
    }
    Eigen::ArrayXd theta;
    if (!theta_list.empty()) {
        theta = Eigen::Map<const Eigen::ArrayXd>(theta_list.data(),
                                                 static_cast<Eigen::Index>(theta_list.size()));
    } else {
        const ObservationSequence train = ingest_csv(fit_path, make_ingest_options(family, io, label));
        theta = mle_fit(family, partition, std::span<const ObservationSequence>(&train, 1));
    }
    IpidModel model(family, partition, theta);

    std::vector<double> multipliers;
    std::vector<std::vector<double>> lambda_lists;
    if (mod && (!mod->multipliers.empty() || !mod->lambdas.empty())) {
        multipliers = mod->multipliers;
        lambda_lists = mod->lambdas;
    } else {
        multipliers = config.grid.multipliers;
        lambda_lists = config.grid.lambdas;
    }
    PostChangeGrid grid =
        multipliers.empty()
            ? PostChangeGrid(model, to_arrays(lambda_lists), config.grid.epsilon)
            : PostChangeGrid::multiplicative(model, multipliers, config.grid.epsilon);

    const double event_multiplier = mod && mod->event_multiplier ? *mod->event_multiplier
                                                                 : config.scenario.event_multiplier;
    return ResolvedModality{label, std::move(model), std::move(grid), event_multiplier,
                            mod ? mod->data : std::string{}};
}

double resolve_threshold(const RunConfig& config) {
    if (config.detector.threshold) return *config.detector.threshold;
    return std::log(*config.detector.beta);
}

IpidModel scaled_model(const IpidModel& model, const std::vector<int>& batches, double multiplier) {
    Eigen::ArrayXd theta = model.baseline();
    for (int e : batches) {
        if (e < 0 || e >= model.num_batches())
            throw std::invalid_argument("scaled_model: batch index out of range");
        theta[e] *= multiplier;
    }
    return IpidModel(model.family(), model.partition(), theta);
}

std::vector<LabeledStream> synthesize_streams(const RunConfig& config, std::uint64_t seed,
                                              const IoPolicy& io) {
    const std::vector<std::string> labels = modality_labels(config);
    const std::int64_t day_len =
        config.scenario.day_length ? *config.scenario.day_length : *config.model.period;
    if (config.scenario.event_day > 0 && config.scenario.event_gamma > day_len)
        throw ConfigError("scenario.event_gamma: exceeds the day length " + std::to_string(day_len));

    std::vector<LabeledStream> streams;
    streams.reserve(labels.size());
    for (std::size_t m = 0; m < labels.size(); ++m) {
        const ResolvedModality rm = resolve_modality(config, labels[m], io);
        const IpidModel event_model = scaled_model(
            rm.model, event_batches0(config, rm.model.num_batches()), rm.event_multiplier);

        ObservationSequence out;
        out.start_index = 1;
        out.values.reserve(static_cast<std::size_t>(day_len * config.scenario.days));
        for (std::int64_t d = 1; d <= config.scenario.days; ++d) {
            const std::int64_t day_start = (d - 1) * day_len + 1;
            if (d == config.scenario.event_day) {
                const std::int64_t g = config.scenario.event_gamma;
                if (g > 1)
                    append(&out, sample(rm.model, ChangeSpec::none(), g - 1,
                                        segment_seed(seed, m, d, 0), day_start));
                append(&out, sample(event_model, ChangeSpec::none(), day_len - g + 1,
                                    segment_seed(seed, m, d, 1), day_start + g - 1));
            } else {
                append(&out, sample(rm.model, ChangeSpec::none(), day_len,
                                    segment_seed(seed, m, d, 0), day_start));
            }
        }
        streams.push_back(LabeledStream{labels[m], std::move(out)});
    }
    return streams;
}

ScenarioOutput run_scenario(const RunConfig& config, const std::vector<LabeledStream>& streams,
                            const IoPolicy& io) {
    const std::vector<std::string> labels = modality_labels(config);
    const double threshold = resolve_threshold(config);

    ScenarioOutput out;
    out.family = config.model.family->build().name();
    out.period = *config.model.period;
    out.boundaries = config.model.boundaries;
    out.detector_kind = config.detector.kind == DetectorKind::SingleBatch ? "single" : "all";
    out.threshold = threshold;
    switch (config.scenario.reset) {
        case ResetPolicy::Never: out.reset = "never"; break;
        case ResetPolicy::AtAlarm: out.reset = "at-alarm"; break;
        case ResetPolicy::AtDayBoundary: out.reset = "at-day-boundary"; break;
    }
    out.day_length = config.scenario.day_length.value_or(0);

    auto stream_of = [&](const std::string& label) -> const ObservationSequence& {
        for (const LabeledStream& s : streams)
            if (s.label == label) return s.stream;
        throw ConfigError("no stream provided for modality '" + label + "'");
    };
    for (const LabeledStream& s : streams) {
        bool known = false;
        for (const std::string& label : labels) known = known || label == s.label;
        if (!known) throw ConfigError("stream '" + s.label + "' matches no configured modality");
    }

    for (const std::string& label : labels) {
        const ResolvedModality rm = resolve_modality(config, label, io);
        const ObservationSequence& stream = stream_of(label);
        const std::int64_t n = stream.size();

        std::int64_t day_len = n;
        std::int64_t num_days = n > 0 ? 1 : 0;
        if (config.scenario.day_length) {
            day_len = *config.scenario.day_length;
            if (stream.start_index != 1)
                throw ConfigError("modality '" + label +
                                  "': day segmentation requires streams starting at index 1");
            if (n % day_len != 0)
                throw ConfigError("modality '" + label + "': stream length " + std::to_string(n) +
                                  " is not a multiple of day_length " + std::to_string(day_len));
            num_days = n / day_len;
        }

        ModalityResult res;
        res.label = label;
        res.baseline.assign(rm.model.baseline().data(),
                            rm.model.baseline().data() + rm.model.baseline().size());
        res.trajectory.reserve(static_cast<std::size_t>(n));

        DetectorOptions opts;
        opts.window = config.detector.window;
        opts.product_cap = config.detector.product_cap;
        opts.start_index = stream.start_index;
        AnyDetector det = make_detector(config.detector.kind, rm.model, rm.grid, threshold, opts);

        bool stopped = false;  // reset policy 'never': monitoring ends at the first alarm
        for (std::int64_t d = 1; d <= num_days; ++d) {
            DayVerdict verdict;
            verdict.day = d;
            const std::int64_t day_begin = stream.start_index + (d - 1) * day_len;
            const std::int64_t day_end = day_begin + day_len - 1;
            if (config.scenario.reset == ResetPolicy::AtDayBoundary && d > 1) det.reset(day_begin);

            bool frozen = false;  // at-day-boundary: alarm freezes the rest of the day
            for (std::int64_t k = day_begin; k <= day_end && !stopped; ++k) {
                const double y = stream.values[static_cast<std::size_t>(k - stream.start_index)];
                if (frozen) {
                    res.trajectory.emplace_back(k, det.statistic());
                    ++verdict.samples;
                    continue;
                }
                const auto fired = det.step(y);
                res.trajectory.emplace_back(k, det.statistic());
                ++verdict.samples;
                if (fired) {
                    AlarmRecord alarm;
                    alarm.modality = label;
                    alarm.day = d;
                    alarm.sample_index = fired->stopping_time;
                    alarm.statistic = fired->statistic_at_stop;
                    alarm.arg_batch = fired->arg_batch;
                    alarm.arg_lambda.assign(fired->arg_lambda.data(),
                                            fired->arg_lambda.data() + fired->arg_lambda.size());
                    res.alarms.push_back(std::move(alarm));
                    verdict.alarm = true;
                    switch (config.scenario.reset) {
                        case ResetPolicy::Never: stopped = true; break;
                        case ResetPolicy::AtAlarm: det.reset(k + 1); break;
                        case ResetPolicy::AtDayBoundary: frozen = true; break;
                    }
                }
            }
            res.days.push_back(verdict);
            if (stopped) {
                for (std::int64_t rest = d + 1; rest <= num_days; ++rest)
                    res.days.push_back(DayVerdict{rest, false, 0});
                break;
            }
        }
        out.modalities.push_back(std::move(res));
    }
    return out;
}

}  // namespace cyclodet
