#include "cyclodet/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cyclodet/partition.hpp"

namespace cyclodet {

DistributionFamily FamilySpec::build() const {
    if (kind == FamilyKind::Poisson) return DistributionFamily::poisson();
    return DistributionFamily::gaussian(sigma);
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string token;
    for (char c : value) {
        if (c == ' ' || c == '\t' || c == ',') {
            if (!token.empty()) out.push_back(std::move(token));
            token.clear();
        } else {
            token.push_back(c);
        }
    }
    if (!token.empty()) out.push_back(std::move(token));
    return out;
}

double to_double(const std::string& field, const std::string& token) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(token, &pos);
        if (pos != token.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field + ": not a number: '" + token + "'");
    }
}

std::int64_t to_int(const std::string& field, const std::string& token) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(token, &pos);
        if (pos != token.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field + ": not an integer: '" + token + "'");
    }
}

std::vector<double> to_doubles(const std::string& field, const std::string& value) {
    std::vector<double> out;
    for (const std::string& t : split_list(value)) out.push_back(to_double(field, t));
    if (out.empty()) throw ConfigError(field + ": empty list");
    return out;
}

std::vector<std::int64_t> to_ints(const std::string& field, const std::string& value) {
    std::vector<std::int64_t> out;
    for (const std::string& t : split_list(value)) out.push_back(to_int(field, t));
    if (out.empty()) throw ConfigError(field + ": empty list");
    return out;
}

// lambdaK keys address batch K (1-based) in explicit grid lists.
bool lambda_key(const std::string& key, int* batch) {
    if (key.rfind("lambda", 0) != 0 || key.size() == 6 || key.size() > 10) return false;
    const std::string digits = key.substr(6);
    if (!std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); }))
        return false;
    *batch = std::stoi(digits);
    return *batch >= 1;
}

void set_lambda(std::vector<std::vector<double>>* lists, const std::string& field, int batch,
                const std::string& value) {
    if (static_cast<int>(lists->size()) < batch) lists->resize(batch);
    (*lists)[batch - 1] = to_doubles(field, value);
}

struct Parser {
    RunConfig cfg;
    std::set<std::string> seen;  // "<section>.<key>" duplicates are rejected

    void require_fresh(const std::string& section, const std::string& key, int line) {
        if (!seen.insert(section + "." + key).second)
            throw ConfigError("config line " + std::to_string(line) + ": duplicate key '" + key +
                              "' in [" + section + "]");
    }

    void model_key(const std::string& key, const std::string& value, int line) {
        require_fresh("model", key, line);
        const std::string field = "model." + key;
        if (key == "family") {
            FamilySpec spec = cfg.model.family.value_or(FamilySpec{});
            if (value == "poisson")
                spec.kind = FamilyKind::Poisson;
            else if (value == "gaussian")
                spec.kind = FamilyKind::GaussianKnownVariance;
            else
                throw ConfigError(field + ": must be 'poisson' or 'gaussian', got '" + value + "'");
            cfg.model.family = spec;
        } else if (key == "sigma") {
            FamilySpec spec = cfg.model.family.value_or(FamilySpec{});
            spec.sigma = to_double(field, value);
            cfg.model.family = spec;
        } else if (key == "period") {
            cfg.model.period = to_int(field, value);
        } else if (key == "boundaries") {
            cfg.model.boundaries = to_ints(field, value);
        } else if (key == "theta") {
            cfg.model.theta = to_doubles(field, value);
        } else if (key == "theta_from") {
            cfg.model.theta_from = value;
        } else {
            throw ConfigError("config line " + std::to_string(line) + ": unknown key '" + key +
                              "' in [model]");
        }
    }

    void grid_key(const std::string& key, const std::string& value, int line) {
        require_fresh("grid", key, line);
        const std::string field = "grid." + key;
        int batch = 0;
        if (key == "multipliers") {
            cfg.grid.multipliers = to_doubles(field, value);
        } else if (key == "epsilon") {
            cfg.grid.epsilon = to_double(field, value);
        } else if (lambda_key(key, &batch)) {
            set_lambda(&cfg.grid.lambdas, field, batch, value);
        } else {
            throw ConfigError("config line " + std::to_string(line) + ": unknown key '" + key +
                              "' in [grid]");
        }
    }

    void detector_key(const std::string& key, const std::string& value, int line) {
        require_fresh("detector", key, line);
        const std::string field = "detector." + key;
        if (key == "kind") {
            if (value == "single")
                cfg.detector.kind = DetectorKind::SingleBatch;
            else if (value == "all")
                cfg.detector.kind = DetectorKind::AllBatch;
            else
                throw ConfigError(field + ": must be 'single' or 'all', got '" + value + "'");
        } else if (key == "threshold") {
            cfg.detector.threshold = to_double(field, value);
        } else if (key == "beta") {
            cfg.detector.beta = to_double(field, value);
        } else if (key == "window") {
            cfg.detector.window = to_int(field, value);
        } else if (key == "product_cap") {
            cfg.detector.product_cap = to_int(field, value);
        } else {
            throw ConfigError("config line " + std::to_string(line) + ": unknown key '" + key +
                              "' in [detector]");
        }
    }

    void scenario_key(const std::string& key, const std::string& value, int line) {
        require_fresh("scenario", key, line);
        const std::string field = "scenario." + key;
        if (key == "day_length") {
            cfg.scenario.day_length = to_int(field, value);
        } else if (key == "reset") {
            if (value == "never")
                cfg.scenario.reset = ResetPolicy::Never;
            else if (value == "at-alarm")
                cfg.scenario.reset = ResetPolicy::AtAlarm;
            else if (value == "at-day-boundary")
                cfg.scenario.reset = ResetPolicy::AtDayBoundary;
            else
                throw ConfigError(field +
                                  ": must be 'never', 'at-alarm' or 'at-day-boundary', got '" +
                                  value + "'");
        } else if (key == "modalities") {
            cfg.scenario.modalities = split_list(value);
        } else if (key == "days") {
            cfg.scenario.days = to_int(field, value);
        } else if (key == "event_day") {
            cfg.scenario.event_day = to_int(field, value);
        } else if (key == "event_gamma") {
            cfg.scenario.event_gamma = to_int(field, value);
        } else if (key == "event_batches") {
            cfg.scenario.event_batches.clear();
            for (std::int64_t b : to_ints(field, value))
                cfg.scenario.event_batches.push_back(static_cast<int>(b));
        } else if (key == "event_multiplier") {
            cfg.scenario.event_multiplier = to_double(field, value);
        } else if (key == "seed") {
            cfg.scenario.seed = static_cast<std::uint64_t>(to_int(field, value));
        } else {
            throw ConfigError("config line " + std::to_string(line) + ": unknown key '" + key +
                              "' in [scenario]");
        }
    }

    void modality_key(ModalityOverride* mod, const std::string& key, const std::string& value,
                      int line) {
        const std::string section = "modality:" + mod->label;
        require_fresh(section, key, line);
        const std::string field = section + "." + key;
        int batch = 0;
        if (key == "theta") {
            mod->theta = to_doubles(field, value);
        } else if (key == "theta_from") {
            mod->theta_from = value;
        } else if (key == "multipliers") {
            mod->multipliers = to_doubles(field, value);
        } else if (lambda_key(key, &batch)) {
            set_lambda(&mod->lambdas, field, batch, value);
        } else if (key == "event_multiplier") {
            mod->event_multiplier = to_double(field, value);
        } else if (key == "data") {
            mod->data = value;
        } else {
            throw ConfigError("config line " + std::to_string(line) + ": unknown key '" + key +
                              "' in [" + section + "]");
        }
    }
};

void validate_lambda_lists(const std::string& prefix, const std::vector<std::vector<double>>& lists,
                           int num_batches) {
    if (static_cast<int>(lists.size()) != num_batches)
        throw ConfigError(prefix + ": explicit grids must cover all " + std::to_string(num_batches) +
                          " batches (lambda1.." + "lambda" + std::to_string(num_batches) + ")");
    for (int e = 0; e < num_batches; ++e)
        if (lists[e].empty())
            throw ConfigError(prefix + std::to_string(e + 1) + ": missing list for batch " +
                              std::to_string(e + 1));
}

void validate(RunConfig& cfg) {
    if (!cfg.model.family) throw ConfigError("model.family: required ('poisson' or 'gaussian')");
    if (cfg.model.family->kind == FamilyKind::GaussianKnownVariance &&
        !(cfg.model.family->sigma > 0.0))
        throw ConfigError("model.sigma: must be > 0 for the gaussian family");
    if (!cfg.model.period) throw ConfigError("model.period: required");
    if (*cfg.model.period < 1) throw ConfigError("model.period: must be >= 1");
    if (cfg.model.boundaries.empty()) throw ConfigError("model.boundaries: required");
    try {
        BatchPartition check(*cfg.model.period, cfg.model.boundaries);
    } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("model.boundaries: ") + err.what());
    }
    const int num_batches = static_cast<int>(cfg.model.boundaries.size());
    const DistributionFamily family = cfg.model.family->build();

    if (!cfg.model.theta.empty() && !cfg.model.theta_from.empty())
        throw ConfigError("model.theta: give exactly one of theta and theta_from");
    if (!cfg.model.theta.empty()) {
        if (static_cast<int>(cfg.model.theta.size()) != num_batches)
            throw ConfigError("model.theta: need one value per batch (" +
                              std::to_string(num_batches) + ")");
        for (double t : cfg.model.theta)
            if (!family.valid_parameter(t))
                throw ConfigError("model.theta: invalid parameter for the " + family.name() +
                                  " family");
    }

    if (!cfg.grid.multipliers.empty() && !cfg.grid.lambdas.empty())
        throw ConfigError("grid.multipliers: give exactly one of multipliers and lambda lists");
    if (!cfg.grid.lambdas.empty()) validate_lambda_lists("grid.lambda", cfg.grid.lambdas, num_batches);
    if (!(cfg.grid.epsilon > 0.0)) throw ConfigError("grid.epsilon: must be > 0");

    if (cfg.detector.threshold.has_value() == cfg.detector.beta.has_value())
        throw ConfigError("detector.threshold: give exactly one of threshold and beta");
    if (cfg.detector.threshold && std::isnan(*cfg.detector.threshold))
        throw ConfigError("detector.threshold: must not be NaN");
    if (cfg.detector.beta && !(*cfg.detector.beta > 1.0))
        throw ConfigError("detector.beta: must be > 1");
    if (cfg.detector.window && *cfg.detector.window < 1)
        throw ConfigError("detector.window: must be >= 1");
    if (cfg.detector.product_cap < 1) throw ConfigError("detector.product_cap: must be >= 1");

    if (cfg.scenario.day_length && *cfg.scenario.day_length < 1)
        throw ConfigError("scenario.day_length: must be >= 1");
    if (cfg.scenario.days < 1) throw ConfigError("scenario.days: must be >= 1");
    if (cfg.scenario.event_day < 0 || cfg.scenario.event_day > cfg.scenario.days)
        throw ConfigError("scenario.event_day: must be 0 (no event) or in 1..days");
    if (cfg.scenario.event_gamma < 1) throw ConfigError("scenario.event_gamma: must be >= 1");
    if (cfg.scenario.day_length && cfg.scenario.event_gamma > *cfg.scenario.day_length)
        throw ConfigError("scenario.event_gamma: must be <= day_length");
    if (!(cfg.scenario.event_multiplier > 0.0))
        throw ConfigError("scenario.event_multiplier: must be > 0");
    std::set<int> seen_batches;
    for (int b : cfg.scenario.event_batches) {
        if (b < 1 || b > num_batches)
            throw ConfigError("scenario.event_batches: batch " + std::to_string(b) +
                              " outside 1.." + std::to_string(num_batches));
        if (!seen_batches.insert(b).second)
            throw ConfigError("scenario.event_batches: duplicate batch " + std::to_string(b));
    }

    // Processing order: explicit list, else section order, else one default stream.
    if (cfg.scenario.modalities.empty())
        for (const ModalityOverride& mod : cfg.modalities)
            cfg.scenario.modalities.push_back(mod.label);

    for (ModalityOverride& mod : cfg.modalities) {
        const std::string prefix = "modality:" + mod.label;
        if (!mod.theta.empty() && !mod.theta_from.empty())
            throw ConfigError(prefix + ".theta: give exactly one of theta and theta_from");
        if (!mod.theta.empty()) {
            if (static_cast<int>(mod.theta.size()) != num_batches)
                throw ConfigError(prefix + ".theta: need one value per batch (" +
                                  std::to_string(num_batches) + ")");
            for (double t : mod.theta)
                if (!family.valid_parameter(t))
                    throw ConfigError(prefix + ".theta: invalid parameter for the " + family.name() +
                                      " family");
        }
        if (!mod.multipliers.empty() && !mod.lambdas.empty())
            throw ConfigError(prefix + ".multipliers: give exactly one of multipliers and lambda lists");
        if (!mod.lambdas.empty()) validate_lambda_lists(prefix + ".lambda", mod.lambdas, num_batches);
        if (mod.event_multiplier && !(*mod.event_multiplier > 0.0))
            throw ConfigError(prefix + ".event_multiplier: must be > 0");
    }

    // Every effective modality must end with a baseline source and a grid.
    const bool top_theta = !cfg.model.theta.empty() || !cfg.model.theta_from.empty();
    const bool top_grid = !cfg.grid.multipliers.empty() || !cfg.grid.lambdas.empty();
    auto find_mod = [&](const std::string& label) -> const ModalityOverride* {
        for (const ModalityOverride& mod : cfg.modalities)
            if (mod.label == label) return &mod;
        return nullptr;
    };
    if (cfg.scenario.modalities.empty()) {
        if (!top_theta) throw ConfigError("model.theta: required (no modality overrides present)");
        if (!top_grid) throw ConfigError("grid.multipliers: required (no modality overrides present)");
    }
    std::set<std::string> labels;
    for (const std::string& label : cfg.scenario.modalities) {
        if (!labels.insert(label).second)
            throw ConfigError("scenario.modalities: duplicate label '" + label + "'");
        const ModalityOverride* mod = find_mod(label);
        const bool has_theta =
            top_theta || (mod && (!mod->theta.empty() || !mod->theta_from.empty()));
        const bool has_grid =
            top_grid || (mod && (!mod->multipliers.empty() || !mod->lambdas.empty()));
        if (!has_theta)
            throw ConfigError("modality:" + label + ".theta: no baseline here or in [model]");
        if (!has_grid)
            throw ConfigError("modality:" + label + ".multipliers: no grid here or in [grid]");
    }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    Parser parser;
    enum class Section { None, Model, Grid, Detector, Scenario, Modality };
    Section section = Section::None;
    ModalityOverride* modality = nullptr;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const std::size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": malformed section header '" + raw + "'");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name == "model") {
                section = Section::Model;
            } else if (name == "grid") {
                section = Section::Grid;
            } else if (name == "detector") {
                section = Section::Detector;
            } else if (name == "scenario") {
                section = Section::Scenario;
            } else if (name.rfind("modality:", 0) == 0) {
                const std::string label = trim(name.substr(9));
                if (label.empty())
                    throw ConfigError("config line " + std::to_string(line_no) +
                                      ": modality section needs a label");
                for (const ModalityOverride& m : parser.cfg.modalities)
                    if (m.label == label)
                        throw ConfigError("config line " + std::to_string(line_no) +
                                          ": duplicate section [modality:" + label + "]");
                parser.cfg.modalities.push_back(ModalityOverride{});
                parser.cfg.modalities.back().label = label;
                modality = &parser.cfg.modalities.back();
                section = Section::Modality;
            } else {
                throw ConfigError("config line " + std::to_string(line_no) + ": unknown section [" +
                                  name + "]");
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (value.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty value for '" +
                              key + "'");

        switch (section) {
            case Section::None:
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": key before any [section]");
            case Section::Model:
                parser.model_key(key, value, line_no);
                break;
            case Section::Grid:
                parser.grid_key(key, value, line_no);
                break;
            case Section::Detector:
                parser.detector_key(key, value, line_no);
                break;
            case Section::Scenario:
                parser.scenario_key(key, value, line_no);
                break;
            case Section::Modality:
                parser.modality_key(modality, key, value, line_no);
                break;
        }
    }

    validate(parser.cfg);
    return parser.cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not readable: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace cyclodet
