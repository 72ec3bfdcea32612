#include "uplift/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "uplift/error.hpp"
#include "uplift/rng.hpp"

namespace uplift {

double ResponseSpec::mean(const std::vector<double>& x) const {
    double m = intercept;
    for (std::size_t j = 0; j < linear.size(); ++j) m += linear[j] * x[j];
    for (const auto& step : steps) {
        if (x[static_cast<std::size_t>(step.feature)] >= step.threshold) m += step.value;
    }
    if (logistic) {
        double z = logistic->intercept;
        for (std::size_t j = 0; j < logistic->coef.size(); ++j) z += logistic->coef[j] * x[j];
        m += logistic->scale / (1.0 + std::exp(-z));
    }
    return m;
}

namespace {

void check_response(const ResponseSpec& spec, int d, const std::string& what) {
    if (!spec.linear.empty() && static_cast<int>(spec.linear.size()) != d) {
        throw ConfigError(what + ": linear coefficient count must equal d");
    }
    for (const auto& step : spec.steps) {
        if (step.feature < 0 || step.feature >= d) {
            throw ConfigError(what + ": step feature index out of range");
        }
    }
    if (spec.logistic && !spec.logistic->coef.empty() &&
        static_cast<int>(spec.logistic->coef.size()) != d) {
        throw ConfigError(what + ": logistic coefficient count must equal d");
    }
}

}  // namespace

void SynthConfig::check() const {
    if (n < 1) throw ConfigError("synth: n must be >= 1");
    if (d < 1) throw ConfigError("synth: d must be >= 1");
    if (num_treatments < 1) throw ConfigError("synth: K must be >= 1");
    if (noise_sd < 0.0) throw ConfigError("synth: noise_sd must be >= 0");
    const std::size_t arms = static_cast<std::size_t>(num_treatments) + 1;
    if (response.size() != arms) {
        throw ConfigError("synth: need one response spec per arm (" + std::to_string(arms) + ")");
    }
    for (std::size_t k = 0; k < arms; ++k) {
        check_response(response[k], d, "response arm " + std::to_string(k));
    }
    for (const auto& aux_spec : aux) {
        if (aux_spec.name.empty()) throw ConfigError("synth: aux outcome needs a name");
        if (aux_spec.response.size() != arms) {
            throw ConfigError("synth: aux \"" + aux_spec.name + "\" needs one spec per arm");
        }
        if (aux_spec.noise_sd < 0.0) throw ConfigError("synth: aux noise_sd must be >= 0");
        for (std::size_t k = 0; k < arms; ++k) {
            check_response(aux_spec.response[k], d, "aux \"" + aux_spec.name + "\"");
        }
    }
    if (!labels.empty() && labels.size() != arms) {
        throw ConfigError("synth: label count must be K+1");
    }
    if (!propensities.empty() && propensities.size() != arms) {
        throw ConfigError("synth: propensity count must be K+1");
    }
}

TreatmentSet SynthConfig::treatments() const {
    std::vector<std::string> arm_labels = labels;
    if (arm_labels.empty()) {
        for (int k = 0; k <= num_treatments; ++k) arm_labels.push_back("t" + std::to_string(k));
    }
    return TreatmentSet(std::move(arm_labels), propensities);
}

double GroundTruth::mean_outcome(int arm, const std::vector<double>& x) const {
    if (arm < 0 || arm > config.num_treatments) throw ArgumentError("arm index out of range");
    if (static_cast<int>(x.size()) != config.d) throw ArgumentError("covariate dimension mismatch");
    double m = config.response[static_cast<std::size_t>(arm)].mean(x);
    if (config.outcome_kind == OutcomeKind::Binary) m = std::clamp(m, 0.0, 1.0);
    return m;
}

double GroundTruth::mean_aux(const std::string& name, int arm, const std::vector<double>& x) const {
    if (arm < 0 || arm > config.num_treatments) throw ArgumentError("arm index out of range");
    if (static_cast<int>(x.size()) != config.d) throw ArgumentError("covariate dimension mismatch");
    for (const auto& aux_spec : config.aux) {
        if (aux_spec.name == name) {
            double m = aux_spec.response[static_cast<std::size_t>(arm)].mean(x);
            if (aux_spec.kind == OutcomeKind::Binary) m = std::clamp(m, 0.0, 1.0);
            return m;
        }
    }
    throw ArgumentError("unknown auxiliary outcome \"" + name + "\"");
}

std::pair<ExperimentDataset, GroundTruth> generate(const SynthConfig& cfg) {
    cfg.check();

    ExperimentDataset ds;
    ds.treatments = cfg.treatments();
    for (int j = 0; j < cfg.d; ++j) ds.feature_names.push_back("f" + std::to_string(j + 1));
    for (const auto& aux_spec : cfg.aux) ds.aux_names.push_back(aux_spec.name);

    GroundTruth gt{cfg};
    Rng rng(cfg.seed);

    int id_width = 1;
    for (std::size_t scale = cfg.n; scale >= 10; scale /= 10) ++id_width;

    std::vector<double> cumulative(ds.treatments.propensities.size());
    double running = 0.0;
    for (std::size_t k = 0; k < cumulative.size(); ++k) {
        running += ds.treatments.propensities[k];
        cumulative[k] = running;
    }

    ds.records.reserve(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        CustomerRecord rec;
        std::string number = std::to_string(i + 1);
        rec.id = "c" + std::string(static_cast<std::size_t>(id_width) - number.size(), '0') + number;

        rec.x.resize(static_cast<std::size_t>(cfg.d));
        for (double& v : rec.x) v = rng.uniform01();

        const double u = rng.uniform01();
        int arm = static_cast<int>(cumulative.size()) - 1;
        for (std::size_t k = 0; k < cumulative.size(); ++k) {
            if (u < cumulative[k]) {
                arm = static_cast<int>(k);
                break;
            }
        }
        rec.t = arm;

        const double mean_y = gt.mean_outcome(arm, rec.x);
        rec.y = cfg.outcome_kind == OutcomeKind::Binary
                    ? (rng.bernoulli(mean_y) ? 1.0 : 0.0)
                    : mean_y + cfg.noise_sd * rng.normal();

        rec.aux.reserve(cfg.aux.size());
        for (const auto& aux_spec : cfg.aux) {
            const double mean_z = gt.mean_aux(aux_spec.name, arm, rec.x);
            rec.aux.push_back(aux_spec.kind == OutcomeKind::Binary
                                  ? (rng.bernoulli(mean_z) ? 1.0 : 0.0)
                                  : mean_z + aux_spec.noise_sd * rng.normal());
        }
        ds.records.push_back(std::move(rec));
    }
    return {std::move(ds), std::move(gt)};
}

double true_cate(const GroundTruth& gt, int arm, const std::vector<double>& x) {
    if (arm < 1) throw ArgumentError("control arm has no treatment effect");
    return gt.mean_outcome(arm, x) - gt.mean_outcome(0, x);
}

double true_policy_value(const GroundTruth& gt, const ExperimentDataset& ds, const Policy& policy,
                         const std::string& outcome) {
    if (policy.ids.size() != ds.size() || policy.ids != ds.ids()) {
        throw ArgumentError("policy not aligned to dataset");
    }
    policy.check(gt.config.num_treatments);
    if (ds.size() == 0) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const int arm = policy.assignment[i];
        total += outcome == "y" ? gt.mean_outcome(arm, ds.records[i].x)
                                : gt.mean_aux(outcome, arm, ds.records[i].x);
    }
    return total / static_cast<double>(ds.size());
}

namespace {

using nlohmann::ordered_json;

ordered_json response_to_json(const ResponseSpec& spec) {
    ordered_json j = ordered_json::object();
    if (spec.intercept != 0.0) j["intercept"] = spec.intercept;
    if (!spec.linear.empty()) j["linear"] = spec.linear;
    if (!spec.steps.empty()) {
        ordered_json steps = ordered_json::array();
        for (const auto& s : spec.steps) {
            steps.push_back({{"feature", s.feature}, {"threshold", s.threshold}, {"value", s.value}});
        }
        j["steps"] = std::move(steps);
    }
    if (spec.logistic) {
        j["logistic"] = {{"scale", spec.logistic->scale},
                         {"intercept", spec.logistic->intercept},
                         {"coef", spec.logistic->coef}};
    }
    return j;
}

ResponseSpec response_from_json(const ordered_json& j) {
    ResponseSpec spec;
    spec.intercept = j.value("intercept", 0.0);
    if (j.contains("linear")) spec.linear = j.at("linear").get<std::vector<double>>();
    if (j.contains("steps")) {
        for (const auto& s : j.at("steps")) {
            spec.steps.push_back({s.at("feature").get<int>(), s.at("threshold").get<double>(),
                                  s.at("value").get<double>()});
        }
    }
    if (j.contains("logistic")) {
        LogisticTerm term;
        const auto& lj = j.at("logistic");
        term.scale = lj.value("scale", 1.0);
        term.intercept = lj.value("intercept", 0.0);
        if (lj.contains("coef")) term.coef = lj.at("coef").get<std::vector<double>>();
        spec.logistic = std::move(term);
    }
    return spec;
}

std::string kind_name(OutcomeKind kind) {
    return kind == OutcomeKind::Binary ? "binary" : "real";
}

OutcomeKind kind_from_name(const std::string& name) {
    if (name == "binary") return OutcomeKind::Binary;
    if (name == "real") return OutcomeKind::Real;
    throw ConfigError("outcome kind must be \"real\" or \"binary\", got \"" + name + "\"");
}

}  // namespace

std::string synth_config_to_json_text(const SynthConfig& cfg) {
    ordered_json j;
    j["n"] = cfg.n;
    j["d"] = cfg.d;
    j["K"] = cfg.num_treatments;
    j["outcome"] = kind_name(cfg.outcome_kind);
    j["noise_sd"] = cfg.noise_sd;
    j["seed"] = cfg.seed;
    if (!cfg.labels.empty()) j["labels"] = cfg.labels;
    if (!cfg.propensities.empty()) j["propensities"] = cfg.propensities;
    ordered_json response = ordered_json::array();
    for (const auto& spec : cfg.response) response.push_back(response_to_json(spec));
    j["response"] = std::move(response);
    if (!cfg.aux.empty()) {
        ordered_json aux = ordered_json::array();
        for (const auto& aux_spec : cfg.aux) {
            ordered_json a;
            a["name"] = aux_spec.name;
            a["kind"] = kind_name(aux_spec.kind);
            a["noise_sd"] = aux_spec.noise_sd;
            ordered_json rs = ordered_json::array();
            for (const auto& spec : aux_spec.response) rs.push_back(response_to_json(spec));
            a["response"] = std::move(rs);
            aux.push_back(std::move(a));
        }
        j["aux"] = std::move(aux);
    }
    return j.dump(2) + "\n";
}

SynthConfig synth_config_from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("synth config: ") + e.what());
    }
    SynthConfig cfg;
    cfg.n = j.value("n", std::size_t{0});
    cfg.d = j.value("d", 1);
    cfg.num_treatments = j.value("K", 1);
    cfg.outcome_kind = kind_from_name(j.value("outcome", "real"));
    cfg.noise_sd = j.value("noise_sd", 0.0);
    cfg.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("labels")) cfg.labels = j.at("labels").get<std::vector<std::string>>();
    if (j.contains("propensities")) {
        cfg.propensities = j.at("propensities").get<std::vector<double>>();
    }
    if (j.contains("response")) {
        for (const auto& r : j.at("response")) cfg.response.push_back(response_from_json(r));
    }
    if (j.contains("aux")) {
        for (const auto& a : j.at("aux")) {
            AuxSpec aux_spec;
            aux_spec.name = a.at("name").get<std::string>();
            aux_spec.kind = kind_from_name(a.value("kind", "real"));
            aux_spec.noise_sd = a.value("noise_sd", 0.0);
            for (const auto& r : a.at("response")) {
                aux_spec.response.push_back(response_from_json(r));
            }
            cfg.aux.push_back(std::move(aux_spec));
        }
    }
    cfg.check();
    return cfg;
}

void write_manifest(const SynthConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write manifest: " + path);
    out << synth_config_to_json_text(cfg);
}

SynthConfig load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open manifest: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return synth_config_from_json_text(text);
}

}  // namespace uplift
