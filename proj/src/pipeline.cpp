#include "uplift/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "json.hpp"
#include "uplift/csv.hpp"
#include "uplift/curve.hpp"
#include "uplift/error.hpp"
#include "uplift/rng.hpp"

namespace uplift {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string RunConfig::dataset_file() const {
    return dataset_path ? *dataset_path : out_dir + "/dataset.csv";
}
std::string RunConfig::manifest_file() const {
    return manifest_path ? *manifest_path : out_dir + "/manifest.json";
}
std::string RunConfig::model_file() const { return out_dir + "/model.json"; }
std::string RunConfig::curve_file() const { return out_dir + "/curve.csv"; }
std::string RunConfig::fit_report_file() const { return out_dir + "/fit_report.json"; }
std::string RunConfig::policy_file() const { return out_dir + "/policy.csv"; }
std::string RunConfig::optimizer_report_file() const { return out_dir + "/optimizer_report.json"; }
std::string RunConfig::eval_report_file() const { return out_dir + "/eval_report.json"; }
std::string RunConfig::lift_table_file() const { return out_dir + "/lift_table.csv"; }
std::string RunConfig::summary_file() const { return out_dir + "/summary.csv"; }

namespace {

ThresholdDirection direction_from_name(const std::string& name) {
    if (name == "below") return ThresholdDirection::Below;
    if (name == "above") return ThresholdDirection::Above;
    throw ConfigError("baseline direction must be \"below\" or \"above\"");
}

TreatmentSet treatments_from_json(const ordered_json& j) {
    auto labels = j.at("labels").get<std::vector<std::string>>();
    std::vector<double> propensities;
    if (j.contains("propensities")) {
        propensities = j.at("propensities").get<std::vector<double>>();
    }
    try {
        return TreatmentSet(std::move(labels), std::move(propensities));
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("treatments: ") + e.what());
    }
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }

    RunConfig cfg;
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.out_dir = j.value("out", "run");

    if (j.contains("dataset")) {
        const auto& dj = j.at("dataset");
        if (dj.contains("path")) cfg.dataset_path = dj.at("path").get<std::string>();
        if (dj.contains("manifest")) cfg.manifest_path = dj.at("manifest").get<std::string>();
        if (dj.contains("schema")) {
            const auto& sj = dj.at("schema");
            cfg.schema.id_column = sj.value("id", "id");
            cfg.schema.treatment_column = sj.value("treatment", "treatment");
            cfg.schema.outcome_column = sj.value("outcome", "outcome");
        }
        if (dj.contains("treatments")) cfg.schema.treatments = treatments_from_json(dj.at("treatments"));
    }

    if (j.contains("synth")) {
        cfg.synth = synth_config_from_json_text(j.at("synth").dump());
        if (!j.at("synth").contains("seed")) cfg.synth->seed = derive_seed(cfg.seed, 1);
        if (cfg.schema.treatments.labels.empty()) cfg.schema.treatments = cfg.synth->treatments();
    }

    if (j.contains("split")) {
        cfg.eval_fraction = j.at("split").value("eval_fraction", 0.0);
    }

    if (j.contains("estimator")) {
        const auto& ej = j.at("estimator");
        cfg.estimator = learner_from_name(ej.value("kind", "t"));
        cfg.tree.max_depth = ej.value("max_depth", cfg.tree.max_depth);
        cfg.tree.min_leaf_size = ej.value("min_leaf_size", cfg.tree.min_leaf_size);
        cfg.tree.n_trees = ej.value("n_trees", 1);
        cfg.tree.seed = derive_seed(cfg.seed, 3);
        if (ej.contains("features")) cfg.features = ej.at("features").get<std::vector<std::string>>();
        cfg.curve_arm = ej.value("curve_arm", 1);
        cfg.auc_null_permutations = ej.value("auc_null_permutations", 200);
    }

    if (j.contains("constraint")) {
        const auto& cj = j.at("constraint");
        const std::string kind = cj.value("kind", "none");
        try {
            if (kind == "none") {
                cfg.constraint = ConstraintSpec::none();
            } else if (kind == "budget") {
                cfg.constraint = ConstraintSpec::budget(cj.at("caps").get<std::vector<long long>>());
            } else if (kind == "ratio_floor") {
                cfg.constraint = ConstraintSpec::ratio_floor(cj.at("aux").get<std::string>(),
                                                             cj.value("epsilon", 0.01),
                                                             cj.value("reference_arm", 1));
                cfg.n_groups = cj.value("groups", 0);
                cfg.ratio_options.quantization = cj.value("quantization", 1e-3);
                cfg.ratio_options.enumeration_limit = cj.value("enumeration_limit", 20);
            } else {
                throw ConfigError("unknown constraint kind \"" + kind + "\"");
            }
        } catch (const ArgumentError& e) {
            throw ConfigError(std::string("constraint: ") + e.what());
        }
    }

    if (j.contains("evaluate")) {
        const auto& ej = j.at("evaluate");
        if (ej.contains("outcomes")) cfg.outcomes = ej.at("outcomes").get<std::vector<std::string>>();
        if (ej.contains("baselines")) {
            for (const auto& bj : ej.at("baselines")) {
                BaselineDef def;
                def.name = bj.at("name").get<std::string>();
                def.type = bj.at("type").get<std::string>();
                if (def.type == "threshold") {
                    def.score_feature = bj.at("score").get<std::string>();
                    def.threshold = bj.at("threshold").get<double>();
                    def.direction = direction_from_name(bj.value("direction", "below"));
                    def.arm = bj.value("arm", 1);
                } else if (def.type == "constant") {
                    def.constant_arm = bj.at("arm").get<int>();
                } else {
                    throw ConfigError("baseline type must be \"threshold\" or \"constant\"");
                }
                cfg.baselines.push_back(std::move(def));
            }
        }
        if (ej.contains("e_pct_is")) {
            const auto& pj = ej.at("e_pct_is");
            cfg.e_pct = EPctConfig{pj.at("sales").get<std::string>(),
                                   pj.at("rewards").get<std::string>(),
                                   pj.at("baseline_sales").get<double>()};
        }
    }
    if (cfg.outcomes.empty()) cfg.outcomes.push_back(kPrimaryOutcome);
    return cfg;
}

namespace {

void ensure_out_dir(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + cfg.out_dir);
}

ExperimentDataset load_dataset(const RunConfig& cfg) {
    if (cfg.schema.treatments.labels.empty()) {
        throw ConfigError("config must declare treatment labels");
    }
    ExperimentDataset ds = load_experiment(cfg.dataset_file(), cfg.schema);
    const ValidationReport report = validate(ds);
    for (const auto& issue : report.issues) {
        if (issue.severity == ValidationIssue::Severity::Warning) {
            std::fprintf(stderr, "warning: %s\n", issue.message.c_str());
        }
    }
    if (report.has_errors()) {
        for (const auto& issue : report.issues) {
            if (issue.severity == ValidationIssue::Severity::Error) {
                throw DataError(cfg.dataset_file() + ": " + issue.message);
            }
        }
    }
    return ds;
}

/// Restrict a dataset to the configured covariate subset.
ExperimentDataset select_features(const ExperimentDataset& ds,
                                  const std::vector<std::string>& features) {
    if (features.empty()) return ds;
    std::vector<std::size_t> cols;
    for (const auto& name : features) {
        auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(), name);
        if (it == ds.feature_names.end()) {
            throw ConfigError("unknown feature \"" + name + "\" in estimator.features");
        }
        cols.push_back(static_cast<std::size_t>(it - ds.feature_names.begin()));
    }
    ExperimentDataset out = ds;
    out.feature_names = features;
    for (auto& rec : out.records) {
        std::vector<double> x;
        x.reserve(cols.size());
        for (std::size_t c : cols) x.push_back(rec.x[c]);
        rec.x = std::move(x);
    }
    return out;
}

/// train/eval selection shared by fit, optimize and evaluate. With no split
/// configured both halves are the full dataset.
std::pair<ExperimentDataset, ExperimentDataset> split_for_run(const RunConfig& cfg,
                                                              const ExperimentDataset& ds) {
    if (cfg.eval_fraction <= 0.0) return {ds, ds};
    return split(ds, cfg.eval_fraction, derive_seed(cfg.seed, 2));
}

std::vector<double> feature_column(const ExperimentDataset& ds, const std::string& name) {
    auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(), name);
    if (it == ds.feature_names.end()) {
        throw ConfigError("unknown feature \"" + name + "\" in baseline score");
    }
    const std::size_t col = static_cast<std::size_t>(it - ds.feature_names.begin());
    std::vector<double> out;
    out.reserve(ds.size());
    for (const auto& rec : ds.records) out.push_back(rec.x[col]);
    return out;
}

std::vector<std::pair<std::string, Policy>> build_baselines(const RunConfig& cfg,
                                                            const ExperimentDataset& eval) {
    std::vector<std::pair<std::string, Policy>> out;
    for (const auto& def : cfg.baselines) {
        if (def.type == "threshold") {
            out.emplace_back(def.name, threshold_policy(eval, feature_column(eval, def.score_feature),
                                                        def.threshold, def.direction, def.arm));
        } else {
            if (def.constant_arm < 0 || def.constant_arm >= eval.treatments.num_arms()) {
                throw ConfigError("baseline \"" + def.name + "\": arm out of range");
            }
            out.emplace_back(def.name, Policy::constant(eval.ids(), def.constant_arm));
        }
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write " + path);
    out << text;
}

}  // namespace

void run_simulate(const RunConfig& cfg) {
    if (!cfg.synth) throw ConfigError("simulate requires a synth block in the config");
    ensure_out_dir(cfg);
    auto [ds, gt] = generate(*cfg.synth);
    write_experiment(ds, cfg.dataset_file());
    write_manifest(gt.config, cfg.manifest_file());
}

void run_fit(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const ExperimentDataset full = select_features(load_dataset(cfg), cfg.features);
    auto [train, eval] = split_for_run(cfg, full);

    const CateModel model = fit_learner(cfg.estimator, train, cfg.tree);
    save_model(model, cfg.model_file());

    const UpliftEstimates est = predict_cate(model, eval);
    const UpliftCurve curve = cumulative_uplift_curve(eval, est, cfg.curve_arm);
    write_curve_csv(curve, cfg.curve_file());

    const double auc = uplift_auc(curve);
    const double null_sd = random_ranking_auc_sd(eval, cfg.curve_arm, cfg.auc_null_permutations,
                                                 derive_seed(cfg.seed, 4));

    ordered_json report;
    report["estimator"] = learner_name(cfg.estimator);
    report["base_learner"] = "regression_tree";
    report["note"] =
        "meta-learner over an in-repo regression tree; production forest estimators are out of scope";
    report["features"] = full.feature_names;
    report["params"] = {{"max_depth", cfg.tree.max_depth},
                        {"min_leaf_size", cfg.tree.min_leaf_size},
                        {"n_trees", cfg.tree.n_trees}};
    report["train_rows"] = train.size();
    report["eval_rows"] = eval.size();
    report["curve_arm"] = cfg.curve_arm;
    report["auc"] = auc;
    report["auc_null_sd"] = null_sd;
    report["auc_null_permutations"] = cfg.auc_null_permutations;
    // basenames only: artifacts must be byte-identical across output dirs
    report["model_file"] = fs::path(cfg.model_file()).filename().string();
    report["curve_file"] = fs::path(cfg.curve_file()).filename().string();
    write_text(cfg.fit_report_file(), report.dump(2) + "\n");
}

void run_optimize(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const CateModel model = load_model(cfg.model_file());
    ExperimentDataset full = load_dataset(cfg);
    if (!cfg.features.empty()) {
        full = select_features(full, cfg.features);
    } else if (full.feature_names != model.feature_names) {
        full = select_features(full, model.feature_names);
    }
    auto [train, eval] = split_for_run(cfg, full);
    const UpliftEstimates est = predict_cate(model, eval);

    OptimizeResult result;
    switch (cfg.constraint.kind) {
        case ConstraintKind::None:
            result = optimize_positive(est);
            break;
        case ConstraintKind::Budget:
            result = optimize_budget(est, {}, cfg.constraint.caps);
            break;
        case ConstraintKind::RatioFloor: {
            const int groups = cfg.n_groups > 0
                                   ? cfg.n_groups
                                   : static_cast<int>(std::min<std::size_t>(eval.size(), 100));
            const BucketSet buckets = bucketize(est, eval, groups, cfg.constraint.ratio->aux);
            result = optimize_ratio_constrained(buckets, cfg.constraint.ratio->epsilon,
                                                cfg.constraint.ratio->reference_arm,
                                                cfg.ratio_options);
            break;
        }
    }

    write_policy_csv(result.policy, eval.treatments, cfg.policy_file());
    write_text(cfg.optimizer_report_file(), optimizer_report_json(result, cfg.constraint));
}

void run_evaluate(const RunConfig& cfg, const std::vector<std::string>& policy_files) {
    ensure_out_dir(cfg);
    ExperimentDataset full = load_dataset(cfg);
    auto [train, eval] = split_for_run(cfg, full);

    std::vector<std::string> files = policy_files;
    if (files.empty()) files.push_back(cfg.policy_file());

    const std::vector<std::string> eval_ids = eval.ids();
    std::vector<std::pair<std::string, Policy>> proposed;
    for (const auto& file : files) {
        Policy p = load_policy_csv(file, eval.treatments);
        if (p.ids != eval_ids) {
            std::string detail;
            for (std::size_t i = 0; i < std::min(p.ids.size(), eval_ids.size()); ++i) {
                if (p.ids[i] != eval_ids[i]) {
                    detail = ": first mismatch at \"" + p.ids[i] + "\" vs \"" + eval_ids[i] + "\"";
                    break;
                }
            }
            if (detail.empty()) detail = ": row counts differ";
            throw DataError("policy file " + file + " not aligned to evaluation data" + detail);
        }
        proposed.emplace_back(fs::path(file).stem().string(), std::move(p));
    }

    // first policy file is the proposed policy; any further ones are
    // compared against it as extra baselines
    auto baselines = build_baselines(cfg, eval);
    for (std::size_t i = 1; i < proposed.size(); ++i) baselines.push_back(proposed[i]);
    const PolicyEvalReport report =
        lift_report(eval, proposed[0].second, baselines, cfg.outcomes, cfg.e_pct);
    write_text(cfg.eval_report_file(), eval_report_json(report));
    write_lift_csv(report, cfg.lift_table_file());

    // With a synth manifest available, put exact oracle values next to the
    // IPS estimates so estimator error is visible at a glance.
    if (fs::exists(cfg.manifest_file())) {
        GroundTruth gt{load_manifest(cfg.manifest_file())};
        ordered_json truth;
        auto value_entry = [&](const Policy& p) {
            ordered_json per_outcome;
            for (const auto& outcome : cfg.outcomes) {
                const double oracle = true_policy_value(gt, eval, p, outcome);
                const double estimate = ips(eval, p, outcome);
                ordered_json entry;
                entry["true_value"] = oracle;
                entry["ips"] = estimate;
                if (oracle != 0.0) {
                    entry["ips_relative_error"] = std::abs(estimate - oracle) / std::abs(oracle);
                }
                per_outcome[outcome] = std::move(entry);
            }
            return per_outcome;
        };
        truth[proposed[0].first] = value_entry(proposed[0].second);
        for (const auto& [name, p] : baselines) truth[name] = value_entry(p);
        write_text(cfg.out_dir + "/true_values.json", truth.dump(2) + "\n");
    }
}

void run_report(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    auto read_json = [](const std::string& path) -> std::optional<ordered_json> {
        std::ifstream in(path, std::ios::binary);
        if (!in) return std::nullopt;
        return ordered_json::parse(in);
    };
    const auto fit = read_json(cfg.fit_report_file());
    const auto eval = read_json(cfg.eval_report_file());
    if (!eval) throw DataError("report: missing " + cfg.eval_report_file() + "; run evaluate first");

    std::ofstream out(cfg.summary_file(), std::ios::binary);
    if (!out) throw ArgumentError("cannot write " + cfg.summary_file());
    out << "policy,targeting_proportion,auc,outcome,ips,snips,e_pct_is\n";

    auto metric_rows = [&](const std::string& name, const ordered_json& metrics,
                           double proportion, const std::string& auc,
                           const ordered_json* e_pct) {
        for (const auto& [outcome, m] : metrics.items()) {
            std::vector<std::string> row{name, csv::format_double(proportion), auc, outcome};
            row.push_back(csv::format_double(m.at("ips").get<double>()));
            row.push_back(m.at("snips").is_null() ? "undefined"
                                                  : csv::format_double(m.at("snips").get<double>()));
            std::string e_cell;
            if (e_pct != nullptr && e_pct->contains("value")) {
                e_cell = csv::format_double((*e_pct)["value"].get<double>());
            }
            row.push_back(e_cell);
            out << csv::join(row) << "\n";
        }
    };

    std::string auc_cell;
    if (fit && fit->contains("auc")) auc_cell = csv::format_double((*fit)["auc"].get<double>());

    const ordered_json* prop_epct =
        eval->contains("e_pct_is") ? &(*eval)["e_pct_is"] : nullptr;
    metric_rows("proposed", (*eval)["proposed"], (*eval)["targeting_proportion"].get<double>(),
                auc_cell, prop_epct);
    for (const auto& b : (*eval)["baselines"]) {
        const ordered_json* base_epct = b.contains("e_pct_is") ? &b["e_pct_is"] : nullptr;
        metric_rows(b["baseline"].get<std::string>(), b["metrics"],
                    b["targeting_proportion"].get<double>(), "", base_epct);
    }
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) != nullptr) return 2;
    if (dynamic_cast<const ArgumentError*>(&e) != nullptr) return 2;
    if (dynamic_cast<const CapacityError*>(&e) != nullptr) return 4;
    if (dynamic_cast<const Error*>(&e) != nullptr) return 3;
    return 1;
}

}  // namespace uplift
