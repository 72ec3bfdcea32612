#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uplift/cate.hpp"
#include "uplift/dataset.hpp"
#include "uplift/ope.hpp"
#include "uplift/policy.hpp"
#include "uplift/synth.hpp"

namespace uplift {

/// Baseline policy definition for the evaluate stage.
struct BaselineDef {
    std::string name;
    std::string type;  ///< "threshold" or "constant"
    // threshold baselines
    std::string score_feature;
    double threshold = 0.0;
    ThresholdDirection direction = ThresholdDirection::Below;
    int arm = 1;
    // constant baselines
    int constant_arm = 0;
};

/// One config file drives the whole pipeline; each stage reads the previous
/// stage's artifacts from the output directory.
struct RunConfig {
    std::uint64_t seed = 0;
    std::string out_dir = "run";

    // dataset source: a CSV path (with schema) and/or a synth block
    std::optional<std::string> dataset_path;
    CsvSchema schema;
    std::optional<std::string> manifest_path;
    std::optional<SynthConfig> synth;

    double eval_fraction = 0.0;  ///< 0 disables the train/eval split

    LearnerKind estimator = LearnerKind::TLearner;
    TreeParams tree;
    std::vector<std::string> features;  ///< empty selects all features
    int curve_arm = 1;
    int auc_null_permutations = 200;

    ConstraintSpec constraint;
    int n_groups = 0;  ///< bucket count for the ratio-floor solve
    RatioOptions ratio_options;

    std::vector<std::string> outcomes;  ///< defaults to {"y"}
    std::vector<BaselineDef> baselines;
    std::optional<EPctConfig> e_pct;

    // Stage artifact paths, all inside out_dir.
    std::string dataset_file() const;
    std::string manifest_file() const;
    std::string model_file() const;
    std::string curve_file() const;
    std::string fit_report_file() const;
    std::string policy_file() const;
    std::string optimizer_report_file() const;
    std::string eval_report_file() const;
    std::string lift_table_file() const;
    std::string summary_file() const;
};

RunConfig load_run_config(const std::string& path);

void run_simulate(const RunConfig& cfg);
void run_fit(const RunConfig& cfg);
void run_optimize(const RunConfig& cfg);
void run_evaluate(const RunConfig& cfg, const std::vector<std::string>& policy_files = {});
void run_report(const RunConfig& cfg);

/// Maps library errors to the CLI exit code contract:
/// 0 ok, 2 config error, 3 data error, 4 infeasible/capacity.
int exit_code_for(const std::exception& e);

}  // namespace uplift
