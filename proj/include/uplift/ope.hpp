#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uplift/dataset.hpp"
#include "uplift/policy.hpp"

namespace uplift {

/// Name of the primary outcome column when used as an evaluation outcome.
inline constexpr const char* kPrimaryOutcome = "y";

/// Inverse propensity score estimate of the policy's mean outcome:
/// (1/N) * sum_i Z_i * 1{assigned arm == logged arm} / p_{T_i}.
double ips(const ExperimentDataset& ds, const Policy& p, const std::string& outcome);

/// Self-normalized IPS. Empty when the policy matches no logged assignment.
std::optional<double> snips(const ExperimentDataset& ds, const Policy& p,
                            const std::string& outcome);

/// Mean outcome over records whose logged arm equals the policy's assignment.
/// Empty when nothing matches.
std::optional<double> expected_outcome_under_policy(const ExperimentDataset& ds, const Policy& p,
                                                    const std::string& outcome);

struct EPctIsResult {
    std::optional<double> value;
    bool negative_denominator = false;
};

/// Efficiency ratio: matched mean rewards / (matched mean sales - baseline).
/// Undefined on a zero denominator or an empty matched set; a negative
/// denominator is returned as-is with the sign flag set.
EPctIsResult e_pct_is(const ExperimentDataset& ds, const Policy& p, const std::string& sales,
                      const std::string& rewards, double baseline_sales);

enum class ThresholdDirection { Below, Above };

/// Assigns `arm` to customers strictly below (or above) the threshold,
/// control to everyone else.
Policy threshold_policy(const ExperimentDataset& ds, const std::vector<double>& score,
                        double threshold, ThresholdDirection direction, int arm);

struct OutcomeMetrics {
    double ips = 0.0;
    std::optional<double> snips;
    std::size_t match_count = 0;
};

struct LiftValue {
    std::optional<double> value;
    bool absolute = false;   ///< baseline metric was 0; value is the absolute difference
    bool undefined = false;  ///< either side undefined
};

struct EPctConfig {
    std::string sales;
    std::string rewards;
    double baseline_sales = 0.0;
};

struct BaselineComparison {
    std::string name;
    double targeting_proportion = 0.0;
    std::map<std::string, OutcomeMetrics> metrics;  ///< by outcome
    std::map<std::string, LiftValue> ips_lift;      ///< by outcome
    std::map<std::string, LiftValue> snips_lift;    ///< by outcome
    std::optional<EPctIsResult> e_pct;
    std::optional<LiftValue> e_pct_lift;
};

struct PolicyEvalReport {
    std::map<std::string, OutcomeMetrics> proposed;  ///< by outcome
    double targeting_proportion = 0.0;
    std::optional<EPctIsResult> proposed_e_pct;
    std::vector<BaselineComparison> baselines;
};

/// Relative lift of the proposed policy over each baseline per outcome and
/// metric: (metric(proposed) - metric(baseline)) / |metric(baseline)|.
PolicyEvalReport lift_report(const ExperimentDataset& ds, const Policy& proposed,
                             const std::vector<std::pair<std::string, Policy>>& baselines,
                             const std::vector<std::string>& outcomes,
                             const std::optional<EPctConfig>& e_pct_config = {});

std::string eval_report_json(const PolicyEvalReport& report);
void write_lift_csv(const PolicyEvalReport& report, const std::string& path);

}  // namespace uplift
