#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "uplift/cate.hpp"
#include "uplift/dataset.hpp"

namespace uplift {

/// One-hot assignment matrix in dense form: one arm index per customer.
struct Policy {
    std::vector<std::string> ids;
    std::vector<int> assignment;
    std::vector<double> weights;  ///< w_i, defaults to 1

    std::size_t size() const { return ids.size(); }
    double targeting_proportion() const;

    /// Throws ArgumentError unless shapes agree and arms are within 0..max_arm.
    void check(int max_arm) const;

    static Policy constant(std::vector<std::string> ids, int arm);
};

enum class ConstraintKind { None, Budget, RatioFloor };

struct RatioFloorSpec {
    std::string aux;      ///< constrained auxiliary outcome, e.g. sales
    double epsilon = 0.0; ///< max relative deterioration vs the reference arm
    int reference_arm = 1;
};

struct ConstraintSpec {
    ConstraintKind kind = ConstraintKind::None;
    std::vector<long long> caps;  ///< per non-control arm, caps[k-1] bounds arm k
    std::optional<RatioFloorSpec> ratio;

    static ConstraintSpec none();
    static ConstraintSpec budget(std::vector<long long> caps);
    static ConstraintSpec ratio_floor(std::string aux, double epsilon, int reference_arm);

    void check() const;
};

/// Customers grouped by predicted uplift for group-level optimization.
/// Binary treatment only.
struct Bucket {
    std::vector<std::size_t> members;  ///< dataset record indices
    double mean_tau = 0.0;
    std::array<double, 2> aux_mean{0.0, 0.0};   ///< per arm, from logged records
    std::array<bool, 2> aux_defined{false, false};
    std::size_t size = 0;
};

struct BucketSet {
    std::vector<Bucket> buckets;  ///< ordered by mean predicted uplift, best first
    std::vector<std::string> ids; ///< dataset record order
    std::string aux_name;

    std::size_t num_flagged() const;
};

struct OptimizeResult {
    Policy policy;
    double objective = 0.0;
    double targeting_proportion = 0.0;
    std::string solver_path;  ///< argmax | sorted_exact | greedy | enumeration | dp
    std::optional<double> constraint_slack;
    std::optional<double> quantization;            ///< absolute DP resolution used
    std::optional<double> objective_upper_bound;   ///< DP relaxation bound
};

struct RatioOptions {
    /// DP resolution as a fraction of the spread of per-bucket aux deltas.
    double quantization = 1e-3;
    /// Instances with at most this many free buckets are solved by exact
    /// enumeration; set to 0 to force the DP path.
    int enumeration_limit = 20;
};

/// Sum of w_i * tau_{assigned arm}(x_i); control assignments contribute 0.
double policy_objective(const Policy& p, const UpliftEstimates& est);

/// Assigns each customer the arm maximizing w_i * tau_k(x_i) when that
/// maximum is strictly positive, control otherwise.
OptimizeResult optimize_positive(const UpliftEstimates& est, std::vector<double> weights = {});

/// Budget-capped assignment. Exact for binary treatment; greedy with per-arm
/// cap bookkeeping for K > 1.
OptimizeResult optimize_budget(const UpliftEstimates& est, std::vector<double> weights,
                               const std::vector<long long>& caps);

/// Groups customers by predicted uplift (descending) into n_groups near-equal
/// buckets and aggregates the named aux outcome per logged arm.
BucketSet bucketize(const UpliftEstimates& est, const ExperimentDataset& ds, int n_groups,
                    const std::string& aux);

/// Per-bucket arm choice maximizing total predicted uplift subject to the
/// aux floor: sum_b size_b * aux_mean(x_b) >= (1-epsilon) * same sum at the
/// reference arm. Buckets missing logged data for an arm are pinned to the
/// reference arm. Exact enumeration up to options.enumeration_limit free
/// buckets, otherwise a quantized knapsack DP with exact local refinement.
OptimizeResult optimize_ratio_constrained(const BucketSet& buckets, double epsilon,
                                          int reference_arm, const RatioOptions& options = {});

/// Exhaustive oracle. Enumerates every assignment ((K+1)^N for none/budget,
/// 2^G over buckets for ratio_floor) and returns the feasible maximizer;
/// ties go to the lexicographically smallest assignment.
OptimizeResult brute_force_policy(const UpliftEstimates& est, const ExperimentDataset& ds,
                                  const ConstraintSpec& spec,
                                  const BucketSet* buckets = nullptr,
                                  std::vector<double> weights = {});

/// Independent feasibility check, evaluated directly from the constraint
/// definition with no optimizer state.
bool satisfies_constraints(const Policy& p, const ConstraintSpec& spec,
                           const BucketSet* buckets = nullptr);

void write_policy_csv(const Policy& p, const TreatmentSet& treatments, const std::string& path);
Policy load_policy_csv(const std::string& path, const TreatmentSet& treatments);

std::string optimizer_report_json(const OptimizeResult& result, const ConstraintSpec& spec);

}  // namespace uplift
