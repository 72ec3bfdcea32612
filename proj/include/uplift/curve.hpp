#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uplift/cate.hpp"
#include "uplift/dataset.hpp"

namespace uplift {

struct UpliftCurvePoint {
    std::size_t rank = 0;    ///< r, 1-based
    double fraction = 0.0;   ///< r / N
    double value = 0.0;      ///< cumulative uplift at rank r
    bool undefined = false;  ///< prefix missing treated or control records
};

/// Cumulative uplift along a ranking of customers by predicted uplift.
struct UpliftCurve {
    std::vector<UpliftCurvePoint> points;
    std::vector<std::size_t> ranking;  ///< dataset record indices, best first
};

/// Ranks customers by tau_arm descending (ties by ascending id). The value at
/// rank r is (mean outcome of prefix records logged in `arm` minus mean
/// outcome of prefix records logged in control) * r/N. A prefix missing
/// either side contributes 0, flagged undefined.
UpliftCurve cumulative_uplift_curve(const ExperimentDataset& eval, const UpliftEstimates& est,
                                    int arm);

/// Trapezoidal area under (fraction, value) with an implicit (0, 0) origin.
double uplift_auc(const UpliftCurve& curve);

void write_curve_csv(const UpliftCurve& curve, const std::string& path);

/// Sample standard deviation of uplift_auc over `n_permutations` uniformly
/// random rankings of the same evaluation data. Null band for judging whether
/// a model's AUC is distinguishable from chance.
double random_ranking_auc_sd(const ExperimentDataset& eval, int arm, int n_permutations,
                             std::uint64_t seed);

struct TrueUpliftBucket {
    double score_min = 0.0;
    double score_max = 0.0;
    double tau = 0.0;  ///< difference in mean outcome, treated minus control
    bool undefined = false;
    std::size_t n_treated = 0;
    std::size_t n_control = 0;
    std::size_t size = 0;
};

/// Sorts customers by score ascending, partitions into n_buckets near-equal
/// groups (remainder goes one-per-bucket from the front) and reports each
/// bucket's difference in observed mean outcome between treated and control.
std::vector<TrueUpliftBucket> bucket_true_uplift(const ExperimentDataset& ds,
                                                 const std::vector<double>& score, int n_buckets);

}  // namespace uplift
