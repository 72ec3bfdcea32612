#pragma once

#include <string>
#include <vector>

#include "uplift/dataset.hpp"
#include "uplift/tree.hpp"

namespace uplift {

enum class LearnerKind { SLearner, TLearner, XLearner };

std::string learner_name(LearnerKind kind);
LearnerKind learner_from_name(const std::string& name);

/// Per-customer uplift estimates: row i holds tau_k(x_i) for k = 1..K,
/// aligned to a dataset's record order.
struct UpliftEstimates {
    std::vector<std::string> ids;
    std::vector<double> values;  ///< row-major N x K
    int num_treatments = 0;

    std::size_t size() const { return ids.size(); }

    double tau(std::size_t i, int arm) const {
        return values[i * static_cast<std::size_t>(num_treatments) +
                      static_cast<std::size_t>(arm - 1)];
    }

    /// Throws ArgumentError on any non-finite entry or shape mismatch.
    void check() const;

    /// Single-treatment estimates from a raw score vector.
    static UpliftEstimates from_scores(std::vector<std::string> ids, std::vector<double> scores);
};

/// Fitted stage-1 estimator. Immutable once fitted; safe for concurrent prediction.
struct CateModel {
    LearnerKind kind;
    TreatmentSet treatments;
    std::vector<std::string> feature_names;
    TreeParams params;

    /// Role depends on kind:
    ///   S: [joint model over x + one-hot arm indicator]
    ///   T: one model per arm, index = arm
    ///   X: [mu_control, mu_treated, tau_on_control_rows, tau_on_treated_rows]
    std::vector<BaggedTrees> models;

    int dim() const { return static_cast<int>(feature_names.size()); }

    /// tau_k(x) for k = 1..K.
    std::vector<double> predict_tau(const std::vector<double>& x) const;
};

CateModel fit_s_learner(const ExperimentDataset& train, const TreeParams& params);
CateModel fit_t_learner(const ExperimentDataset& train, const TreeParams& params);
/// Binary treatment only (exactly 2 arms).
CateModel fit_x_learner(const ExperimentDataset& train, const TreeParams& params);

CateModel fit_learner(LearnerKind kind, const ExperimentDataset& train, const TreeParams& params);

UpliftEstimates predict_cate(const CateModel& model, const ExperimentDataset& ds);

void save_model(const CateModel& model, const std::string& path);
CateModel load_model(const std::string& path);

}  // namespace uplift
