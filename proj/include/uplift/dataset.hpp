#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace uplift {

/// Ordered treatment arms. Index 0 is always the control arm.
struct TreatmentSet {
    std::vector<std::string> labels;
    std::vector<double> propensities;

    TreatmentSet() = default;
    TreatmentSet(std::vector<std::string> labels_, std::vector<double> propensities_ = {});

    /// Number of non-control arms.
    int num_treatments() const { return static_cast<int>(labels.size()) - 1; }
    /// Total number of arms including control.
    int num_arms() const { return static_cast<int>(labels.size()); }

    int index_of(const std::string& label) const;  // -1 if unknown

    /// Throws ArgumentError unless labels are unique, there are >= 2 arms,
    /// every propensity is > 0 and they sum to 1 within 1e-9.
    void check() const;

    bool operator==(const TreatmentSet&) const = default;
};

/// One logged experiment row.
struct CustomerRecord {
    std::string id;
    std::vector<double> x;    ///< covariates, length d
    int t = 0;                ///< logged arm index
    double y = 0.0;           ///< primary outcome
    std::vector<double> aux;  ///< aligned with ExperimentDataset::aux_names

    bool operator==(const CustomerRecord&) const = default;
};

/// Immutable after load; safe to share read-only across threads.
struct ExperimentDataset {
    TreatmentSet treatments;
    std::vector<CustomerRecord> records;
    std::vector<std::string> feature_names;
    std::vector<std::string> aux_names;

    std::size_t size() const { return records.size(); }
    int dim() const { return static_cast<int>(feature_names.size()); }

    int aux_index(const std::string& name) const;  // -1 if unknown
    std::vector<std::string> ids() const;
    std::vector<std::size_t> arm_counts() const;

    bool operator==(const ExperimentDataset&) const = default;
};

/// Column-role mapping for CSV ingestion. Every column not claimed by a role
/// or an aux:<name> prefix is a feature.
struct CsvSchema {
    std::string id_column = "id";
    std::string treatment_column = "treatment";
    std::string outcome_column = "outcome";
    TreatmentSet treatments;  ///< labels in order, control first; uniform propensities if unset
};

struct ValidationIssue {
    enum class Severity { Warning, Error };
    Severity severity;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool has_errors() const;
    bool empty() const { return issues.empty(); }
};

ExperimentDataset load_experiment(const std::string& path, const CsvSchema& schema);
void write_experiment(const ExperimentDataset& ds, const std::string& path);

ValidationReport validate(const ExperimentDataset& ds);

/// Deterministic stratified split. Per arm, the eval share is within one
/// record of eval_fraction; train and eval preserve input row order.
std::pair<ExperimentDataset, ExperimentDataset> split(const ExperimentDataset& ds,
                                                      double eval_fraction,
                                                      std::uint64_t seed);

}  // namespace uplift
