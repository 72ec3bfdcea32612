#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uplift/dataset.hpp"
#include "uplift/policy.hpp"

namespace uplift {

/// Adds `value` to the mean when x[feature] >= threshold.
struct StepTerm {
    int feature = 0;
    double threshold = 0.0;
    double value = 0.0;
};

/// Adds scale * sigmoid(intercept + coef . x).
struct LogisticTerm {
    double scale = 1.0;
    double intercept = 0.0;
    std::vector<double> coef;
};

/// Structural conditional mean: intercept + linear . x + step terms
/// + optional logistic term. Covers linear, piecewise-constant and logistic
/// response families and their sums.
struct ResponseSpec {
    double intercept = 0.0;
    std::vector<double> linear;
    std::vector<StepTerm> steps;
    std::optional<LogisticTerm> logistic;

    double mean(const std::vector<double>& x) const;
};

enum class OutcomeKind { Real, Binary };

/// Structural functions for one auxiliary outcome.
struct AuxSpec {
    std::string name;
    std::vector<ResponseSpec> response;  ///< per arm, control first
    OutcomeKind kind = OutcomeKind::Real;
    double noise_sd = 0.0;
};

struct SynthConfig {
    std::size_t n = 0;
    int d = 1;
    int num_treatments = 1;  ///< K, non-control arms
    OutcomeKind outcome_kind = OutcomeKind::Real;
    double noise_sd = 0.0;
    std::vector<ResponseSpec> response;  ///< per arm, K+1 entries
    std::vector<AuxSpec> aux;
    std::vector<std::string> labels;      ///< optional; defaults to t0..tK
    std::vector<double> propensities;     ///< optional; defaults to uniform
    std::uint64_t seed = 0;

    void check() const;
    TreatmentSet treatments() const;
};

/// Noiseless conditional means behind a generated dataset.
struct GroundTruth {
    SynthConfig config;

    /// E[Y(arm) | X = x]; clipped to [0,1] for binary outcomes.
    double mean_outcome(int arm, const std::vector<double>& x) const;
    double mean_aux(const std::string& name, int arm, const std::vector<double>& x) const;
};

/// Covariates are i.i.d. uniform on [0,1]^d, the logged arm follows the
/// propensities, outcomes are structural means plus Gaussian noise (real) or
/// Bernoulli draws (binary). Deterministic for a fixed seed.
std::pair<ExperimentDataset, GroundTruth> generate(const SynthConfig& cfg);

/// mean_outcome(arm, x) - mean_outcome(0, x); arm must be >= 1.
double true_cate(const GroundTruth& gt, int arm, const std::vector<double>& x);

/// Exact expected per-customer outcome under the policy, noise-free:
/// (1/N) * sum_i mean(assigned arm of i, x_i).
double true_policy_value(const GroundTruth& gt, const ExperimentDataset& ds, const Policy& policy,
                         const std::string& outcome);

std::string synth_config_to_json_text(const SynthConfig& cfg);
SynthConfig synth_config_from_json_text(const std::string& text);

void write_manifest(const SynthConfig& cfg, const std::string& path);
SynthConfig load_manifest(const std::string& path);

}  // namespace uplift
