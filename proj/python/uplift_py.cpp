#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uplift/cate.hpp"
#include "uplift/curve.hpp"
#include "uplift/dataset.hpp"
#include "uplift/error.hpp"
#include "uplift/ope.hpp"
#include "uplift/policy.hpp"
#include "uplift/synth.hpp"

namespace py = pybind11;
using namespace uplift;

namespace {

ExperimentDataset make_dataset(const std::vector<std::string>& labels,
                               const std::vector<double>& propensities,
                               const std::vector<std::string>& ids,
                               const std::vector<std::vector<double>>& x,
                               const std::vector<int>& t, const std::vector<double>& y,
                               const std::map<std::string, std::vector<double>>& aux) {
    ExperimentDataset ds;
    ds.treatments = TreatmentSet(labels, propensities);
    const std::size_t n = ids.size();
    if (x.size() != n || t.size() != n || y.size() != n) {
        throw ArgumentError("ids, x, t and y must have the same length");
    }
    const std::size_t d = n > 0 ? x[0].size() : 0;
    for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j + 1));
    for (const auto& [name, column] : aux) {
        if (column.size() != n) throw ArgumentError("aux column \"" + name + "\" length mismatch");
        ds.aux_names.push_back(name);
    }
    for (std::size_t i = 0; i < n; ++i) {
        CustomerRecord rec;
        rec.id = ids[i];
        rec.x = x[i];
        rec.t = t[i];
        rec.y = y[i];
        for (const auto& [name, column] : aux) rec.aux.push_back(column[i]);
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

TreeParams make_params(int max_depth, int min_leaf_size, int n_trees, std::uint64_t seed) {
    TreeParams p;
    p.max_depth = max_depth;
    p.min_leaf_size = min_leaf_size;
    p.n_trees = n_trees;
    p.seed = seed;
    return p;
}

}  // namespace

PYBIND11_MODULE(upliftpy, m) {
    m.doc() = "Uplift targeting toolkit: CATE estimation, constrained policy "
              "optimization and offline policy evaluation.";

    py::register_exception<Error>(m, "UpliftError");

    py::class_<TreatmentSet>(m, "TreatmentSet")
        .def(py::init<std::vector<std::string>, std::vector<double>>(), py::arg("labels"),
             py::arg("propensities") = std::vector<double>{})
        .def_readonly("labels", &TreatmentSet::labels)
        .def_readonly("propensities", &TreatmentSet::propensities)
        .def_property_readonly("num_treatments", &TreatmentSet::num_treatments);

    py::class_<ExperimentDataset>(m, "ExperimentDataset")
        .def_property_readonly("size", &ExperimentDataset::size)
        .def_property_readonly("dim", &ExperimentDataset::dim)
        .def_readonly("feature_names", &ExperimentDataset::feature_names)
        .def_readonly("aux_names", &ExperimentDataset::aux_names)
        .def_readonly("treatments", &ExperimentDataset::treatments)
        .def("ids", &ExperimentDataset::ids)
        .def("arm_counts", &ExperimentDataset::arm_counts)
        .def("outcome",
             [](const ExperimentDataset& ds, std::size_t i) { return ds.records.at(i).y; })
        .def("logged_arm",
             [](const ExperimentDataset& ds, std::size_t i) { return ds.records.at(i).t; })
        .def("covariates",
             [](const ExperimentDataset& ds, std::size_t i) { return ds.records.at(i).x; });

    m.def("make_dataset", &make_dataset, py::arg("labels"), py::arg("propensities"), py::arg("ids"),
          py::arg("x"), py::arg("t"), py::arg("y"),
          py::arg("aux") = std::map<std::string, std::vector<double>>{});

    m.def("load_experiment",
          [](const std::string& path, const TreatmentSet& treatments, const std::string& id_col,
             const std::string& treatment_col, const std::string& outcome_col) {
              CsvSchema schema;
              schema.id_column = id_col;
              schema.treatment_column = treatment_col;
              schema.outcome_column = outcome_col;
              schema.treatments = treatments;
              return load_experiment(path, schema);
          },
          py::arg("path"), py::arg("treatments"), py::arg("id_column") = "id",
          py::arg("treatment_column") = "treatment", py::arg("outcome_column") = "outcome");
    m.def("write_experiment", &write_experiment, py::arg("dataset"), py::arg("path"));

    m.def("validate", [](const ExperimentDataset& ds) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& issue : validate(ds).issues) {
            out.emplace_back(
                issue.severity == ValidationIssue::Severity::Error ? "error" : "warning",
                issue.message);
        }
        return out;
    });
    m.def("split", &split, py::arg("dataset"), py::arg("eval_fraction"), py::arg("seed"));

    py::class_<GroundTruth>(m, "GroundTruth")
        .def("mean_outcome", &GroundTruth::mean_outcome, py::arg("arm"), py::arg("x"))
        .def("mean_aux", &GroundTruth::mean_aux, py::arg("name"), py::arg("arm"), py::arg("x"));

    m.def("generate", [](const std::string& config_json) {
        return generate(synth_config_from_json_text(config_json));
    }, py::arg("config_json"));
    m.def("true_cate", &true_cate, py::arg("ground_truth"), py::arg("arm"), py::arg("x"));
    m.def("true_policy_value", &true_policy_value, py::arg("ground_truth"), py::arg("dataset"),
          py::arg("policy"), py::arg("outcome") = "y");

    py::class_<CateModel>(m, "CateModel")
        .def_property_readonly("kind", [](const CateModel& mdl) { return learner_name(mdl.kind); })
        .def_readonly("feature_names", &CateModel::feature_names)
        .def("predict_tau", &CateModel::predict_tau, py::arg("x"));

    auto fit_args = [](auto fn) {
        return [fn](const ExperimentDataset& train, int max_depth, int min_leaf_size, int n_trees,
                    std::uint64_t seed) {
            return fn(train, make_params(max_depth, min_leaf_size, n_trees, seed));
        };
    };
    m.def("fit_s_learner", fit_args(&fit_s_learner), py::arg("train"), py::arg("max_depth") = 8,
          py::arg("min_leaf_size") = 5, py::arg("n_trees") = 1, py::arg("seed") = 0);
    m.def("fit_t_learner", fit_args(&fit_t_learner), py::arg("train"), py::arg("max_depth") = 8,
          py::arg("min_leaf_size") = 5, py::arg("n_trees") = 1, py::arg("seed") = 0);
    m.def("fit_x_learner", fit_args(&fit_x_learner), py::arg("train"), py::arg("max_depth") = 8,
          py::arg("min_leaf_size") = 5, py::arg("n_trees") = 1, py::arg("seed") = 0);
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    py::class_<UpliftEstimates>(m, "UpliftEstimates")
        .def_readonly("ids", &UpliftEstimates::ids)
        .def_readonly("num_treatments", &UpliftEstimates::num_treatments)
        .def("tau", &UpliftEstimates::tau, py::arg("i"), py::arg("arm"))
        .def("matrix", [](const UpliftEstimates& est) {
            std::vector<std::vector<double>> rows;
            for (std::size_t i = 0; i < est.size(); ++i) {
                std::vector<double> row;
                for (int k = 1; k <= est.num_treatments; ++k) row.push_back(est.tau(i, k));
                rows.push_back(std::move(row));
            }
            return rows;
        });
    m.def("predict_cate", &predict_cate, py::arg("model"), py::arg("dataset"));
    m.def("estimates_from_scores", &UpliftEstimates::from_scores, py::arg("ids"),
          py::arg("scores"));

    py::class_<UpliftCurvePoint>(m, "UpliftCurvePoint")
        .def_readonly("rank", &UpliftCurvePoint::rank)
        .def_readonly("fraction", &UpliftCurvePoint::fraction)
        .def_readonly("value", &UpliftCurvePoint::value)
        .def_readonly("undefined", &UpliftCurvePoint::undefined);
    py::class_<UpliftCurve>(m, "UpliftCurve")
        .def_readonly("points", &UpliftCurve::points)
        .def_readonly("ranking", &UpliftCurve::ranking);
    m.def("cumulative_uplift_curve", &cumulative_uplift_curve, py::arg("eval"), py::arg("estimates"),
          py::arg("arm") = 1);
    m.def("uplift_auc", &uplift_auc, py::arg("curve"));

    py::class_<TrueUpliftBucket>(m, "TrueUpliftBucket")
        .def_readonly("score_min", &TrueUpliftBucket::score_min)
        .def_readonly("score_max", &TrueUpliftBucket::score_max)
        .def_readonly("tau", &TrueUpliftBucket::tau)
        .def_readonly("undefined", &TrueUpliftBucket::undefined)
        .def_readonly("n_treated", &TrueUpliftBucket::n_treated)
        .def_readonly("n_control", &TrueUpliftBucket::n_control)
        .def_readonly("size", &TrueUpliftBucket::size);
    m.def("bucket_true_uplift", &bucket_true_uplift, py::arg("dataset"), py::arg("score"),
          py::arg("n_buckets"));

    py::class_<Policy>(m, "Policy")
        .def_readonly("ids", &Policy::ids)
        .def_readonly("assignment", &Policy::assignment)
        .def_readonly("weights", &Policy::weights)
        .def("targeting_proportion", &Policy::targeting_proportion);
    m.def("constant_policy", &Policy::constant, py::arg("ids"), py::arg("arm"));
    m.def("make_policy", [](std::vector<std::string> ids, std::vector<int> assignment,
                            std::vector<double> weights) {
        Policy p;
        p.ids = std::move(ids);
        p.assignment = std::move(assignment);
        p.weights = std::move(weights);
        if (p.weights.empty()) p.weights.assign(p.ids.size(), 1.0);
        return p;
    }, py::arg("ids"), py::arg("assignment"), py::arg("weights") = std::vector<double>{});

    py::class_<OptimizeResult>(m, "OptimizeResult")
        .def_readonly("policy", &OptimizeResult::policy)
        .def_readonly("objective", &OptimizeResult::objective)
        .def_readonly("targeting_proportion", &OptimizeResult::targeting_proportion)
        .def_readonly("solver_path", &OptimizeResult::solver_path)
        .def_readonly("constraint_slack", &OptimizeResult::constraint_slack)
        .def_readonly("quantization", &OptimizeResult::quantization)
        .def_readonly("objective_upper_bound", &OptimizeResult::objective_upper_bound);

    py::class_<Bucket>(m, "Bucket")
        .def_readonly("members", &Bucket::members)
        .def_readonly("mean_tau", &Bucket::mean_tau)
        .def_readonly("aux_mean", &Bucket::aux_mean)
        .def_readonly("aux_defined", &Bucket::aux_defined)
        .def_readonly("size", &Bucket::size);
    py::class_<BucketSet>(m, "BucketSet")
        .def_readonly("buckets", &BucketSet::buckets)
        .def_readonly("aux_name", &BucketSet::aux_name);

    m.def("policy_objective", &policy_objective, py::arg("policy"), py::arg("estimates"));
    m.def("optimize_positive", &optimize_positive, py::arg("estimates"),
          py::arg("weights") = std::vector<double>{});
    m.def("optimize_budget", &optimize_budget, py::arg("estimates"), py::arg("weights"),
          py::arg("caps"));
    m.def("bucketize", &bucketize, py::arg("estimates"), py::arg("dataset"), py::arg("n_groups"),
          py::arg("aux"));
    m.def("optimize_ratio_constrained",
          [](const BucketSet& buckets, double epsilon, int reference_arm, double quantization,
             int enumeration_limit) {
              RatioOptions options;
              options.quantization = quantization;
              options.enumeration_limit = enumeration_limit;
              return optimize_ratio_constrained(buckets, epsilon, reference_arm, options);
          },
          py::arg("buckets"), py::arg("epsilon"), py::arg("reference_arm") = 1,
          py::arg("quantization") = 1e-3, py::arg("enumeration_limit") = 20);

    m.def("ips", &ips, py::arg("dataset"), py::arg("policy"), py::arg("outcome") = "y");
    m.def("snips", &snips, py::arg("dataset"), py::arg("policy"), py::arg("outcome") = "y");
    m.def("expected_outcome_under_policy", &expected_outcome_under_policy, py::arg("dataset"),
          py::arg("policy"), py::arg("outcome"));
    m.def("e_pct_is", [](const ExperimentDataset& ds, const Policy& p, const std::string& sales,
                         const std::string& rewards, double baseline_sales) {
        const EPctIsResult r = e_pct_is(ds, p, sales, rewards, baseline_sales);
        return py::make_tuple(r.value, r.negative_denominator);
    }, py::arg("dataset"), py::arg("policy"), py::arg("sales"), py::arg("rewards"),
       py::arg("baseline_sales"));
    m.def("threshold_policy", [](const ExperimentDataset& ds, const std::vector<double>& score,
                                 double threshold, const std::string& direction, int arm) {
        return threshold_policy(ds, score, threshold,
                                direction == "above" ? ThresholdDirection::Above
                                                     : ThresholdDirection::Below,
                                arm);
    }, py::arg("dataset"), py::arg("score"), py::arg("threshold"), py::arg("direction") = "below",
       py::arg("arm") = 1);

    m.def("lift_report_json",
          [](const ExperimentDataset& ds, const Policy& proposed,
             const std::vector<std::pair<std::string, Policy>>& baselines,
             const std::vector<std::string>& outcomes) {
              return eval_report_json(lift_report(ds, proposed, baselines, outcomes));
          },
          py::arg("dataset"), py::arg("proposed"), py::arg("baselines"), py::arg("outcomes"));
}
