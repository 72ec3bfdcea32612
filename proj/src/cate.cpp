#include "uplift/cate.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "uplift/error.hpp"

namespace uplift {

std::string learner_name(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::SLearner: return "s_learner";
        case LearnerKind::TLearner: return "t_learner";
        case LearnerKind::XLearner: return "x_learner";
    }
    return "unknown";
}

LearnerKind learner_from_name(const std::string& name) {
    if (name == "s_learner" || name == "s") return LearnerKind::SLearner;
    if (name == "t_learner" || name == "t") return LearnerKind::TLearner;
    if (name == "x_learner" || name == "x") return LearnerKind::XLearner;
    throw ConfigError("unknown estimator \"" + name + "\" (expected s, t or x)");
}

void UpliftEstimates::check() const {
    if (values.size() != ids.size() * static_cast<std::size_t>(num_treatments)) {
        throw ArgumentError("uplift estimates: shape mismatch");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw ArgumentError("uplift estimates must be finite");
    }
}

UpliftEstimates UpliftEstimates::from_scores(std::vector<std::string> ids_,
                                             std::vector<double> scores) {
    UpliftEstimates est;
    est.ids = std::move(ids_);
    est.values = std::move(scores);
    est.num_treatments = 1;
    est.check();
    return est;
}

namespace {

std::vector<std::size_t> arm_rows(const ExperimentDataset& ds, int arm) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        if (ds.records[i].t == arm) rows.push_back(i);
    }
    return rows;
}

void require_arms_present(const ExperimentDataset& ds, std::size_t min_rows) {
    auto counts = ds.arm_counts();
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] < min_rows) {
            throw FitError("arm " + std::to_string(k) + " (" + ds.treatments.labels[k] +
                           ") has " + std::to_string(counts[k]) + " records, needs at least " +
                           std::to_string(min_rows));
        }
    }
}

std::vector<double> with_arm_indicator(const std::vector<double>& x, int arm, int num_arms) {
    std::vector<double> row = x;
    for (int k = 0; k < num_arms; ++k) row.push_back(k == arm ? 1.0 : 0.0);
    return row;
}

}  // namespace

CateModel fit_s_learner(const ExperimentDataset& train, const TreeParams& params) {
    if (train.treatments.num_arms() < 2) throw FitError("need at least 2 arms");
    require_arms_present(train, 1);

    const int num_arms = train.treatments.num_arms();
    std::vector<std::vector<double>> features;
    std::vector<double> targets;
    features.reserve(train.size());
    targets.reserve(train.size());
    for (const auto& rec : train.records) {
        features.push_back(with_arm_indicator(rec.x, rec.t, num_arms));
        targets.push_back(rec.y);
    }

    CateModel model{LearnerKind::SLearner, train.treatments, train.feature_names, params, {}};
    model.models.push_back(BaggedTrees::fit(features, targets, params));
    return model;
}

CateModel fit_t_learner(const ExperimentDataset& train, const TreeParams& params) {
    if (train.treatments.num_arms() < 2) throw FitError("need at least 2 arms");
    require_arms_present(train, static_cast<std::size_t>(params.min_leaf_size));

    CateModel model{LearnerKind::TLearner, train.treatments, train.feature_names, params, {}};
    for (int arm = 0; arm < train.treatments.num_arms(); ++arm) {
        std::vector<std::vector<double>> features;
        std::vector<double> targets;
        for (std::size_t i : arm_rows(train, arm)) {
            features.push_back(train.records[i].x);
            targets.push_back(train.records[i].y);
        }
        model.models.push_back(BaggedTrees::fit(features, targets, params));
    }
    return model;
}

CateModel fit_x_learner(const ExperimentDataset& train, const TreeParams& params) {
    if (train.treatments.num_arms() != 2) {
        throw FitError("x_learner supports exactly 2 arms, got " +
                       std::to_string(train.treatments.num_arms()));
    }
    require_arms_present(train, static_cast<std::size_t>(params.min_leaf_size));

    auto control_rows = arm_rows(train, 0);
    auto treated_rows = arm_rows(train, 1);

    auto gather = [&](const std::vector<std::size_t>& rows) {
        std::pair<std::vector<std::vector<double>>, std::vector<double>> out;
        for (std::size_t i : rows) {
            out.first.push_back(train.records[i].x);
            out.second.push_back(train.records[i].y);
        }
        return out;
    };

    auto [x0, y0] = gather(control_rows);
    auto [x1, y1] = gather(treated_rows);
    BaggedTrees mu0 = BaggedTrees::fit(x0, y0, params);
    BaggedTrees mu1 = BaggedTrees::fit(x1, y1, params);

    // Imputed individual effects: on control rows D = mu1(x) - y, on treated
    // rows D = y - mu0(x). Each side gets its own second-stage regression.
    std::vector<double> d0(x0.size()), d1(x1.size());
    for (std::size_t i = 0; i < x0.size(); ++i) d0[i] = mu1.predict(x0[i]) - y0[i];
    for (std::size_t i = 0; i < x1.size(); ++i) d1[i] = y1[i] - mu0.predict(x1[i]);

    BaggedTrees tau_control_rows = BaggedTrees::fit(x0, d0, params);
    BaggedTrees tau_treated_rows = BaggedTrees::fit(x1, d1, params);

    CateModel model{LearnerKind::XLearner, train.treatments, train.feature_names, params, {}};
    model.models.push_back(std::move(mu0));
    model.models.push_back(std::move(mu1));
    model.models.push_back(std::move(tau_control_rows));
    model.models.push_back(std::move(tau_treated_rows));
    return model;
}

CateModel fit_learner(LearnerKind kind, const ExperimentDataset& train, const TreeParams& params) {
    switch (kind) {
        case LearnerKind::SLearner: return fit_s_learner(train, params);
        case LearnerKind::TLearner: return fit_t_learner(train, params);
        case LearnerKind::XLearner: return fit_x_learner(train, params);
    }
    throw ArgumentError("unknown learner kind");
}

std::vector<double> CateModel::predict_tau(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dim()) {
        throw ArgumentError("predict: expected " + std::to_string(dim()) + " features, got " +
                            std::to_string(x.size()));
    }
    const int K = treatments.num_treatments();
    std::vector<double> tau(static_cast<std::size_t>(K));
    switch (kind) {
        case LearnerKind::SLearner: {
            const int num_arms = treatments.num_arms();
            double base = models[0].predict(with_arm_indicator(x, 0, num_arms));
            for (int k = 1; k <= K; ++k) {
                tau[static_cast<std::size_t>(k - 1)] =
                    models[0].predict(with_arm_indicator(x, k, num_arms)) - base;
            }
            break;
        }
        case LearnerKind::TLearner: {
            double base = models[0].predict(x);
            for (int k = 1; k <= K; ++k) {
                tau[static_cast<std::size_t>(k - 1)] =
                    models[static_cast<std::size_t>(k)].predict(x) - base;
            }
            break;
        }
        case LearnerKind::XLearner: {
            // Weight each side by the other side's logging propensity: the
            // side fit on treated rows leans on mu0 and gets the control
            // share, and vice versa.
            const double p_control = treatments.propensities[0];
            const double p_treated = treatments.propensities[1];
            tau[0] = p_treated * models[2].predict(x) + p_control * models[3].predict(x);
            break;
        }
    }
    return tau;
}

UpliftEstimates predict_cate(const CateModel& model, const ExperimentDataset& ds) {
    if (ds.dim() != model.dim()) {
        throw ArgumentError("predict_cate: dataset has " + std::to_string(ds.dim()) +
                            " features, model expects " + std::to_string(model.dim()));
    }
    UpliftEstimates est;
    est.num_treatments = model.treatments.num_treatments();
    est.ids.reserve(ds.size());
    est.values.reserve(ds.size() * static_cast<std::size_t>(est.num_treatments));
    for (const auto& rec : ds.records) {
        est.ids.push_back(rec.id);
        for (double v : model.predict_tau(rec.x)) est.values.push_back(v);
    }
    est.check();
    return est;
}

namespace {

using nlohmann::ordered_json;

ordered_json tree_to_json(const RegressionTree& tree) {
    ordered_json nodes = ordered_json::array();
    for (const auto& nd : tree.nodes()) {
        nodes.push_back({{"feature", nd.feature},
                         {"threshold", nd.threshold},
                         {"left", nd.left},
                         {"right", nd.right},
                         {"value", nd.value}});
    }
    return nodes;
}

RegressionTree tree_from_json(const ordered_json& nodes) {
    std::vector<RegressionTree::Node> out;
    for (const auto& j : nodes) {
        RegressionTree::Node nd;
        nd.feature = j.at("feature").get<int>();
        nd.threshold = j.at("threshold").get<double>();
        nd.left = j.at("left").get<int>();
        nd.right = j.at("right").get<int>();
        nd.value = j.at("value").get<double>();
        out.push_back(nd);
    }
    return RegressionTree::from_nodes(std::move(out));
}

}  // namespace

void save_model(const CateModel& model, const std::string& path) {
    ordered_json j;
    j["format"] = "uplift-cate-model";
    j["version"] = 1;
    j["kind"] = learner_name(model.kind);
    j["treatments"] = {{"labels", model.treatments.labels},
                       {"propensities", model.treatments.propensities}};
    j["feature_names"] = model.feature_names;
    j["params"] = {{"max_depth", model.params.max_depth},
                   {"min_leaf_size", model.params.min_leaf_size},
                   {"n_trees", model.params.n_trees},
                   {"seed", model.params.seed}};
    ordered_json ms = ordered_json::array();
    for (const auto& bagged : model.models) {
        ordered_json trees = ordered_json::array();
        for (const auto& t : bagged.trees) trees.push_back(tree_to_json(t));
        ms.push_back(trees);
    }
    j["models"] = std::move(ms);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write model file: " + path);
    out << j.dump(2) << "\n";
}

CateModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open model file: " + path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw ParseError("model file " + path + ": " + e.what());
    }
    if (j.value("format", "") != "uplift-cate-model") {
        throw ParseError("model file " + path + ": unrecognized format");
    }
    if (j.value("version", 0) != 1) {
        throw ParseError("model file " + path + ": unsupported version");
    }

    try {
        CateModel model;
        model.kind = learner_from_name(j.at("kind").get<std::string>());
        model.treatments =
            TreatmentSet(j.at("treatments").at("labels").get<std::vector<std::string>>(),
                         j.at("treatments").at("propensities").get<std::vector<double>>());
        model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        model.params.max_depth = j.at("params").at("max_depth").get<int>();
        model.params.min_leaf_size = j.at("params").at("min_leaf_size").get<int>();
        model.params.n_trees = j.at("params").at("n_trees").get<int>();
        model.params.seed = j.at("params").at("seed").get<std::uint64_t>();
        for (const auto& bagged_json : j.at("models")) {
            BaggedTrees bagged;
            for (const auto& tree_json : bagged_json) {
                bagged.trees.push_back(tree_from_json(tree_json));
            }
            model.models.push_back(std::move(bagged));
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("model file " + path + ": " + e.what());
    }
}

}  // namespace uplift
