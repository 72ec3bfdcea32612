#include "uplift/ope.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "uplift/csv.hpp"
#include "uplift/error.hpp"

namespace uplift {

namespace {

void require_alignment(const ExperimentDataset& ds, const Policy& p) {
    if (p.ids.size() != ds.size()) throw ArgumentError("policy not aligned to dataset");
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (p.ids[i] != ds.records[i].id) {
            throw ArgumentError("policy not aligned to dataset at id \"" + p.ids[i] + "\"");
        }
    }
}

/// Outcome accessor; the reserved name "y" selects the primary outcome.
std::vector<double> outcome_column(const ExperimentDataset& ds, const std::string& outcome) {
    std::vector<double> z;
    z.reserve(ds.size());
    if (outcome == kPrimaryOutcome) {
        for (const auto& rec : ds.records) z.push_back(rec.y);
        return z;
    }
    const int idx = ds.aux_index(outcome);
    if (idx < 0) throw ArgumentError("unknown outcome \"" + outcome + "\"");
    for (const auto& rec : ds.records) z.push_back(rec.aux[static_cast<std::size_t>(idx)]);
    return z;
}

}  // namespace

double ips(const ExperimentDataset& ds, const Policy& p, const std::string& outcome) {
    require_alignment(ds, p);
    const std::vector<double> z = outcome_column(ds, outcome);
    if (ds.size() == 0) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const int logged = ds.records[i].t;
        if (p.assignment[i] == logged) {
            total += z[i] / ds.treatments.propensities[static_cast<std::size_t>(logged)];
        }
    }
    return total / static_cast<double>(ds.size());
}

std::optional<double> snips(const ExperimentDataset& ds, const Policy& p,
                            const std::string& outcome) {
    require_alignment(ds, p);
    const std::vector<double> z = outcome_column(ds, outcome);
    double weighted = 0.0, weight = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const int logged = ds.records[i].t;
        if (p.assignment[i] == logged) {
            const double inv_p = 1.0 / ds.treatments.propensities[static_cast<std::size_t>(logged)];
            weighted += z[i] * inv_p;
            weight += inv_p;
        }
    }
    if (weight == 0.0) return std::nullopt;
    return weighted / weight;
}

std::optional<double> expected_outcome_under_policy(const ExperimentDataset& ds, const Policy& p,
                                                    const std::string& outcome) {
    require_alignment(ds, p);
    const std::vector<double> z = outcome_column(ds, outcome);
    double total = 0.0;
    std::size_t matched = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (p.assignment[i] == ds.records[i].t) {
            total += z[i];
            ++matched;
        }
    }
    if (matched == 0) return std::nullopt;
    return total / static_cast<double>(matched);
}

EPctIsResult e_pct_is(const ExperimentDataset& ds, const Policy& p, const std::string& sales,
                      const std::string& rewards, double baseline_sales) {
    const auto mean_sales = expected_outcome_under_policy(ds, p, sales);
    const auto mean_rewards = expected_outcome_under_policy(ds, p, rewards);
    EPctIsResult result;
    if (!mean_sales || !mean_rewards) return result;
    const double denom = *mean_sales - baseline_sales;
    if (denom == 0.0) return result;
    result.value = *mean_rewards / denom;
    result.negative_denominator = denom < 0.0;
    return result;
}

Policy threshold_policy(const ExperimentDataset& ds, const std::vector<double>& score,
                        double threshold, ThresholdDirection direction, int arm) {
    if (score.size() != ds.size()) throw ArgumentError("score vector not aligned to dataset");
    if (arm < 1 || arm >= ds.treatments.num_arms()) {
        throw ArgumentError("threshold policy arm must be a non-control arm");
    }
    Policy p;
    p.ids = ds.ids();
    p.weights.assign(ds.size(), 1.0);
    p.assignment.assign(ds.size(), 0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const bool selected = direction == ThresholdDirection::Below ? score[i] < threshold
                                                                     : score[i] > threshold;
        if (selected) p.assignment[i] = arm;
    }
    return p;
}

namespace {

OutcomeMetrics compute_metrics(const ExperimentDataset& ds, const Policy& p,
                               const std::string& outcome) {
    OutcomeMetrics m;
    m.ips = ips(ds, p, outcome);
    m.snips = snips(ds, p, outcome);
    std::size_t matched = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (p.assignment[i] == ds.records[i].t) ++matched;
    }
    m.match_count = matched;
    return m;
}

LiftValue relative_lift(double proposed, double baseline) {
    LiftValue lift;
    if (baseline == 0.0) {
        lift.value = proposed - baseline;
        lift.absolute = true;
    } else {
        lift.value = (proposed - baseline) / std::abs(baseline);
    }
    return lift;
}

LiftValue optional_lift(const std::optional<double>& proposed,
                        const std::optional<double>& baseline) {
    if (!proposed || !baseline) {
        LiftValue lift;
        lift.undefined = true;
        return lift;
    }
    return relative_lift(*proposed, *baseline);
}

}  // namespace

PolicyEvalReport lift_report(const ExperimentDataset& ds, const Policy& proposed,
                             const std::vector<std::pair<std::string, Policy>>& baselines,
                             const std::vector<std::string>& outcomes,
                             const std::optional<EPctConfig>& e_pct_config) {
    PolicyEvalReport report;
    report.targeting_proportion = proposed.targeting_proportion();
    for (const auto& outcome : outcomes) {
        report.proposed[outcome] = compute_metrics(ds, proposed, outcome);
    }
    if (e_pct_config) {
        report.proposed_e_pct = e_pct_is(ds, proposed, e_pct_config->sales, e_pct_config->rewards,
                                         e_pct_config->baseline_sales);
    }

    for (const auto& [name, baseline] : baselines) {
        BaselineComparison cmp;
        cmp.name = name;
        cmp.targeting_proportion = baseline.targeting_proportion();
        for (const auto& outcome : outcomes) {
            const OutcomeMetrics base = compute_metrics(ds, baseline, outcome);
            const OutcomeMetrics& prop = report.proposed[outcome];
            cmp.ips_lift[outcome] = relative_lift(prop.ips, base.ips);
            cmp.snips_lift[outcome] = optional_lift(prop.snips, base.snips);
            cmp.metrics[outcome] = base;
        }
        if (e_pct_config) {
            cmp.e_pct = e_pct_is(ds, baseline, e_pct_config->sales, e_pct_config->rewards,
                                 e_pct_config->baseline_sales);
            cmp.e_pct_lift = optional_lift(report.proposed_e_pct->value, cmp.e_pct->value);
        }
        report.baselines.push_back(std::move(cmp));
    }
    return report;
}

namespace {

using nlohmann::ordered_json;

ordered_json metrics_json(const OutcomeMetrics& m) {
    ordered_json j;
    j["ips"] = m.ips;
    if (m.snips) j["snips"] = *m.snips;
    else j["snips"] = nullptr;
    j["match_count"] = m.match_count;
    return j;
}

ordered_json lift_json(const LiftValue& lift) {
    ordered_json j;
    if (lift.undefined) {
        j["undefined"] = true;
    } else {
        j["value"] = *lift.value;
        if (lift.absolute) j["absolute_difference"] = true;
    }
    return j;
}

ordered_json e_pct_json(const EPctIsResult& e) {
    ordered_json j;
    if (e.value) {
        j["value"] = *e.value;
        if (e.negative_denominator) j["negative_denominator"] = true;
    } else {
        j["undefined"] = true;
    }
    return j;
}

std::string lift_cell(const LiftValue& lift) {
    if (lift.undefined) return "undefined";
    std::string cell = csv::format_double(*lift.value);
    if (lift.absolute) cell += " (absolute)";
    return cell;
}

}  // namespace

std::string eval_report_json(const PolicyEvalReport& report) {
    ordered_json j;
    j["targeting_proportion"] = report.targeting_proportion;
    ordered_json prop;
    for (const auto& [outcome, m] : report.proposed) prop[outcome] = metrics_json(m);
    j["proposed"] = std::move(prop);
    if (report.proposed_e_pct) j["e_pct_is"] = e_pct_json(*report.proposed_e_pct);

    ordered_json bs = ordered_json::array();
    for (const auto& cmp : report.baselines) {
        ordered_json b;
        b["baseline"] = cmp.name;
        b["targeting_proportion"] = cmp.targeting_proportion;
        ordered_json metrics;
        for (const auto& [outcome, m] : cmp.metrics) metrics[outcome] = metrics_json(m);
        b["metrics"] = std::move(metrics);
        ordered_json lifts;
        for (const auto& [outcome, lift] : cmp.ips_lift) {
            lifts[outcome] = {{"ips", lift_json(lift)},
                              {"snips", lift_json(cmp.snips_lift.at(outcome))}};
        }
        b["lift"] = std::move(lifts);
        if (cmp.e_pct) b["e_pct_is"] = e_pct_json(*cmp.e_pct);
        if (cmp.e_pct_lift) b["e_pct_is_lift"] = lift_json(*cmp.e_pct_lift);
        bs.push_back(std::move(b));
    }
    j["baselines"] = std::move(bs);
    return j.dump(2) + "\n";
}

void write_lift_csv(const PolicyEvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write lift table: " + path);
    out << "baseline,targeting_proportion,outcome,ips_lift,snips_lift,e_pct_is_lift\n";
    for (const auto& cmp : report.baselines) {
        bool first_row = true;
        for (const auto& [outcome, lift] : cmp.ips_lift) {
            std::vector<std::string> row;
            row.push_back(cmp.name);
            row.push_back(csv::format_double(cmp.targeting_proportion));
            row.push_back(outcome);
            row.push_back(lift_cell(lift));
            row.push_back(lift_cell(cmp.snips_lift.at(outcome)));
            row.push_back(first_row && cmp.e_pct_lift ? lift_cell(*cmp.e_pct_lift) : "");
            out << csv::join(row) << "\n";
            first_row = false;
        }
    }
}

}  // namespace uplift
