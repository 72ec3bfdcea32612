#include "uplift/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "uplift/csv.hpp"
#include "uplift/error.hpp"
#include "uplift/rng.hpp"

namespace uplift {

TreatmentSet::TreatmentSet(std::vector<std::string> labels_, std::vector<double> propensities_)
    : labels(std::move(labels_)), propensities(std::move(propensities_)) {
    if (propensities.empty() && !labels.empty()) {
        propensities.assign(labels.size(), 1.0 / static_cast<double>(labels.size()));
    }
    check();
}

int TreatmentSet::index_of(const std::string& label) const {
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k] == label) return static_cast<int>(k);
    }
    return -1;
}

void TreatmentSet::check() const {
    if (labels.size() < 2) throw ArgumentError("treatment set needs at least 2 arms");
    std::set<std::string> uniq(labels.begin(), labels.end());
    if (uniq.size() != labels.size()) throw ArgumentError("treatment labels must be unique");
    if (propensities.size() != labels.size()) {
        throw ArgumentError("propensities length must match label count");
    }
    double sum = 0.0;
    for (double p : propensities) {
        if (!(p > 0.0)) throw ArgumentError("every propensity must be > 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("propensities must sum to 1");
}

int ExperimentDataset::aux_index(const std::string& name) const {
    for (std::size_t j = 0; j < aux_names.size(); ++j) {
        if (aux_names[j] == name) return static_cast<int>(j);
    }
    return -1;
}

std::vector<std::string> ExperimentDataset::ids() const {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.id);
    return out;
}

std::vector<std::size_t> ExperimentDataset::arm_counts() const {
    std::vector<std::size_t> counts(treatments.num_arms(), 0);
    for (const auto& r : records) counts[static_cast<std::size_t>(r.t)]++;
    return counts;
}

bool ValidationReport::has_errors() const {
    return std::any_of(issues.begin(), issues.end(), [](const ValidationIssue& i) {
        return i.severity == ValidationIssue::Severity::Error;
    });
}

namespace {

constexpr const char* kAuxPrefix = "aux:";

}  // namespace

ExperimentDataset load_experiment(const std::string& path, const CsvSchema& schema) {
    schema.treatments.check();

    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open file: " + path);

    std::vector<std::string> header;
    if (!csv::read_row(in, header)) throw SchemaError("empty file, no header row: " + path);

    int id_col = -1, treat_col = -1, outcome_col = -1;
    std::vector<int> feature_cols;
    std::vector<int> aux_cols;
    ExperimentDataset ds;
    ds.treatments = schema.treatments;

    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& name = header[c];
        if (name == schema.id_column) {
            id_col = static_cast<int>(c);
        } else if (name == schema.treatment_column) {
            treat_col = static_cast<int>(c);
        } else if (name == schema.outcome_column) {
            outcome_col = static_cast<int>(c);
        } else if (name.rfind(kAuxPrefix, 0) == 0) {
            aux_cols.push_back(static_cast<int>(c));
            ds.aux_names.push_back(name.substr(std::string(kAuxPrefix).size()));
        } else {
            feature_cols.push_back(static_cast<int>(c));
            ds.feature_names.push_back(name);
        }
    }
    if (id_col < 0) throw SchemaError("missing required column: " + schema.id_column);
    if (treat_col < 0) throw SchemaError("missing required column: " + schema.treatment_column);
    if (outcome_col < 0) throw SchemaError("missing required column: " + schema.outcome_column);

    std::vector<std::string> row;
    std::size_t row_number = 1;  // header is row 0 of the file, data rows count from 1
    while (csv::read_row(in, row)) {
        if (row.size() == 1 && row[0].empty()) continue;  // blank trailing line
        if (row.size() != header.size()) {
            throw ParseError("row " + std::to_string(row_number) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(row.size()));
        }
        CustomerRecord rec;
        rec.id = row[static_cast<std::size_t>(id_col)];

        const std::string& label = row[static_cast<std::size_t>(treat_col)];
        int arm = ds.treatments.index_of(label);
        if (arm < 0) {
            throw DataError("row " + std::to_string(row_number) +
                            ": unknown treatment label \"" + label + "\"");
        }
        rec.t = arm;

        auto parse_cell = [&](int col, const char* what) {
            double v;
            if (!csv::parse_double(row[static_cast<std::size_t>(col)], v)) {
                throw ParseError("row " + std::to_string(row_number) + ": non-numeric " +
                                 std::string(what) + " in column \"" +
                                 header[static_cast<std::size_t>(col)] + "\"");
            }
            return v;
        };

        rec.y = parse_cell(outcome_col, "outcome");
        rec.x.reserve(feature_cols.size());
        for (int c : feature_cols) rec.x.push_back(parse_cell(c, "covariate"));
        rec.aux.reserve(aux_cols.size());
        for (int c : aux_cols) rec.aux.push_back(parse_cell(c, "auxiliary outcome"));

        ds.records.push_back(std::move(rec));
        ++row_number;
    }
    return ds;
}

void write_experiment(const ExperimentDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write file: " + path);

    std::vector<std::string> header;
    header.push_back("id");
    for (const auto& f : ds.feature_names) header.push_back(f);
    header.push_back("treatment");
    header.push_back("outcome");
    for (const auto& a : ds.aux_names) header.push_back(std::string(kAuxPrefix) + a);
    out << csv::join(header) << "\n";

    std::vector<std::string> row;
    for (const auto& rec : ds.records) {
        row.clear();
        row.push_back(rec.id);
        for (double v : rec.x) row.push_back(csv::format_double(v));
        row.push_back(ds.treatments.labels[static_cast<std::size_t>(rec.t)]);
        row.push_back(csv::format_double(rec.y));
        for (double v : rec.aux) row.push_back(csv::format_double(v));
        out << csv::join(row) << "\n";
    }
}

ValidationReport validate(const ExperimentDataset& ds) {
    ValidationReport report;
    auto warn = [&](std::string msg) {
        report.issues.push_back({ValidationIssue::Severity::Warning, std::move(msg)});
    };
    auto error = [&](std::string msg) {
        report.issues.push_back({ValidationIssue::Severity::Error, std::move(msg)});
    };

    std::unordered_set<std::string> seen;
    for (const auto& rec : ds.records) {
        if (!seen.insert(rec.id).second) error("duplicate id \"" + rec.id + "\"");
    }

    auto counts = ds.arm_counts();
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] == 0) {
            warn("arm " + std::to_string(k) + " (" + ds.treatments.labels[k] + ") empty");
        }
    }

    for (int j = 0; j < ds.dim(); ++j) {
        bool constant = true;
        for (std::size_t i = 1; i < ds.records.size(); ++i) {
            if (ds.records[i].x[static_cast<std::size_t>(j)] !=
                ds.records[0].x[static_cast<std::size_t>(j)]) {
                constant = false;
                break;
            }
        }
        if (constant && ds.records.size() > 1) {
            warn("covariate \"" + ds.feature_names[static_cast<std::size_t>(j)] + "\" is constant");
        }
    }

    for (const auto& rec : ds.records) {
        if (std::isnan(rec.y)) error("NaN outcome for id \"" + rec.id + "\"");
        for (double v : rec.aux) {
            if (std::isnan(v)) {
                error("NaN auxiliary outcome for id \"" + rec.id + "\"");
                break;
            }
        }
    }
    return report;
}

std::pair<ExperimentDataset, ExperimentDataset> split(const ExperimentDataset& ds,
                                                      double eval_fraction,
                                                      std::uint64_t seed) {
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) {
        throw ArgumentError("eval_fraction must be in (0,1)");
    }
    if (ds.records.empty()) throw ArgumentError("cannot split an empty dataset");

    std::vector<std::vector<std::size_t>> by_arm(static_cast<std::size_t>(ds.treatments.num_arms()));
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        by_arm[static_cast<std::size_t>(ds.records[i].t)].push_back(i);
    }

    Rng rng(seed);
    std::vector<bool> in_eval(ds.records.size(), false);
    for (auto& indices : by_arm) {
        if (indices.empty()) continue;
        std::size_t n_eval = static_cast<std::size_t>(
            std::llround(eval_fraction * static_cast<double>(indices.size())));
        n_eval = std::min(n_eval, indices.size());
        rng.shuffle(indices);
        for (std::size_t j = 0; j < n_eval; ++j) in_eval[indices[j]] = true;
    }

    ExperimentDataset train, eval;
    train.treatments = eval.treatments = ds.treatments;
    train.feature_names = eval.feature_names = ds.feature_names;
    train.aux_names = eval.aux_names = ds.aux_names;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        (in_eval[i] ? eval : train).records.push_back(ds.records[i]);
    }
    return {std::move(train), std::move(eval)};
}

}  // namespace uplift
