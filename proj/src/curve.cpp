#include "uplift/curve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "uplift/csv.hpp"
#include "uplift/error.hpp"
#include "uplift/rng.hpp"

namespace uplift {

namespace {

void require_alignment(const ExperimentDataset& ds, const UpliftEstimates& est) {
    if (est.ids.size() != ds.size()) throw ArgumentError("estimates not aligned to dataset");
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.records[i].id != est.ids[i]) {
            throw ArgumentError("estimates not aligned to dataset at id \"" + est.ids[i] + "\"");
        }
    }
}

UpliftCurve curve_for_ranking(const ExperimentDataset& eval, std::vector<std::size_t> ranking,
                              int arm) {
    const std::size_t n = eval.size();
    UpliftCurve curve;
    curve.ranking = std::move(ranking);
    curve.points.reserve(n);

    double treated_sum = 0.0, control_sum = 0.0;
    std::size_t treated_n = 0, control_n = 0;
    for (std::size_t r = 1; r <= n; ++r) {
        const CustomerRecord& rec = eval.records[curve.ranking[r - 1]];
        if (rec.t == arm) {
            treated_sum += rec.y;
            ++treated_n;
        } else if (rec.t == 0) {
            control_sum += rec.y;
            ++control_n;
        }
        UpliftCurvePoint pt;
        pt.rank = r;
        pt.fraction = static_cast<double>(r) / static_cast<double>(n);
        if (treated_n == 0 || control_n == 0) {
            pt.value = 0.0;
            pt.undefined = true;
        } else {
            pt.value = (treated_sum / static_cast<double>(treated_n) -
                        control_sum / static_cast<double>(control_n)) *
                       pt.fraction;
        }
        curve.points.push_back(pt);
    }
    return curve;
}

}  // namespace

UpliftCurve cumulative_uplift_curve(const ExperimentDataset& eval, const UpliftEstimates& est,
                                    int arm) {
    if (arm < 1 || arm > est.num_treatments) {
        throw ArgumentError("curve arm must be in 1.." + std::to_string(est.num_treatments));
    }
    require_alignment(eval, est);

    std::vector<std::size_t> order(eval.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double ta = est.tau(a, arm), tb = est.tau(b, arm);
        if (ta != tb) return ta > tb;
        return eval.records[a].id < eval.records[b].id;
    });
    return curve_for_ranking(eval, std::move(order), arm);
}

double uplift_auc(const UpliftCurve& curve) {
    if (curve.points.empty()) throw ArgumentError("uplift_auc: empty curve");
    double area = 0.0;
    double prev_x = 0.0, prev_v = 0.0;
    for (const auto& pt : curve.points) {
        area += (pt.fraction - prev_x) * (pt.value + prev_v) / 2.0;
        prev_x = pt.fraction;
        prev_v = pt.value;
    }
    return area;
}

void write_curve_csv(const UpliftCurve& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write curve file: " + path);
    out << "rank,fraction,value,undefined_flag\n";
    for (const auto& pt : curve.points) {
        out << pt.rank << ',' << csv::format_double(pt.fraction) << ','
            << csv::format_double(pt.value) << ',' << (pt.undefined ? 1 : 0) << "\n";
    }
}

double random_ranking_auc_sd(const ExperimentDataset& eval, int arm, int n_permutations,
                             std::uint64_t seed) {
    if (n_permutations < 2) throw ArgumentError("need at least 2 permutations");
    std::vector<double> aucs;
    aucs.reserve(static_cast<std::size_t>(n_permutations));
    for (int p = 0; p < n_permutations; ++p) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(p)));
        std::vector<std::size_t> order(eval.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        aucs.push_back(uplift_auc(curve_for_ranking(eval, std::move(order), arm)));
    }
    double mean = std::accumulate(aucs.begin(), aucs.end(), 0.0) / static_cast<double>(aucs.size());
    double ss = 0.0;
    for (double a : aucs) ss += (a - mean) * (a - mean);
    return std::sqrt(ss / static_cast<double>(aucs.size() - 1));
}

std::vector<TrueUpliftBucket> bucket_true_uplift(const ExperimentDataset& ds,
                                                 const std::vector<double>& score, int n_buckets) {
    const std::size_t n = ds.size();
    if (score.size() != n) throw ArgumentError("score vector not aligned to dataset");
    if (n_buckets < 1 || static_cast<std::size_t>(n_buckets) > n) {
        throw ArgumentError("n_buckets must be in 1..N");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] < score[b];
        return ds.records[a].id < ds.records[b].id;
    });

    const std::size_t base = n / static_cast<std::size_t>(n_buckets);
    const std::size_t remainder = n % static_cast<std::size_t>(n_buckets);

    std::vector<TrueUpliftBucket> buckets;
    buckets.reserve(static_cast<std::size_t>(n_buckets));
    std::size_t pos = 0;
    for (int b = 0; b < n_buckets; ++b) {
        const std::size_t sz = base + (static_cast<std::size_t>(b) < remainder ? 1 : 0);
        TrueUpliftBucket bucket;
        bucket.size = sz;
        bucket.score_min = score[order[pos]];
        bucket.score_max = score[order[pos + sz - 1]];
        double treated_sum = 0.0, control_sum = 0.0;
        for (std::size_t j = 0; j < sz; ++j) {
            const CustomerRecord& rec = ds.records[order[pos + j]];
            if (rec.t == 0) {
                control_sum += rec.y;
                ++bucket.n_control;
            } else {
                treated_sum += rec.y;
                ++bucket.n_treated;
            }
        }
        if (bucket.n_treated == 0 || bucket.n_control == 0) {
            bucket.undefined = true;
        } else {
            bucket.tau = treated_sum / static_cast<double>(bucket.n_treated) -
                         control_sum / static_cast<double>(bucket.n_control);
        }
        pos += sz;
        buckets.push_back(bucket);
    }
    return buckets;
}

}  // namespace uplift
