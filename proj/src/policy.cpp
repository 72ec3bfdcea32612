#include "uplift/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>

#include "json.hpp"
#include "uplift/csv.hpp"
#include "uplift/error.hpp"

namespace uplift {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> unit_weights_if_empty(std::vector<double> weights, std::size_t n) {
    if (weights.empty()) weights.assign(n, 1.0);
    if (weights.size() != n) throw ArgumentError("weights not aligned to estimates");
    return weights;
}

void require_alignment(const UpliftEstimates& est, const Policy& p) {
    if (p.ids.size() != est.ids.size() || p.ids != est.ids) {
        throw ArgumentError("policy ids not aligned to estimates");
    }
}

}  // namespace

double Policy::targeting_proportion() const {
    if (ids.empty()) return 0.0;
    std::size_t treated = 0;
    for (int a : assignment) {
        if (a != 0) ++treated;
    }
    return static_cast<double>(treated) / static_cast<double>(ids.size());
}

void Policy::check(int max_arm) const {
    if (assignment.size() != ids.size()) throw ArgumentError("policy shape mismatch");
    if (!weights.empty() && weights.size() != ids.size()) {
        throw ArgumentError("policy weights shape mismatch");
    }
    for (int a : assignment) {
        if (a < 0 || a > max_arm) throw ArgumentError("policy arm index out of range");
    }
}

Policy Policy::constant(std::vector<std::string> ids_, int arm) {
    Policy p;
    p.ids = std::move(ids_);
    p.assignment.assign(p.ids.size(), arm);
    p.weights.assign(p.ids.size(), 1.0);
    return p;
}

ConstraintSpec ConstraintSpec::none() { return ConstraintSpec{}; }

ConstraintSpec ConstraintSpec::budget(std::vector<long long> caps) {
    ConstraintSpec spec;
    spec.kind = ConstraintKind::Budget;
    spec.caps = std::move(caps);
    spec.check();
    return spec;
}

ConstraintSpec ConstraintSpec::ratio_floor(std::string aux, double epsilon, int reference_arm) {
    ConstraintSpec spec;
    spec.kind = ConstraintKind::RatioFloor;
    spec.ratio = RatioFloorSpec{std::move(aux), epsilon, reference_arm};
    spec.check();
    return spec;
}

void ConstraintSpec::check() const {
    if (kind == ConstraintKind::Budget) {
        if (caps.empty()) throw ArgumentError("budget constraint needs per-arm caps");
        for (long long c : caps) {
            if (c < 0) throw ArgumentError("budget caps must be >= 0");
        }
    }
    if (kind == ConstraintKind::RatioFloor) {
        if (!ratio) throw ArgumentError("ratio constraint needs a RatioFloorSpec");
        if (!(ratio->epsilon >= 0.0 && ratio->epsilon < 1.0)) {
            throw ArgumentError("ratio epsilon must be in [0,1)");
        }
        if (ratio->reference_arm != 0 && ratio->reference_arm != 1) {
            throw ArgumentError("ratio reference arm must be 0 or 1");
        }
    }
}

std::size_t BucketSet::num_flagged() const {
    std::size_t n = 0;
    for (const auto& b : buckets) {
        if (!b.aux_defined[0] || !b.aux_defined[1]) ++n;
    }
    return n;
}

double policy_objective(const Policy& p, const UpliftEstimates& est) {
    require_alignment(est, p);
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const int arm = p.assignment[i];
        if (arm == 0) continue;
        if (arm < 0 || arm > est.num_treatments) {
            throw ArgumentError("policy arm index out of range");
        }
        const double w = p.weights.empty() ? 1.0 : p.weights[i];
        total += w * est.tau(i, arm);
    }
    return total;
}

OptimizeResult optimize_positive(const UpliftEstimates& est, std::vector<double> weights) {
    weights = unit_weights_if_empty(std::move(weights), est.size());

    Policy p;
    p.ids = est.ids;
    p.weights = weights;
    p.assignment.assign(est.size(), 0);

    double objective = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        int best_arm = 0;
        double best_value = 0.0;
        for (int k = 1; k <= est.num_treatments; ++k) {
            const double v = weights[i] * est.tau(i, k);
            if (v > best_value) {
                best_value = v;
                best_arm = k;
            }
        }
        p.assignment[i] = best_arm;
        objective += best_value;
    }

    OptimizeResult result;
    result.policy = std::move(p);
    result.objective = objective;
    result.targeting_proportion = result.policy.targeting_proportion();
    result.solver_path = "argmax";
    return result;
}

OptimizeResult optimize_budget(const UpliftEstimates& est, std::vector<double> weights,
                               const std::vector<long long>& caps) {
    weights = unit_weights_if_empty(std::move(weights), est.size());
    if (static_cast<int>(caps.size()) != est.num_treatments) {
        throw ArgumentError("need one cap per non-control arm");
    }
    for (long long c : caps) {
        if (c < 0) throw ArgumentError("budget caps must be >= 0");
    }

    Policy p;
    p.ids = est.ids;
    p.weights = weights;
    p.assignment.assign(est.size(), 0);
    std::string path;

    if (est.num_treatments == 1) {
        // Binary treatment: taking the highest positive gains first is exact.
        path = "sorted_exact";
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < est.size(); ++i) {
            if (weights[i] * est.tau(i, 1) > 0.0) order.push_back(i);
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double va = weights[a] * est.tau(a, 1);
            const double vb = weights[b] * est.tau(b, 1);
            if (va != vb) return va > vb;
            return est.ids[a] < est.ids[b];
        });
        const std::size_t take =
            std::min<std::size_t>(order.size(), static_cast<std::size_t>(caps[0]));
        for (std::size_t j = 0; j < take; ++j) p.assignment[order[j]] = 1;
    } else {
        path = "greedy";
        struct Entry {
            double value;
            std::string id;
            std::size_t cust;
            int arm;
        };
        auto cmp = [](const Entry& a, const Entry& b) {
            if (a.value != b.value) return a.value < b.value;
            return a.id > b.id;
        };
        std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
        std::vector<long long> used(caps.size(), 0);

        auto best_available = [&](std::size_t i) {
            Entry e{0.0, est.ids[i], i, 0};
            for (int k = 1; k <= est.num_treatments; ++k) {
                if (used[static_cast<std::size_t>(k - 1)] >= caps[static_cast<std::size_t>(k - 1)])
                    continue;
                const double v = weights[i] * est.tau(i, k);
                if (v > e.value) {
                    e.value = v;
                    e.arm = k;
                }
            }
            return e;
        };

        for (std::size_t i = 0; i < est.size(); ++i) {
            Entry e = best_available(i);
            if (e.arm != 0) heap.push(e);
        }
        while (!heap.empty()) {
            Entry e = heap.top();
            heap.pop();
            Entry fresh = best_available(e.cust);
            if (fresh.arm == 0) continue;  // all useful arms filled up
            if (fresh.value == e.value) {
                p.assignment[e.cust] = fresh.arm;
                used[static_cast<std::size_t>(fresh.arm - 1)]++;
            } else {
                heap.push(fresh);  // stale entry, re-rank
            }
        }
    }

    OptimizeResult result;
    result.objective = policy_objective(p, est);
    result.targeting_proportion = p.targeting_proportion();
    result.policy = std::move(p);
    result.solver_path = path;

    long long min_slack = std::numeric_limits<long long>::max();
    std::vector<long long> used(caps.size(), 0);
    for (int a : result.policy.assignment) {
        if (a != 0) used[static_cast<std::size_t>(a - 1)]++;
    }
    for (std::size_t k = 0; k < caps.size(); ++k) min_slack = std::min(min_slack, caps[k] - used[k]);
    result.constraint_slack = static_cast<double>(min_slack);
    return result;
}

BucketSet bucketize(const UpliftEstimates& est, const ExperimentDataset& ds, int n_groups,
                    const std::string& aux) {
    if (est.num_treatments != 1 || ds.treatments.num_arms() != 2) {
        throw ArgumentError("bucketize requires binary treatment");
    }
    if (est.ids.size() != ds.size() || est.ids != ds.ids()) {
        throw ArgumentError("estimates not aligned to dataset");
    }
    const std::size_t n = ds.size();
    if (n_groups < 1 || static_cast<std::size_t>(n_groups) > n) {
        throw ArgumentError("n_groups must be in 1..N");
    }
    const int aux_idx = ds.aux_index(aux);
    if (aux_idx < 0) throw ArgumentError("unknown auxiliary outcome \"" + aux + "\"");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ta = est.tau(a, 1), tb = est.tau(b, 1);
        if (ta != tb) return ta > tb;
        return ds.records[a].id < ds.records[b].id;
    });

    BucketSet set;
    set.ids = est.ids;
    set.aux_name = aux;
    const std::size_t base = n / static_cast<std::size_t>(n_groups);
    const std::size_t remainder = n % static_cast<std::size_t>(n_groups);

    std::size_t pos = 0;
    for (int g = 0; g < n_groups; ++g) {
        const std::size_t sz = base + (static_cast<std::size_t>(g) < remainder ? 1 : 0);
        Bucket bucket;
        bucket.size = sz;
        double tau_sum = 0.0;
        std::array<double, 2> aux_sum{0.0, 0.0};
        std::array<std::size_t, 2> aux_n{0, 0};
        for (std::size_t j = 0; j < sz; ++j) {
            const std::size_t i = order[pos + j];
            bucket.members.push_back(i);
            tau_sum += est.tau(i, 1);
            const int arm = ds.records[i].t;
            aux_sum[static_cast<std::size_t>(arm)] +=
                ds.records[i].aux[static_cast<std::size_t>(aux_idx)];
            aux_n[static_cast<std::size_t>(arm)]++;
        }
        bucket.mean_tau = tau_sum / static_cast<double>(sz);
        for (int a = 0; a < 2; ++a) {
            if (aux_n[static_cast<std::size_t>(a)] > 0) {
                bucket.aux_defined[static_cast<std::size_t>(a)] = true;
                bucket.aux_mean[static_cast<std::size_t>(a)] =
                    aux_sum[static_cast<std::size_t>(a)] /
                    static_cast<double>(aux_n[static_cast<std::size_t>(a)]);
            }
        }
        pos += sz;
        set.buckets.push_back(std::move(bucket));
    }
    return set;
}

namespace {

/// Derived coefficients for the ratio-floor program over free (unflagged)
/// buckets. Flagged buckets are pinned to the reference arm beforehand.
struct RatioProgram {
    std::vector<std::size_t> free_buckets;  ///< indices into BucketSet::buckets
    std::vector<double> gain;   ///< objective when treated, per free bucket
    std::vector<double> s0;     ///< size * aux_mean[0]
    std::vector<double> s1;     ///< size * aux_mean[1]
    double fixed_gain = 0.0;    ///< gains of pinned buckets (when ref arm is 1)
    double fixed_lhs = 0.0;     ///< pinned buckets' aux contribution
    double floor = 0.0;         ///< (1-eps) * reference assignment's aux sum
};

RatioProgram build_ratio_program(const BucketSet& set, double epsilon, int reference_arm) {
    RatioProgram prog;
    double ref_sum = 0.0;
    for (std::size_t b = 0; b < set.buckets.size(); ++b) {
        const Bucket& bucket = set.buckets[b];
        const bool flagged = !bucket.aux_defined[0] || !bucket.aux_defined[1];
        if (flagged) {
            if (bucket.aux_defined[static_cast<std::size_t>(reference_arm)]) {
                const double s = static_cast<double>(bucket.size) *
                                 bucket.aux_mean[static_cast<std::size_t>(reference_arm)];
                prog.fixed_lhs += s;
                ref_sum += s;
            }
            if (reference_arm == 1) {
                prog.fixed_gain += static_cast<double>(bucket.size) * bucket.mean_tau;
            }
            continue;
        }
        prog.free_buckets.push_back(b);
        prog.gain.push_back(static_cast<double>(bucket.size) * bucket.mean_tau);
        prog.s0.push_back(static_cast<double>(bucket.size) * bucket.aux_mean[0]);
        prog.s1.push_back(static_cast<double>(bucket.size) * bucket.aux_mean[1]);
        ref_sum += static_cast<double>(bucket.size) *
                   bucket.aux_mean[static_cast<std::size_t>(reference_arm)];
    }
    prog.floor = (1.0 - epsilon) * ref_sum;
    return prog;
}

double exact_lhs(const RatioProgram& prog, const std::vector<int>& x) {
    double lhs = prog.fixed_lhs;
    for (std::size_t j = 0; j < prog.free_buckets.size(); ++j) {
        lhs += x[j] ? prog.s1[j] : prog.s0[j];
    }
    return lhs;
}

double assignment_objective(const RatioProgram& prog, const std::vector<int>& x) {
    double obj = prog.fixed_gain;
    for (std::size_t j = 0; j < prog.free_buckets.size(); ++j) {
        if (x[j]) obj += prog.gain[j];
    }
    return obj;
}

// Feasibility uses a tiny tolerance so that the reference assignment itself
// (floor == lhs up to rounding) always qualifies.
bool ratio_feasible(const RatioProgram& prog, const std::vector<int>& x) {
    const double lhs = exact_lhs(prog, x);
    return lhs >= prog.floor - 1e-9 * (std::abs(prog.floor) + 1.0);
}

/// Exact enumeration in lexicographic assignment order.
std::vector<int> enumerate_ratio(const RatioProgram& prog) {
    const std::size_t m = prog.free_buckets.size();
    std::vector<int> best;
    double best_obj = kNegInf;
    std::vector<int> x(m, 0);
    const std::uint64_t total = 1ULL << m;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        // bucket 0 is the most significant bit, so masks run in lexicographic
        // order of the assignment vector and ties keep the first (smallest).
        for (std::size_t j = 0; j < m; ++j) {
            x[j] = (mask >> (m - 1 - j)) & 1ULL ? 1 : 0;
        }
        if (!ratio_feasible(prog, x)) continue;
        const double obj = assignment_objective(prog, x);
        if (obj > best_obj) {
            best_obj = obj;
            best = x;
        }
    }
    return best;  // empty only if nothing feasible, which the caller handles
}

struct DpSolution {
    std::vector<int> x;
    double objective = kNegInf;
    bool feasible = false;
};

/// 0/1 knapsack over integer-quantized aux deltas. `conservative` rounds so
/// quantized feasibility implies exact feasibility; the optimistic variant
/// gives an objective upper bound.
DpSolution ratio_dp(const RatioProgram& prog, double unit, bool conservative) {
    const std::size_t m = prog.free_buckets.size();
    double base = prog.fixed_lhs;
    for (std::size_t j = 0; j < m; ++j) base += prog.s0[j];
    const double target_raw = (prog.floor - base) / unit;

    std::vector<long long> d(m);
    long long lo = 0, hi = 0;
    for (std::size_t j = 0; j < m; ++j) {
        const double delta = (prog.s1[j] - prog.s0[j]) / unit;
        d[j] = conservative ? static_cast<long long>(std::floor(delta))
                            : static_cast<long long>(std::ceil(delta));
        if (d[j] < 0) lo += d[j];
        else hi += d[j];
    }
    const long long target = conservative ? static_cast<long long>(std::ceil(target_raw))
                                          : static_cast<long long>(std::floor(target_raw));

    DpSolution sol;
    sol.x.assign(m, 0);
    if (target > hi) return sol;  // quantized problem infeasible

    const long long span = hi - lo + 1;
    if (span > 50'000'000LL) {
        throw CapacityError("ratio DP state space too large; coarsen the quantization");
    }
    const auto S = static_cast<std::size_t>(span);
    auto index_of = [&](long long s) { return static_cast<std::size_t>(s - lo); };

    std::vector<double> dp(S, kNegInf);
    dp[index_of(0)] = 0.0;
    std::vector<std::vector<std::uint8_t>> took(m, std::vector<std::uint8_t>(S, 0));

    for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> next = dp;
        for (std::size_t s = 0; s < S; ++s) {
            if (dp[s] == kNegInf) continue;
            const long long moved = static_cast<long long>(s) + lo + d[j];
            if (moved < lo || moved > hi) continue;
            const std::size_t s2 = index_of(moved);
            const double candidate = dp[s] + prog.gain[j];
            if (candidate > next[s2]) {
                next[s2] = candidate;
                took[j][s2] = 1;
            }
        }
        dp = std::move(next);
    }

    long long best_state = 0;
    double best_obj = kNegInf;
    for (long long s = std::max(target, lo); s <= hi; ++s) {
        if (dp[index_of(s)] > best_obj) {
            best_obj = dp[index_of(s)];
            best_state = s;
        }
    }
    if (best_obj == kNegInf) return sol;

    // Walk the layers backwards to recover the chosen buckets. Each state has
    // a unique take-source per item, so the per-layer flag is unambiguous.
    long long s = best_state;
    for (std::size_t j = m; j-- > 0;) {
        if (took[j][index_of(s)]) {
            sol.x[j] = 1;
            s -= d[j];
        }
    }
    sol.objective = prog.fixed_gain + best_obj;
    sol.feasible = true;
    return sol;
}

/// Exact-arithmetic hill climb: single and pair flips that keep the floor
/// satisfied and strictly improve the objective.
void refine_assignment(const RatioProgram& prog, std::vector<int>& x) {
    const std::size_t m = prog.free_buckets.size();
    double obj = assignment_objective(prog, x);
    for (int pass = 0; pass < 64; ++pass) {
        bool improved = false;
        for (std::size_t j = 0; j < m; ++j) {
            x[j] ^= 1;
            const double candidate = assignment_objective(prog, x);
            if (candidate > obj && ratio_feasible(prog, x)) {
                obj = candidate;
                improved = true;
            } else {
                x[j] ^= 1;
            }
        }
        for (std::size_t a = 0; a < m && m <= 512; ++a) {
            for (std::size_t b = a + 1; b < m; ++b) {
                x[a] ^= 1;
                x[b] ^= 1;
                const double candidate = assignment_objective(prog, x);
                if (candidate > obj && ratio_feasible(prog, x)) {
                    obj = candidate;
                    improved = true;
                } else {
                    x[a] ^= 1;
                    x[b] ^= 1;
                }
            }
        }
        if (!improved) break;
    }
}

Policy expand_bucket_assignment(const BucketSet& set, int reference_arm,
                                const RatioProgram& prog, const std::vector<int>& x) {
    Policy p;
    p.ids = set.ids;
    p.weights.assign(set.ids.size(), 1.0);
    p.assignment.assign(set.ids.size(), 0);
    std::vector<int> bucket_arm(set.buckets.size(), reference_arm);
    for (std::size_t j = 0; j < prog.free_buckets.size(); ++j) {
        bucket_arm[prog.free_buckets[j]] = x[j];
    }
    for (std::size_t b = 0; b < set.buckets.size(); ++b) {
        for (std::size_t i : set.buckets[b].members) p.assignment[i] = bucket_arm[b];
    }
    return p;
}

}  // namespace

OptimizeResult optimize_ratio_constrained(const BucketSet& set, double epsilon, int reference_arm,
                                          const RatioOptions& options) {
    if (set.buckets.empty()) throw ArgumentError("empty bucket set");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ArgumentError("epsilon must be in [0,1)");
    if (reference_arm != 0 && reference_arm != 1) {
        throw ArgumentError("reference arm must be 0 or 1");
    }
    if (!(options.quantization > 0.0)) throw ArgumentError("quantization must be > 0");

    RatioProgram prog = build_ratio_program(set, epsilon, reference_arm);
    const std::size_t m = prog.free_buckets.size();

    OptimizeResult result;
    std::vector<int> x(m, reference_arm);  // all-reference is feasible by construction

    const int enumeration_limit = std::min(options.enumeration_limit, 30);
    if (static_cast<int>(m) <= enumeration_limit) {
        result.solver_path = "enumeration";
        std::vector<int> best = enumerate_ratio(prog);
        if (!best.empty()) x = std::move(best);
    } else {
        result.solver_path = "dp";
        double delta_min = std::numeric_limits<double>::infinity();
        double delta_max = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            const double delta = prog.s1[j] - prog.s0[j];
            delta_min = std::min(delta_min, delta);
            delta_max = std::max(delta_max, delta);
        }
        double unit = options.quantization * (delta_max - delta_min);
        if (!(unit > 0.0)) unit = std::max(1.0, std::abs(delta_max));
        result.quantization = unit;

        DpSolution cons = ratio_dp(prog, unit, /*conservative=*/true);
        if (cons.feasible && ratio_feasible(prog, cons.x)) x = std::move(cons.x);
        refine_assignment(prog, x);

        DpSolution optimistic = ratio_dp(prog, unit, /*conservative=*/false);
        if (optimistic.feasible) {
            result.objective_upper_bound =
                std::max(optimistic.objective, assignment_objective(prog, x));
        }
    }

    result.objective = assignment_objective(prog, x);
    result.constraint_slack = exact_lhs(prog, x) - prog.floor;
    result.policy = expand_bucket_assignment(set, reference_arm, prog, x);
    result.targeting_proportion = result.policy.targeting_proportion();
    return result;
}

OptimizeResult brute_force_policy(const UpliftEstimates& est, const ExperimentDataset& ds,
                                  const ConstraintSpec& spec, const BucketSet* buckets,
                                  std::vector<double> weights) {
    spec.check();

    if (spec.kind == ConstraintKind::RatioFloor) {
        if (buckets == nullptr) {
            throw ArgumentError("ratio-floor brute force needs a bucket set");
        }
        if (buckets->aux_name != spec.ratio->aux) {
            throw ArgumentError("bucket set aggregates \"" + buckets->aux_name +
                                "\", constraint names \"" + spec.ratio->aux + "\"");
        }
        RatioProgram prog = build_ratio_program(*buckets, spec.ratio->epsilon,
                                                spec.ratio->reference_arm);
        if (prog.free_buckets.size() > 20) {
            throw CapacityError("too many buckets to enumerate");
        }
        std::vector<int> best = enumerate_ratio(prog);
        std::vector<int> x =
            best.empty() ? std::vector<int>(prog.free_buckets.size(), spec.ratio->reference_arm)
                         : std::move(best);
        OptimizeResult result;
        result.solver_path = "enumeration";
        result.objective = assignment_objective(prog, x);
        result.constraint_slack = exact_lhs(prog, x) - prog.floor;
        result.policy = expand_bucket_assignment(*buckets, spec.ratio->reference_arm, prog, x);
        result.targeting_proportion = result.policy.targeting_proportion();
        return result;
    }

    weights = unit_weights_if_empty(std::move(weights), est.size());
    if (!ds.records.empty() && ds.ids() != est.ids) {
        throw ArgumentError("estimates not aligned to dataset");
    }
    const std::size_t n = est.size();
    const int num_arms = est.num_treatments + 1;

    double combos = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        combos *= static_cast<double>(num_arms);
        if (combos > static_cast<double>(1 << 20)) {
            throw CapacityError("instance too large to enumerate");
        }
    }
    if (spec.kind == ConstraintKind::Budget &&
        static_cast<int>(spec.caps.size()) != est.num_treatments) {
        throw ArgumentError("need one cap per non-control arm");
    }

    std::vector<int> x(n, 0), best(n, 0);
    std::vector<long long> counts(static_cast<std::size_t>(est.num_treatments), 0);
    double best_obj = kNegInf;

    auto feasible = [&]() {
        if (spec.kind != ConstraintKind::Budget) return true;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            if (counts[k] > spec.caps[k]) return false;
        }
        return true;
    };
    // Fresh left-to-right sum per candidate, matching policy_objective's
    // accumulation order so tied assignments compare bit-identically.
    auto objective_of = [&]() {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (x[i] != 0) total += weights[i] * est.tau(i, x[i]);
        }
        return total;
    };

    // Odometer over assignments with the FIRST customer most significant, so
    // candidates appear in lexicographic order and strict improvement keeps
    // the lexicographically smallest maximizer.
    while (true) {
        if (feasible()) {
            const double objective = objective_of();
            if (objective > best_obj) {
                best_obj = objective;
                best = x;
            }
        }
        std::size_t pos = n;
        while (pos-- > 0) {
            if (x[pos] != 0) counts[static_cast<std::size_t>(x[pos] - 1)]--;
            if (x[pos] + 1 < num_arms) {
                x[pos]++;
                counts[static_cast<std::size_t>(x[pos] - 1)]++;
                break;
            }
            x[pos] = 0;
        }
        if (pos == static_cast<std::size_t>(-1)) break;  // odometer wrapped
    }

    OptimizeResult result;
    result.solver_path = "enumeration";
    Policy p;
    p.ids = est.ids;
    p.weights = weights;
    p.assignment = std::move(best);
    result.objective = best_obj == kNegInf ? 0.0 : best_obj;
    result.targeting_proportion = p.targeting_proportion();
    result.policy = std::move(p);
    return result;
}

bool satisfies_constraints(const Policy& p, const ConstraintSpec& spec, const BucketSet* buckets) {
    spec.check();
    switch (spec.kind) {
        case ConstraintKind::None:
            return true;
        case ConstraintKind::Budget: {
            std::vector<long long> counts(spec.caps.size(), 0);
            for (int a : p.assignment) {
                if (a == 0) continue;
                if (a < 1 || static_cast<std::size_t>(a) > spec.caps.size()) return false;
                counts[static_cast<std::size_t>(a - 1)]++;
            }
            for (std::size_t k = 0; k < counts.size(); ++k) {
                if (counts[k] > spec.caps[k]) return false;
            }
            return true;
        }
        case ConstraintKind::RatioFloor: {
            if (buckets == nullptr) throw ArgumentError("ratio check needs the bucket set");
            if (buckets->aux_name != spec.ratio->aux) return false;
            if (p.ids != buckets->ids) return false;
            const int ref = spec.ratio->reference_arm;
            double lhs = 0.0, ref_sum = 0.0;
            for (const Bucket& bucket : buckets->buckets) {
                if (bucket.members.empty()) continue;
                const int arm = p.assignment[bucket.members[0]];
                for (std::size_t i : bucket.members) {
                    if (p.assignment[i] != arm) return false;  // must be bucket-uniform
                }
                const bool flagged = !bucket.aux_defined[0] || !bucket.aux_defined[1];
                if (flagged) {
                    if (arm != ref) return false;
                    if (bucket.aux_defined[static_cast<std::size_t>(ref)]) {
                        const double s = static_cast<double>(bucket.size) *
                                         bucket.aux_mean[static_cast<std::size_t>(ref)];
                        lhs += s;
                        ref_sum += s;
                    }
                    continue;
                }
                lhs += static_cast<double>(bucket.size) *
                       bucket.aux_mean[static_cast<std::size_t>(arm)];
                ref_sum += static_cast<double>(bucket.size) *
                           bucket.aux_mean[static_cast<std::size_t>(ref)];
            }
            const double floor = (1.0 - spec.ratio->epsilon) * ref_sum;
            return lhs >= floor - 1e-9 * (std::abs(floor) + 1.0);
        }
    }
    return false;
}

void write_policy_csv(const Policy& p, const TreatmentSet& treatments, const std::string& path) {
    p.check(treatments.num_treatments());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write policy file: " + path);
    out << "id,arm\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        out << csv::join({p.ids[i], treatments.labels[static_cast<std::size_t>(p.assignment[i])]})
            << "\n";
    }
}

Policy load_policy_csv(const std::string& path, const TreatmentSet& treatments) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open policy file: " + path);
    std::vector<std::string> row;
    if (!csv::read_row(in, row) || row.size() != 2 || row[0] != "id" || row[1] != "arm") {
        throw SchemaError("policy file must have header id,arm");
    }
    Policy p;
    std::size_t row_number = 1;
    while (csv::read_row(in, row)) {
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != 2) {
            throw ParseError("policy row " + std::to_string(row_number) + ": expected 2 fields");
        }
        const int arm = treatments.index_of(row[1]);
        if (arm < 0) {
            throw DataError("policy row " + std::to_string(row_number) +
                            ": unknown treatment label \"" + row[1] + "\"");
        }
        p.ids.push_back(row[0]);
        p.assignment.push_back(arm);
        ++row_number;
    }
    p.weights.assign(p.ids.size(), 1.0);
    return p;
}

std::string optimizer_report_json(const OptimizeResult& result, const ConstraintSpec& spec) {
    nlohmann::ordered_json j;
    j["objective"] = result.objective;
    j["targeting_proportion"] = result.targeting_proportion;
    j["solver_path"] = result.solver_path;
    switch (spec.kind) {
        case ConstraintKind::None: j["constraint"] = "none"; break;
        case ConstraintKind::Budget:
            j["constraint"] = "budget";
            j["caps"] = spec.caps;
            break;
        case ConstraintKind::RatioFloor:
            j["constraint"] = "ratio_floor";
            j["aux"] = spec.ratio->aux;
            j["epsilon"] = spec.ratio->epsilon;
            j["reference_arm"] = spec.ratio->reference_arm;
            break;
    }
    if (result.constraint_slack) j["constraint_slack"] = *result.constraint_slack;
    if (result.quantization) j["quantization"] = *result.quantization;
    if (result.objective_upper_bound) j["objective_upper_bound"] = *result.objective_upper_bound;
    return j.dump(2) + "\n";
}

}  // namespace uplift
