#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "uplift/curve.hpp"
#include "uplift/rng.hpp"
#include "uplift/synth.hpp"

using namespace uplift;
using test_helpers::Row;

namespace {

/// Estimates that rank customers in the given order (first = highest).
UpliftEstimates ranking_scores(const ExperimentDataset& ds, const std::vector<double>& scores) {
    return UpliftEstimates::from_scores(ds.ids(), scores);
}

}  // namespace

TEST_CASE("worked 4-customer curve") {
    // ranks 1,2 treated with Y = {1, 0}; ranks 3,4 control with Y = {0, 0}
    auto ds = test_helpers::binary_dataset({{"c1", {0.0}, 1, 1.0, {}},
                                            {"c2", {0.0}, 1, 0.0, {}},
                                            {"c3", {0.0}, 0, 0.0, {}},
                                            {"c4", {0.0}, 0, 0.0, {}}});
    UpliftCurve curve = cumulative_uplift_curve(ds, ranking_scores(ds, {4, 3, 2, 1}), 1);
    REQUIRE(curve.points.size() == 4);

    // prefix of size 1 and 2 have no control records
    CHECK(curve.points[0].undefined);
    CHECK(curve.points[0].value == 0.0);
    CHECK(curve.points[1].undefined);

    CHECK(!curve.points[2].undefined);
    CHECK(curve.points[2].value == doctest::Approx(0.5 * 3.0 / 4.0));
    CHECK(curve.points[3].value == doctest::Approx(0.5));
}

TEST_CASE("a control-only prefix is flagged and contributes zero") {
    auto ds = test_helpers::binary_dataset({{"c1", {0.0}, 0, 9.0, {}}, {"c2", {0.0}, 1, 1.0, {}}});
    UpliftCurve curve = cumulative_uplift_curve(ds, ranking_scores(ds, {2, 1}), 1);
    CHECK(curve.points[0].undefined);
    CHECK(curve.points[0].value == 0.0);
    CHECK(!curve.points[1].undefined);
}

TEST_CASE("curve endpoint equals the global difference in means") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Row> rows;
        std::vector<double> scores;
        const int n = 20 + static_cast<int>(rng.bounded(60));
        double sum_t = 0.0, sum_c = 0.0;
        int n_t = 0, n_c = 0;
        for (int i = 0; i < n; ++i) {
            Row row{"c" + std::to_string(100 + i), {rng.uniform01()}, (i % 3 == 0) ? 1 : 0,
                    rng.normal(), {}};
            if (row.t == 1) {
                sum_t += row.y;
                ++n_t;
            } else {
                sum_c += row.y;
                ++n_c;
            }
            rows.push_back(row);
            scores.push_back(rng.normal());
        }
        auto ds = test_helpers::binary_dataset(rows);
        UpliftCurve curve = cumulative_uplift_curve(ds, ranking_scores(ds, scores), 1);
        const double expected = sum_t / n_t - sum_c / n_c;
        CHECK(std::abs(curve.points.back().value - expected) <= 1e-12);
    }
}

TEST_CASE("ranking ties break by ascending id") {
    auto ds = test_helpers::binary_dataset({{"b", {0.0}, 1, 1.0, {}},
                                            {"a", {0.0}, 0, 0.0, {}},
                                            {"c", {0.0}, 1, 0.0, {}}});
    UpliftCurve curve = cumulative_uplift_curve(ds, ranking_scores(ds, {1.0, 1.0, 1.0}), 1);
    CHECK(curve.ranking == std::vector<std::size_t>{1, 0, 2});  // ids a, b, c
}

TEST_CASE("uplift_auc integrates the curve from the origin") {
    SUBCASE("all-zero curve") {
        UpliftCurve curve;
        for (std::size_t r = 1; r <= 5; ++r) {
            curve.points.push_back({r, r / 5.0, 0.0, false});
        }
        CHECK(uplift_auc(curve) == 0.0);
    }
    SUBCASE("two-point hand trapezoid") {
        UpliftCurve curve;
        curve.points.push_back({1, 0.5, 0.5, false});
        curve.points.push_back({2, 1.0, 0.5, false});
        CHECK(uplift_auc(curve) == doctest::Approx(0.375));
    }
    SUBCASE("constant curve tends to the constant") {
        UpliftCurve curve;
        const std::size_t n = 2000;
        for (std::size_t r = 1; r <= n; ++r) {
            curve.points.push_back({r, static_cast<double>(r) / n, 0.7, false});
        }
        CHECK(uplift_auc(curve) == doctest::Approx(0.7).epsilon(1e-3));
    }
    SUBCASE("empty curve is rejected") {
        CHECK_THROWS_AS(uplift_auc(UpliftCurve{}), ArgumentError);
    }
}

TEST_CASE("true-effect ranking beats a random ranking on step data") {
    SynthConfig cfg;
    cfg.n = 2000;
    cfg.d = 1;
    cfg.num_treatments = 1;
    cfg.noise_sd = 0.2;
    ResponseSpec control;
    control.intercept = 1.0;
    ResponseSpec treated;
    treated.intercept = 3.0;
    treated.steps.push_back({0, 0.5, -2.0});
    cfg.response = {control, treated};
    cfg.seed = 91;
    auto [ds, gt] = generate(cfg);

    std::vector<double> truth, noise;
    Rng rng(4242);
    for (const auto& rec : ds.records) {
        truth.push_back(true_cate(gt, 1, rec.x));
        noise.push_back(rng.normal());
    }
    const double auc_truth = uplift_auc(cumulative_uplift_curve(ds, ranking_scores(ds, truth), 1));
    const double auc_rand = uplift_auc(cumulative_uplift_curve(ds, ranking_scores(ds, noise), 1));
    CHECK(auc_truth > auc_rand);
}

TEST_CASE("random_ranking_auc_sd is positive and reproducible") {
    auto [ds, gt] = [] {
        SynthConfig cfg;
        cfg.n = 300;
        cfg.d = 1;
        cfg.num_treatments = 1;
        cfg.noise_sd = 0.5;
        ResponseSpec r0, r1;
        r0.intercept = 0.0;
        r1.intercept = 0.3;
        cfg.response = {r0, r1};
        cfg.seed = 8;
        return generate(cfg);
    }();
    const double sd1 = random_ranking_auc_sd(ds, 1, 50, 99);
    const double sd2 = random_ranking_auc_sd(ds, 1, 50, 99);
    CHECK(sd1 == sd2);
    CHECK(sd1 > 0.0);
}

TEST_CASE("curve csv export") {
    auto ds = test_helpers::binary_dataset({{"c1", {0.0}, 1, 1.0, {}}, {"c2", {0.0}, 0, 0.0, {}}});
    UpliftCurve curve = cumulative_uplift_curve(ds, ranking_scores(ds, {2, 1}), 1);
    test_helpers::TempDir dir("curvecsv");
    write_curve_csv(curve, dir.path("curve.csv"));
    const std::string text = test_helpers::read_file(dir.path("curve.csv"));
    CHECK(text == "rank,fraction,value,undefined_flag\n1,0.5,0,1\n2,1,1,0\n");
}

TEST_CASE("estimate alignment and arm index are validated") {
    auto ds = test_helpers::binary_dataset({{"c1", {0.0}, 1, 1.0, {}}, {"c2", {0.0}, 0, 0.0, {}}});
    UpliftEstimates est = ranking_scores(ds, {1, 2});
    CHECK_THROWS_AS(cumulative_uplift_curve(ds, est, 2), ArgumentError);
    UpliftEstimates wrong = UpliftEstimates::from_scores({"c2", "c1"}, {1, 2});
    CHECK_THROWS_AS(cumulative_uplift_curve(ds, wrong, 1), ArgumentError);
}

TEST_CASE("bucket_true_uplift partitions and aggregates") {
    SUBCASE("one bucket equals the global difference in means") {
        auto ds = test_helpers::binary_dataset({{"c1", {0.0}, 1, 1.0, {}},
                                                {"c2", {0.0}, 1, 0.0, {}},
                                                {"c3", {0.0}, 0, 1.0, {}},
                                                {"c4", {0.0}, 0, 0.0, {}}});
        auto buckets = bucket_true_uplift(ds, {0.1, 0.2, 0.3, 0.4}, 1);
        REQUIRE(buckets.size() == 1);
        CHECK(buckets[0].tau == doctest::Approx(0.5 - 0.5));
        CHECK(buckets[0].size == 4);
    }
    SUBCASE("hand-computed bucket value") {
        // treated Y = {1,1,0}, control Y = {0,1}: tau = 2/3 - 1/2 = 1/6
        auto ds = test_helpers::binary_dataset({{"c1", {0.0}, 1, 1.0, {}},
                                                {"c2", {0.0}, 1, 1.0, {}},
                                                {"c3", {0.0}, 1, 0.0, {}},
                                                {"c4", {0.0}, 0, 0.0, {}},
                                                {"c5", {0.0}, 0, 1.0, {}}});
        auto buckets = bucket_true_uplift(ds, {1, 2, 3, 4, 5}, 1);
        REQUIRE(buckets.size() == 1);
        CHECK(buckets[0].tau == doctest::Approx(2.0 / 3.0 - 0.5));
        CHECK(buckets[0].n_treated == 3);
        CHECK(buckets[0].n_control == 2);
    }
    SUBCASE("a bucket with one arm only is flagged undefined") {
        auto ds = test_helpers::binary_dataset({{"c1", {0.0}, 0, 1.0, {}},
                                                {"c2", {0.0}, 0, 0.0, {}},
                                                {"c3", {0.0}, 1, 1.0, {}},
                                                {"c4", {0.0}, 0, 0.0, {}}});
        // scores put the two pure-control records in the first bucket
        auto buckets = bucket_true_uplift(ds, {0.0, 0.1, 0.8, 0.9}, 2);
        REQUIRE(buckets.size() == 2);
        CHECK(buckets[0].undefined);
        CHECK(!buckets[1].undefined);
    }
    SUBCASE("remainder goes one-per-bucket from the front") {
        std::vector<Row> rows;
        std::vector<double> scores;
        for (int i = 0; i < 7; ++i) {
            rows.push_back({"c" + std::to_string(i), {0.0}, i % 2, 0.0, {}});
            scores.push_back(static_cast<double>(i));
        }
        auto ds = test_helpers::binary_dataset(rows);
        auto buckets = bucket_true_uplift(ds, scores, 3);
        REQUIRE(buckets.size() == 3);
        CHECK(buckets[0].size == 3);
        CHECK(buckets[1].size == 2);
        CHECK(buckets[2].size == 2);
        // sorted ascending by score: bucket ranges must be increasing
        CHECK(buckets[0].score_max <= buckets[1].score_min);
        CHECK(buckets[1].score_max <= buckets[2].score_min);
    }
    SUBCASE("more buckets than customers is rejected") {
        auto ds = test_helpers::binary_dataset({{"c1", {0.0}, 0, 1.0, {}}});
        CHECK_THROWS_AS(bucket_true_uplift(ds, {0.5}, 2), ArgumentError);
    }
}
