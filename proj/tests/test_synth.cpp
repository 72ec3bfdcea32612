#include "doctest.h"

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "uplift/synth.hpp"

using namespace uplift;

namespace {

ResponseSpec linear_response(double intercept, std::vector<double> coef = {}) {
    ResponseSpec spec;
    spec.intercept = intercept;
    spec.linear = std::move(coef);
    return spec;
}

/// mean = 2 * 1{x1 < 0.5}, written as intercept 2 with a -2 step at 0.5.
ResponseSpec low_side_step(double value, double threshold) {
    ResponseSpec spec;
    spec.intercept = value;
    spec.steps.push_back({0, threshold, -value});
    return spec;
}

SynthConfig basic_config(std::size_t n, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n = n;
    cfg.d = 1;
    cfg.num_treatments = 1;
    cfg.noise_sd = 0.0;
    cfg.response = {linear_response(0.0, {1.0}), linear_response(1.0, {1.0})};
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("generate is deterministic for a fixed seed") {
    SynthConfig cfg = basic_config(1000, 3);
    cfg.noise_sd = 0.25;
    auto [ds1, gt1] = generate(cfg);
    auto [ds2, gt2] = generate(cfg);
    CHECK(ds1 == ds2);

    test_helpers::TempDir dir("synthdet");
    write_experiment(ds1, dir.path("a.csv"));
    write_experiment(ds2, dir.path("b.csv"));
    CHECK(test_helpers::read_file(dir.path("a.csv")) == test_helpers::read_file(dir.path("b.csv")));

    auto [ds3, gt3] = generate(basic_config(1000, 4));
    CHECK(!(ds3 == ds1));
}

TEST_CASE("zero noise makes outcomes equal their structural means") {
    auto [ds, gt] = generate(basic_config(500, 11));
    for (const auto& rec : ds.records) {
        CHECK(rec.y == gt.mean_outcome(rec.t, rec.x));
    }
}

TEST_CASE("arm counts follow the propensities") {
    // Binomial(10000, 0.5): sd = 50, so a 3-sigma band is +-150.
    auto [ds, gt] = generate(basic_config(10000, 22));
    const double count0 = static_cast<double>(ds.arm_counts()[0]);
    CHECK(count0 > 5000.0 - 150.0);
    CHECK(count0 < 5000.0 + 150.0);
}

TEST_CASE("binary outcomes are 0/1 with clipped means") {
    SynthConfig cfg = basic_config(300, 5);
    cfg.outcome_kind = OutcomeKind::Binary;
    cfg.response = {linear_response(0.2, {0.5}), linear_response(1.4)};  // arm 1 clips to 1
    auto [ds, gt] = generate(cfg);
    for (const auto& rec : ds.records) {
        CHECK((rec.y == 0.0 || rec.y == 1.0));
        if (rec.t == 1) CHECK(rec.y == 1.0);  // clipped mean 1 means certain retention
    }
    CHECK(gt.mean_outcome(1, {0.3}) == 1.0);
}

TEST_CASE("true_cate matches the structural difference") {
    SUBCASE("identical responses give zero everywhere") {
        SynthConfig cfg = basic_config(10, 1);
        cfg.response = {linear_response(0.7, {0.3}), linear_response(0.7, {0.3})};
        GroundTruth gt{cfg};
        for (double x : {0.0, 0.25, 0.5, 0.99}) CHECK(true_cate(gt, 1, {x}) == 0.0);
    }
    SUBCASE("unit offset gives one everywhere") {
        GroundTruth gt{basic_config(10, 1)};
        for (double x : {0.0, 0.4, 1.0}) {
            CHECK(true_cate(gt, 1, {x}) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("piecewise response evaluates the step") {
        SynthConfig cfg = basic_config(10, 1);
        cfg.response = {linear_response(0.0), low_side_step(2.0, 0.5)};
        GroundTruth gt{cfg};
        CHECK(true_cate(gt, 1, {0.3}) == 2.0);
        CHECK(true_cate(gt, 1, {0.7}) == 0.0);
    }
    SUBCASE("control arm is rejected") {
        GroundTruth gt{basic_config(10, 1)};
        CHECK_THROWS_AS(true_cate(gt, 0, {0.5}), ArgumentError);
    }
}

TEST_CASE("true_policy_value averages structural means under the assignment") {
    SynthConfig cfg = basic_config(2, 1);
    // arm 1 means at the two covariates: 3 and 5
    cfg.response = {linear_response(0.0, {1.0}), linear_response(1.0, {10.0})};
    auto [ds, gt] = generate(cfg);
    ds.records[0].x = {0.2};  // mean1 = 3
    ds.records[1].x = {0.4};  // mean1 = 5

    Policy treat_all = Policy::constant(ds.ids(), 1);
    CHECK(true_policy_value(gt, ds, treat_all, "y") == doctest::Approx(4.0));

    Policy all_control = Policy::constant(ds.ids(), 0);
    const double expected = (0.2 + 0.4) / 2.0;
    CHECK(true_policy_value(gt, ds, all_control, "y") == doctest::Approx(expected));
}

TEST_CASE("argmax assignment dominates every enumerated policy") {
    SynthConfig cfg = basic_config(6, 17);
    cfg.response = {linear_response(0.3, {0.5}), low_side_step(1.0, 0.6)};
    auto [ds, gt] = generate(cfg);

    Policy argmax = Policy::constant(ds.ids(), 0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (gt.mean_outcome(1, ds.records[i].x) > gt.mean_outcome(0, ds.records[i].x)) {
            argmax.assignment[i] = 1;
        }
    }
    const double best = true_policy_value(gt, ds, argmax, "y");

    // brute force over all 2^6 assignments
    for (unsigned mask = 0; mask < (1u << ds.size()); ++mask) {
        Policy p = Policy::constant(ds.ids(), 0);
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (mask & (1u << i)) p.assignment[i] = 1;
        }
        CHECK(true_policy_value(gt, ds, p, "y") <= best + 1e-12);
    }
}

TEST_CASE("per-arm cell means converge to the structural mean") {
    SynthConfig cfg = basic_config(20000, 29);
    cfg.noise_sd = 0.3;
    cfg.response = {low_side_step(1.0, 0.5), low_side_step(3.0, 0.5)};
    auto [ds, gt] = generate(cfg);

    // cell: x in [0, 0.5); both responses are constant there
    for (int arm = 0; arm < 2; ++arm) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& rec : ds.records) {
            if (rec.t == arm && rec.x[0] < 0.5) {
                sum += rec.y;
                ++count;
            }
        }
        REQUIRE(count > 100);
        const double cell_mean = sum / static_cast<double>(count);
        const double expected = gt.mean_outcome(arm, {0.25});
        CHECK(std::abs(cell_mean - expected) <
              4.0 * cfg.noise_sd / std::sqrt(static_cast<double>(count)));
    }
}

TEST_CASE("true_cate equals the difference of single-customer policy values") {
    SynthConfig cfg = basic_config(1, 31);
    cfg.response = {linear_response(0.4, {0.2}), low_side_step(1.5, 0.3)};
    auto [ds, gt] = generate(cfg);
    Policy treat = Policy::constant(ds.ids(), 1);
    Policy control = Policy::constant(ds.ids(), 0);
    const double diff =
        true_policy_value(gt, ds, treat, "y") - true_policy_value(gt, ds, control, "y");
    CHECK(true_cate(gt, 1, ds.records[0].x) == diff);
}

TEST_CASE("aux outcomes carry their own structural functions") {
    SynthConfig cfg = basic_config(200, 41);
    AuxSpec sales;
    sales.name = "sales";
    sales.response = {linear_response(100.0), linear_response(102.0)};
    sales.noise_sd = 0.0;
    cfg.aux = {sales};
    auto [ds, gt] = generate(cfg);
    CHECK(ds.aux_names == std::vector<std::string>{"sales"});
    for (const auto& rec : ds.records) {
        CHECK(rec.aux[0] == (rec.t == 1 ? 102.0 : 100.0));
    }
    CHECK(gt.mean_aux("sales", 1, {0.5}) == 102.0);
    CHECK_THROWS_AS(gt.mean_aux("nope", 1, {0.5}), ArgumentError);
}

TEST_CASE("synth config json round trip") {
    SynthConfig cfg = basic_config(123, 9);
    cfg.outcome_kind = OutcomeKind::Binary;
    cfg.labels = {"p1", "p2"};
    cfg.propensities = {0.4, 0.6};
    cfg.response[1].steps.push_back({0, 0.25, -0.5});
    LogisticTerm lt;
    lt.scale = 0.8;
    lt.intercept = -1.0;
    lt.coef = {2.0};
    cfg.response[0].logistic = lt;
    AuxSpec completed;
    completed.name = "completed";
    completed.kind = OutcomeKind::Binary;
    completed.response = {linear_response(0.3), linear_response(0.6)};
    cfg.aux = {completed};

    SynthConfig back = synth_config_from_json_text(synth_config_to_json_text(cfg));
    auto [ds1, gt1] = generate(cfg);
    auto [ds2, gt2] = generate(back);
    CHECK(ds1 == ds2);
}

TEST_CASE("config validation rejects bad shapes") {
    SynthConfig cfg = basic_config(0, 1);
    CHECK_THROWS_AS(cfg.check(), ConfigError);
    cfg = basic_config(10, 1);
    cfg.response.pop_back();
    CHECK_THROWS_AS(cfg.check(), ConfigError);
    cfg = basic_config(10, 1);
    cfg.response[0].linear = {1.0, 2.0};  // d is 1
    CHECK_THROWS_AS(cfg.check(), ConfigError);
    cfg = basic_config(10, 1);
    cfg.noise_sd = -0.1;
    CHECK_THROWS_AS(cfg.check(), ConfigError);
}
