#include "doctest.h"

#include <cmath>
#include <cstdint>

#include "helpers.hpp"
#include "uplift/csv.hpp"
#include "uplift/dataset.hpp"
#include "uplift/error.hpp"
#include "uplift/rng.hpp"

using namespace uplift;
using test_helpers::Row;
using test_helpers::TempDir;

namespace {

CsvSchema binary_schema() {
    CsvSchema schema;
    schema.treatments = TreatmentSet({"ctrl", "msg"});
    return schema;
}

}  // namespace

TEST_CASE("treatment set invariants") {
    CHECK_THROWS_AS(TreatmentSet({"only"}), ArgumentError);
    CHECK_THROWS_AS(TreatmentSet({"a", "a"}), ArgumentError);
    CHECK_THROWS_AS(TreatmentSet({"a", "b"}, {0.5, 0.6}), ArgumentError);
    CHECK_THROWS_AS(TreatmentSet({"a", "b"}, {1.0, 0.0}), ArgumentError);
    TreatmentSet ts({"a", "b", "c"});
    CHECK(ts.num_treatments() == 2);
    CHECK(ts.propensities[0] == doctest::Approx(1.0 / 3.0));
    CHECK(ts.index_of("c") == 2);
    CHECK(ts.index_of("zzz") == -1);
}

TEST_CASE("load_experiment parses a 3-row file") {
    TempDir dir("load");
    test_helpers::write_file(dir.path("d.csv"),
                             "id,f1,treatment,outcome\n"
                             "c1,0.1,ctrl,1\n"
                             "c2,0.5,msg,0\n"
                             "c3,0.9,msg,1\n");
    ExperimentDataset ds = load_experiment(dir.path("d.csv"), binary_schema());
    CHECK(ds.size() == 3);
    CHECK(ds.dim() == 1);
    CHECK(ds.treatments.num_arms() == 2);
    CHECK(ds.feature_names == std::vector<std::string>{"f1"});
    CHECK(ds.records[0].id == "c1");
    CHECK(ds.records[1].t == 1);
    CHECK(ds.records[2].y == 1.0);
}

TEST_CASE("load_experiment rejects unknown treatment labels with the row number") {
    TempDir dir("badlabel");
    test_helpers::write_file(dir.path("d.csv"),
                             "id,f1,treatment,outcome\n"
                             "c1,0.1,ctrl,1\n"
                             "c2,0.5,bogus,0\n");
    CHECK_THROWS_WITH_AS(load_experiment(dir.path("d.csv"), binary_schema()),
                         doctest::Contains("row 2"), DataError);
}

TEST_CASE("load_experiment accepts an empty file with a valid header") {
    TempDir dir("empty");
    test_helpers::write_file(dir.path("d.csv"), "id,f1,treatment,outcome\n");
    ExperimentDataset ds = load_experiment(dir.path("d.csv"), binary_schema());
    CHECK(ds.size() == 0);
    ValidationReport report = validate(ds);
    CHECK(!report.empty());
    CHECK(!report.has_errors());  // empty arms are warnings
}

TEST_CASE("load_experiment names the missing column") {
    TempDir dir("missing");
    test_helpers::write_file(dir.path("d.csv"), "id,f1,outcome\nc1,0.1,1\n");
    CHECK_THROWS_WITH_AS(load_experiment(dir.path("d.csv"), binary_schema()),
                         doctest::Contains("treatment"), SchemaError);
}

TEST_CASE("load_experiment reports the row of a non-numeric covariate") {
    TempDir dir("nonnum");
    test_helpers::write_file(dir.path("d.csv"),
                             "id,f1,treatment,outcome\n"
                             "c1,0.1,ctrl,1\n"
                             "c2,oops,msg,0\n");
    CHECK_THROWS_WITH_AS(load_experiment(dir.path("d.csv"), binary_schema()),
                         doctest::Contains("row 2"), ParseError);
}

TEST_CASE("aux columns are picked up by prefix") {
    TempDir dir("aux");
    test_helpers::write_file(dir.path("d.csv"),
                             "id,f1,treatment,outcome,aux:sales\n"
                             "c1,0.1,ctrl,1,100.5\n");
    ExperimentDataset ds = load_experiment(dir.path("d.csv"), binary_schema());
    CHECK(ds.aux_names == std::vector<std::string>{"sales"});
    CHECK(ds.records[0].aux[0] == 100.5);
}

TEST_CASE("write/load round trip is exact") {
    Rng rng(99);
    std::vector<Row> rows;
    for (int i = 0; i < 40; ++i) {
        Row row;
        row.id = "c" + std::to_string(i);
        row.x = {rng.uniform01(), rng.normal() * 1e-7, rng.normal() * 1e9};
        row.t = static_cast<int>(rng.bounded(2));
        row.y = rng.normal();
        row.aux = {rng.normal() * 123.456};
        rows.push_back(row);
    }
    ExperimentDataset ds = test_helpers::make_dataset({"ctrl", "msg"}, {0.3, 0.7}, rows, {"sales"});

    TempDir dir("roundtrip");
    write_experiment(ds, dir.path("d.csv"));
    CsvSchema schema;
    schema.treatments = ds.treatments;
    ExperimentDataset back = load_experiment(dir.path("d.csv"), schema);
    CHECK(back == ds);
}

TEST_CASE("validate flags duplicates, empty arms, constants and NaN") {
    SUBCASE("duplicate ids") {
        auto ds = test_helpers::binary_dataset({{"c1", {0.1}, 0, 1.0, {}}, {"c1", {0.2}, 1, 0.0, {}}});
        ValidationReport report = validate(ds);
        CHECK(report.has_errors());
        bool found = false;
        for (const auto& issue : report.issues) {
            if (issue.message.find("duplicate") != std::string::npos) found = true;
        }
        CHECK(found);
    }
    SUBCASE("empty arm warning") {
        auto ds = test_helpers::binary_dataset({{"c1", {0.1}, 0, 1.0, {}}, {"c2", {0.2}, 0, 0.0, {}}});
        ValidationReport report = validate(ds);
        CHECK(!report.has_errors());
        bool found = false;
        for (const auto& issue : report.issues) {
            if (issue.message.find("arm 1") != std::string::npos &&
                issue.message.find("empty") != std::string::npos) {
                found = true;
            }
        }
        CHECK(found);
    }
    SUBCASE("clean dataset gives an empty report") {
        auto ds = test_helpers::binary_dataset({{"c1", {0.1}, 0, 1.0, {}}, {"c2", {0.2}, 1, 0.0, {}}});
        CHECK(validate(ds).empty());
    }
    SUBCASE("NaN outcome is an error") {
        auto ds = test_helpers::binary_dataset(
            {{"c1", {0.1}, 0, std::nan(""), {}}, {"c2", {0.2}, 1, 0.0, {}}});
        CHECK(validate(ds).has_errors());
    }
    SUBCASE("constant covariate is a warning") {
        auto ds = test_helpers::binary_dataset({{"c1", {0.7}, 0, 1.0, {}}, {"c2", {0.7}, 1, 0.0, {}}});
        ValidationReport report = validate(ds);
        CHECK(!report.has_errors());
        CHECK(!report.empty());
    }
}

TEST_CASE("split is stratified, deterministic and validates the fraction") {
    std::vector<Row> rows;
    for (int i = 0; i < 100; ++i) {
        Row row;
        row.id = "c" + std::to_string(i);
        row.x = {static_cast<double>(i) / 100.0};
        row.t = i < 50 ? 0 : 1;
        row.y = 0.0;
        rows.push_back(row);
    }
    ExperimentDataset ds = test_helpers::binary_dataset(rows);

    auto [train, eval] = split(ds, 0.2, 7);
    CHECK(train.size() + eval.size() == 100);
    auto eval_counts = eval.arm_counts();
    CHECK(eval_counts[0] == 10);
    CHECK(eval_counts[1] == 10);

    auto [train2, eval2] = split(ds, 0.2, 7);
    CHECK(train2 == train);
    CHECK(eval2 == eval);

    auto [train3, eval3] = split(ds, 0.2, 8);
    CHECK(eval3.arm_counts()[0] == 10);  // same contract, different membership
    CHECK(!(eval3 == eval));

    CHECK_THROWS_AS(split(ds, 1.0, 7), ArgumentError);
    CHECK_THROWS_AS(split(ds, 0.0, 7), ArgumentError);
    ExperimentDataset empty;
    empty.treatments = ds.treatments;
    CHECK_THROWS_AS(split(empty, 0.5, 7), ArgumentError);
}

TEST_CASE("split eval share stays within one record of the target per arm") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Row> rows;
        const int n0 = 3 + static_cast<int>(rng.bounded(40));
        const int n1 = 3 + static_cast<int>(rng.bounded(40));
        for (int i = 0; i < n0 + n1; ++i) {
            rows.push_back({"c" + std::to_string(i), {rng.uniform01()}, i < n0 ? 0 : 1, 0.0, {}});
        }
        ExperimentDataset ds = test_helpers::binary_dataset(rows);
        const double fraction = 0.05 + 0.9 * rng.uniform01();
        auto [train, eval] = split(ds, fraction, static_cast<std::uint64_t>(trial));
        auto counts = eval.arm_counts();
        for (int arm = 0; arm < 2; ++arm) {
            const double target = std::floor(fraction * (arm == 0 ? n0 : n1));
            CHECK(std::abs(static_cast<double>(counts[static_cast<std::size_t>(arm)]) - target) <=
                  1.0);
        }
        CHECK(train.size() + eval.size() == static_cast<std::size_t>(n0 + n1));
    }
}

TEST_CASE("csv double formatting round-trips") {
    Rng rng(123);
    for (int i = 0; i < 200; ++i) {
        const double v = (rng.uniform01() - 0.5) * std::pow(10.0, static_cast<double>(rng.bounded(20)));
        double parsed = 0.0;
        CHECK(csv::parse_double(csv::format_double(v), parsed));
        CHECK(parsed == v);
    }
}
