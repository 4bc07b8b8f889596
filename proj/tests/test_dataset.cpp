#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ozonecast/dataset.hpp"
#include "ozonecast/errors.hpp"
#include "ozonecast/rng.hpp"

using namespace ozonecast;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
    const fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

CsvSchema tiny_schema() {
    CsvSchema schema;
    schema.numeric = {"t_max"};
    schema.categorical.clear();
    return schema;
}

RawRecord record_with_intervals(const std::vector<std::pair<double, std::string>>& intervals) {
    RawRecord rec;
    rec.categorical.push_back({"cloud", intervals});
    return rec;
}

}  // namespace

TEST_CASE("load_csv parses a well-formed file") {
    const auto path = write_temp("ok.csv",
                                 "date,o3_peak,o3_noon,t_max\n"
                                 "2003-04-01,120,90,21\n"
                                 "2003-04-02,130,95,22\n"
                                 "2003-04-03,125,97,23\n");
    LoadReport report;
    const auto records = load_csv(path, tiny_schema(), &report);
    CHECK(records.size() == 3);
    CHECK(report.skipped.empty());
    CHECK(records[0].date == "2003-04-01");
    CHECK(records[2].target_peak == doctest::Approx(125.0));
    CHECK(records[1].numeric[0] == doctest::Approx(22.0));
}

TEST_CASE("load_csv skips rows with a blank target") {
    const auto path = write_temp("blank.csv",
                                 "date,o3_peak,o3_noon,t_max\n"
                                 "2003-04-01,120,90,21\n"
                                 "2003-04-02,,95,22\n"
                                 "2003-04-03,125,97,23\n");
    LoadReport report;
    const auto records = load_csv(path, tiny_schema(), &report);
    CHECK(records.size() == 2);
    REQUIRE(report.skipped.size() == 1);
    CHECK(report.skipped[0].row == 2);
}

TEST_CASE("load_csv rejects a header missing a declared column") {
    const auto path = write_temp("nohdr.csv",
                                 "date,o3_peak,o3_noon\n"
                                 "2003-04-01,120,90\n");
    CHECK_THROWS_AS(load_csv(path, tiny_schema(), nullptr), MalformedHeader);
}

TEST_CASE("load_csv remaining error cases") {
    const auto empty = write_temp("empty.csv", "date,o3_peak,o3_noon,t_max\n");
    CHECK_THROWS_AS(load_csv(empty, tiny_schema(), nullptr), EmptyFile);
    const auto bad = write_temp("bad.csv",
                                "date,o3_peak,o3_noon,t_max\n"
                                "2003-04-01,abc,90,21\n");
    CHECK_THROWS_AS(load_csv(bad, tiny_schema(), nullptr), UnparsableNumber);
}

TEST_CASE("class frequencies: single-class day") {
    const auto rec = record_with_intervals({{24.0, "clear"}});
    const std::vector<std::string> classes = {"clear", "c2", "c3", "c4", "c5", "c6"};
    const auto f = encode_class_frequencies(rec, "cloud", classes);
    CHECK(f == std::vector<double>{1, 0, 0, 0, 0, 0});
}

TEST_CASE("class frequencies: half/half day") {
    const auto rec = record_with_intervals({{12.0, "c1"}, {12.0, "c2"}});
    const auto f = encode_class_frequencies(rec, "cloud", {"c1", "c2", "c3"});
    CHECK(f[0] == doctest::Approx(0.5));
    CHECK(f[1] == doctest::Approx(0.5));
    CHECK(f[2] == doctest::Approx(0.0));
}

TEST_CASE("class frequencies: eight 3-hour intervals") {
    const auto rec = record_with_intervals({{3, "c1"},
                                            {3, "c1"},
                                            {3, "c1"},
                                            {3, "c2"},
                                            {3, "c2"},
                                            {3, "c2"},
                                            {3, "c3"},
                                            {3, "c3"}});
    const auto f = encode_class_frequencies(rec, "cloud", {"c1", "c2", "c3"});
    CHECK(f[0] == doctest::Approx(0.375));
    CHECK(f[1] == doctest::Approx(0.375));
    CHECK(f[2] == doctest::Approx(0.25));
}

TEST_CASE("class frequencies: unknown label and sum-to-one property") {
    const auto rec = record_with_intervals({{24.0, "mystery"}});
    CHECK_THROWS_AS(encode_class_frequencies(rec, "cloud", {"c1", "c2"}), UnknownClassLabel);

    Rng rng(5);
    const std::vector<std::string> classes = {"a", "b", "c", "d"};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::pair<double, std::string>> intervals;
        const int k = 1 + static_cast<int>(rng.below(8));
        for (int i = 0; i < k; ++i)
            intervals.emplace_back(24.0 / k, classes[rng.below(classes.size())]);
        const auto f = encode_class_frequencies(record_with_intervals(intervals), "cloud", classes);
        double sum = 0.0;
        for (const double v : f) sum += v;
        CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("normalize_fit standardizes and round-trips") {
    FeatureTable t;
    t.columns = {"a"};
    t.x = Matrix(3, 1);
    t.x(0, 0) = 1.0;
    t.x(1, 0) = 2.0;
    t.x(2, 0) = 3.0;
    t.targets = {0, 0, 0};
    const auto stats = normalize_fit(t);
    CHECK(t.x(0, 0) == doctest::Approx(-1.0));
    CHECK(t.x(1, 0) == doctest::Approx(0.0));
    CHECK(t.x(2, 0) == doctest::Approx(1.0));
    CHECK(stats.columns[0].first == doctest::Approx(2.0));
    CHECK(stats.columns[0].second == doctest::Approx(1.0));  // n-1 denominator

    invert_scaling(t);
    CHECK(t.x(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(t.x(2, 0) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("normalize_fit is idempotent on standardized data") {
    Rng rng(9);
    FeatureTable t;
    t.columns = {"a", "b"};
    t.x = Matrix(40, 2);
    for (std::size_t r = 0; r < 40; ++r)
        for (std::size_t c = 0; c < 2; ++c) t.x(r, c) = rng.normal(5.0, 3.0);
    t.targets.assign(40, 0.0);
    normalize_fit(t);
    FeatureTable again = t;
    normalize_fit(again);
    for (std::size_t r = 0; r < 40; ++r)
        for (std::size_t c = 0; c < 2; ++c)
            CHECK(again.x(r, c) == doctest::Approx(t.x(r, c)).epsilon(1e-9));
}

TEST_CASE("normalize_fit error cases") {
    FeatureTable constant;
    constant.columns = {"c"};
    constant.x = Matrix(3, 1, 5.0);
    constant.targets = {0, 0, 0};
    CHECK_THROWS_AS(normalize_fit(constant), ConstantColumn);

    FeatureTable tiny;
    tiny.columns = {"c"};
    tiny.x = Matrix(1, 1, 5.0);
    tiny.targets = {0};
    CHECK_THROWS_AS(normalize_fit(tiny), TooFewRows);
}

TEST_CASE("train statistics apply to validation rows as a pure affine map") {
    FeatureTable train;
    train.columns = {"a"};
    train.x = Matrix(4, 1);
    for (int r = 0; r < 4; ++r) train.x(r, 0) = r * 2.0;  // mean 3, std ~2.58
    train.targets.assign(4, 0.0);
    const auto stats = normalize_fit(train);

    FeatureTable val;
    val.columns = {"a"};
    val.x = Matrix(2, 1);
    val.x(0, 0) = 3.0;
    val.x(1, 0) = 10.0;
    val.targets.assign(2, 0.0);
    apply_scaling(val, stats);
    const auto [m, s] = stats.columns[0];
    CHECK(val.x(0, 0) == doctest::Approx((3.0 - m) / s));
    CHECK(val.x(1, 0) == doctest::Approx((10.0 - m) / s));
}

TEST_CASE("balance reproduces the reference set sizes") {
    BalanceSpec spec;
    spec.threshold = 180.0;
    spec.a = 1.0;
    spec.b = 0.0125;
    spec.multiplier = 1;
    // r(180) = exp(2.25) = 9.4877, times 5 exceedances: 47.44 -> 47 kept
    CHECK(balance_ratio(spec) == doctest::Approx(9.48773583635853).epsilon(1e-12));
    CHECK(balance_keep_below(spec, 5, 1000) == 47);
    spec.multiplier = 2;
    CHECK(balance_keep_below(spec, 5, 1000) == 94);  // twice the base set

    std::vector<double> targets(613, 100.0);
    for (int i = 0; i < 5; ++i) targets[i * 100] = 200.0;
    spec.multiplier = 1;
    const auto kept1 = balance_indices(targets, spec, 42);
    CHECK(kept1.size() == 52);
    spec.multiplier = 2;
    const auto kept2 = balance_indices(targets, spec, 42);
    CHECK(kept2.size() == 99);
}

TEST_CASE("balance with zero threshold keeps r(0)*Na records") {
    BalanceSpec spec;
    spec.threshold = 0.0;
    spec.a = 1.0;
    spec.b = 0.0125;
    spec.multiplier = 1;
    // 6 records above 0, plenty of zeros below: keep exactly 6 of them
    std::vector<double> targets = {1, 2, 3, 4, 5, 6, 0, 0, 0, 0, 0, 0, 0, 0};
    const auto kept = balance_indices(targets, spec, 1);
    CHECK(kept.size() == 12);
}

TEST_CASE("balance never drops an exceedance and is deterministic") {
    Rng rng(77);
    std::vector<double> targets(300);
    for (auto& t : targets) t = rng.uniform(0.0, 220.0);
    BalanceSpec spec;
    spec.threshold = 180.0;

    const auto a = balance_indices(targets, spec, 9);
    const auto b = balance_indices(targets, spec, 9);
    CHECK(a == b);

    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] > spec.threshold)
            CHECK(std::find(a.begin(), a.end(), i) != a.end());
    }

    std::vector<double> below(5, 10.0);
    CHECK_THROWS_AS(balance_indices(below, spec, 1), NoExceedances);
}

TEST_CASE("balance over records keeps every exceedance record") {
    std::vector<RawRecord> records(40);
    for (int i = 0; i < 40; ++i) {
        records[i].date = "d" + std::to_string(i);
        records[i].has_target = true;
        records[i].target_peak = i % 8 == 0 ? 190.0 : 100.0;
    }
    BalanceSpec spec;
    spec.threshold = 180.0;
    const auto balanced = balance(records, spec, 5);
    std::size_t above = 0;
    for (const auto& r : balanced) above += r.target_peak > 180.0 ? 1 : 0;
    CHECK(above == 5);
    CHECK(balanced.size() == 5 + balance_keep_below(spec, 5, 35));
    // order of retained records follows the input order
    for (std::size_t i = 1; i < balanced.size(); ++i) {
        const int a = std::stoi(balanced[i - 1].date.substr(1));
        const int b = std::stoi(balanced[i].date.substr(1));
        CHECK(a < b);
    }
}

TEST_CASE("kept below-count is non-decreasing in the threshold") {
    BalanceSpec spec;
    spec.a = 1.0;
    spec.b = 0.0125;
    spec.multiplier = 1;
    std::size_t prev = 0;
    for (double theta = 0.0; theta <= 200.0; theta += 5.0) {
        spec.threshold = theta;
        const std::size_t keep = balance_keep_below(spec, 5, 100000);
        CHECK(keep >= prev);
        prev = keep;
    }
}

TEST_CASE("anova on identical groups gives F = 0") {
    const std::vector<double> g = {1, 2, 3};
    const auto res = anova_check(g, g);
    CHECK(res.f == doctest::Approx(0.0));
    CHECK(res.p_value == doctest::Approx(1.0));
}

TEST_CASE("anova worked example") {
    const std::vector<double> a = {1, 2, 3}, b = {4, 5, 6};
    const auto res = anova_check(a, b);
    CHECK(res.f == doctest::Approx(13.5));
    CHECK(res.df2 == 4);
    // P(F_{1,4} > 13.5), independent high-precision reference
    CHECK(res.p_value == doctest::Approx(0.021311641128757).epsilon(1e-9));
}

TEST_CASE("anova group too small") {
    const std::vector<double> a = {1.0}, b = {4, 5, 6};
    CHECK_THROWS_AS(anova_check(a, b), GroupTooSmall);
}

TEST_CASE("build_features_for keeps constant columns for forecast rows") {
    CsvSchema schema;
    schema.numeric = {"t_max", "wind_speed"};
    std::vector<RawRecord> records(3);
    for (int r = 0; r < 3; ++r) {
        records[r].date = "2004-06-0" + std::to_string(r + 1);
        records[r].has_target = false;
        records[r].ozone_noon = 90.0 + r;
        records[r].numeric = {25.0 + r, 2.0};  // wind constant across the file
    }
    const std::vector<std::string> columns = {"o3_noon", "t_max", "wind_speed"};
    const auto table = build_features_for(records, schema, columns);
    CHECK(table.cols() == 3);
    CHECK(table.x(0, 2) == doctest::Approx(2.0));
    CHECK_THROWS_AS(build_features_for(records, schema, {"o3_noon", "missing_col"}), ConfigError);
}

TEST_CASE("build_features drops the reference class and constant columns") {
    CsvSchema schema;
    schema.numeric = {"t_max"};
    CategoricalSpec cat;
    cat.name = "cloud";
    cat.classes = {"c1", "c2", "c3"};
    cat.intervals = 2;
    schema.categorical = {cat};

    std::vector<RawRecord> records(3);
    for (int r = 0; r < 3; ++r) {
        records[r].date = "2003-04-0" + std::to_string(r + 1);
        records[r].has_target = true;
        records[r].target_peak = 100.0 + r;
        records[r].ozone_noon = 80.0 + r;
        records[r].numeric = {20.0 + r};
        records[r].categorical.push_back(
            {"cloud", {{12.0, r == 0 ? "c1" : "c2"}, {12.0, "c2"}}});
    }
    LoadReport report;
    const auto table = build_features(records, schema, &report);
    // columns: o3_noon, t_max, cloud:c1, cloud:c2 (c3 dropped as reference;
    // none constant here)
    CHECK(table.columns.size() == 4);
    CHECK(table.columns[2] == "cloud:c1");
    CHECK(table.x(0, 2) == doctest::Approx(0.5));
    CHECK(table.x(1, 2) == doctest::Approx(0.0));
}
