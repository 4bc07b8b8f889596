#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ozonecast/linalg.hpp"

namespace ozonecast {

// --- CSV schema -------------------------------------------------------

// A categorical weather parameter reported for a fixed number of equal
// intervals per day (columns "<name>@0" .. "<name>@intervals-1").
struct CategoricalSpec {
    std::string name;
    std::vector<std::string> classes;  // ordered label set
    int intervals = 8;
};

struct CsvSchema {
    std::string date = "date";
    std::string target = "o3_peak";
    std::string persistence = "o3_noon";  // ozone at 12:00 on D-day
    std::vector<std::string> numeric;
    std::vector<CategoricalSpec> categorical;
};

// --- raw records ------------------------------------------------------

struct CategoricalObservation {
    std::string parameter;
    // (hours, class label) pairs tiling the day
    std::vector<std::pair<double, std::string>> intervals;
};

struct RawRecord {
    std::string date;
    double target_peak = 0.0;
    bool has_target = false;
    double ozone_noon = 0.0;
    std::vector<double> numeric;  // aligned with CsvSchema::numeric
    std::vector<CategoricalObservation> categorical;
};

struct LoadReport {
    struct Skip {
        std::size_t row;  // 1-based data row number
        std::string reason;
    };
    std::vector<Skip> skipped;
    std::size_t parsed = 0;
    std::vector<std::string> notes;
    std::string to_text() const;
};

// Parses one record per data row; rows with missing/blank cells are skipped
// and reported, never imputed. require_target=false admits rows without a
// target value (forecast inputs).
std::vector<RawRecord> load_csv(const std::filesystem::path& path, const CsvSchema& schema,
                                LoadReport* report = nullptr, bool require_target = true);

// Hourly frequency of each class over the day; one fraction per class, in
// class-set order, summing to 1.
std::vector<double> encode_class_frequencies(const RawRecord& record, const std::string& parameter,
                                             const std::vector<std::string>& classes);

// --- feature table ----------------------------------------------------

enum class Role { train, validation };

enum class ScalingKind { zscore, minmax };

struct Scaling {
    ScalingKind kind = ScalingKind::zscore;
    // zscore: (mean, std); minmax: (min, max)
    std::vector<std::pair<double, double>> columns;
};

struct FeatureTable {
    std::vector<std::string> columns;
    Matrix x;  // rows x columns
    std::vector<double> targets;
    std::vector<std::string> dates;
    Role role = Role::train;
    bool scaled = false;
    Scaling scaling;

    std::size_t rows() const { return x.rows(); }
    std::size_t cols() const { return x.cols(); }
    FeatureTable subset(std::span<const std::size_t> rows) const;
};

// Standardizes every column in place ((x - mean) / std, sample std with the
// n-1 denominator) and records the statistics. Train rows only; apply the
// returned stats to validation rows with apply_scaling.
Scaling normalize_fit(FeatureTable& table);

// Min-max scaling to [0, 1], used by the classifier input path.
Scaling minmax_fit(FeatureTable& table);

void apply_scaling(FeatureTable& table, const Scaling& scaling);
void invert_scaling(FeatureTable& table);

// Builds the predictor table from raw records: persistence column, numeric
// columns, then class-frequency columns (the last class of each parameter is
// dropped as the reference class; frequencies sum to 1 and would otherwise
// be collinear with the intercept). Constant columns are dropped and noted
// in the report.
FeatureTable build_features(const std::vector<RawRecord>& records, const CsvSchema& schema,
                            LoadReport* report = nullptr);

// Re-builds a feature table for new rows restricted to a stored column list
// (forecast path). Throws ConfigError naming any column that cannot be built.
FeatureTable build_features_for(const std::vector<RawRecord>& records, const CsvSchema& schema,
                                const std::vector<std::string>& columns);

// --- pattern balancing ------------------------------------------------

struct BalanceSpec {
    double threshold = 180.0;  // µg m⁻³
    double a = 1.0;
    double b = 0.0125;  // 1/(µg m⁻³)
    int multiplier = 1;
};

// r(θ) = a·exp(b·θ)
double balance_ratio(const BalanceSpec& spec);

// Number of below-threshold records kept: min(n_below, multiplier *
// round_half_even(r(θ) * n_above)).
std::size_t balance_keep_below(const BalanceSpec& spec, std::size_t n_above, std::size_t n_below);

// Kept row indices (sorted ascending): all rows with target > θ plus a
// seeded uniform sample of the rest. Deterministic for a fixed seed.
std::vector<std::size_t> balance_indices(std::span<const double> targets, const BalanceSpec& spec,
                                         std::uint64_t seed);

std::vector<RawRecord> balance(const std::vector<RawRecord>& records, const BalanceSpec& spec,
                               std::uint64_t seed);

// --- ANOVA ------------------------------------------------------------

struct AnovaResult {
    double f = 0.0;
    double p_value = 1.0;
    std::size_t df1 = 1;
    std::size_t df2 = 0;
};

// One-way ANOVA between two groups, df = (1, n_a + n_b - 2).
AnovaResult anova_check(std::span<const double> group_a, std::span<const double> group_b);

// Sample mean / sample std (n-1 denominator) helpers used across modules.
double mean_of(std::span<const double> v);
double sample_std(std::span<const double> v);

}  // namespace ozonecast
