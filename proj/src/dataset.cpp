#include "ozonecast/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "ozonecast/errors.hpp"
#include "ozonecast/rng.hpp"
#include "ozonecast/stats.hpp"

namespace ozonecast {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        return pos == s.size() && std::isfinite(out);
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

std::string LoadReport::to_text() const {
    std::ostringstream os;
    os << "parsed " << parsed << " records, skipped " << skipped.size() << " rows\n";
    for (const auto& s : skipped) os << "skip row " << s.row << ": " << s.reason << "\n";
    for (const auto& n : notes) os << "note: " << n << "\n";
    return os.str();
}

std::vector<RawRecord> load_csv(const std::filesystem::path& path, const CsvSchema& schema,
                                LoadReport* report, bool require_target) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");

    std::string header_line;
    if (!std::getline(in, header_line)) throw EmptyFile("empty file '" + path.string() + "'");
    const auto header = split_csv_line(header_line);

    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    const auto require = [&](const std::string& name) -> std::size_t {
        const auto it = col.find(name);
        if (it == col.end())
            throw MalformedHeader("header of '" + path.string() + "' is missing column '" + name + "'");
        return it->second;
    };

    const std::size_t date_idx = require(schema.date);
    const std::size_t target_idx = require(schema.target);
    const std::size_t noon_idx = require(schema.persistence);
    std::vector<std::size_t> numeric_idx;
    for (const auto& name : schema.numeric) numeric_idx.push_back(require(name));
    std::vector<std::vector<std::size_t>> cat_idx;
    for (const auto& cat : schema.categorical) {
        std::vector<std::size_t> idx;
        for (int k = 0; k < cat.intervals; ++k)
            idx.push_back(require(cat.name + "@" + std::to_string(k)));
        cat_idx.push_back(std::move(idx));
    }

    LoadReport local;
    LoadReport& rep = report ? *report : local;
    std::vector<RawRecord> records;
    std::string line;
    std::size_t row = 0;
    bool any_data_row = false;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++row;
        any_data_row = true;
        const auto cells = split_csv_line(line);
        const auto cell = [&](std::size_t i) -> std::string {
            return i < cells.size() ? cells[i] : std::string{};
        };

        RawRecord rec;
        rec.date = cell(date_idx);
        bool skip = false;
        const auto read_number = [&](std::size_t idx, const std::string& name, double& out) {
            const std::string s = cell(idx);
            if (s.empty()) {
                rep.skipped.push_back({row, "missing value in column '" + name + "'"});
                skip = true;
                return;
            }
            if (!parse_double(s, out)) throw UnparsableNumber(row, name);
        };

        const std::string target_cell = cell(target_idx);
        if (target_cell.empty()) {
            if (require_target) {
                rep.skipped.push_back({row, "missing value in column '" + schema.target + "'"});
                continue;
            }
            rec.has_target = false;
        } else {
            if (!parse_double(target_cell, rec.target_peak)) throw UnparsableNumber(row, schema.target);
            rec.has_target = true;
        }

        read_number(noon_idx, schema.persistence, rec.ozone_noon);
        rec.numeric.resize(schema.numeric.size());
        for (std::size_t i = 0; i < numeric_idx.size() && !skip; ++i)
            read_number(numeric_idx[i], schema.numeric[i], rec.numeric[i]);
        if (skip) continue;

        for (std::size_t c = 0; c < schema.categorical.size() && !skip; ++c) {
            const auto& spec = schema.categorical[c];
            CategoricalObservation obs;
            obs.parameter = spec.name;
            const double hours = 24.0 / spec.intervals;
            for (std::size_t k = 0; k < cat_idx[c].size(); ++k) {
                const std::string label = cell(cat_idx[c][k]);
                if (label.empty()) {
                    rep.skipped.push_back(
                        {row, "missing label in column '" + spec.name + "@" + std::to_string(k) + "'"});
                    skip = true;
                    break;
                }
                obs.intervals.emplace_back(hours, label);
            }
            if (!skip) rec.categorical.push_back(std::move(obs));
        }
        if (skip) continue;

        if (rec.has_target && rec.target_peak < 0.0)
            throw Error("negative target at row " + std::to_string(row));
        if (rec.ozone_noon < 0.0)
            throw Error("negative persistence value at row " + std::to_string(row));

        records.push_back(std::move(rec));
    }
    if (!any_data_row) throw EmptyFile("no data rows in '" + path.string() + "'");
    rep.parsed = records.size();
    return records;
}

std::vector<double> encode_class_frequencies(const RawRecord& record, const std::string& parameter,
                                             const std::vector<std::string>& classes) {
    const CategoricalObservation* obs = nullptr;
    for (const auto& o : record.categorical)
        if (o.parameter == parameter) obs = &o;
    if (!obs) throw Error("record has no categorical parameter '" + parameter + "'");

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < classes.size(); ++i) index[classes[i]] = i;

    std::vector<double> hours(classes.size(), 0.0);
    double total = 0.0;
    for (const auto& [h, label] : obs->intervals) {
        const auto it = index.find(label);
        if (it == index.end())
            throw UnknownClassLabel("unknown class label '" + label + "' for parameter '" + parameter + "'");
        hours[it->second] += h;
        total += h;
    }
    if (total <= 0.0) throw Error("parameter '" + parameter + "' covers no hours");
    for (auto& h : hours) h /= total;
    return hours;
}

FeatureTable FeatureTable::subset(std::span<const std::size_t> keep) const {
    FeatureTable out;
    out.columns = columns;
    out.role = role;
    out.scaled = scaled;
    out.scaling = scaling;
    out.x = Matrix(keep.size(), x.cols());
    out.targets.reserve(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        const std::size_t src = keep[r];
        for (std::size_t c = 0; c < x.cols(); ++c) out.x(r, c) = x(src, c);
        out.targets.push_back(targets.empty() ? 0.0 : targets[src]);
        if (!dates.empty()) out.dates.push_back(dates[src]);
    }
    if (targets.empty()) out.targets.clear();
    return out;
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

Scaling normalize_fit(FeatureTable& table) {
    if (table.rows() < 2) throw TooFewRows("normalize_fit needs at least 2 rows");
    Scaling scaling;
    scaling.kind = ScalingKind::zscore;
    for (std::size_t c = 0; c < table.cols(); ++c) {
        std::vector<double> col(table.rows());
        for (std::size_t r = 0; r < table.rows(); ++r) col[r] = table.x(r, c);
        const double m = mean_of(col);
        const double s = sample_std(col);
        if (s == 0.0) throw ConstantColumn(table.columns[c]);
        for (std::size_t r = 0; r < table.rows(); ++r) table.x(r, c) = (table.x(r, c) - m) / s;
        scaling.columns.emplace_back(m, s);
    }
    table.scaled = true;
    table.scaling = scaling;
    return scaling;
}

Scaling minmax_fit(FeatureTable& table) {
    if (table.rows() < 2) throw TooFewRows("minmax_fit needs at least 2 rows");
    Scaling scaling;
    scaling.kind = ScalingKind::minmax;
    for (std::size_t c = 0; c < table.cols(); ++c) {
        double lo = table.x(0, c), hi = table.x(0, c);
        for (std::size_t r = 1; r < table.rows(); ++r) {
            lo = std::min(lo, table.x(r, c));
            hi = std::max(hi, table.x(r, c));
        }
        if (hi == lo) throw ConstantColumn(table.columns[c]);
        for (std::size_t r = 0; r < table.rows(); ++r)
            table.x(r, c) = (table.x(r, c) - lo) / (hi - lo);
        scaling.columns.emplace_back(lo, hi);
    }
    table.scaled = true;
    table.scaling = scaling;
    return scaling;
}

void apply_scaling(FeatureTable& table, const Scaling& scaling) {
    if (scaling.columns.size() != table.cols())
        throw DimensionMismatch("apply_scaling: column count mismatch");
    for (std::size_t c = 0; c < table.cols(); ++c) {
        const auto [a, b] = scaling.columns[c];
        for (std::size_t r = 0; r < table.rows(); ++r) {
            if (scaling.kind == ScalingKind::zscore)
                table.x(r, c) = (table.x(r, c) - a) / b;
            else
                table.x(r, c) = (table.x(r, c) - a) / (b - a);
        }
    }
    table.scaled = true;
    table.scaling = scaling;
}

void invert_scaling(FeatureTable& table) {
    if (!table.scaled) return;
    for (std::size_t c = 0; c < table.cols(); ++c) {
        const auto [a, b] = table.scaling.columns[c];
        for (std::size_t r = 0; r < table.rows(); ++r) {
            if (table.scaling.kind == ScalingKind::zscore)
                table.x(r, c) = table.x(r, c) * b + a;
            else
                table.x(r, c) = table.x(r, c) * (b - a) + a;
        }
    }
    table.scaled = false;
    table.scaling = Scaling{};
}

namespace {

FeatureTable build_features_impl(const std::vector<RawRecord>& records, const CsvSchema& schema,
                                 LoadReport* report, bool drop_constant) {
    FeatureTable table;
    table.columns.push_back(schema.persistence);
    for (const auto& n : schema.numeric) table.columns.push_back(n);
    // class-frequency columns, last class of each parameter dropped as the
    // reference (the frequencies sum to 1)
    for (const auto& cat : schema.categorical)
        for (std::size_t k = 0; k + 1 < cat.classes.size(); ++k)
            table.columns.push_back(cat.name + ":" + cat.classes[k]);

    table.x = Matrix(records.size(), table.columns.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& rec = records[r];
        std::size_t c = 0;
        table.x(r, c++) = rec.ozone_noon;
        for (double v : rec.numeric) table.x(r, c++) = v;
        for (const auto& cat : schema.categorical) {
            const auto freqs = encode_class_frequencies(rec, cat.name, cat.classes);
            for (std::size_t k = 0; k + 1 < cat.classes.size(); ++k) table.x(r, c++) = freqs[k];
        }
        table.targets.push_back(rec.has_target ? rec.target_peak
                                               : std::numeric_limits<double>::quiet_NaN());
        table.dates.push_back(rec.date);
    }

    if (!drop_constant) return table;
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < table.cols(); ++c) {
        bool constant = true;
        for (std::size_t r = 1; r < table.rows(); ++r)
            if (table.x(r, c) != table.x(0, c)) {
                constant = false;
                break;
            }
        if (constant && table.rows() > 1) {
            if (report)
                report->notes.push_back("dropped constant column '" + table.columns[c] + "'");
        } else {
            keep.push_back(c);
        }
    }
    if (keep.size() != table.cols()) {
        FeatureTable pruned;
        pruned.targets = table.targets;
        pruned.dates = table.dates;
        pruned.x = Matrix(table.rows(), keep.size());
        for (std::size_t c = 0; c < keep.size(); ++c) {
            pruned.columns.push_back(table.columns[keep[c]]);
            for (std::size_t r = 0; r < table.rows(); ++r) pruned.x(r, c) = table.x(r, keep[c]);
        }
        return pruned;
    }
    return table;
}

}  // namespace

FeatureTable build_features(const std::vector<RawRecord>& records, const CsvSchema& schema,
                            LoadReport* report) {
    return build_features_impl(records, schema, report, true);
}

FeatureTable build_features_for(const std::vector<RawRecord>& records, const CsvSchema& schema,
                                const std::vector<std::string>& columns) {
    FeatureTable full = build_features_impl(records, schema, nullptr, false);
    std::vector<std::size_t> idx;
    for (const auto& name : columns) {
        const auto it = std::find(full.columns.begin(), full.columns.end(), name);
        if (it == full.columns.end())
            throw ConfigError("missing feature '" + name + "' in input data");
        idx.push_back(static_cast<std::size_t>(it - full.columns.begin()));
    }
    FeatureTable out;
    out.columns = columns;
    out.targets = full.targets;
    out.dates = full.dates;
    out.x = Matrix(full.rows(), idx.size());
    for (std::size_t r = 0; r < full.rows(); ++r)
        for (std::size_t c = 0; c < idx.size(); ++c) out.x(r, c) = full.x(r, idx[c]);
    return out;
}

double balance_ratio(const BalanceSpec& spec) { return spec.a * std::exp(spec.b * spec.threshold); }

std::size_t balance_keep_below(const BalanceSpec& spec, std::size_t n_above, std::size_t n_below) {
    if (spec.a <= 0.0 || spec.b < 0.0 || spec.multiplier < 1)
        throw Error("invalid balance spec (need a > 0, b >= 0, multiplier >= 1)");
    const double base = balance_ratio(spec) * static_cast<double>(n_above);
    if (!(base < 1e15)) return n_below;  // ratio overflow: keep everything
    // round half to even, then scale by the multiplier (the doubled set is
    // defined as twice the base set, not a re-rounding)
    const auto rounded = static_cast<std::size_t>(std::nearbyint(base));
    return std::min<std::size_t>(n_below, rounded * static_cast<std::size_t>(spec.multiplier));
}

std::vector<std::size_t> balance_indices(std::span<const double> targets, const BalanceSpec& spec,
                                         std::uint64_t seed) {
    std::vector<std::size_t> above, below;
    for (std::size_t i = 0; i < targets.size(); ++i)
        (targets[i] > spec.threshold ? above : below).push_back(i);
    if (above.empty()) throw NoExceedances("no record above threshold");

    const std::size_t keep = balance_keep_below(spec, above.size(), below.size());
    // partial Fisher-Yates: the first `keep` entries are a uniform sample
    // without replacement
    Rng rng(seed);
    for (std::size_t i = 0; i < keep; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(below.size() - i));
        std::swap(below[i], below[j]);
    }
    below.resize(keep);

    std::vector<std::size_t> all = above;
    all.insert(all.end(), below.begin(), below.end());
    std::sort(all.begin(), all.end());
    return all;
}

std::vector<RawRecord> balance(const std::vector<RawRecord>& records, const BalanceSpec& spec,
                               std::uint64_t seed) {
    std::vector<double> targets;
    targets.reserve(records.size());
    for (const auto& r : records) targets.push_back(r.target_peak);
    const auto keep = balance_indices(targets, spec, seed);
    std::vector<RawRecord> out;
    out.reserve(keep.size());
    for (const std::size_t i : keep) out.push_back(records[i]);
    return out;
}

AnovaResult anova_check(std::span<const double> group_a, std::span<const double> group_b) {
    if (group_a.size() < 2 || group_b.size() < 2)
        throw GroupTooSmall("each ANOVA group needs at least 2 values");
    const double na = static_cast<double>(group_a.size());
    const double nb = static_cast<double>(group_b.size());
    const double ma = mean_of(group_a);
    const double mb = mean_of(group_b);
    const double grand = (na * ma + nb * mb) / (na + nb);

    const double ssb = na * (ma - grand) * (ma - grand) + nb * (mb - grand) * (mb - grand);
    double ssw = 0.0;
    for (double x : group_a) ssw += (x - ma) * (x - ma);
    for (double x : group_b) ssw += (x - mb) * (x - mb);

    AnovaResult res;
    res.df1 = 1;
    res.df2 = group_a.size() + group_b.size() - 2;
    if (ssw == 0.0) {
        res.f = ssb == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        res.p_value = ssb == 0.0 ? 1.0 : 0.0;
        return res;
    }
    res.f = (ssb / 1.0) / (ssw / static_cast<double>(res.df2));
    res.p_value = f_survival(res.f, 1.0, static_cast<double>(res.df2));
    return res;
}

}  // namespace ozonecast
