#include "ozonecast/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "ozonecast/errors.hpp"
#include "ozonecast/metrics.hpp"
#include "ozonecast/model_io.hpp"
#include "ozonecast/rng.hpp"

namespace ozonecast {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

// display rounding that never prints "-0"
std::string fmt_display(double v, int decimals) {
    const double scale = decimals == 0 ? 1.0 : std::pow(10.0, decimals);
    const double rounded = std::nearbyint(v * scale) / scale + 0.0;
    return fmt(rounded == 0.0 ? 0.0 : rounded, decimals == 0 ? "%.0f" : "%.2f");
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
}

int guarded(std::ostream& diag, const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const Error& e) {
        diag << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        diag << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

void validate_common(const RunConfig& cfg) {
    if (!(cfg.threshold > 0.0)) throw ConfigError("threshold must be positive");
    if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0))
        throw ConfigError("confidence must lie in (0, 1)");
    if (cfg.hidden_range.empty()) throw ConfigError("hidden-unit sweep range is empty");
}

struct LoadedTable {
    std::vector<RawRecord> records;
    FeatureTable table;
    LoadReport report;
};

LoadedTable load_table(const fs::path& csv, const CsvSchema& schema, bool require_target) {
    LoadedTable out;
    out.records = load_csv(csv, schema, &out.report, require_target);
    out.table = build_features(out.records, schema, &out.report);
    return out;
}

// Validation/forecast rows are restricted to the model's stored columns and
// scaled with the training statistics.
FeatureTable project_rows(const std::vector<RawRecord>& records, const CsvSchema& schema,
                          const std::vector<std::string>& columns, const Scaling& scaling) {
    FeatureTable t = build_features_for(records, schema, columns);
    apply_scaling(t, scaling);
    return t;
}

struct RegressionModel {
    ModelFile file;
    double predict(std::span<const double> x) const {
        if (file.kind == "mlp") return forward(*file.net, x);
        return linear_predict(*file.linear, x);
    }
    PredictionInterval interval(std::span<const double> x, double confidence,
                                bool include_noise) const {
        if (!file.interval) throw Error("model file has no interval context");
        if (file.kind == "mlp")
            return prediction_interval(*file.net, *file.interval, x, confidence, include_noise);
        std::vector<double> beta;
        beta.push_back(file.linear->intercept);
        beta.insert(beta.end(), file.linear->coefficients.begin(), file.linear->coefficients.end());
        return prediction_interval_linear(beta, *file.interval, x, confidence, include_noise);
    }
};

void write_prune_trace(const fs::path& path, const PruneTrace& trace, const Network& net,
                       const std::vector<std::string>& columns) {
    auto out = open_out(path);
    out << "step,item_kind,item_id,BIC_before,BIC_after,active_parameter_count\n";
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& step = trace.steps[i];
        const char* kind = step.kind == PruneItem::Kind::weight
                               ? "weight"
                               : (step.kind == PruneItem::Kind::input ? "input" : "hidden_unit");
        out << i + 1 << "," << kind << "," << step.describe(net, columns) << ","
            << fmt(step.bic_before, "%.9f") << "," << fmt(step.bic_after, "%.9f") << ","
            << step.active_after << "\n";
    }
}

void write_bic_curve(const fs::path& path, const std::vector<std::pair<int, double>>& curve) {
    auto out = open_out(path);
    out << "hidden_units,bic\n";
    for (const auto& [n, v] : curve) out << n << "," << fmt(v, "%.9f") << "\n";
}

}  // namespace

fs::path RunConfig::resolved_model_path() const {
    return model_path.empty() ? out_dir / "model.json" : model_path;
}

fs::path RunConfig::classifier_path() const {
    fs::path p = resolved_model_path();
    p.replace_extension(".classifier.json");
    return p;
}

RunConfig config_from_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
    }

    RunConfig cfg;
    if (j.contains("train_csv")) cfg.train_csv = j["train_csv"].get<std::string>();
    if (j.contains("validation_csv")) cfg.validation_csv = j["validation_csv"].get<std::string>();
    if (j.contains("model")) cfg.model_path = j["model"].get<std::string>();
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("threshold")) cfg.threshold = j["threshold"].get<double>();
    if (j.contains("confidence")) cfg.confidence = j["confidence"].get<double>();
    if (j.contains("hidden_range")) cfg.hidden_range = j["hidden_range"].get<std::vector<int>>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("restarts")) cfg.restarts = j["restarts"].get<int>();
    if (j.contains("max_iterations")) cfg.max_iterations = j["max_iterations"].get<int>();
    if (j.contains("ridge_lambda")) cfg.ridge_lambda = j["ridge_lambda"].get<double>();
    if (j.contains("keep_p")) cfg.keep_p = j["keep_p"].get<double>();
    if (j.contains("prune_fast")) cfg.prune_fast = j["prune_fast"].get<bool>();
    if (j.contains("interval_include_noise"))
        cfg.interval_include_noise = j["interval_include_noise"].get<bool>();

    if (j.contains("balance")) {
        if (j["balance"].is_string()) {
            if (j["balance"].get<std::string>() != "none")
                throw ConfigError("balance must be an object or \"none\"");
        } else {
            BalanceSpec spec;
            spec.a = j["balance"].value("a", 1.0);
            spec.b = j["balance"].value("b", 0.0125);
            spec.threshold = j["balance"].value("theta", 180.0);
            spec.multiplier = j["balance"].value("multiplier", 1);
            cfg.balance = spec;
        }
    }
    if (j.contains("baselines")) {
        cfg.baseline_pers = cfg.baseline_lin = cfg.baseline_logistic = false;
        for (const auto& b : j["baselines"]) {
            const auto name = b.get<std::string>();
            if (name == "pers")
                cfg.baseline_pers = true;
            else if (name == "lin")
                cfg.baseline_lin = true;
            else if (name == "logistic")
                cfg.baseline_logistic = true;
            else
                throw ConfigError("unknown baseline '" + name + "'");
        }
    }
    if (j.contains("target_mode")) {
        const auto mode = j["target_mode"].get<std::string>();
        if (mode == "observed")
            cfg.target_mode = TargetMode::observed;
        else if (mode == "interval")
            cfg.target_mode = TargetMode::interval_augmented;
        else
            throw ConfigError("target_mode must be 'observed' or 'interval'");
    }
    if (j.contains("bic_on")) {
        const auto t = j["bic_on"].get<std::string>();
        if (t == "train")
            cfg.bic_on = BicTarget::train;
        else if (t == "validation")
            cfg.bic_on = BicTarget::validation;
        else
            throw ConfigError("bic_on must be 'train' or 'validation'");
    }
    if (j.contains("classifier_loss")) {
        const auto l = j["classifier_loss"].get<std::string>();
        if (l == "squared")
            cfg.classifier_loss = ClassifierLoss::squared;
        else if (l == "cross_entropy")
            cfg.classifier_loss = ClassifierLoss::cross_entropy;
        else
            throw ConfigError("classifier_loss must be 'squared' or 'cross_entropy'");
    }
    if (j.contains("schema")) {
        const auto& sj = j["schema"];
        CsvSchema schema;
        schema.date = sj.value("date", schema.date);
        schema.target = sj.value("target", schema.target);
        schema.persistence = sj.value("persistence", schema.persistence);
        if (sj.contains("numeric")) schema.numeric = sj["numeric"].get<std::vector<std::string>>();
        schema.categorical.clear();
        if (sj.contains("categorical")) {
            for (const auto& cj : sj["categorical"]) {
                CategoricalSpec cat;
                cat.name = cj.at("name").get<std::string>();
                cat.classes = cj.at("classes").get<std::vector<std::string>>();
                cat.intervals = cj.value("intervals", 8);
                schema.categorical.push_back(std::move(cat));
            }
        }
        cfg.schema = std::move(schema);
    }
    return cfg;
}

int cmd_train(const RunConfig& cfg, std::ostream& diag) {
    return guarded(diag, [&] {
        validate_common(cfg);
        if (cfg.train_csv.empty()) throw ConfigError("train CSV path is required");
        fs::create_directories(cfg.out_dir);
        const fs::path model_path = cfg.resolved_model_path();

        auto loaded = load_table(cfg.train_csv, cfg.schema, true);
        FeatureTable& full = loaded.table;
        if (full.rows() < 4) throw TooFewRows("training set too small");
        const Scaling scaling = normalize_fit(full);
        open_out(cfg.out_dir / "load_report.txt") << loaded.report.to_text();

        // optional pattern balancing (after normalization: the stored
        // statistics describe the full training season)
        FeatureTable train = full;
        if (cfg.balance) {
            const auto keep = balance_indices(full.targets, *cfg.balance, cfg.seed);
            train = full.subset(keep);
            auto manifest = open_out(cfg.out_dir / "balance_manifest.csv");
            manifest << "row_index\n";
            for (const auto i : keep) manifest << i << "\n";
        }

        // validation projected onto the train columns and statistics
        std::optional<FeatureTable> validation;
        std::optional<AnovaResult> anova;
        if (!cfg.validation_csv.empty()) {
            auto vrec = load_csv(cfg.validation_csv, cfg.schema, nullptr, true);
            validation = project_rows(vrec, cfg.schema, full.columns, scaling);
            validation->role = Role::validation;
            anova = anova_check(full.targets, validation->targets);
        }
        if (cfg.bic_on == BicTarget::validation && !validation)
            throw ConfigError("bic_on=validation requires a validation CSV");

        TrainConfig tc;
        tc.restarts = cfg.restarts;
        tc.max_iterations = cfg.max_iterations;
        tc.seed = cfg.seed;

        PruneConfig pc;
        pc.retrain = tc;
        pc.retrain.restarts = 1;
        pc.target = cfg.bic_on;
        pc.validation = validation ? &*validation : nullptr;
        pc.rank_by_magnitude = cfg.prune_fast;

        const auto selection = select_architecture(train, validation ? &*validation : nullptr,
                                                   cfg.hidden_range, tc, pc, cfg.bic_on);
        write_bic_curve(cfg.out_dir / "bic_curve.csv", selection.curve);

        ModelFile model;
        model.columns = full.columns;
        model.scaling = scaling;
        model.seed = cfg.seed;
        model.selected_hidden = selection.hidden;
        model.threshold = cfg.threshold;
        double final_bic = 0.0;
        for (const auto& [n, v] : selection.curve)
            if (n == selection.swept) final_bic = v;
        model.final_bic = final_bic;

        std::string classifier_status = "trained";
        std::optional<Network> regression_net;
        std::optional<IntervalContext> interval_ctx;

        if (selection.net_is_linear) {
            LinearModel lm;
            lm.kind = LinearModel::Kind::ols;
            lm.intercept = selection.linear_beta[0];
            lm.coefficients.assign(selection.linear_beta.begin() + 1, selection.linear_beta.end());
            model.kind = "linear";
            model.linear = lm;
            // classical OLS leverage context on the [1 | X] design
            Matrix design(train.rows(), train.cols() + 1);
            for (std::size_t r = 0; r < train.rows(); ++r) {
                design(r, 0) = 1.0;
                for (std::size_t c = 0; c < train.cols(); ++c) design(r, c + 1) = train.x(r, c);
            }
            const auto lev = leverages_from_design(design);
            IntervalContext ctx;
            ctx.gram_inverse = lev.gram_inverse;
            ctx.q = lev.q;
            ctx.n = lev.n;
            double ss = 0.0;
            for (std::size_t r = 0; r < train.rows(); ++r) {
                const double d = train.targets[r] - linear_predict(lm, train.x.row(r));
                ss += d * d;
            }
            ctx.s = std::sqrt(ss / static_cast<double>(train.rows() - lev.q));
            model.interval = ctx;
            model.final_cost = 0.5 * ss;
            auto lev_csv = open_out(cfg.out_dir / "leverages.csv");
            lev_csv << "row_index,h_ii\n";
            for (std::size_t i = 0; i < lev.h.size(); ++i)
                lev_csv << i << "," << fmt(lev.h[i], "%.9f") << "\n";
            write_prune_trace(cfg.out_dir / "prune_trace.csv", PruneTrace{}, Network{},
                              full.columns);
            classifier_status = "skipped: linear architecture selected";
        } else {
            const Network& net = selection.net;
            write_prune_trace(cfg.out_dir / "prune_trace.csv", selection.trace, net, full.columns);

            const auto lev = leverages(net, train);
            IntervalContext ctx;
            ctx.gram_inverse = lev.gram_inverse;
            ctx.q = lev.q;
            ctx.n = lev.n;
            ctx.s = residual_std(net, train, lev.q);
            auto lev_csv = open_out(cfg.out_dir / "leverages.csv");
            lev_csv << "row_index,h_ii\n";
            for (std::size_t i = 0; i < lev.h.size(); ++i)
                lev_csv << i << "," << fmt(lev.h[i], "%.9f") << "\n";

            model.kind = "mlp";
            model.net = net;
            model.interval = ctx;
            model.final_cost = cost(net, train);
            regression_net = net;
            interval_ctx = ctx;
        }
        save_model(model_path, model);

        // classifier with the same structure on the same (balanced) training
        // days, min-max scaled inputs
        if (regression_net) {
            try {
                FeatureTable raw = train;
                invert_scaling(raw);
                const Scaling cls_scaling = minmax_fit(raw);
                ExceedanceTargets targets;
                if (cfg.target_mode == TargetMode::observed)
                    targets = make_targets_observed(train.targets, cfg.threshold);
                else
                    targets = make_targets(train.targets, cfg.threshold,
                                           TargetMode::interval_augmented, &*regression_net,
                                           &*interval_ctx, &train, cfg.confidence);
                ClassifierConfig cc;
                cc.train = tc;
                cc.train.seed = Rng::mix(cfg.seed, 0xC1A55ULL);
                cc.loss = cfg.classifier_loss;
                const Network cls =
                    train_classifier(raw, targets.p, regression_net->hidden, cc, &*regression_net);

                ModelFile cls_model;
                cls_model.kind = "mlp";
                cls_model.net = cls;
                cls_model.columns = full.columns;
                cls_model.scaling = cls_scaling;
                cls_model.seed = cc.train.seed;
                cls_model.selected_hidden = cls.hidden;
                cls_model.threshold = cfg.threshold;
                save_model(cfg.classifier_path(), cls_model);
            } catch (const SingleClass& e) {
                classifier_status = std::string("skipped: ") + e.what();
            }
        }

        ordered_json summary;
        summary["train_rows"] = full.rows();
        summary["balanced_rows"] = train.rows();
        std::size_t exceed = 0;
        for (const double t : train.targets) exceed += t > cfg.threshold ? 1 : 0;
        summary["train_exceedances"] = exceed;
        summary["selected_hidden"] = selection.hidden;
        summary["final_bic"] = model.final_bic;
        summary["classifier"] = classifier_status;
        summary["seed"] = cfg.seed;
        if (anova) {
            summary["anova_f"] = anova->f;
            summary["anova_p"] = anova->p_value;
        }
        open_out(cfg.out_dir / "train_summary.json") << summary.dump(2) << "\n";
        diag << "trained model written to " << model_path.string() << " (hidden units: "
             << selection.hidden << ")\n";
    });
}

namespace {

struct EvalRow {
    std::string name;
    std::optional<FitReport> fit;
    std::optional<ExceedanceReport> exceed;
    std::optional<ContingencyTable> table;
    std::string note;
};

void write_report(const fs::path& dir, const std::vector<EvalRow>& rows) {
    // display precision: whole µg m⁻³ error indices, two decimals for d,
    // FAR and SI
    auto csv = open_out(dir / "report.csv");
    csv << "model,MBE,MAE,RMSE,RMSE_s,RMSE_u,d,FAR,SI\n";
    for (const auto& row : rows) {
        csv << row.name;
        if (row.fit) {
            csv << "," << fmt_display(row.fit->mbe, 0) << "," << fmt_display(row.fit->mae, 0)
                << "," << fmt_display(row.fit->rmse, 0) << "," << fmt_display(row.fit->rmse_s, 0)
                << "," << fmt_display(row.fit->rmse_u, 0) << "," << fmt_display(row.fit->d, 2);
        } else {
            csv << ",-,-,-,-,-,-";
        }
        if (row.exceed)
            csv << "," << fmt_display(row.exceed->far, 2) << ","
                << fmt_display(row.exceed->si, 2);
        else
            csv << ",-,-";
        csv << "\n";
    }

    ordered_json j = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json rj;
        rj["model"] = row.name;
        if (row.fit) {
            rj["MBE"] = row.fit->mbe;
            rj["MAE"] = row.fit->mae;
            rj["RMSE"] = row.fit->rmse;
            rj["RMSE_s"] = row.fit->rmse_s;
            rj["RMSE_u"] = row.fit->rmse_u;
            rj["d"] = row.fit->d;
            rj["b0"] = row.fit->b0;
            rj["b1"] = row.fit->b1;
            rj["N"] = row.fit->n;
        }
        if (row.exceed) {
            rj["TPR"] = row.exceed->tpr;
            rj["FAR"] = row.exceed->far;
            rj["SI"] = row.exceed->si;
        }
        if (row.table) {
            rj["A"] = row.table->a;
            rj["F"] = row.table->f;
            rj["M"] = row.table->m;
            rj["N_cases"] = row.table->n;
        }
        if (!row.note.empty()) rj["note"] = row.note;
        j.push_back(rj);
    }
    open_out(dir / "report.json") << j.dump(2) << "\n";

    for (const auto& row : rows) {
        if (!row.table) continue;
        auto out = open_out(dir / ("contingency_" + row.name + ".csv"));
        const auto& t = *row.table;
        out << ",observed_yes,observed_no\n";
        out << "predicted_yes," << t.a << "," << t.f - t.a << "\n";
        out << "predicted_no," << t.m - t.a << "," << t.n - t.f - t.m + t.a << "\n";
    }
}

void add_exceedance(EvalRow& row, const std::vector<bool>& predicted,
                    const std::vector<bool>& observed) {
    const auto table = contingency(predicted, observed);
    row.table = table;
    try {
        row.exceed = exceedance_report(table);
    } catch (const Error& e) {
        row.note = e.what();
    }
}

}  // namespace

int cmd_evaluate(const RunConfig& cfg, std::ostream& diag) {
    return guarded(diag, [&] {
        validate_common(cfg);
        if (cfg.validation_csv.empty()) throw ConfigError("validation CSV path is required");
        const fs::path model_path = cfg.resolved_model_path();
        if (!fs::exists(model_path))
            throw ConfigError("model file '" + model_path.string() + "' not found");
        fs::create_directories(cfg.out_dir);

        RegressionModel model{load_model(model_path)};
        std::optional<ModelFile> classifier;
        if (fs::exists(cfg.classifier_path())) classifier = load_model(cfg.classifier_path());

        const auto vrec = load_csv(cfg.validation_csv, cfg.schema, nullptr, true);
        FeatureTable vtab = project_rows(vrec, cfg.schema, model.file.columns, model.file.scaling);
        const std::size_t n = vtab.rows();
        const std::vector<double>& observed = vtab.targets;

        std::vector<bool> observed_flags(n);
        for (std::size_t i = 0; i < n; ++i) observed_flags[i] = observed[i] >= cfg.threshold;

        // regression predictions + interval-rule alarms
        std::vector<double> net_pred(n), lower(n), upper(n);
        std::vector<bool> net_flags(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto interval =
                model.interval(vtab.x.row(i), cfg.confidence, cfg.interval_include_noise);
            net_pred[i] = interval.point;
            lower[i] = interval.lower();
            upper[i] = interval.upper();
            net_flags[i] = exceedance_by_interval(interval, cfg.threshold);
        }

        std::vector<double> probability(n, std::numeric_limits<double>::quiet_NaN());
        std::vector<bool> prob_flags(n, false);
        if (classifier) {
            FeatureTable ctab =
                project_rows(vrec, cfg.schema, classifier->columns, classifier->scaling);
            for (std::size_t i = 0; i < n; ++i) {
                probability[i] = forward_classifier(*classifier->net, ctab.x.row(i));
                prob_flags[i] = decide(probability[i]);
            }
        }

        std::vector<EvalRow> rows;
        {
            EvalRow row;
            row.name = model.file.kind == "linear" ? "LINREG" : "MLP";
            row.fit = global_fit_report(net_pred, observed);
            add_exceedance(row, net_flags, observed_flags);
            rows.push_back(std::move(row));
        }
        if (cfg.baseline_pers) {
            EvalRow row;
            row.name = "PERS";
            const auto pers = persistence_forecast(observed);
            const std::vector<double> target(observed.begin() + 1, observed.end());
            row.fit = global_fit_report(pers.forecast, target);
            std::vector<bool> pf(pers.forecast.size()), of(target.size());
            for (std::size_t i = 0; i < target.size(); ++i) {
                pf[i] = pers.forecast[i] >= cfg.threshold;
                of[i] = target[i] >= cfg.threshold;
            }
            add_exceedance(row, pf, of);
            rows.push_back(std::move(row));
        }
        if (cfg.baseline_lin || cfg.baseline_logistic) {
            if (cfg.train_csv.empty())
                throw ConfigError("LIN/logistic baselines need the train CSV");
            const auto trec = load_csv(cfg.train_csv, cfg.schema, nullptr, true);
            FeatureTable ttab =
                project_rows(trec, cfg.schema, model.file.columns, model.file.scaling);
            if (cfg.baseline_lin) {
                EvalRow row;
                row.name = "LIN";
                const auto ridge = ridge_fit(ttab.x, ttab.targets, cfg.ridge_lambda);
                std::vector<double> pred(n);
                for (std::size_t i = 0; i < n; ++i) pred[i] = linear_predict(ridge, vtab.x.row(i));
                row.fit = global_fit_report(pred, observed);
                std::vector<bool> flags(n);
                for (std::size_t i = 0; i < n; ++i) flags[i] = pred[i] >= cfg.threshold;
                add_exceedance(row, flags, observed_flags);
                rows.push_back(std::move(row));

                ModelFile ridge_model;
                ridge_model.kind = "linear";
                ridge_model.linear = ridge;
                ridge_model.columns = model.file.columns;
                ridge_model.scaling = model.file.scaling;
                ridge_model.threshold = cfg.threshold;
                save_model(cfg.out_dir / "lin.model.json", ridge_model);
            }
            if (cfg.baseline_logistic) {
                EvalRow row;
                row.name = "LOGISTIC";
                try {
                    const auto targets = make_targets_observed(ttab.targets, cfg.threshold);
                    const auto step = logistic_stepwise(ttab.x, targets.p, cfg.keep_p,
                                                        LogisticOptions{}, &ttab.columns);
                    std::vector<bool> flags(n);
                    for (std::size_t i = 0; i < n; ++i) {
                        std::vector<double> x;
                        for (const auto c : step.kept_columns) x.push_back(vtab.x(i, c));
                        flags[i] = decide(logistic_predict(step.model, x));
                    }
                    add_exceedance(row, flags, observed_flags);
                    auto coef = open_out(cfg.out_dir / "logistic_coefficients.csv");
                    coef << "name,estimate,p_value\n";
                    coef << "(intercept)," << fmt(step.model.intercept, "%.9f") << ","
                         << fmt(step.model.intercept_p_value, "%.6f") << "\n";
                    for (std::size_t c = 0; c < step.model.coefficients.size(); ++c)
                        coef << step.model.names[c] << ","
                             << fmt(step.model.coefficients[c], "%.9f") << ","
                             << fmt(step.model.p_values[c], "%.6f") << "\n";

                    ModelFile logit_model;
                    logit_model.kind = "logistic";
                    logit_model.logistic = step.model;
                    for (const auto c : step.kept_columns)
                        logit_model.columns.push_back(model.file.columns[c]);
                    Scaling sub;
                    sub.kind = model.file.scaling.kind;
                    for (const auto c : step.kept_columns)
                        sub.columns.push_back(model.file.scaling.columns[c]);
                    logit_model.scaling = sub;
                    logit_model.threshold = cfg.threshold;
                    save_model(cfg.out_dir / "logistic.model.json", logit_model);
                } catch (const Error& e) {
                    row.note = e.what();
                }
                rows.push_back(std::move(row));
            }
        }
        if (classifier) {
            EvalRow row;
            row.name = "CLASSIFIER";
            add_exceedance(row, prob_flags, observed_flags);
            rows.push_back(std::move(row));
        }

        write_report(cfg.out_dir, rows);

        // per-day series consumed by plotdata
        auto daily = open_out(cfg.out_dir / "forecasts_validation.csv");
        daily << "date,observed,point,lower,upper,interval_alarm,probability,prob_alarm\n";
        for (std::size_t i = 0; i < n; ++i) {
            daily << vtab.dates[i] << "," << fmt(observed[i]) << "," << fmt(net_pred[i]) << ","
                  << fmt(lower[i]) << "," << fmt(upper[i]) << "," << (net_flags[i] ? 1 : 0) << ",";
            if (classifier)
                daily << fmt(probability[i]) << "," << (prob_flags[i] ? 1 : 0);
            else
                daily << ",";
            daily << "\n";
        }
        diag << "evaluation written to " << (cfg.out_dir / "report.csv").string() << "\n";
    });
}

int cmd_forecast(const RunConfig& cfg, const fs::path& days_csv, std::ostream& diag) {
    return guarded(diag, [&] {
        validate_common(cfg);
        const fs::path model_path = cfg.resolved_model_path();
        if (!fs::exists(model_path))
            throw ConfigError("model file '" + model_path.string() + "' not found");
        fs::create_directories(cfg.out_dir);

        RegressionModel model{load_model(model_path)};
        std::optional<ModelFile> classifier;
        if (fs::exists(cfg.classifier_path())) classifier = load_model(cfg.classifier_path());

        LoadReport report;
        const auto records = load_csv(days_csv, cfg.schema, &report, false);
        if (!report.skipped.empty())
            throw ConfigError("incomplete feature row: " + report.skipped.front().reason);

        FeatureTable ftab = project_rows(records, cfg.schema, model.file.columns, model.file.scaling);
        std::optional<FeatureTable> ctab;
        if (classifier)
            ctab = project_rows(records, cfg.schema, classifier->columns, classifier->scaling);

        auto out = open_out(cfg.out_dir / "forecast.csv");
        out << "date,point,lower,upper,interval_alarm,probability,prob_alarm\n";
        for (std::size_t i = 0; i < ftab.rows(); ++i) {
            const auto interval =
                model.interval(ftab.x.row(i), cfg.confidence, cfg.interval_include_noise);
            out << ftab.dates[i] << "," << fmt(interval.point) << "," << fmt(interval.lower())
                << "," << fmt(interval.upper()) << ","
                << (exceedance_by_interval(interval, cfg.threshold) ? 1 : 0) << ",";
            if (classifier) {
                const double p = forward_classifier(*classifier->net, ctab->x.row(i));
                out << fmt(p) << "," << (decide(p) ? 1 : 0);
            } else {
                out << ",";
            }
            out << "\n";
        }
        diag << "forecast written to " << (cfg.out_dir / "forecast.csv").string() << "\n";
    });
}

int cmd_retrain(const RunConfig& cfg, const fs::path& season_csv, std::ostream& diag) {
    return guarded(diag, [&] {
        validate_common(cfg);
        if (cfg.train_csv.empty()) throw ConfigError("train CSV path (the archive) is required");
        if (!fs::exists(cfg.train_csv))
            throw ConfigError("archive '" + cfg.train_csv.string() + "' not found");

        const auto archive = load_csv(cfg.train_csv, cfg.schema, nullptr, true);
        const auto season = load_csv(season_csv, cfg.schema, nullptr, true);
        std::set<std::string> dates;
        for (const auto& r : archive) dates.insert(r.date);
        for (const auto& r : season)
            if (!dates.insert(r.date).second)
                throw ArchiveConflict("duplicate date '" + r.date + "' in season data");

        // append the season rows to the archive (headers must agree)
        std::ifstream arc_in(cfg.train_csv);
        std::string arc_header;
        std::getline(arc_in, arc_header);
        std::ifstream season_in(season_csv);
        std::string season_header;
        std::getline(season_in, season_header);
        if (arc_header != season_header)
            throw ArchiveConflict("season header does not match the archive");
        std::ostringstream body;
        body << arc_in.rdbuf();
        std::ostringstream season_body;
        season_body << season_in.rdbuf();
        arc_in.close();
        season_in.close();
        {
            auto out = open_out(cfg.train_csv);
            out << arc_header << "\n" << body.str();
            std::string b = body.str();
            if (!b.empty() && b.back() != '\n') out << "\n";
            out << season_body.str();
        }
        diag << "archive extended by " << season.size() << " days (total "
             << archive.size() + season.size() << ")\n";

        const int rc = cmd_train(cfg, diag);
        if (rc != kExitOk) throw Error("retraining failed");

        const fs::path model_path = cfg.resolved_model_path();
        const std::string hash = content_hash(model_path);
        fs::path versioned = model_path;
        versioned.replace_extension("");
        versioned += "-" + hash + ".json";
        fs::copy_file(model_path, versioned, fs::copy_options::overwrite_existing);
        diag << "versioned model written to " << versioned.string() << "\n";
    });
}

int cmd_plotdata(const RunConfig& cfg, std::ostream& diag) {
    return guarded(diag, [&] {
        const fs::path daily_path = cfg.out_dir / "forecasts_validation.csv";
        if (!fs::exists(daily_path))
            throw ConfigError("evaluation artifacts not found (run evaluate first)");

        std::ifstream in(daily_path);
        std::string line;
        std::getline(in, line);  // header
        struct DayRow {
            std::string date;
            double observed, point;
            std::string probability;
            std::string prob_alarm;
        };
        std::vector<DayRow> days;
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string cell;
            std::vector<std::string> cells;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            if (cells.size() < 7) continue;
            days.push_back({cells[0], std::stod(cells[1]), std::stod(cells[2]), cells[6],
                            cells.size() > 7 ? cells[7] : std::string{}});
        }
        if (days.empty()) throw ConfigError("no evaluation rows found");

        auto ts = open_out(cfg.out_dir / "plot_timeseries.csv");
        ts << "date,observed,predicted\n";
        auto scatter = open_out(cfg.out_dir / "plot_scatter.csv");
        scatter << "observed,predicted\n";
        for (const auto& d : days) {
            ts << d.date << "," << fmt(d.observed) << "," << fmt(d.point) << "\n";
            scatter << fmt(d.observed) << "," << fmt(d.point) << "\n";
        }

        auto prob = open_out(cfg.out_dir / "plot_probability.csv");
        prob << "date,probability,decision,observed_exceedance\n";
        for (const auto& d : days) {
            if (d.probability.empty()) continue;
            prob << d.date << "," << d.probability << "," << d.prob_alarm << ","
                 << (d.observed >= cfg.threshold ? 1 : 0) << "\n";
        }

        std::vector<double> p(days.size()), o(days.size());
        for (std::size_t i = 0; i < days.size(); ++i) {
            p[i] = days[i].point;
            o[i] = days[i].observed;
        }
        const auto sr = standardized_residuals(p, o);
        auto res = open_out(cfg.out_dir / "plot_residuals.csv");
        res << "date,standardized_residual\n";
        auto flagged = open_out(cfg.out_dir / "plot_residuals_flagged.csv");
        flagged << "date,standardized_residual\n";
        for (std::size_t i = 0; i < days.size(); ++i) {
            res << days[i].date << "," << fmt(sr[i]) << "\n";
            if (std::fabs(sr[i]) > 2.0)
                flagged << days[i].date << "," << fmt(sr[i]) << "\n";
        }

        const fs::path bic_src = cfg.out_dir / "bic_curve.csv";
        if (fs::exists(bic_src))
            fs::copy_file(bic_src, cfg.out_dir / "plot_bic_curve.csv",
                          fs::copy_options::overwrite_existing);
        diag << "plot data written to " << cfg.out_dir.string() << "\n";
    });
}

int cmd_synth(const SynthConfig& synth, const fs::path& train_csv, const fs::path& validation_csv,
              std::ostream& diag) {
    return guarded(diag, [&] {
        if (train_csv.empty() || validation_csv.empty())
            throw ConfigError("synth needs train and validation output paths");
        if (train_csv.has_parent_path()) fs::create_directories(train_csv.parent_path());
        if (validation_csv.has_parent_path()) fs::create_directories(validation_csv.parent_path());
        const auto result = write_synthetic_season(train_csv, validation_csv, synth);
        diag << "synthetic season: " << synth.train_days << " train days ("
             << result.train_exceedances << " exceedances), " << synth.validation_days
             << " validation days (" << result.validation_exceedances << " exceedances)\n";
    });
}

}  // namespace ozonecast
