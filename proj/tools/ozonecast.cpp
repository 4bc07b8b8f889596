// ozonecast: train, prune and evaluate next-day ozone-peak forecasters with
// threshold-exceedance alarms. See README.md for the workflow.

#include <CLI11.hpp>
#include <iostream>
#include <sstream>

#include "ozonecast/errors.hpp"
#include "ozonecast/pipeline.hpp"

namespace {

using ozonecast::RunConfig;

std::vector<int> parse_hidden_range(const std::string& text) {
    std::vector<int> out;
    if (text.empty()) return out;
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const int lo = std::stoi(text.substr(0, colon));
        const int hi = std::stoi(text.substr(colon + 1));
        for (int n = lo; n <= hi; ++n) out.push_back(n);
        return out;
    }
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stoi(cell));
    return out;
}

struct CommonFlags {
    std::string config, train, validation, model, out;
    std::string hidden_range, balance, target_mode, baselines, bic_on, classifier_loss;
    double threshold = -1.0, confidence = -1.0, ridge_lambda = -1.0;
    std::int64_t seed = -1;
    int restarts = -1;
    bool prune_fast = false, interval_noise = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "JSON config file; flags override its values");
    cmd->add_option("--train", f.train, "training CSV (or archive for retrain)");
    cmd->add_option("--validation", f.validation, "validation CSV");
    cmd->add_option("--model", f.model, "model file path");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--threshold", f.threshold, "exceedance threshold in ug/m3 (default 180)");
    cmd->add_option("--confidence", f.confidence, "interval confidence level (default 0.95)");
    cmd->add_option("--hidden-range", f.hidden_range, "hidden-unit sweep, e.g. 0:3 or 0,1,2");
    cmd->add_option("--balance", f.balance, "pattern balancing 'a,b,theta,mult' or 'none'");
    cmd->add_option("--target-mode", f.target_mode, "classifier targets: observed|interval");
    cmd->add_option("--baselines", f.baselines, "comma list of pers,lin,logistic (empty = none)");
    cmd->add_option("--bic-on", f.bic_on, "BIC evaluation set: train|validation");
    cmd->add_option("--classifier-loss", f.classifier_loss, "squared|cross_entropy");
    cmd->add_option("--restarts", f.restarts, "multistart restart count");
    cmd->add_option("--ridge-lambda", f.ridge_lambda, "ridge penalty for the LIN baseline");
    cmd->add_flag("--prune-fast", f.prune_fast, "magnitude-ranked pruning candidates");
    cmd->add_flag("--interval-noise", f.interval_noise,
                  "add observation noise to the interval half-width");
}

RunConfig build_config(const CommonFlags& f, bool bic_required) {
    RunConfig cfg;
    bool bic_set = false;
    if (!f.config.empty()) {
        cfg = ozonecast::config_from_json(f.config);
        bic_set = true;  // config files carry an explicit or default choice
    }
    if (!f.train.empty()) cfg.train_csv = f.train;
    if (!f.validation.empty()) cfg.validation_csv = f.validation;
    if (!f.model.empty()) cfg.model_path = f.model;
    if (!f.out.empty()) cfg.out_dir = f.out;
    if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
    if (f.threshold >= 0.0) cfg.threshold = f.threshold;
    if (f.confidence >= 0.0) cfg.confidence = f.confidence;
    if (f.restarts >= 0) cfg.restarts = f.restarts;
    if (f.ridge_lambda >= 0.0) cfg.ridge_lambda = f.ridge_lambda;
    if (f.prune_fast) cfg.prune_fast = true;
    if (f.interval_noise) cfg.interval_include_noise = true;
    if (!f.hidden_range.empty()) cfg.hidden_range = parse_hidden_range(f.hidden_range);
    if (!f.balance.empty()) {
        if (f.balance == "none") {
            cfg.balance.reset();
        } else {
            ozonecast::BalanceSpec spec;
            if (std::sscanf(f.balance.c_str(), "%lf,%lf,%lf,%d", &spec.a, &spec.b,
                            &spec.threshold, &spec.multiplier) != 4)
                throw ozonecast::ConfigError("--balance expects 'a,b,theta,mult' or 'none'");
            cfg.balance = spec;
        }
    }
    if (!f.target_mode.empty()) {
        if (f.target_mode == "observed")
            cfg.target_mode = ozonecast::TargetMode::observed;
        else if (f.target_mode == "interval")
            cfg.target_mode = ozonecast::TargetMode::interval_augmented;
        else
            throw ozonecast::ConfigError("--target-mode must be observed or interval");
    }
    if (!f.baselines.empty()) {
        cfg.baseline_pers = cfg.baseline_lin = cfg.baseline_logistic = false;
        std::stringstream ss(f.baselines);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            if (cell == "pers")
                cfg.baseline_pers = true;
            else if (cell == "lin")
                cfg.baseline_lin = true;
            else if (cell == "logistic")
                cfg.baseline_logistic = true;
            else if (!cell.empty())
                throw ozonecast::ConfigError("unknown baseline '" + cell + "'");
        }
    }
    if (!f.bic_on.empty()) {
        bic_set = true;
        if (f.bic_on == "train")
            cfg.bic_on = ozonecast::BicTarget::train;
        else if (f.bic_on == "validation")
            cfg.bic_on = ozonecast::BicTarget::validation;
        else
            throw ozonecast::ConfigError("--bic-on must be train or validation");
    }
    if (!f.classifier_loss.empty()) {
        if (f.classifier_loss == "squared")
            cfg.classifier_loss = ozonecast::ClassifierLoss::squared;
        else if (f.classifier_loss == "cross_entropy")
            cfg.classifier_loss = ozonecast::ClassifierLoss::cross_entropy;
        else
            throw ozonecast::ConfigError("--classifier-loss must be squared or cross_entropy");
    }
    // the BIC evaluation set is a modelling choice with no neutral default
    // when sweeping architectures
    if (bic_required && !bic_set && cfg.hidden_range.size() > 1)
        throw ozonecast::ConfigError(
            "choose the BIC evaluation set explicitly: --bic-on train|validation");
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"next-day ozone peak forecasting with exceedance alarms"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string days_csv, season_csv;

    auto* train = app.add_subcommand("train", "fit, prune and save the forecast models");
    add_common(train, flags);
    auto* evaluate = app.add_subcommand("evaluate", "score models on a validation season");
    add_common(evaluate, flags);
    auto* forecast = app.add_subcommand("forecast", "forecast new days with intervals and alarms");
    add_common(forecast, flags);
    forecast->add_option("days_csv", days_csv, "CSV of feature rows to forecast")->required();
    auto* retrain = app.add_subcommand("retrain", "append a season to the archive and retrain");
    add_common(retrain, flags);
    retrain->add_option("season_csv", season_csv, "CSV of the new season")->required();
    auto* plotdata = app.add_subcommand("plotdata", "emit plot-ready CSV series");
    add_common(plotdata, flags);

    auto* synth = app.add_subcommand("synth", "generate a synthetic season");
    ozonecast::SynthConfig synth_cfg;
    std::string synth_train = "train.csv", synth_validation = "validation.csv";
    synth->add_option("--train-out", synth_train, "training CSV to write");
    synth->add_option("--validation-out", synth_validation, "validation CSV to write");
    synth->add_option("--train-days", synth_cfg.train_days, "training season length");
    synth->add_option("--validation-days", synth_cfg.validation_days, "validation season length");
    synth->add_option("--exceedances", synth_cfg.planted_validation_exceedances,
                      "planted validation exceedances");
    synth->add_option("--noise", synth_cfg.noise_sd, "target noise standard deviation");
    std::int64_t synth_seed = 1;
    synth->add_option("--seed", synth_seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ozonecast::kExitUsage;
    }

    try {
        if (synth->parsed()) {
            synth_cfg.seed = static_cast<std::uint64_t>(synth_seed);
            return ozonecast::cmd_synth(synth_cfg, synth_train, synth_validation, std::cerr);
        }
        const RunConfig cfg = build_config(flags, train->parsed() || retrain->parsed());
        if (train->parsed()) return ozonecast::cmd_train(cfg, std::cerr);
        if (evaluate->parsed()) return ozonecast::cmd_evaluate(cfg, std::cerr);
        if (forecast->parsed()) return ozonecast::cmd_forecast(cfg, days_csv, std::cerr);
        if (retrain->parsed()) return ozonecast::cmd_retrain(cfg, season_csv, std::cerr);
        if (plotdata->parsed()) return ozonecast::cmd_plotdata(cfg, std::cerr);
    } catch (const ozonecast::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ozonecast::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return ozonecast::kExitInternal;
    }
    return ozonecast::kExitUsage;
}
