#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ozonecast/classifier.hpp"
#include "ozonecast/dataset.hpp"
#include "ozonecast/pruning.hpp"
#include "ozonecast/synth.hpp"

namespace ozonecast {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
    std::filesystem::path train_csv;
    std::filesystem::path validation_csv;
    std::filesystem::path model_path;  // defaults to out_dir/model.json
    std::filesystem::path out_dir = ".";

    double threshold = 180.0;
    double confidence = 0.95;
    std::vector<int> hidden_range = {0, 1, 2};
    std::optional<BalanceSpec> balance;
    std::uint64_t seed = 1;

    bool baseline_pers = true;
    bool baseline_lin = true;
    bool baseline_logistic = true;

    TargetMode target_mode = TargetMode::observed;
    BicTarget bic_on = BicTarget::validation;
    ClassifierLoss classifier_loss = ClassifierLoss::squared;
    bool interval_include_noise = false;
    bool prune_fast = false;

    int restarts = 4;
    int max_iterations = 500;
    double ridge_lambda = 0.05;
    double keep_p = 0.05;  // stepwise logistic significance level

    CsvSchema schema = synth_schema();

    // model path with the out_dir default applied
    std::filesystem::path resolved_model_path() const;
    // companion classifier model, next to the regression model
    std::filesystem::path classifier_path() const;
};

// Reads a JSON config file; missing keys keep their defaults.
RunConfig config_from_json(const std::filesystem::path& path);

// Subcommands. Each returns an exit code and reports diagnostics on `diag`;
// errors derived from ozonecast::Error exit 2, anything else exits 1.
int cmd_train(const RunConfig& cfg, std::ostream& diag);
int cmd_evaluate(const RunConfig& cfg, std::ostream& diag);
int cmd_forecast(const RunConfig& cfg, const std::filesystem::path& days_csv, std::ostream& diag);
int cmd_retrain(const RunConfig& cfg, const std::filesystem::path& season_csv, std::ostream& diag);
int cmd_plotdata(const RunConfig& cfg, std::ostream& diag);
int cmd_synth(const SynthConfig& synth, const std::filesystem::path& train_csv,
              const std::filesystem::path& validation_csv, std::ostream& diag);

}  // namespace ozonecast
