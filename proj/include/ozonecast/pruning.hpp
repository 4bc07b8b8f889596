#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ozonecast/mlp.hpp"

namespace ozonecast {

// Penalized log-MSE: ln(mse) + w * ln(n) / n.
double bic(double mse_value, std::size_t n, std::size_t w);

struct BicValue {
    double mse = 0.0;
    std::size_t n = 0;
    std::size_t w = 0;
    double value = 0.0;
};

enum class BicTarget { train, validation };

struct PruneConfig {
    TrainConfig retrain;          // LM settings for post-elimination retrains
    int retrain_iterations = 50;  // budget per candidate
    BicTarget target = BicTarget::train;
    const FeatureTable* validation = nullptr;  // required when target == validation
    bool rank_by_magnitude = false;            // fast mode: try only the smallest active weight
};

struct PruneItem {
    enum class Kind { weight, input, hidden_unit };
    Kind kind = Kind::weight;
    std::size_t id = 0;  // flat weight index, input column, or hidden unit
    double bic_before = 0.0;
    double bic_after = 0.0;
    std::size_t active_after = 0;
    std::string describe(const Network& net, const std::vector<std::string>& columns) const;
};

struct PruneTrace {
    std::vector<PruneItem> steps;
};

// BIC of the network on the configured evaluation set. N and MSE come from
// that set; W is the active parameter count.
BicValue evaluate_bic(const Network& net, const FeatureTable& train, const PruneConfig& cfg);

// One stepwise elimination: every active non-bias weight is tentatively
// masked, the network briefly retrained, and the BIC recomputed. Returns the
// best candidate when its BIC does not exceed the current one, otherwise
// nullopt ("stop"). A hidden unit whose output weight and input weights are
// all masked is removed outright (its bias is masked too).
std::optional<Network> prune_step(const Network& net, const FeatureTable& train,
                                  const PruneConfig& cfg, PruneItem* info = nullptr);

struct PruneResult {
    Network net;
    PruneTrace trace;
};

// Iterates prune_step to a fixpoint.
PruneResult prune_to_minimal(Network net, const FeatureTable& train, const PruneConfig& cfg);

struct ArchitectureResult {
    int hidden = 0;  // hidden units remaining in the winner after pruning
    int swept = 0;   // sweep label (starting unit count) of the winner
    std::vector<std::pair<int, double>> curve;  // (starting hidden units, BIC)
    Network net;          // pruned winner; unused when the linear model wins
    PruneTrace trace;     // elimination trace of the winner
    bool net_is_linear = false;  // the 0-unit entry is an ordinary linear regression
    std::vector<double> linear_beta;  // [intercept, slopes...] when net_is_linear
};

// Sweeps hidden-unit counts: each n >= 1 is multistart-trained and pruned,
// n == 0 evaluates the ordinary linear regression. The curve reports BIC on
// `curve_target`; returns the argmin (ties to the smaller n).
ArchitectureResult select_architecture(const FeatureTable& train, const FeatureTable* validation,
                                       const std::vector<int>& hidden_range, const TrainConfig& cfg,
                                       const PruneConfig& prune_cfg,
                                       BicTarget curve_target = BicTarget::validation);

}  // namespace ozonecast
