#pragma once

#include <span>
#include <vector>

#include "ozonecast/mlp.hpp"
#include "ozonecast/uncertainty.hpp"

namespace ozonecast {

enum class TargetMode { observed, interval_augmented };

struct ExceedanceTargets {
    std::vector<double> p;  // 0/1 per training day
    bool single_class = false;
};

// observed: p_i = 1 iff the observed peak >= threshold.
ExceedanceTargets make_targets_observed(std::span<const double> observed, double threshold);

// interval-augmented: p_i = 1 iff regression point + half_width >= threshold,
// evaluated on the regression-scaled feature rows.
ExceedanceTargets make_targets_interval(const Network& regression, const IntervalContext& ctx,
                                        const FeatureTable& regression_features, double threshold,
                                        double confidence);

// Dispatcher over the two modes. interval_augmented requires the regression
// network with its interval context (MissingRegressionContext otherwise).
ExceedanceTargets make_targets(std::span<const double> observed, double threshold, TargetMode mode,
                               const Network* regression = nullptr,
                               const IntervalContext* ctx = nullptr,
                               const FeatureTable* regression_features = nullptr,
                               double confidence = 0.95);

// ŷ = σ(w0 + Σ wj tanh(...)); requires a sigmoid-output network.
double forward_classifier(const Network& net, std::span<const double> x);

// Exceedance decision: ŷ >= threshold (boundary inclusive).
bool decide(double y_hat, double threshold = 0.50);

enum class ClassifierLoss { squared, cross_entropy };

struct ClassifierConfig {
    TrainConfig train;
    ClassifierLoss loss = ClassifierLoss::squared;
};

// Trains a sigmoid-output network on 0/1 targets with the same LM +
// multistart machinery as the regression path. `structure` reproduces the
// architecture (hidden units, mask) of a regression model. Throws
// SingleClass unless both classes are present.
Network train_classifier(const FeatureTable& train, std::span<const double> targets,
                         int hidden, const ClassifierConfig& cfg,
                         const Network* structure = nullptr);

}  // namespace ozonecast
