#pragma once

#include <span>
#include <vector>

#include "ozonecast/mlp.hpp"
#include "ozonecast/stats.hpp"

namespace ozonecast {

// Leverages h_ii = z_iᵀ (ZᵀZ)⁻¹ z_i of the training examples, where row z_i
// is the gradient of the model output at example i with respect to the q
// active parameters.
struct LeverageSet {
    std::vector<double> h;
    Matrix gram_inverse;  // (ZᵀZ)⁻¹, q x q
    std::size_t q = 0;
    std::size_t n = 0;
};

// Core computation from an explicit design/gradient matrix. Rank deficiency
// (relative pivot below 1e-10) raises RankDeficient with the effective rank.
LeverageSet leverages_from_design(const Matrix& z, double rel_tol = 1e-10);

LeverageSet leverages(const Network& net, const FeatureTable& train);

// S = sqrt( Σ r_i² / (N - q) ) over training residuals.
double residual_std(const Network& net, const FeatureTable& train, std::size_t q);

// Everything needed to build intervals for new inputs; cached in the model
// file so forecasting does not require the training data.
struct IntervalContext {
    Matrix gram_inverse;
    double s = 0.0;
    std::size_t q = 0;
    std::size_t n = 0;
};

IntervalContext make_interval_context(const Network& net, const FeatureTable& train);

struct PredictionInterval {
    double point = 0.0;
    double half_width = 0.0;
    double confidence = 0.95;
    std::size_t dof = 1;
    double lower() const { return point - half_width; }
    double upper() const { return point + half_width; }
};

// half_width = t_{(1+confidence)/2, N-q} * S * sqrt(zᵀ(ZᵀZ)⁻¹z) with z the
// gradient at x. include_noise adds 1 under the square root (observation
// noise variant).
PredictionInterval prediction_interval(const Network& net, const IntervalContext& ctx,
                                       std::span<const double> x, double confidence,
                                       bool include_noise = false);

// Same interval machinery for a model that is linear in its parameters:
// z = [1, x...].
PredictionInterval prediction_interval_linear(std::span<const double> beta,
                                              const IntervalContext& ctx,
                                              std::span<const double> x, double confidence,
                                              bool include_noise = false);

// Alarm rule: point + half_width >= threshold (boundary inclusive).
bool exceedance_by_interval(const PredictionInterval& interval, double threshold);

}  // namespace ozonecast
