#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ozonecast/dataset.hpp"

namespace ozonecast {

enum class OutputKind { identity, sigmoid };

// One-hidden-layer perceptron ŷ = g(w0 + Σ_j wj·tanh(bj + Σ_i wji·xi)) with
// g = identity (regression) or the logistic function (classifier).
//
// Parameters live in one flat array, layout:
//   [hidden biases | hidden input weights row-major | output bias | output weights]
// mask[k] == 0 marks a pruned parameter; pruned parameters are exactly 0 and
// stay 0 through training.
struct Network {
    int inputs = 0;
    int hidden = 0;
    OutputKind output = OutputKind::identity;
    std::vector<double> w;
    std::vector<std::uint8_t> mask;

    std::size_t param_count() const {
        return static_cast<std::size_t>(hidden) * (inputs + 2) + 1;
    }
    std::size_t idx_hidden_bias(int j) const { return static_cast<std::size_t>(j); }
    std::size_t idx_hidden_weight(int j, int i) const {
        return static_cast<std::size_t>(hidden) + static_cast<std::size_t>(j) * inputs + i;
    }
    std::size_t idx_output_bias() const {
        return static_cast<std::size_t>(hidden) * (inputs + 1);
    }
    std::size_t idx_output_weight(int j) const { return idx_output_bias() + 1 + j; }

    bool is_bias_index(std::size_t k) const {
        return k < static_cast<std::size_t>(hidden) || k == idx_output_bias();
    }

    std::size_t active_count() const;
    std::vector<std::size_t> active_indices() const;
    // Zeroes every masked parameter.
    void enforce_mask();
    // A unit is removed once its output weight and all input weights are masked.
    bool unit_removed(int j) const;
};

Network make_network(int inputs, int hidden, OutputKind output = OutputKind::identity);

// Model output for one input row. Applies the network's output function.
double forward(const Network& net, std::span<const double> x);

// Gradient of the model output with respect to the active parameters, in
// flat-index order restricted to active entries. For sigmoid output the
// chain factor ŷ(1-ŷ) is included.
std::vector<double> jacobian(const Network& net, std::span<const double> x);

// E = ½ Σ (y - ŷ)²
double cost(const Network& net, const FeatureTable& data);
double rmse(const Network& net, const FeatureTable& data);
double mse(const Network& net, const FeatureTable& data);

struct TrainConfig {
    int max_iterations = 500;
    double lambda_init = 1e-2;   // LM damping
    double lambda_up = 10.0;     // on rejected step
    double lambda_down = 10.0;   // on accepted step
    double tolerance = 1e-9;     // relative cost decrease
    int restarts = 1;
    std::uint64_t seed = 0;
};

struct TrainResult {
    Network net;
    std::vector<double> cost_trace;  // cost at start plus after each accepted step
};

// Levenberg-Marquardt descent on E. Accepted steps strictly decrease the
// cost, so the trace is monotone non-increasing. Masked parameters are held
// at 0. Throws NonFiniteCost when the starting cost is not finite.
TrainResult train_lm(Network net, const FeatureTable& train, const TrainConfig& cfg);

// Hidden input weights seeded from an ordinary-least-squares fit of the
// centered targets (scaled into the near-linear range of tanh), output bias
// set to the target mean, plus N(0, 0.01) noise so replicas differ.
Network init_from_linear(const FeatureTable& train, int hidden, std::uint64_t seed,
                         OutputKind output = OutputKind::identity);

struct MultistartResult {
    Network net;
    double cost = 0.0;
    int restart = 0;
    std::vector<double> restart_costs;  // NaN for discarded restarts
};

// Restart 0 starts from init_from_linear, the rest from seeded uniform
// weights in [-0.5, 0.5]. Restarts run in parallel; the winner is the
// deterministic argmin of (final cost, restart index). A restart that hits
// NonFiniteCost is discarded. `structure` optionally supplies dims, mask
// and output kind to reproduce an existing architecture.
MultistartResult multistart(const FeatureTable& train, int hidden, const TrainConfig& cfg,
                            const Network* structure = nullptr);

}  // namespace ozonecast
