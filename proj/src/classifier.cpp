#include "ozonecast/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ozonecast/errors.hpp"
#include "ozonecast/parallel.hpp"
#include "ozonecast/rng.hpp"
#include "ozonecast/stats.hpp"

namespace ozonecast {

ExceedanceTargets make_targets_observed(std::span<const double> observed, double threshold) {
    ExceedanceTargets out;
    out.p.reserve(observed.size());
    for (const double v : observed) out.p.push_back(v >= threshold ? 1.0 : 0.0);
    const double first = out.p.empty() ? 0.0 : out.p.front();
    out.single_class = std::all_of(out.p.begin(), out.p.end(), [&](double v) { return v == first; });
    return out;
}

ExceedanceTargets make_targets_interval(const Network& regression, const IntervalContext& ctx,
                                        const FeatureTable& regression_features, double threshold,
                                        double confidence) {
    ExceedanceTargets out;
    out.p.reserve(regression_features.rows());
    for (std::size_t r = 0; r < regression_features.rows(); ++r) {
        const auto interval =
            prediction_interval(regression, ctx, regression_features.x.row(r), confidence);
        out.p.push_back(exceedance_by_interval(interval, threshold) ? 1.0 : 0.0);
    }
    const double first = out.p.empty() ? 0.0 : out.p.front();
    out.single_class = std::all_of(out.p.begin(), out.p.end(), [&](double v) { return v == first; });
    return out;
}

ExceedanceTargets make_targets(std::span<const double> observed, double threshold, TargetMode mode,
                               const Network* regression, const IntervalContext* ctx,
                               const FeatureTable* regression_features, double confidence) {
    if (mode == TargetMode::observed) return make_targets_observed(observed, threshold);
    if (!regression || !ctx || !regression_features)
        throw MissingRegressionContext(
            "interval-augmented targets need a trained regression network with leverage context");
    return make_targets_interval(*regression, *ctx, *regression_features, threshold, confidence);
}

double forward_classifier(const Network& net, std::span<const double> x) {
    if (net.output != OutputKind::sigmoid)
        throw WrongOutputKind("forward_classifier requires a sigmoid-output network");
    return forward(net, x);
}

bool decide(double y_hat, double threshold) {
    if (y_hat < 0.0 || y_hat > 1.0) throw OutOfDomain("decide: probability outside [0, 1]");
    return y_hat >= threshold;
}

namespace {

double cross_entropy(const Network& net, const FeatureTable& data,
                     std::span<const double> targets) {
    double ce = 0.0;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const double y = std::clamp(forward(net, data.x.row(r)), 1e-12, 1.0 - 1e-12);
        ce -= targets[r] * std::log(y) + (1.0 - targets[r]) * std::log(1.0 - y);
    }
    return ce;
}

// Gauss-Newton / LM on the cross-entropy loss. Gradients are taken with
// respect to the pre-sigmoid output a: dCE/da = ŷ - p, and the GN Hessian
// is Σ ŷ(1-ŷ)·(da/dw)(da/dw)ᵀ.
struct CeTrainResult {
    Network net;
    double loss = 0.0;
};

CeTrainResult train_lm_cross_entropy(Network net, const FeatureTable& train,
                                     std::span<const double> targets, const TrainConfig& cfg) {
    net.enforce_mask();
    Network pre = net;  // identity view for da/dw
    pre.output = OutputKind::identity;

    const auto active = net.active_indices();
    const std::size_t q = active.size();
    const std::size_t n = train.rows();

    double loss = cross_entropy(net, train, targets);
    if (!std::isfinite(loss)) throw NonFiniteCost("non-finite cross-entropy at initial weights");
    if (q == 0) return {std::move(net), loss};

    double lambda = cfg.lambda_init;
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        Matrix jtj(q, q);
        std::vector<double> grad(q, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            const auto row = train.x.row(r);
            const double y = forward(net, row);
            const auto da = jacobian(pre, row);
            const double residual = targets[r] - y;
            const double weight = std::max(y * (1.0 - y), 1e-12);
            for (std::size_t i = 0; i < q; ++i) {
                grad[i] += residual * da[i];
                for (std::size_t j = i; j < q; ++j) jtj(i, j) += weight * da[i] * da[j];
            }
        }
        for (std::size_t i = 0; i < q; ++i)
            for (std::size_t j = 0; j < i; ++j) jtj(i, j) = jtj(j, i);

        double gmax = 0.0;
        for (double v : grad) gmax = std::max(gmax, std::fabs(v));
        if (gmax < 1e-12) break;

        bool accepted = false;
        while (lambda <= 1e12) {
            Matrix a = jtj;
            for (std::size_t k = 0; k < q; ++k) a(k, k) += lambda;
            Cholesky chol(a);
            if (chol.ok()) {
                const auto step = chol.solve(grad);
                Network trial = net;
                for (std::size_t k = 0; k < q; ++k) trial.w[active[k]] += step[k];
                const double trial_loss = cross_entropy(trial, train, targets);
                if (std::isfinite(trial_loss) && trial_loss < loss) {
                    const double rel = (loss - trial_loss) / std::max(loss, 1e-300);
                    net = std::move(trial);
                    pre = net;
                    pre.output = OutputKind::identity;
                    loss = trial_loss;
                    lambda = std::max(lambda / cfg.lambda_down, 1e-14);
                    accepted = true;
                    if (rel < cfg.tolerance) return {std::move(net), loss};
                    break;
                }
            }
            lambda *= cfg.lambda_up;
        }
        if (!accepted) break;
    }
    return {std::move(net), loss};
}

}  // namespace

Network train_classifier(const FeatureTable& train, std::span<const double> targets, int hidden,
                         const ClassifierConfig& cfg, const Network* structure) {
    if (targets.size() != train.rows())
        throw DimensionMismatch("train_classifier: target count mismatch");
    bool has0 = false, has1 = false;
    for (const double p : targets) (p >= 0.5 ? has1 : has0) = true;
    if (!has0 || !has1) throw SingleClass("training targets contain a single class");

    FeatureTable labeled = train;
    labeled.targets.assign(targets.begin(), targets.end());

    Network tmpl = structure ? *structure : make_network(static_cast<int>(train.cols()), hidden);
    tmpl.output = OutputKind::sigmoid;
    tmpl.enforce_mask();

    if (cfg.loss == ClassifierLoss::squared) {
        return multistart(labeled, tmpl.hidden, cfg.train, &tmpl).net;
    }

    // cross-entropy restarts, same seeding scheme as multistart
    const int restarts = cfg.train.restarts;
    struct Slot {
        Network net;
        double loss = std::numeric_limits<double>::quiet_NaN();
        bool ok = false;
    };
    std::vector<Slot> slots(restarts);
    parallel_for(static_cast<std::size_t>(restarts), [&](std::size_t k) {
        const std::uint64_t stream = Rng::mix(cfg.train.seed, k);
        Network start;
        if (k == 0) {
            start = init_from_linear(labeled, tmpl.hidden, stream, OutputKind::sigmoid);
        } else {
            start = make_network(tmpl.inputs, tmpl.hidden, OutputKind::sigmoid);
            Rng rng(stream);
            for (auto& w : start.w) w = rng.uniform(-0.5, 0.5);
        }
        start.mask = tmpl.mask;
        start.enforce_mask();
        try {
            auto trained = train_lm_cross_entropy(std::move(start), labeled, targets, cfg.train);
            slots[k].loss = trained.loss;
            slots[k].net = std::move(trained.net);
            slots[k].ok = true;
        } catch (const NonFiniteCost&) {
        }
    });
    int best = -1;
    for (int k = 0; k < restarts; ++k) {
        if (!slots[k].ok) continue;
        if (best < 0 || slots[k].loss < slots[best].loss) best = k;
    }
    if (best < 0) throw NonFiniteCost("all classifier restarts diverged");
    return std::move(slots[best].net);
}

}  // namespace ozonecast
