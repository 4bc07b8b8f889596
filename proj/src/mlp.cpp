#include "ozonecast/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ozonecast/errors.hpp"
#include "ozonecast/parallel.hpp"
#include "ozonecast/rng.hpp"
#include "ozonecast/stats.hpp"

namespace ozonecast {

namespace {
constexpr double kLambdaMax = 1e12;
constexpr double kLambdaMin = 1e-14;
}  // namespace

std::size_t Network::active_count() const {
    std::size_t n = 0;
    for (const auto m : mask) n += m ? 1 : 0;
    return n;
}

std::vector<std::size_t> Network::active_indices() const {
    std::vector<std::size_t> idx;
    idx.reserve(mask.size());
    for (std::size_t k = 0; k < mask.size(); ++k)
        if (mask[k]) idx.push_back(k);
    return idx;
}

void Network::enforce_mask() {
    for (std::size_t k = 0; k < mask.size(); ++k)
        if (!mask[k]) w[k] = 0.0;
}

bool Network::unit_removed(int j) const {
    if (mask[idx_output_weight(j)]) return false;
    for (int i = 0; i < inputs; ++i)
        if (mask[idx_hidden_weight(j, i)]) return false;
    return true;
}

Network make_network(int inputs, int hidden, OutputKind output) {
    Network net;
    net.inputs = inputs;
    net.hidden = hidden;
    net.output = output;
    net.w.assign(net.param_count(), 0.0);
    net.mask.assign(net.param_count(), 1);
    return net;
}

double forward(const Network& net, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(net.inputs))
        throw DimensionMismatch("forward: expected " + std::to_string(net.inputs) +
                                " inputs, got " + std::to_string(x.size()));
    double a = net.w[net.idx_output_bias()];
    for (int j = 0; j < net.hidden; ++j) {
        const double wj = net.w[net.idx_output_weight(j)];
        if (wj == 0.0) continue;
        double h = net.w[net.idx_hidden_bias(j)];
        const std::size_t base = net.idx_hidden_weight(j, 0);
        for (int i = 0; i < net.inputs; ++i) h += net.w[base + i] * x[i];
        a += wj * std::tanh(h);
    }
    return net.output == OutputKind::sigmoid ? sigmoid(a) : a;
}

std::vector<double> jacobian(const Network& net, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(net.inputs))
        throw DimensionMismatch("jacobian: expected " + std::to_string(net.inputs) +
                                " inputs, got " + std::to_string(x.size()));
    // full gradient first, then restrict to active entries
    std::vector<double> g(net.param_count(), 0.0);
    double a = net.w[net.idx_output_bias()];
    std::vector<double> th(net.hidden);
    for (int j = 0; j < net.hidden; ++j) {
        double h = net.w[net.idx_hidden_bias(j)];
        const std::size_t base = net.idx_hidden_weight(j, 0);
        for (int i = 0; i < net.inputs; ++i) h += net.w[base + i] * x[i];
        th[j] = std::tanh(h);
        a += net.w[net.idx_output_weight(j)] * th[j];
    }
    double chain = 1.0;
    if (net.output == OutputKind::sigmoid) {
        const double y = sigmoid(a);
        chain = y * (1.0 - y);
    }
    g[net.idx_output_bias()] = chain;
    for (int j = 0; j < net.hidden; ++j) {
        g[net.idx_output_weight(j)] = chain * th[j];
        const double sech2 = 1.0 - th[j] * th[j];
        const double f = chain * net.w[net.idx_output_weight(j)] * sech2;
        g[net.idx_hidden_bias(j)] = f;
        const std::size_t base = net.idx_hidden_weight(j, 0);
        for (int i = 0; i < net.inputs; ++i) g[base + i] = f * x[i];
    }

    std::vector<double> out;
    out.reserve(net.active_count());
    for (std::size_t k = 0; k < net.mask.size(); ++k)
        if (net.mask[k]) out.push_back(g[k]);
    return out;
}

double cost(const Network& net, const FeatureTable& data) {
    double e = 0.0;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const double d = data.targets[r] - forward(net, data.x.row(r));
        e += d * d;
    }
    return 0.5 * e;
}

double mse(const Network& net, const FeatureTable& data) {
    return 2.0 * cost(net, data) / static_cast<double>(data.rows());
}

double rmse(const Network& net, const FeatureTable& data) { return std::sqrt(mse(net, data)); }

TrainResult train_lm(Network net, const FeatureTable& train, const TrainConfig& cfg) {
    if (train.rows() == 0) throw TooFewRows("train_lm: empty training set");
    if (cfg.max_iterations < 1 || !(cfg.tolerance > 0.0) || !(cfg.lambda_init > 0.0) ||
        !(cfg.lambda_up > 1.0) || !(cfg.lambda_down > 0.0))
        throw Error("train config values must be positive (and lambda_up > 1)");
    net.enforce_mask();
    const auto active = net.active_indices();
    const std::size_t q = active.size();
    const std::size_t n = train.rows();

    double e = cost(net, train);
    if (!std::isfinite(e)) throw NonFiniteCost("non-finite cost at initial weights");
    TrainResult result;
    result.cost_trace.push_back(e);
    if (q == 0) {
        result.net = std::move(net);
        return result;
    }

    double lambda = cfg.lambda_init;
    Matrix jac(n, q);
    std::vector<double> residual(n);

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        for (std::size_t r = 0; r < n; ++r) {
            const auto row = train.x.row(r);
            residual[r] = train.targets[r] - forward(net, row);
            const auto g = jacobian(net, row);
            for (std::size_t k = 0; k < q; ++k) jac(r, k) = g[k];
        }
        const auto grad = transpose_matvec(jac, residual);  // Jᵀr
        double gmax = 0.0;
        for (double v : grad) gmax = std::max(gmax, std::fabs(v));
        if (gmax < 1e-14) break;  // stationary point

        const Matrix jtj = gram(jac);
        bool accepted = false;
        while (lambda <= kLambdaMax) {
            Matrix a = jtj;
            for (std::size_t k = 0; k < q; ++k) a(k, k) += lambda;
            Cholesky chol(a);
            if (chol.ok()) {
                const auto step = chol.solve(grad);
                Network trial = net;
                for (std::size_t k = 0; k < q; ++k) trial.w[active[k]] += step[k];
                const double e_new = cost(trial, train);
                if (std::isfinite(e_new) && e_new < e) {
                    const double rel = (e - e_new) / std::max(e, 1e-300);
                    net = std::move(trial);
                    e = e_new;
                    result.cost_trace.push_back(e);
                    lambda = std::max(lambda / cfg.lambda_down, kLambdaMin);
                    accepted = true;
                    if (rel < cfg.tolerance) {
                        result.net = std::move(net);
                        return result;
                    }
                    break;
                }
            }
            lambda *= cfg.lambda_up;
        }
        if (!accepted) break;  // damping exhausted: no descent direction left
    }
    result.net = std::move(net);
    return result;
}

Network init_from_linear(const FeatureTable& train, int hidden, std::uint64_t seed,
                         OutputKind output) {
    const std::size_t n = train.rows();
    const std::size_t p = train.cols();
    if (n < 2) throw TooFewRows("init_from_linear needs at least 2 rows");
    Network net = make_network(static_cast<int>(p), hidden, output);

    const double target_mean = mean_of(train.targets);
    // a sigmoid output works on the logit scale: place the base rate in the
    // pre-activation and scale linear deviations by the link derivative
    double bias = target_mean;
    double link_scale = 1.0;
    if (output == OutputKind::sigmoid) {
        const double rate = std::clamp(target_mean, 1e-6, 1.0 - 1e-6);
        bias = std::log(rate / (1.0 - rate));
        link_scale = 1.0 / (rate * (1.0 - rate));
    }
    net.w[net.idx_output_bias()] = bias;
    if (hidden == 0) return net;

    // OLS of the centered targets on [1 | X]
    Matrix design(n, p + 1);
    std::vector<double> yc(n);
    for (std::size_t r = 0; r < n; ++r) {
        design(r, 0) = 1.0;
        for (std::size_t c = 0; c < p; ++c) design(r, c + 1) = train.x(r, c);
        yc[r] = train.targets[r] - target_mean;
    }
    PivotedQr qr(design);
    if (!qr.full_rank()) throw SingularDesign("init_from_linear: design matrix is rank deficient");
    auto beta = qr.solve(yc);
    for (auto& b : beta) b *= link_scale;

    // scale into the near-linear range of tanh so the initial net reproduces
    // the linear fit
    double max_abs = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double pre = beta[0];
        for (std::size_t c = 0; c < p; ++c) pre += beta[c + 1] * train.x(r, c);
        max_abs = std::max(max_abs, std::fabs(pre));
    }
    const double gamma = max_abs > 0.5 ? 0.5 / max_abs : 1.0;

    Rng rng(seed);
    for (int j = 0; j < hidden; ++j) {
        net.w[net.idx_hidden_bias(j)] = gamma * beta[0] + rng.normal(0.0, 0.01);
        for (std::size_t c = 0; c < p; ++c)
            net.w[net.idx_hidden_weight(j, static_cast<int>(c))] =
                gamma * beta[c + 1] + rng.normal(0.0, 0.01);
        net.w[net.idx_output_weight(j)] = 1.0 / (gamma * hidden);
    }
    net.enforce_mask();
    return net;
}

MultistartResult multistart(const FeatureTable& train, int hidden, const TrainConfig& cfg,
                            const Network* structure) {
    if (cfg.restarts < 1) throw Error("multistart: restarts must be >= 1");
    const int restarts = cfg.restarts;
    const int inputs = static_cast<int>(train.cols());
    const OutputKind output = structure ? structure->output : OutputKind::identity;
    if (structure) hidden = structure->hidden;

    struct Slot {
        Network net;
        double cost = std::numeric_limits<double>::quiet_NaN();
        bool ok = false;
    };
    std::vector<Slot> slots(restarts);

    parallel_for(static_cast<std::size_t>(restarts), [&](std::size_t k) {
        const std::uint64_t stream = Rng::mix(cfg.seed, k);
        Network start;
        if (k == 0) {
            start = init_from_linear(train, hidden, stream, output);
        } else {
            start = make_network(inputs, hidden, output);
            Rng rng(stream);
            for (auto& w : start.w) w = rng.uniform(-0.5, 0.5);
        }
        if (structure) {
            start.mask = structure->mask;
            start.enforce_mask();
        }
        try {
            auto trained = train_lm(std::move(start), train, cfg);
            slots[k].cost = trained.cost_trace.back();
            slots[k].net = std::move(trained.net);
            slots[k].ok = true;
        } catch (const NonFiniteCost&) {
            // discarded restart
        }
    });

    MultistartResult result;
    result.restart = -1;
    result.restart_costs.resize(restarts, std::numeric_limits<double>::quiet_NaN());
    for (int k = 0; k < restarts; ++k) {
        if (!slots[k].ok) continue;
        result.restart_costs[k] = slots[k].cost;
        if (result.restart < 0 || slots[k].cost < result.cost) {
            result.cost = slots[k].cost;
            result.restart = k;
        }
    }
    if (result.restart < 0) throw NonFiniteCost("all restarts diverged");
    result.net = std::move(slots[result.restart].net);
    return result;
}

}  // namespace ozonecast
