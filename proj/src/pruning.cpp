#include "ozonecast/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ozonecast/errors.hpp"
#include "ozonecast/parallel.hpp"
#include "ozonecast/rng.hpp"

namespace ozonecast {

double bic(double mse_value, std::size_t n, std::size_t w) {
    if (!(mse_value > 0.0)) throw NonPositiveMse("bic: mse must be positive");
    if (n < 1) throw Error("bic: n must be >= 1");
    const double nn = static_cast<double>(n);
    return std::log(mse_value) + static_cast<double>(w) * std::log(nn) / nn;
}

namespace {

// Guard for exactly-interpolated models: ln(0) would poison the sweep.
double bic_clamped(double mse_value, std::size_t n, std::size_t w) {
    return bic(std::max(mse_value, 1e-300), n, w);
}

// Masks weight k; if that completes the removal of a hidden unit, masks the
// unit's bias as well.
void mask_weight(Network& net, std::size_t k) {
    net.mask[k] = 0;
    net.w[k] = 0.0;
    for (int j = 0; j < net.hidden; ++j) {
        if (net.unit_removed(j) && net.mask[net.idx_hidden_bias(j)]) {
            net.mask[net.idx_hidden_bias(j)] = 0;
            net.w[net.idx_hidden_bias(j)] = 0.0;
        }
    }
}

std::vector<std::size_t> prunable_weights(const Network& net) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < net.mask.size(); ++k)
        if (net.mask[k] && !net.is_bias_index(k)) out.push_back(k);
    return out;
}

bool input_column_active(const Network& net, int i) {
    for (int j = 0; j < net.hidden; ++j)
        if (net.mask[net.idx_hidden_weight(j, i)]) return true;
    return false;
}

}  // namespace

std::string PruneItem::describe(const Network& net, const std::vector<std::string>& columns) const {
    switch (kind) {
        case Kind::hidden_unit:
            return "hidden_unit " + std::to_string(id);
        case Kind::input:
            return "input " + (id < columns.size() ? columns[id] : std::to_string(id));
        case Kind::weight: {
            const std::size_t ob = net.idx_output_bias();
            if (id > ob) return "output_weight " + std::to_string(id - ob - 1);
            const std::size_t h = static_cast<std::size_t>(net.hidden);
            const std::size_t j = (id - h) / net.inputs;
            const std::size_t i = (id - h) % net.inputs;
            return "weight unit" + std::to_string(j) + ":" +
                   (i < columns.size() ? columns[i] : std::to_string(i));
        }
    }
    return "?";
}

BicValue evaluate_bic(const Network& net, const FeatureTable& train, const PruneConfig& cfg) {
    const FeatureTable* eval = &train;
    if (cfg.target == BicTarget::validation) {
        if (!cfg.validation) throw ConfigError("validation table required for validation BIC");
        eval = cfg.validation;
    }
    BicValue v;
    v.mse = mse(net, *eval);
    v.n = eval->rows();
    v.w = net.active_count();
    v.value = bic_clamped(v.mse, v.n, v.w);
    return v;
}

std::optional<Network> prune_step(const Network& net, const FeatureTable& train,
                                  const PruneConfig& cfg, PruneItem* info) {
    const auto weights = prunable_weights(net);
    if (weights.empty()) throw Error("prune_step: no active non-bias weight");

    // Candidates: every single weight, plus whole input columns and whole
    // hidden units. A redundant unit driven into a saturated lobe cannot be
    // dismantled one weight at a time (any single removal costs more MSE
    // than one parameter's penalty), but removing the unit outright pays
    // for all its parameters at once.
    struct Spec {
        PruneItem::Kind kind;
        std::size_t id;
    };
    std::vector<Spec> candidates;
    if (cfg.rank_by_magnitude) {
        // fast mode: only the smallest-magnitude active weight is tried
        std::size_t best = weights[0];
        for (const std::size_t k : weights)
            if (std::fabs(net.w[k]) < std::fabs(net.w[best])) best = k;
        candidates.push_back({PruneItem::Kind::weight, best});
    } else {
        for (const std::size_t k : weights) candidates.push_back({PruneItem::Kind::weight, k});
        for (int i = 0; i < net.inputs; ++i)
            if (input_column_active(net, i))
                candidates.push_back({PruneItem::Kind::input, static_cast<std::size_t>(i)});
        for (int j = 0; j < net.hidden; ++j)
            if (!net.unit_removed(j))
                candidates.push_back({PruneItem::Kind::hidden_unit, static_cast<std::size_t>(j)});
    }

    const BicValue current = evaluate_bic(net, train, cfg);

    TrainConfig retrain_cfg = cfg.retrain;
    retrain_cfg.max_iterations = cfg.retrain_iterations;

    struct Candidate {
        Network net;
        double bic = std::numeric_limits<double>::infinity();
        std::size_t active = 0;
    };
    std::vector<Candidate> results(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t c) {
        Network trial = net;
        switch (candidates[c].kind) {
            case PruneItem::Kind::weight:
                mask_weight(trial, candidates[c].id);
                break;
            case PruneItem::Kind::input:
                for (int j = 0; j < trial.hidden; ++j)
                    mask_weight(trial, trial.idx_hidden_weight(j, static_cast<int>(candidates[c].id)));
                break;
            case PruneItem::Kind::hidden_unit: {
                const int j = static_cast<int>(candidates[c].id);
                mask_weight(trial, trial.idx_output_weight(j));
                for (int i = 0; i < trial.inputs; ++i)
                    mask_weight(trial, trial.idx_hidden_weight(j, i));
                break;
            }
        }
        auto trained = train_lm(std::move(trial), train, retrain_cfg);
        results[c].net = std::move(trained.net);
        results[c].bic = evaluate_bic(results[c].net, train, cfg).value;
        results[c].active = results[c].net.active_count();
    });

    // deterministic reduction: lowest BIC, then fewest parameters, then
    // candidate order (single weights first)
    std::size_t best = 0;
    for (std::size_t c = 1; c < results.size(); ++c) {
        if (results[c].bic < results[best].bic ||
            (results[c].bic == results[best].bic && results[c].active < results[best].active))
            best = c;
    }
    if (!(results[best].bic <= current.value)) return std::nullopt;

    if (info) {
        info->kind = candidates[best].kind;
        info->id = candidates[best].id;
        info->bic_before = current.value;
        info->bic_after = results[best].bic;
        info->active_after = results[best].active;
        // a single-weight removal may complete a unit or an input column;
        // report at the coarser granularity
        const Network& after = results[best].net;
        if (info->kind == PruneItem::Kind::weight) {
            for (int j = 0; j < net.hidden; ++j) {
                if (!net.unit_removed(j) && after.unit_removed(j)) {
                    info->kind = PruneItem::Kind::hidden_unit;
                    info->id = static_cast<std::size_t>(j);
                }
            }
        }
        if (info->kind == PruneItem::Kind::weight) {
            for (int i = 0; i < net.inputs; ++i) {
                if (input_column_active(net, i) && !input_column_active(after, i)) {
                    info->kind = PruneItem::Kind::input;
                    info->id = static_cast<std::size_t>(i);
                }
            }
        }
    }
    return std::move(results[best].net);
}

PruneResult prune_to_minimal(Network net, const FeatureTable& train, const PruneConfig& cfg) {
    PruneResult result;
    while (!prunable_weights(net).empty()) {
        PruneItem item;
        auto next = prune_step(net, train, cfg, &item);
        if (!next) break;
        net = std::move(*next);
        result.trace.steps.push_back(item);
    }
    result.net = std::move(net);
    return result;
}

ArchitectureResult select_architecture(const FeatureTable& train, const FeatureTable* validation,
                                       const std::vector<int>& hidden_range, const TrainConfig& cfg,
                                       const PruneConfig& prune_cfg, BicTarget curve_target) {
    if (hidden_range.empty()) throw ConfigError("hidden-unit sweep range is empty");
    if (curve_target == BicTarget::validation && !validation)
        throw ConfigError("validation table required for validation BIC");
    const FeatureTable& eval = curve_target == BicTarget::validation ? *validation : train;

    ArchitectureResult result;
    double best_bic = std::numeric_limits<double>::infinity();
    bool have_best = false;

    std::vector<int> range = hidden_range;
    std::sort(range.begin(), range.end());
    range.erase(std::unique(range.begin(), range.end()), range.end());

    for (const int n : range) {
        double value;
        Network candidate;
        PruneTrace trace;
        std::vector<double> beta;
        if (n == 0) {
            // multilinear regression baseline
            Matrix design(train.rows(), train.cols() + 1);
            for (std::size_t r = 0; r < train.rows(); ++r) {
                design(r, 0) = 1.0;
                for (std::size_t c = 0; c < train.cols(); ++c) design(r, c + 1) = train.x(r, c);
            }
            PivotedQr qr(design);
            if (!qr.full_rank()) throw SingularDesign("linear baseline: rank deficient design");
            beta = qr.solve(train.targets);
            double sse = 0.0;
            for (std::size_t r = 0; r < eval.rows(); ++r) {
                double pred = beta[0];
                for (std::size_t c = 0; c < eval.cols(); ++c) pred += beta[c + 1] * eval.x(r, c);
                const double d = eval.targets[r] - pred;
                sse += d * d;
            }
            value = bic(std::max(sse / static_cast<double>(eval.rows()), 1e-300), eval.rows(),
                        train.cols() + 1);
        } else {
            TrainConfig cfg_n = cfg;
            cfg_n.seed = Rng::mix(cfg.seed, 0x5A5A0000ULL + static_cast<std::uint64_t>(n));
            auto start = multistart(train, n, cfg_n);
            auto pruned = prune_to_minimal(std::move(start.net), train, prune_cfg);
            candidate = std::move(pruned.net);
            trace = std::move(pruned.trace);
            value = bic(std::max(mse(candidate, eval), 1e-300), eval.rows(),
                        candidate.active_count());
        }
        result.curve.emplace_back(n, value);
        if (!have_best || value < best_bic) {
            have_best = true;
            best_bic = value;
            result.swept = n;
            result.net_is_linear = (n == 0);
            result.linear_beta = beta;
            result.net = std::move(candidate);
            result.trace = std::move(trace);
        }
    }
    // pruning can dismantle whole units, so the architecture that was
    // actually selected is the winner's remaining unit count
    result.hidden = 0;
    if (!result.net_is_linear)
        for (int j = 0; j < result.net.hidden; ++j)
            result.hidden += result.net.unit_removed(j) ? 0 : 1;
    return result;
}

}  // namespace ozonecast
