#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ozonecast/classifier.hpp"
#include "ozonecast/errors.hpp"
#include "ozonecast/rng.hpp"

using namespace ozonecast;

namespace {

FeatureTable line_table(int n, Rng& rng, double lo = 0.0, double hi = 1.0) {
    FeatureTable t;
    t.columns = {"x"};
    t.x = Matrix(n, 1);
    for (int r = 0; r < n; ++r) t.x(r, 0) = rng.uniform(lo, hi);
    t.targets.assign(n, 0.0);
    return t;
}

}  // namespace

TEST_CASE("observed targets and the single-class warning") {
    const std::vector<double> peaks = {150.0, 190.0};
    const auto targets = make_targets_observed(peaks, 180.0);
    CHECK(targets.p == std::vector<double>{0.0, 1.0});
    CHECK_FALSE(targets.single_class);

    const std::vector<double> low = {100.0, 120.0, 150.0};
    const auto all_zero = make_targets_observed(low, 180.0);
    CHECK(all_zero.p == std::vector<double>{0.0, 0.0, 0.0});
    CHECK(all_zero.single_class);

    // boundary is inclusive
    const std::vector<double> edge = {180.0, 179.999};
    CHECK(make_targets_observed(edge, 180.0).p == std::vector<double>{1.0, 0.0});
}

TEST_CASE("interval-augmented targets use point + half width") {
    // bias-only regression predicting 175 with S chosen so the half-width
    // pushes the day over 180
    Rng rng(1);
    FeatureTable t = line_table(8, rng);
    Network reg = make_network(1, 0);
    reg.w[reg.idx_output_bias()] = 175.0;

    IntervalContext ctx;
    ctx.gram_inverse = Matrix(1, 1);
    ctx.gram_inverse(0, 0) = 1.0 / 8.0;  // bias-only gram inverse
    ctx.q = 1;
    ctx.n = 8;
    ctx.s = 15.0;  // half-width = t(0.975,7) * 15 * sqrt(1/8) = 12.54

    const auto targets =
        make_targets(t.targets, 180.0, TargetMode::interval_augmented, &reg, &ctx, &t);
    for (const double p : targets.p) CHECK(p == 1.0);

    ctx.s = 1.0;  // half-width 0.84: 175.8 < 180
    const auto negative =
        make_targets(t.targets, 180.0, TargetMode::interval_augmented, &reg, &ctx, &t);
    for (const double p : negative.p) CHECK(p == 0.0);

    CHECK_THROWS_AS(make_targets(t.targets, 180.0, TargetMode::interval_augmented),
                    MissingRegressionContext);
}

TEST_CASE("forward_classifier worked values") {
    Network net = make_network(1, 1, OutputKind::sigmoid);
    const std::vector<double> x0 = {0.0};
    CHECK(forward_classifier(net, x0) == doctest::Approx(0.5));

    net.w[net.idx_output_bias()] = 20.0;
    CHECK(forward_classifier(net, x0) > 1.0 - 1e-8);

    net.w[net.idx_output_bias()] = 0.0;
    net.w[net.idx_output_weight(0)] = 2.0;
    net.w[net.idx_hidden_weight(0, 0)] = 1.0;
    const std::vector<double> x1 = {1.0};
    // sigma(2 tanh 1), independent high-precision value
    CHECK(forward_classifier(net, x1) == doctest::Approx(0.821007496006).epsilon(1e-9));
}

TEST_CASE("forward_classifier output stays in (0,1) and rejects identity nets") {
    Rng rng(2);
    Network net = make_network(3, 2, OutputKind::sigmoid);
    for (int trial = 0; trial < 200; ++trial) {
        for (auto& w : net.w) w = rng.uniform(-10.0, 10.0);
        const std::vector<double> x = {rng.normal(), rng.normal(), rng.normal()};
        const double y = forward_classifier(net, x);
        CHECK(y > 0.0);
        CHECK(y < 1.0);
    }
    Network identity_net = make_network(3, 2);
    const std::vector<double> x = {0, 0, 0};
    CHECK_THROWS_AS(forward_classifier(identity_net, x), WrongOutputKind);
}

TEST_CASE("decide is inclusive at the threshold") {
    CHECK(decide(0.50));
    CHECK_FALSE(decide(0.49));
    CHECK(decide(1.0));
    CHECK_THROWS_AS(decide(1.5), OutOfDomain);
}

TEST_CASE("decision is invariant under increasing re-parameterization") {
    Rng rng(9);
    const auto logit = [](double p) { return std::log(p / (1.0 - p)); };
    for (int trial = 0; trial < 200; ++trial) {
        const double y = rng.uniform(0.001, 0.999);
        const double thr = rng.uniform(0.001, 0.999);
        CHECK(decide(y, thr) == (logit(y) >= logit(thr)));
        CHECK(decide(y, thr) == (y * y * y >= thr * thr * thr));
    }
}

TEST_CASE("classifier separates linearly separable data") {
    Rng rng(3);
    FeatureTable t = line_table(120, rng);
    std::vector<double> targets(t.rows());
    for (std::size_t r = 0; r < t.rows(); ++r) targets[r] = t.x(r, 0) >= 0.55 ? 1.0 : 0.0;

    ClassifierConfig cfg;
    cfg.train.restarts = 3;
    cfg.train.seed = 5;
    cfg.train.tolerance = 1e-12;
    const Network net = train_classifier(t, targets, 1, cfg);

    int correct = 0;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const bool hit = decide(forward_classifier(net, t.x.row(r))) == (targets[r] == 1.0);
        correct += hit ? 1 : 0;
    }
    CHECK(correct == static_cast<int>(t.rows()));
}

TEST_CASE("label flip complements the predicted probabilities") {
    Rng rng(4);
    FeatureTable t = line_table(200, rng, -1.0, 1.0);
    std::vector<double> targets(t.rows()), flipped(t.rows());
    for (std::size_t r = 0; r < t.rows(); ++r) {
        // smooth probabilistic labels around a logistic boundary
        targets[r] = rng.uniform01() < 1.0 / (1.0 + std::exp(-4.0 * t.x(r, 0))) ? 1.0 : 0.0;
        flipped[r] = 1.0 - targets[r];
    }
    ClassifierConfig cfg;
    cfg.train.restarts = 4;
    cfg.train.seed = 77;
    cfg.train.tolerance = 1e-14;
    cfg.train.max_iterations = 2000;
    const Network a = train_classifier(t, targets, 1, cfg);
    const Network b = train_classifier(t, flipped, 1, cfg);

    for (std::size_t r = 0; r < t.rows(); ++r) {
        const double pa = forward_classifier(a, t.x.row(r));
        const double pb = forward_classifier(b, t.x.row(r));
        CHECK(pa + pb == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("single-class targets are rejected") {
    Rng rng(5);
    FeatureTable t = line_table(30, rng);
    const std::vector<double> targets(t.rows(), 1.0);
    ClassifierConfig cfg;
    CHECK_THROWS_AS(train_classifier(t, targets, 1, cfg), SingleClass);
}

TEST_CASE("cross-entropy loss also separates the classes") {
    Rng rng(6);
    FeatureTable t = line_table(120, rng);
    std::vector<double> targets(t.rows());
    for (std::size_t r = 0; r < t.rows(); ++r) targets[r] = t.x(r, 0) >= 0.5 ? 1.0 : 0.0;
    ClassifierConfig cfg;
    cfg.loss = ClassifierLoss::cross_entropy;
    cfg.train.restarts = 3;
    cfg.train.seed = 11;
    const Network net = train_classifier(t, targets, 1, cfg);
    int correct = 0;
    for (std::size_t r = 0; r < t.rows(); ++r)
        correct += decide(forward_classifier(net, t.x.row(r))) == (targets[r] == 1.0) ? 1 : 0;
    CHECK(correct >= static_cast<int>(t.rows()) - 2);
}

TEST_CASE("classifier reuses a pruned regression structure") {
    Rng rng(7);
    FeatureTable t;
    t.columns = {"a", "b"};
    t.x = Matrix(100, 2);
    for (std::size_t r = 0; r < 100; ++r) {
        t.x(r, 0) = rng.uniform01();
        t.x(r, 1) = rng.uniform01();
    }
    t.targets.assign(100, 0.0);
    std::vector<double> targets(100);
    for (std::size_t r = 0; r < 100; ++r) targets[r] = t.x(r, 0) > 0.5 ? 1.0 : 0.0;

    Network structure = make_network(2, 2);
    structure.mask[structure.idx_hidden_weight(0, 1)] = 0;  // pruned input weight
    structure.mask[structure.idx_output_weight(1)] = 0;
    ClassifierConfig cfg;
    cfg.train.seed = 9;
    const Network net = train_classifier(t, targets, 2, cfg, &structure);
    CHECK(net.output == OutputKind::sigmoid);
    CHECK(net.w[net.idx_hidden_weight(0, 1)] == 0.0);
    CHECK(net.w[net.idx_output_weight(1)] == 0.0);
}
