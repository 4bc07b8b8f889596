#include "ozonecast/uncertainty.hpp"

#include <cmath>

#include "ozonecast/errors.hpp"

namespace ozonecast {

LeverageSet leverages_from_design(const Matrix& z, double rel_tol) {
    if (z.rows() < z.cols()) throw DofExhausted("leverages: fewer rows than parameters");
    PivotedQr qr(z, rel_tol);
    if (!qr.full_rank()) throw RankDeficient(qr.rank());
    LeverageSet set;
    set.q = z.cols();
    set.n = z.rows();
    set.gram_inverse = qr.gram_inverse();
    set.h.resize(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) set.h[i] = qr.quad_form(z.row(i));
    return set;
}

namespace {

Matrix gradient_matrix(const Network& net, const FeatureTable& train) {
    const std::size_t q = net.active_count();
    Matrix z(train.rows(), q);
    for (std::size_t r = 0; r < train.rows(); ++r) {
        const auto g = jacobian(net, train.x.row(r));
        for (std::size_t k = 0; k < q; ++k) z(r, k) = g[k];
    }
    return z;
}

}  // namespace

LeverageSet leverages(const Network& net, const FeatureTable& train) {
    return leverages_from_design(gradient_matrix(net, train));
}

double residual_std(const Network& net, const FeatureTable& train, std::size_t q) {
    const std::size_t n = train.rows();
    if (n <= q) throw DofExhausted("residual_std: N <= q");
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double d = train.targets[r] - forward(net, train.x.row(r));
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(n - q));
}

IntervalContext make_interval_context(const Network& net, const FeatureTable& train) {
    const auto lev = leverages(net, train);
    IntervalContext ctx;
    ctx.gram_inverse = lev.gram_inverse;
    ctx.q = lev.q;
    ctx.n = lev.n;
    ctx.s = residual_std(net, train, lev.q);
    return ctx;
}

namespace {

PredictionInterval interval_from_gradient(double point, std::span<const double> z,
                                          const IntervalContext& ctx, double confidence,
                                          bool include_noise) {
    if (ctx.n <= ctx.q) throw DofExhausted("prediction_interval: N <= q");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw OutOfDomain("prediction_interval: confidence outside (0, 1)");
    if (z.size() != ctx.gram_inverse.rows())
        throw DimensionMismatch("prediction_interval: gradient size mismatch");

    double quad = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) s += ctx.gram_inverse(i, j) * z[j];
        quad += z[i] * s;
    }
    if (quad < 0.0) quad = 0.0;
    if (include_noise) quad += 1.0;

    PredictionInterval out;
    out.point = point;
    out.confidence = confidence;
    out.dof = ctx.n - ctx.q;
    const double t = student_t_quantile(0.5 * (1.0 + confidence), static_cast<double>(out.dof));
    out.half_width = t * ctx.s * std::sqrt(quad);
    return out;
}

}  // namespace

PredictionInterval prediction_interval(const Network& net, const IntervalContext& ctx,
                                       std::span<const double> x, double confidence,
                                       bool include_noise) {
    const double point = forward(net, x);
    const auto z = jacobian(net, x);
    return interval_from_gradient(point, z, ctx, confidence, include_noise);
}

PredictionInterval prediction_interval_linear(std::span<const double> beta,
                                              const IntervalContext& ctx,
                                              std::span<const double> x, double confidence,
                                              bool include_noise) {
    if (beta.size() != x.size() + 1)
        throw DimensionMismatch("prediction_interval_linear: coefficient size mismatch");
    std::vector<double> z(beta.size());
    z[0] = 1.0;
    double point = beta[0];
    for (std::size_t i = 0; i < x.size(); ++i) {
        z[i + 1] = x[i];
        point += beta[i + 1] * x[i];
    }
    return interval_from_gradient(point, z, ctx, confidence, include_noise);
}

bool exceedance_by_interval(const PredictionInterval& interval, double threshold) {
    return interval.point + interval.half_width >= threshold;
}

}  // namespace ozonecast
