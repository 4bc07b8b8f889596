#include "ozonecast/metrics.hpp"

#include <cmath>

#include "ozonecast/dataset.hpp"
#include "ozonecast/errors.hpp"

namespace ozonecast {

FitReport global_fit_report(std::span<const double> predictions,
                            std::span<const double> observations) {
    if (predictions.size() != observations.size())
        throw LengthMismatch("global_fit_report: length mismatch");
    const std::size_t n = predictions.size();
    if (n < 2) throw TooFewRows("global_fit_report needs at least 2 pairs");

    const double o_mean = mean_of(observations);
    const double p_mean = mean_of(predictions);

    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (observations[i] - o_mean) * (observations[i] - o_mean);
        sxy += (observations[i] - o_mean) * (predictions[i] - p_mean);
    }
    if (sxx == 0.0) throw ConstantObservations("observations are constant");

    FitReport rep;
    rep.n = n;
    rep.b1 = sxy / sxx;
    rep.b0 = p_mean - rep.b1 * o_mean;

    double se = 0.0, ae = 0.0, be = 0.0, ss = 0.0, su = 0.0, dden = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double err = predictions[i] - observations[i];
        be += err;
        ae += std::fabs(err);
        se += err * err;
        const double p_hat = rep.b0 + rep.b1 * observations[i];
        ss += (p_hat - observations[i]) * (p_hat - observations[i]);
        su += (p_hat - predictions[i]) * (p_hat - predictions[i]);
        const double dd =
            std::fabs(predictions[i] - o_mean) + std::fabs(observations[i] - o_mean);
        dden += dd * dd;
    }
    const double nn = static_cast<double>(n);
    rep.mbe = be / nn;
    rep.mae = ae / nn;
    rep.rmse = std::sqrt(se / nn);
    rep.rmse_s = std::sqrt(ss / nn);
    rep.rmse_u = std::sqrt(su / nn);
    rep.d = dden == 0.0 ? 1.0 : 1.0 - se / dden;
    return rep;
}

ContingencyTable contingency(const std::vector<bool>& predicted_flags,
                             const std::vector<bool>& observed_flags) {
    if (predicted_flags.size() != observed_flags.size())
        throw LengthMismatch("contingency: length mismatch");
    ContingencyTable t;
    t.n = predicted_flags.size();
    for (std::size_t i = 0; i < t.n; ++i) {
        if (predicted_flags[i]) ++t.f;
        if (observed_flags[i]) ++t.m;
        if (predicted_flags[i] && observed_flags[i]) ++t.a;
    }
    return t;
}

ExceedanceReport exceedance_report(const ContingencyTable& table) {
    if (table.m < 1) throw NoObservedExceedances("no observed exceedance: TPR undefined");
    if (table.n <= table.m) throw AllExceedances("every case exceeds: FAR undefined");
    ExceedanceReport r;
    r.tpr = static_cast<double>(table.a) / static_cast<double>(table.m);
    r.far = static_cast<double>(table.f - table.a) / static_cast<double>(table.n - table.m);
    r.si = r.tpr - r.far;
    return r;
}

std::vector<double> standardized_residuals(std::span<const double> predictions,
                                           std::span<const double> observations) {
    if (predictions.size() != observations.size())
        throw LengthMismatch("standardized_residuals: length mismatch");
    if (predictions.size() < 2) throw TooFewRows("standardized_residuals needs at least 2 pairs");
    const double s = sample_std(observations);
    if (s == 0.0) throw ConstantObservations("observations are constant");
    std::vector<double> sr(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i)
        sr[i] = (predictions[i] - observations[i]) / s;
    return sr;
}

}  // namespace ozonecast
