#include "ozonecast/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "ozonecast/dataset.hpp"
#include "ozonecast/errors.hpp"
#include "ozonecast/stats.hpp"

namespace ozonecast {

PersistenceForecast persistence_forecast(std::span<const double> series) {
    if (series.size() < 2) throw TooShort("persistence needs at least 2 days");
    PersistenceForecast out;
    out.forecast.assign(series.begin(), series.end() - 1);
    return out;
}

LinearModel ols_fit(const Matrix& x, std::span<const double> y) {
    if (y.size() != x.rows()) throw DimensionMismatch("ols_fit: row count mismatch");
    Matrix design(x.rows(), x.cols() + 1);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        design(r, 0) = 1.0;
        for (std::size_t c = 0; c < x.cols(); ++c) design(r, c + 1) = x(r, c);
    }
    PivotedQr qr(design);
    if (!qr.full_rank()) throw SingularDesign("ols_fit: design matrix is rank deficient");
    const auto beta = qr.solve(y);
    LinearModel model;
    model.kind = LinearModel::Kind::ols;
    model.intercept = beta[0];
    model.coefficients.assign(beta.begin() + 1, beta.end());
    return model;
}

LinearModel ridge_fit(const Matrix& x, std::span<const double> y, double lambda,
                      const RidgeOptions& opts) {
    if (y.size() != x.rows()) throw DimensionMismatch("ridge_fit: row count mismatch");
    if (lambda < 0.0) throw OutOfDomain("ridge_fit: lambda must be >= 0");
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();

    LinearModel model;
    model.kind = LinearModel::Kind::ridge;
    model.lambda = lambda;

    // column transforms: work on z = (x - shift) / scale
    std::vector<double> shift(p, 0.0), scale(p, 1.0);
    double y_shift = 0.0;
    if (opts.intercept) {
        for (std::size_t c = 0; c < p; ++c) {
            std::vector<double> col(n);
            for (std::size_t r = 0; r < n; ++r) col[r] = x(r, c);
            shift[c] = mean_of(col);
            if (opts.standardize) {
                const double s = sample_std(col);
                scale[c] = s > 0.0 ? s : 1.0;
            }
        }
        y_shift = mean_of(y);
    }

    // normal equations (ZᵀZ + λI) b = ZᵀY on the transformed columns
    Matrix zt_z(p, p);
    std::vector<double> zt_y(p, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < p; ++i) {
            const double zi = (x(r, i) - shift[i]) / scale[i];
            zt_y[i] += zi * (y[r] - y_shift);
            for (std::size_t j = i; j < p; ++j)
                zt_z(i, j) += zi * (x(r, j) - shift[j]) / scale[j];
        }
    }
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < i; ++j) zt_z(i, j) = zt_z(j, i);
        zt_z(i, i) += lambda;
    }
    Cholesky chol(zt_z);
    if (!chol.ok()) throw SingularDesign("ridge_fit: normal equations not positive definite");
    const auto b = chol.solve(zt_y);

    // back-transform to the original columns
    model.coefficients.resize(p);
    model.intercept = y_shift;
    for (std::size_t c = 0; c < p; ++c) {
        model.coefficients[c] = b[c] / scale[c];
        model.intercept -= model.coefficients[c] * shift[c];
    }
    return model;
}

double linear_predict(const LinearModel& model, std::span<const double> x) {
    if (x.size() != model.coefficients.size())
        throw DimensionMismatch("linear_predict: size mismatch");
    double v = model.intercept;
    for (std::size_t i = 0; i < x.size(); ++i) v += model.coefficients[i] * x[i];
    return v;
}

double logistic_predict(const LogisticModel& model, std::span<const double> x) {
    if (x.size() != model.coefficients.size())
        throw DimensionMismatch("logistic_predict: size mismatch");
    double z = model.intercept;
    for (std::size_t i = 0; i < x.size(); ++i) z += model.coefficients[i] * x[i];
    return sigmoid(z);
}

namespace {

double bernoulli_deviance(const Matrix& x, std::span<const double> y,
                          std::span<const double> beta) {
    double ll = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double z = beta[0];
        for (std::size_t c = 0; c < x.cols(); ++c) z += beta[c + 1] * x(r, c);
        // log-likelihood term written via log1p for stability
        ll += y[r] * z - (z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)));
    }
    return -2.0 * ll;
}

}  // namespace

LogisticModel logistic_fit(const Matrix& x, std::span<const double> y, const LogisticOptions& opts,
                           const std::vector<std::string>* names) {
    if (y.size() != x.rows()) throw DimensionMismatch("logistic_fit: row count mismatch");
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();

    std::size_t ones = 0;
    for (const double v : y) {
        if (v != 0.0 && v != 1.0) throw OutOfDomain("logistic_fit: responses must be 0 or 1");
        ones += v == 1.0 ? 1 : 0;
    }
    if (ones == 0 || ones == n) throw SingleClass("logistic_fit: responses contain a single class");

    std::vector<double> beta(p + 1, 0.0);
    double deviance = bernoulli_deviance(x, y, beta);
    Matrix xtwx(p + 1, p + 1);
    int iterations = 0;
    bool converged = false;
    int flat_deviance_steps = 0;

    for (int it = 0; it < opts.max_iterations; ++it) {
        ++iterations;
        // score and information at the current beta
        std::vector<double> score(p + 1, 0.0);
        xtwx = Matrix(p + 1, p + 1);
        bool all_correct = true;
        double max_abs_eta = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double z = beta[0];
            for (std::size_t c = 0; c < p; ++c) z += beta[c + 1] * x(r, c);
            const double mu = sigmoid(z);
            all_correct = all_correct && ((y[r] == 1.0) == (z > 0.0));
            max_abs_eta = std::max(max_abs_eta, std::fabs(z));
            const double w = std::max(mu * (1.0 - mu), 1e-10);
            const double resid = y[r] - mu;
            score[0] += resid;
            for (std::size_t c = 0; c < p; ++c) score[c + 1] += resid * x(r, c);
            xtwx(0, 0) += w;
            for (std::size_t i = 0; i < p; ++i) {
                xtwx(0, i + 1) += w * x(r, i);
                for (std::size_t j = i; j < p; ++j) xtwx(i + 1, j + 1) += w * x(r, i) * x(r, j);
            }
        }
        for (std::size_t i = 0; i <= p; ++i)
            for (std::size_t j = 0; j < i; ++j) xtwx(i, j) = xtwx(j, i);

        // a perfectly classified sample with numerically saturated fits has
        // no finite maximum-likelihood estimate
        if (it > 0 && all_correct && max_abs_eta > 30.0)
            throw PerfectSeparation("logistic_fit: data are perfectly separated");

        Cholesky chol(xtwx);
        if (!chol.ok()) throw SingularDesign("logistic_fit: information matrix is singular");
        const auto delta = chol.solve(score);

        // step halving keeps the deviance non-increasing
        double step = 1.0;
        std::vector<double> trial(p + 1);
        double trial_dev = deviance;
        bool improved = false;
        for (int half = 0; half < 30; ++half) {
            for (std::size_t k = 0; k <= p; ++k) trial[k] = beta[k] + step * delta[k];
            trial_dev = bernoulli_deviance(x, y, trial);
            if (std::isfinite(trial_dev) && trial_dev <= deviance + 1e-12) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;

        double max_change = 0.0;
        for (std::size_t k = 0; k <= p; ++k)
            max_change = std::max(max_change, std::fabs(trial[k] - beta[k]));
        const double dev_drop = deviance - trial_dev;
        beta = trial;
        deviance = trial_dev;

        double norm = 0.0;
        for (const double b : beta) norm = std::max(norm, std::fabs(b));
        if (norm > opts.separation_norm)
            throw PerfectSeparation("logistic_fit: coefficients diverge (separable data)");

        if (max_change < opts.tolerance) {
            converged = true;
            break;
        }
        // under quasi-separation the likelihood plateaus while coefficients
        // keep creeping along a flat ridge; a converged deviance is the
        // meaningful stop there
        if (dev_drop < 1e-10 * (deviance + 1.0)) {
            if (++flat_deviance_steps >= 2) {
                converged = true;
                break;
            }
        } else {
            flat_deviance_steps = 0;
        }
    }
    if (!converged) throw NoConvergence(iterations);

    LogisticModel model;
    model.intercept = beta[0];
    model.coefficients.assign(beta.begin() + 1, beta.end());
    if (names) model.names = *names;
    model.iterations = iterations;
    model.deviance = deviance;

    // Wald p-values from the inverse information matrix
    const Matrix cov = Cholesky(xtwx).inverse();
    const auto wald_p = [&](std::size_t k, double b) {
        const double se = std::sqrt(std::max(cov(k, k), 0.0));
        if (se == 0.0) return 1.0;
        return 2.0 * normal_survival(std::fabs(b) / se);
    };
    model.intercept_p_value = wald_p(0, beta[0]);
    model.p_values.resize(p);
    for (std::size_t c = 0; c < p; ++c) model.p_values[c] = wald_p(c + 1, beta[c + 1]);

    // likelihood-ratio test against the intercept-only model
    const double rate = static_cast<double>(ones) / static_cast<double>(n);
    model.null_deviance =
        -2.0 * (static_cast<double>(ones) * std::log(rate) +
                static_cast<double>(n - ones) * std::log(1.0 - rate));
    const double lr = std::max(model.null_deviance - model.deviance, 0.0);
    model.model_p_value = p == 0 ? 1.0 : chi_square_survival(lr, static_cast<double>(p));
    return model;
}

StepwiseResult logistic_stepwise(const Matrix& x, std::span<const double> y, double keep_p,
                                 const LogisticOptions& opts,
                                 const std::vector<std::string>* names) {
    StepwiseResult result;
    result.kept_columns.resize(x.cols());
    for (std::size_t c = 0; c < x.cols(); ++c) result.kept_columns[c] = c;

    std::vector<std::string> current_names;
    if (names) current_names = *names;

    for (;;) {
        Matrix sub(x.rows(), result.kept_columns.size());
        for (std::size_t r = 0; r < x.rows(); ++r)
            for (std::size_t c = 0; c < result.kept_columns.size(); ++c)
                sub(r, c) = x(r, result.kept_columns[c]);
        result.model = logistic_fit(sub, y, opts, names ? &current_names : nullptr);

        if (result.kept_columns.empty()) break;
        std::size_t worst = 0;
        for (std::size_t c = 1; c < result.model.p_values.size(); ++c)
            if (result.model.p_values[c] > result.model.p_values[worst]) worst = c;
        if (result.model.p_values.empty() || result.model.p_values[worst] <= keep_p) break;

        result.removed.push_back(names ? current_names[worst]
                                       : "x" + std::to_string(result.kept_columns[worst]));
        result.kept_columns.erase(result.kept_columns.begin() + worst);
        if (names) current_names.erase(current_names.begin() + worst);
    }
    return result;
}

}  // namespace ozonecast
