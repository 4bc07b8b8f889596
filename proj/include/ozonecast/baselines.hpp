#pragma once

#include <span>
#include <string>
#include <vector>

#include "ozonecast/linalg.hpp"

namespace ozonecast {

// Persistence baseline: forecast[i] predicts series[i+1] and equals series[i].
struct PersistenceForecast {
    std::vector<double> forecast;
};
PersistenceForecast persistence_forecast(std::span<const double> series);

struct LinearModel {
    enum class Kind { ols, ridge };
    Kind kind = Kind::ols;
    double intercept = 0.0;
    std::vector<double> coefficients;
    double lambda = 0.0;
};

LinearModel ols_fit(const Matrix& x, std::span<const double> y);

struct RidgeOptions {
    // Penalize standardized predictors and leave the intercept free (fit on
    // centered data). With both off, the bare closed form
    // (XᵀX + λI)⁻¹XᵀY is applied to X as given, no intercept.
    bool standardize = true;
    bool intercept = true;
};

LinearModel ridge_fit(const Matrix& x, std::span<const double> y, double lambda = 0.05,
                      const RidgeOptions& opts = {});

double linear_predict(const LinearModel& model, std::span<const double> x);

struct LogisticModel {
    double intercept = 0.0;
    std::vector<double> coefficients;
    std::vector<std::string> names;     // empty when unnamed
    std::vector<double> p_values;       // Wald, per coefficient (not the intercept)
    double intercept_p_value = 1.0;
    double deviance = 0.0;
    double null_deviance = 0.0;
    double model_p_value = 1.0;  // likelihood-ratio test vs intercept-only
    int iterations = 0;
};

// Logistic of the linear predictor, stable for large |z|.
double logistic_predict(const LogisticModel& model, std::span<const double> x);

struct LogisticOptions {
    double tolerance = 1e-8;       // max coefficient change
    int max_iterations = 100;
    double separation_norm = 1e4;  // coefficient norm flags perfect separation
};

// Maximum likelihood by iteratively reweighted least squares with step
// halving (so the log-likelihood never decreases across iterations).
LogisticModel logistic_fit(const Matrix& x, std::span<const double> y,
                           const LogisticOptions& opts = {},
                           const std::vector<std::string>* names = nullptr);

struct StepwiseResult {
    LogisticModel model;
    std::vector<std::string> removed;        // in elimination order
    std::vector<std::size_t> kept_columns;   // indices into the original X
};

// Backward elimination on Wald p-values: drop the worst predictor above
// keep_p, refit, repeat.
StepwiseResult logistic_stepwise(const Matrix& x, std::span<const double> y, double keep_p = 0.05,
                                 const LogisticOptions& opts = {},
                                 const std::vector<std::string>* names = nullptr);

}  // namespace ozonecast
