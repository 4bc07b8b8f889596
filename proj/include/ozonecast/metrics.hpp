#pragma once

#include <span>
#include <vector>

namespace ozonecast {

// Global-fit verification battery. The RMSE split comes from the least
// squares regression of predictions on observations (P̂ = b0 + b1·O):
// RMSE_s over (P̂ - O), RMSE_u over (P̂ - P); the two add in quadrature to
// RMSE. d is the index of agreement in [0, 1].
struct FitReport {
    double mbe = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
    double rmse_s = 0.0;
    double rmse_u = 0.0;
    double d = 0.0;
    double b0 = 0.0;  // intercept of P on O
    double b1 = 0.0;  // slope of P on O
    std::size_t n = 0;
};

FitReport global_fit_report(std::span<const double> predictions,
                            std::span<const double> observations);

// A = correctly predicted exceedances, F = all predicted, M = all observed,
// N = total cases.
struct ContingencyTable {
    std::size_t a = 0;
    std::size_t f = 0;
    std::size_t m = 0;
    std::size_t n = 0;
};

ContingencyTable contingency(const std::vector<bool>& predicted_flags,
                             const std::vector<bool>& observed_flags);

struct ExceedanceReport {
    double tpr = 0.0;  // A / M
    double far = 0.0;  // (F - A) / (N - M)
    double si = 0.0;   // TPR - FAR
};

ExceedanceReport exceedance_report(const ContingencyTable& table);

// (P_i - O_i) / std(O), sample std with the n-1 denominator.
std::vector<double> standardized_residuals(std::span<const double> predictions,
                                           std::span<const double> observations);

}  // namespace ozonecast
