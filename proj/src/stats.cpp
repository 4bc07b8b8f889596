#include "ozonecast/stats.hpp"

#include <cmath>

#include "ozonecast/errors.hpp"

namespace ozonecast {

namespace {

constexpr double kFpMin = 1e-300;
constexpr double kEps = 1e-15;

// Lentz continued fraction for the incomplete beta function.
double beta_cf(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

// Series for the lower incomplete gamma P(a, x), x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for the upper incomplete gamma Q(a, x), x >= a + 1.
double gamma_q_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kFpMin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = b + an / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x < 0.0 || x > 1.0) throw OutOfDomain("incomplete_beta: x outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log(1.0 - x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
    return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double upper_incomplete_gamma(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw OutOfDomain("upper_incomplete_gamma: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double student_t_cdf(double t, double dof) {
    if (dof < 1.0) throw OutOfDomain("student_t_cdf: dof < 1");
    if (std::isnan(t)) throw OutOfDomain("student_t_cdf: t is NaN");
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double prob, double dof) {
    if (!(prob > 0.0 && prob < 1.0)) throw OutOfDomain("student_t_quantile: prob outside (0, 1)");
    if (dof < 1.0) throw OutOfDomain("student_t_quantile: dof < 1");
    if (prob == 0.5) return 0.0;
    if (prob < 0.5) return -student_t_quantile(1.0 - prob, dof);

    // Bracket the root, then bisect; the CDF is strictly increasing.
    double lo = 0.0;
    double hi = 2.0;
    while (student_t_cdf(hi, dof) < prob) {
        hi *= 2.0;
        if (hi > 1e12) throw OutOfDomain("student_t_quantile: prob too close to 1");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, dof) < prob)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

double f_survival(double f, double d1, double d2) {
    if (d1 <= 0.0 || d2 <= 0.0) throw OutOfDomain("f_survival: dof must be positive");
    if (f <= 0.0) return 1.0;
    return incomplete_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f));
}

double chi_square_survival(double x, double k) {
    if (k <= 0.0) throw OutOfDomain("chi_square_survival: dof must be positive");
    if (x <= 0.0) return 1.0;
    return upper_incomplete_gamma(0.5 * k, 0.5 * x);
}

double normal_survival(double z) { return 0.5 * std::erfc(z / 1.4142135623730950488); }

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace ozonecast
