#pragma once

namespace ozonecast {

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Regularized upper incomplete gamma Q(a, x).
double upper_incomplete_gamma(double a, double x);

// Student-t CDF with dof degrees of freedom.
double student_t_cdf(double t, double dof);

// Inverse Student-t CDF, accurate to well below 1e-6.
// Throws OutOfDomain unless 0 < prob < 1 and dof >= 1.
double student_t_quantile(double prob, double dof);

// P(F > f) for the F distribution with (d1, d2) degrees of freedom.
double f_survival(double f, double d1, double d2);

// P(X > x) for chi-square with k degrees of freedom.
double chi_square_survival(double x, double k);

// P(Z > z) for a standard normal.
double normal_survival(double z);

// Logistic function, stable for large |z|.
double sigmoid(double z);

}  // namespace ozonecast
