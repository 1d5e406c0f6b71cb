#pragma once

namespace dss {

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Two-sided p-value of a Student t statistic.
double student_t_p_two_sided(double t, double dof);

// Upper tail P(F >= f) for the F distribution.
double f_upper_tail(double f, double d1, double d2);

}  // namespace dss
