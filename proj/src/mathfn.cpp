#include <dss/mathfn.hpp>

#include <dss/common.hpp>

#include <cmath>

namespace dss {

namespace {

// continued fraction for the incomplete beta (modified Lentz)
double beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1, qam = a - 1;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) return h;
    }
    throw Error("mathfn", "incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0) || !(b > 0)) throw Error("mathfn", "beta parameters must be positive");
    if (x <= 0) return 0;
    if (x >= 1) return 1;
    const double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
        b * std::log1p(-x);
    if (x < (a + 1) / (a + b + 2))
        return std::exp(ln_front) * beta_cf(a, b, x) / a;
    return 1.0 - std::exp(ln_front) * beta_cf(b, a, 1 - x) / b;
}

double student_t_p_two_sided(double t, double dof) {
    if (!(dof > 0)) throw Error("mathfn", "degrees of freedom must be positive");
    const double x = dof / (dof + t * t);
    return incomplete_beta(dof / 2.0, 0.5, x);
}

double f_upper_tail(double f, double d1, double d2) {
    if (!(d1 > 0) || !(d2 > 0)) throw Error("mathfn", "degrees of freedom must be positive");
    if (f <= 0) return 1.0;
    return incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

}  // namespace dss
