#pragma once

#include <dss/common.hpp>

namespace dss {

// y = c0 + c1 x + ... + cd x^d over a fitted domain.
struct Poly1 {
    VecX coeffs;
    double x_min = 0, x_max = 0;

    int degree() const { return int(coeffs.size()) - 1; }
    double eval(double x) const;
    double deriv(double x) const;
    double second(double x) const;
    double curvature(double x) const;  // |y''| / (1+y'^2)^{3/2}
};

struct Poly1Fit {
    Poly1 poly;
    double rms = 0;
};

Poly1Fit fit_poly1(const std::vector<Vec2>& points, int degree);

// Arclength parameterization of a Poly1 graph over [x_min, x_max] via a dense
// table; resolution is fixed so results are deterministic.
class CurveSampler {
public:
    CurveSampler(const Poly1& poly, double x_min, double x_max, int table_size = 4096);

    double total_length() const { return length_.back(); }
    double x_at_fraction(double f) const;   // f in [0,1] of total arclength
    double x_at_arclength(double l) const;
    double fraction_at_x(double x) const;
    Vec2 point_at_fraction(double f) const;
    Vec2 tangent_at_x(double x) const;  // unit
    Vec2 normal_at_x(double x) const;   // unit, tangent rotated +90 degrees

    const Poly1& poly() const { return poly_; }
    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }

private:
    Poly1 poly_;
    double x_min_, x_max_;
    std::vector<double> xs_, length_;
};

// z = sum_{i+j<=degree} c_{ij} x^i y^j; coefficient order is j-major within
// ascending total degree.
struct Poly2 {
    int degree = 0;
    VecX coeffs;

    double eval(double x, double y) const;
    Vec2 gradient(double x, double y) const;
    static int term_count(int degree) { return (degree + 1) * (degree + 2) / 2; }
};

struct Poly2Fit {
    Poly2 poly;
    double rms = 0;
};

// points are (x, y, z) with z the fitted value.
Poly2Fit fit_poly2(const std::vector<Vec3>& points, int degree);

}  // namespace dss
