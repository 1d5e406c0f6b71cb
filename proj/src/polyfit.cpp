#include <dss/polyfit.hpp>

#include <Eigen/QR>

namespace dss {

double Poly1::eval(double x) const {
    double v = 0;
    for (int k = int(coeffs.size()) - 1; k >= 0; --k) v = v * x + coeffs[k];
    return v;
}

double Poly1::deriv(double x) const {
    double v = 0;
    for (int k = int(coeffs.size()) - 1; k >= 1; --k) v = v * x + k * coeffs[k];
    return v;
}

double Poly1::second(double x) const {
    double v = 0;
    for (int k = int(coeffs.size()) - 1; k >= 2; --k) v = v * x + k * (k - 1) * coeffs[k];
    return v;
}

double Poly1::curvature(double x) const {
    const double d = deriv(x);
    return std::abs(second(x)) / std::pow(1.0 + d * d, 1.5);
}

Poly1Fit fit_poly1(const std::vector<Vec2>& points, int degree) {
    if (degree < 0) throw Error("polyfit", "negative degree");
    const int n = int(points.size());
    if (n < degree + 1)
        throw Error("polyfit", "need at least degree+1 points (" + std::to_string(n) + " given)");

    MatX vander(n, degree + 1);
    VecX rhs(n);
    for (int i = 0; i < n; ++i) {
        double p = 1.0;
        for (int k = 0; k <= degree; ++k) {
            vander(i, k) = p;
            p *= points[i].x();
        }
        rhs[i] = points[i].y();
    }
    Eigen::ColPivHouseholderQR<MatX> qr(vander);
    if (qr.rank() < degree + 1)
        throw Error("polyfit",
                    "rank-deficient fit; points may be nearly vertical in these coordinates");

    Poly1Fit fit;
    fit.poly.coeffs = qr.solve(rhs);
    fit.poly.x_min = std::numeric_limits<double>::max();
    fit.poly.x_max = std::numeric_limits<double>::lowest();
    for (const auto& p : points) {
        fit.poly.x_min = std::min(fit.poly.x_min, p.x());
        fit.poly.x_max = std::max(fit.poly.x_max, p.x());
    }
    fit.rms = std::sqrt((vander * fit.poly.coeffs - rhs).squaredNorm() / n);
    return fit;
}

CurveSampler::CurveSampler(const Poly1& poly, double x_min, double x_max, int table_size)
    : poly_(poly), x_min_(x_min), x_max_(x_max) {
    if (!(x_max > x_min)) throw Error("polyfit", "empty curve domain");
    xs_.resize(table_size + 1);
    length_.resize(table_size + 1);
    length_[0] = 0;
    Vec2 prev(x_min, poly.eval(x_min));
    xs_[0] = x_min;
    for (int i = 1; i <= table_size; ++i) {
        const double x = x_min + (x_max - x_min) * i / table_size;
        const Vec2 p(x, poly.eval(x));
        xs_[i] = x;
        length_[i] = length_[i - 1] + (p - prev).norm();
        prev = p;
    }
    if (total_length() <= 0) throw Error("polyfit", "zero-length curve");
}

double CurveSampler::x_at_arclength(double l) const {
    l = std::clamp(l, 0.0, total_length());
    const auto it = std::lower_bound(length_.begin(), length_.end(), l);
    if (it == length_.begin()) return xs_.front();
    const std::size_t i = it - length_.begin();
    const double seg = length_[i] - length_[i - 1];
    const double t = seg > 0 ? (l - length_[i - 1]) / seg : 0.0;
    return xs_[i - 1] + t * (xs_[i] - xs_[i - 1]);
}

double CurveSampler::x_at_fraction(double f) const {
    return x_at_arclength(clamp01(f) * total_length());
}

double CurveSampler::fraction_at_x(double x) const {
    x = std::clamp(x, x_min_, x_max_);
    const auto it = std::lower_bound(xs_.begin(), xs_.end(), x);
    if (it == xs_.begin()) return 0.0;
    const std::size_t i = it - xs_.begin();
    const double seg = xs_[i] - xs_[i - 1];
    const double t = seg > 0 ? (x - xs_[i - 1]) / seg : 0.0;
    return (length_[i - 1] + t * (length_[i] - length_[i - 1])) / total_length();
}

Vec2 CurveSampler::point_at_fraction(double f) const {
    const double x = x_at_fraction(f);
    return {x, poly_.eval(x)};
}

Vec2 CurveSampler::tangent_at_x(double x) const {
    return Vec2(1.0, poly_.deriv(x)).normalized();
}

Vec2 CurveSampler::normal_at_x(double x) const {
    const Vec2 t = tangent_at_x(x);
    return {-t.y(), t.x()};
}

double Poly2::eval(double x, double y) const {
    double v = 0;
    int idx = 0;
    for (int total = 0; total <= degree; ++total)
        for (int j = 0; j <= total; ++j, ++idx)
            v += coeffs[idx] * std::pow(x, total - j) * std::pow(y, j);
    return v;
}

Vec2 Poly2::gradient(double x, double y) const {
    Vec2 g = Vec2::Zero();
    int idx = 0;
    for (int total = 0; total <= degree; ++total)
        for (int j = 0; j <= total; ++j, ++idx) {
            const int i = total - j;
            if (i > 0) g.x() += coeffs[idx] * i * std::pow(x, i - 1) * std::pow(y, j);
            if (j > 0) g.y() += coeffs[idx] * j * std::pow(x, i) * std::pow(y, j - 1);
        }
    return g;
}

Poly2Fit fit_poly2(const std::vector<Vec3>& points, int degree) {
    if (degree < 0) throw Error("polyfit", "negative degree");
    const int n = int(points.size());
    const int terms = Poly2::term_count(degree);
    if (n < terms)
        throw Error("polyfit", "need at least " + std::to_string(terms) + " points");

    MatX basis(n, terms);
    VecX rhs(n);
    for (int i = 0; i < n; ++i) {
        int idx = 0;
        for (int total = 0; total <= degree; ++total)
            for (int j = 0; j <= total; ++j, ++idx)
                basis(i, idx) = std::pow(points[i].x(), total - j) * std::pow(points[i].y(), j);
        rhs[i] = points[i].z();
    }
    Eigen::ColPivHouseholderQR<MatX> qr(basis);
    if (qr.rank() < terms)
        throw Error("polyfit", "rank-deficient surface fit");

    Poly2Fit fit;
    fit.poly.degree = degree;
    fit.poly.coeffs = qr.solve(rhs);
    fit.rms = std::sqrt((basis * fit.poly.coeffs - rhs).squaredNorm() / n);
    return fit;
}

}  // namespace dss
