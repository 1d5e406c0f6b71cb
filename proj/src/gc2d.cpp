#include <dss/gc2d.hpp>

#include <dss/kdtree.hpp>

#include <nlohmann/json.hpp>

#include <Eigen/Eigenvalues>

#include <fstream>

namespace dss {

Poly1Fit fit_relaxed_cms_2d(const std::vector<Vec2>& cms_points, int degree) {
    if (degree < 1 || degree > 7)
        throw Error("gc2d", "center-curve degree must be in 1..7, got " + std::to_string(degree));
    return fit_poly1(cms_points, degree);
}

namespace {

// Stations at fractions k/(count+1) of the arclength window [l_lo, l_hi].
MedialSpokes2 spokes_in_window(const CurveSampler& curve,
                               const std::function<double(double)>& radius_at_arclength,
                               int count, double l_lo, double l_hi) {
    const double span = l_hi - l_lo;
    if (span <= 0) throw Error("gc2d", "empty station window");
    const double dl = span / (4.0 * count);
    const double total = curve.total_length();

    MedialSpokes2 out;
    for (int k = 1; k <= count; ++k) {
        const double f = double(k) / (count + 1);
        const double l = l_lo + f * span;
        const double r = radius_at_arclength(l);
        if (r <= 0) throw Error("gc2d", "non-positive radius at station " + std::to_string(k));
        const double lh = std::min(total, l + dl), ll = std::max(0.0, l - dl);
        const double dr = (radius_at_arclength(lh) - radius_at_arclength(ll)) / (lh - ll);
        if (std::abs(dr) >= 1.0)
            throw Error("gc2d", "|dR/dl| >= 1 at station " + std::to_string(k) +
                                    "; station lies in an end-cap region");

        const double x = curve.x_at_arclength(l);
        const Vec2 p(x, curve.poly().eval(x));
        const Vec2 t = curve.tangent_at_x(x);
        const Vec2 n = curve.normal_at_x(x);
        const Vec2 base = p - r * dr * t;
        const Vec2 offset = r * std::sqrt(1.0 - dr * dr) * n;

        out.stations.push_back(p);
        out.up_tips.push_back(base + offset);
        out.down_tips.push_back(base - offset);
        out.radius.push_back(r);
        out.radius_deriv.push_back(dr);
        out.fractions.push_back(f);
    }
    return out;
}

}  // namespace

MedialSpokes2 medial_spokes_2d(const CurveSampler& curve,
                               const std::function<double(double)>& radius_at_arclength,
                               int count) {
    if (count < 1) throw Error("gc2d", "station count must be positive");
    const double total = curve.total_length();
    auto spokes = spokes_in_window(curve, radius_at_arclength, count, 0.0, total);
    // drop stations inside the 2% end-cap margin
    MedialSpokes2 out;
    for (std::size_t i = 0; i < spokes.stations.size(); ++i) {
        if (spokes.fractions[i] < 0.02 || spokes.fractions[i] > 0.98) continue;
        out.stations.push_back(spokes.stations[i]);
        out.up_tips.push_back(spokes.up_tips[i]);
        out.down_tips.push_back(spokes.down_tips[i]);
        out.radius.push_back(spokes.radius[i]);
        out.radius_deriv.push_back(spokes.radius_deriv[i]);
        out.fractions.push_back(spokes.fractions[i]);
    }
    return out;
}

namespace {

std::vector<Vec2> densify_boundary(const Polygon2& poly, int samples_per_perimeter = 2048) {
    std::vector<Vec2> pts;
    const double step = poly.perimeter() / samples_per_perimeter;
    for (int i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly.at(i);
        const Vec2& b = poly.at(i + 1);
        const int n = std::max(1, int(std::ceil((b - a).norm() / step)));
        for (int s = 0; s < n; ++s) pts.push_back(a + (double(s) / n) * (b - a));
    }
    return pts;
}

}  // namespace

Gc2dModel semi_chordal_structure(const Poly1& center_curve, const Polygon2& boundary,
                                 int count) {
    if (boundary.labels.size() != boundary.points.size())
        throw Error("gc2d", "boundary polygon must carry top/bottom labels");

    Gc2dModel model;
    model.boundary = boundary;
    model.center_curve = center_curve;

    // object vertices: extreme-x boundary points in these aligned coordinates
    model.vertex0 = 0;
    model.vertex1 = 0;
    for (int i = 1; i < boundary.size(); ++i) {
        if (boundary.points[i].x() < boundary.points[model.vertex0].x()) model.vertex0 = i;
        if (boundary.points[i].x() > boundary.points[model.vertex1].x()) model.vertex1 = i;
    }
    model.curve_x_min = boundary.points[model.vertex0].x();
    model.curve_x_max = boundary.points[model.vertex1].x();
    if (!(model.curve_x_max > model.curve_x_min))
        throw Error("gc2d", "degenerate boundary polygon");

    const CurveSampler curve(center_curve, model.curve_x_min, model.curve_x_max);
    const KdTree2 boundary_tree(densify_boundary(boundary));
    const auto radius_at = [&](double l) {
        const double x = curve.x_at_arclength(l);
        return boundary_tree.nearest_distance({x, center_curve.eval(x)});
    };

    // clamp the station window to where the radius slope is clear of the
    // end-cap limit; at least the 2% margin is always dropped
    const double total = curve.total_length();
    const int scan = 256;
    std::vector<double> slope(scan + 1);
    for (int i = 0; i <= scan; ++i) {
        const double l = total * i / scan;
        const double dl = total / (2.0 * scan);
        const double lh = std::min(total, l + dl), ll = std::max(0.0, l - dl);
        slope[i] = std::abs(radius_at(lh) - radius_at(ll)) / (lh - ll);
    }
    // longest sustained run below the limit; isolated dips at the cap apex
    // (where the radius has a local minimum) must not stop the trim early
    int best_lo = 0, best_hi = -1, run_lo = -1;
    for (int i = 0; i <= scan + 1; ++i) {
        const bool ok = i <= scan && slope[i] < 0.95;
        if (ok && run_lo < 0) run_lo = i;
        if (!ok && run_lo >= 0) {
            if (i - 1 - run_lo > best_hi - best_lo) {
                best_lo = run_lo;
                best_hi = i - 1;
            }
            run_lo = -1;
        }
    }
    double l_lo = std::max(0.02 * total, total * best_lo / scan);
    double l_hi = std::min(0.98 * total, total * best_hi / scan);
    if (l_hi - l_lo < 0.25 * total)
        throw Error("gc2d", "radius slope exceeds the end-cap limit over most of the curve");
    model.window_lo = l_lo / total;
    model.window_hi = l_hi / total;

    const auto spokes = spokes_in_window(curve, radius_at, count, l_lo, l_hi);

    for (std::size_t k = 0; k < spokes.stations.size(); ++k) {
        Vec2 dir = spokes.up_tips[k] - spokes.down_tips[k];
        if (dir.norm() < 1e-14) throw Error("gc2d", "degenerate chord");
        dir.normalize();
        const Vec2 mid = 0.5 * (spokes.up_tips[k] + spokes.down_tips[k]);
        const auto up_hit = polygon_ray(boundary, mid, dir);
        const auto down_hit = polygon_ray(boundary, mid, Vec2(-dir));
        if (!up_hit || !down_hit)
            throw Error("gc2d",
                        "chord failed to reach the boundary at station " + std::to_string(k));
        SemiChord chord;
        chord.spine_point = spokes.stations[k];
        chord.up_tip = up_hit->point;
        chord.down_tip = down_hit->point;
        chord.fraction = spokes.fractions[k];
        model.chords.push_back(chord);
        model.radius.push_back(spokes.radius[k]);
    }

    // trim pairwise intersections; shrinking only, so the loop terminates
    for (bool dirty = true; dirty;) {
        dirty = false;
        for (std::size_t i = 0; i < model.chords.size(); ++i)
            for (std::size_t j = i + 1; j < model.chords.size(); ++j) {
                auto& a = model.chords[i];
                auto& b = model.chords[j];
                const auto q =
                    segment_intersection(a.up_tip, a.down_tip, b.up_tip, b.down_tip, 1e-9);
                if (!q) continue;
                auto trim = [&](SemiChord& c) {
                    // cut the side of the crossing farther from the spine point
                    const Vec2 axis = (c.up_tip - c.down_tip).normalized();
                    const double t_q = axis.dot(*q - c.down_tip);
                    const double t_p = axis.dot(c.spine_point - c.down_tip);
                    if (t_q > t_p)
                        c.up_tip = *q;
                    else
                        c.down_tip = *q;
                };
                trim(a);
                trim(b);
                dirty = true;
            }
    }

    for (std::size_t k = 0; k < model.chords.size(); ++k) {
        const auto& c = model.chords[k];
        const double x = curve.x_at_arclength(l_lo + c.fraction * (l_hi - l_lo));
        const double kappa = center_curve.curvature(x);
        const double half_width =
            std::max((c.up_tip - c.spine_point).norm(), (c.down_tip - c.spine_point).norm());
        if (half_width * kappa >= 1.0) model.rcc_violations.push_back(int(k));
    }
    return model;
}

double Gc2dModel::station_arclength_span() const {
    const CurveSampler curve(center_curve, curve_x_min, curve_x_max);
    return (window_hi - window_lo) * curve.total_length();
}

Straightened2d straighten_2d(const Gc2dModel& model) {
    if (model.chords.empty()) throw Error("gc2d", "model has no chords");
    const double span = model.station_arclength_span();

    Straightened2d out;
    double along = 0;
    for (std::size_t i = 0; i < model.chords.size(); ++i) {
        if (i > 0)
            along += (model.chords[i].fraction - model.chords[i - 1].fraction) * span;
        out.spine.emplace_back(along, 0.0);
        const double half = 0.5 * model.chords[i].length();
        out.chords.push_back({Vec2(along, half), Vec2(along, -half)});
    }
    for (const auto& c : out.chords) out.outline.points.push_back(c[0]);
    for (auto it = out.chords.rbegin(); it != out.chords.rend(); ++it)
        out.outline.points.push_back((*it)[1]);
    return out;
}

// ------------------------------------------------------------------ io

namespace {

struct SvgCanvas {
    std::ofstream out;
    double min_x, min_y, scale;

    SvgCanvas(const std::string& path, double x0, double y0, double x1, double y1)
        : out(path), min_x(x0), min_y(y1), scale(760.0 / std::max(x1 - x0, y1 - y0)) {
        if (!out) throw Error("gc2d", "cannot write " + path);
        out << "<svg xmlns='http://www.w3.org/2000/svg' width='800' height='"
            << int((y1 - y0) * scale) + 40 << "'>\n";
    }
    double X(double x) const { return 20 + (x - min_x) * scale; }
    double Y(double y) const { return 20 + (min_y - y) * scale; }  // y up
    void polyline(const std::vector<Vec2>& pts, const char* color, bool closed,
                  double width = 1.5) {
        out << "<path d='";
        for (std::size_t i = 0; i < pts.size(); ++i)
            out << (i ? "L" : "M") << X(pts[i].x()) << ' ' << Y(pts[i].y()) << ' ';
        if (closed) out << "Z";
        out << "' fill='none' stroke='" << color << "' stroke-width='" << width << "'/>\n";
    }
    void segment(const Vec2& a, const Vec2& b, const char* color, double width = 1.0) {
        out << "<line x1='" << X(a.x()) << "' y1='" << Y(a.y()) << "' x2='" << X(b.x())
            << "' y2='" << Y(b.y()) << "' stroke='" << color << "' stroke-width='" << width
            << "'/>\n";
    }
    void dot(const Vec2& p, const char* color) {
        out << "<circle cx='" << X(p.x()) << "' cy='" << Y(p.y()) << "' r='2.5' fill='" << color
            << "'/>\n";
    }
    ~SvgCanvas() { out << "</svg>\n"; }
};

}  // namespace

void save_gc2d_svg(const Gc2dModel& model, const std::string& path) {
    Vec2 lo, hi;
    model.boundary.bounding_box(lo, hi);
    SvgCanvas svg(path, lo.x(), lo.y(), hi.x(), hi.y());
    svg.polyline(model.boundary.points, "#333333", true);

    const CurveSampler curve(model.center_curve, model.curve_x_min, model.curve_x_max);
    std::vector<Vec2> cpts;
    for (int i = 0; i <= 200; ++i) cpts.push_back(curve.point_at_fraction(i / 200.0));
    svg.polyline(cpts, "#0055cc", false, 2.0);

    for (const auto& c : model.chords) {
        svg.segment(c.spine_point, c.up_tip, "#2a9d3f");
        svg.segment(c.spine_point, c.down_tip, "#cc3344");
        svg.dot(c.midpoint(), "#000000");
    }
}

void save_gc2d_svg(const Straightened2d& model, const std::string& path) {
    Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
    for (const auto& c : model.chords) {
        lo = lo.cwiseMin(c[1]);
        hi = hi.cwiseMax(c[0]);
    }
    SvgCanvas svg(path, lo.x(), lo.y(), hi.x(), hi.y());
    svg.polyline(model.outline.points, "#333333", true);
    for (const auto& c : model.chords) svg.segment(c[0], c[1], "#2a9d3f");
    svg.polyline(model.spine, "#0055cc", false, 2.0);
}

void save_gc2d_json(const Gc2dModel& model, const std::string& path) {
    nlohmann::json j;
    for (const auto& p : model.boundary.points) j["boundary"]["points"].push_back({p.x(), p.y()});
    for (auto l : model.boundary.labels) j["boundary"]["labels"].push_back(int(l));
    j["vertex0"] = model.vertex0;
    j["vertex1"] = model.vertex1;
    j["center_curve"]["coefficients"] =
        std::vector<double>(model.center_curve.coeffs.data(),
                            model.center_curve.coeffs.data() + model.center_curve.coeffs.size());
    j["center_curve"]["x_min"] = model.curve_x_min;
    j["center_curve"]["x_max"] = model.curve_x_max;
    for (const auto& c : model.chords)
        j["chords"].push_back({{"spine", {c.spine_point.x(), c.spine_point.y()}},
                               {"up", {c.up_tip.x(), c.up_tip.y()}},
                               {"down", {c.down_tip.x(), c.down_tip.y()}},
                               {"fraction", c.fraction}});
    j["radius"] = model.radius;
    j["rcc_violations"] = model.rcc_violations;
    std::ofstream out(path);
    if (!out) throw Error("gc2d", "cannot write " + path);
    out << j.dump(2) << '\n';
}

SyntheticGc2d make_synthetic_gc2d(std::uint64_t seed) {
    Rng rng(seed);
    const double length = rng.uniform(3.0, 5.0);
    Poly1 curve;
    curve.coeffs = VecX::Zero(4);
    curve.coeffs[1] = rng.uniform(-0.15, 0.15);
    curve.coeffs[2] = rng.uniform(-0.08, 0.08);
    curve.coeffs[3] = rng.uniform(-0.02, 0.02);
    curve.x_min = 0;
    curve.x_max = length;

    const double r0 = rng.uniform(0.3, 0.5);
    const double r1 = rng.uniform(0.05, 0.25) * r0;
    const double phase = rng.uniform(0, 2 * M_PI);
    auto radius = [&](double x) { return r0 + r1 * std::sin(2 * M_PI * x / length + phase); };

    SyntheticGc2d gc;
    gc.true_curve = curve;
    gc.length = length;
    Polygon2& poly = gc.boundary;

    const int n = 160, cap_n = 15;
    auto tangent_angle = [&](double x) { return std::atan2(curve.deriv(x), 1.0); };

    // upper side, left to right
    for (int i = 0; i <= n; ++i) {
        const double x = length * i / n;
        const double a = tangent_angle(x) + M_PI / 2;
        poly.points.push_back(Vec2(x, curve.eval(x)) + radius(x) * Vec2(std::cos(a), std::sin(a)));
        poly.labels.push_back(1);
    }
    // right cap: sweep from +normal through +tangent to -normal
    for (int s = 1; s < cap_n; ++s) {
        const double a = tangent_angle(length) + M_PI / 2 - M_PI * s / cap_n;
        poly.points.push_back(Vec2(length, curve.eval(length)) +
                              radius(length) * Vec2(std::cos(a), std::sin(a)));
        poly.labels.push_back(s <= cap_n / 2 ? 1 : 0);
    }
    // lower side, right to left
    for (int i = n; i >= 0; --i) {
        const double x = length * i / n;
        const double a = tangent_angle(x) - M_PI / 2;
        poly.points.push_back(Vec2(x, curve.eval(x)) + radius(x) * Vec2(std::cos(a), std::sin(a)));
        poly.labels.push_back(0);
    }
    // left cap: sweep from -normal through -tangent to +normal
    for (int s = 1; s < cap_n; ++s) {
        const double a = tangent_angle(0) - M_PI / 2 - M_PI * s / cap_n;
        poly.points.push_back(Vec2(0, curve.eval(0)) +
                              radius(0) * Vec2(std::cos(a), std::sin(a)));
        poly.labels.push_back(s <= cap_n / 2 ? 0 : 1);
    }
    return gc;
}

Frame2 pca_frame_2d(const std::vector<Vec2>& points) {
    if (points.size() < 2) throw Error("gc2d", "need at least 2 points");
    Frame2 f;
    for (const auto& p : points) f.center += p;
    f.center /= double(points.size());
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& p : points) {
        const Vec2 d = p - f.center;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(cov);
    Vec2 e1 = solver.eigenvectors().col(1);
    if (std::abs(e1.x()) >= std::abs(e1.y()) ? e1.x() < 0 : e1.y() < 0) e1 = -e1;
    f.axes.col(0) = e1;
    f.axes.col(1) = Vec2(-e1.y(), e1.x());
    return f;
}

}  // namespace dss
