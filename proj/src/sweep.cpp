#include <dss/sweep.hpp>

#include <dss/kdtree.hpp>
#include <dss/ray.hpp>

#include <filesystem>

namespace dss {

const char* to_string(PlaneMode mode) {
    switch (mode) {
        case PlaneMode::ChordalSpineChordalPlanes: return "chordal-chordal";
        case PlaneMode::RelaxedSpineChordalPlanes: return "relaxed-chordal";
        case PlaneMode::RelaxedSpineNormalPlanes: return "relaxed-normal";
    }
    return "?";
}

PlaneMode plane_mode_from_string(const std::string& name) {
    if (name == "chordal-chordal") return PlaneMode::ChordalSpineChordalPlanes;
    if (name == "relaxed-chordal") return PlaneMode::RelaxedSpineChordalPlanes;
    if (name == "relaxed-normal") return PlaneMode::RelaxedSpineNormalPlanes;
    throw Error("sweep", "unknown plane mode '" + name + "'");
}

Vec3 SheetFit::normal_world(const Vec2& xy) const {
    const Vec2 g = surface.gradient(xy.x(), xy.y());
    const Vec3 local(-g.x(), -g.y(), 1.0);
    return (frame.axes * local).normalized();
}

SheetFit fit_skeletal_sheet(const std::vector<Vec3>& cms_points, int degree,
                            const SheetOrientation* orientation, bool allow_irregular) {
    if (degree < 1 || degree > 7)
        throw Error("sweep", "sheet degree must be in 1..7, got " + std::to_string(degree));

    SheetFit fit;
    fit.degree = degree;
    fit.flat_map = pca_flatten(cms_points);
    if (!fit.flat_map.flatable && !allow_irregular)
        throw Error("sweep",
                    "CMS is not PCA flatable; use the irregular-object override if it is "
                    "treatable");
    fit.frame = fit.flat_map.frame;
    if (orientation && orientation->top_direction.norm() > 0) {
        fit.frame.orient(orientation->top_direction, orientation->anchor_direction.norm() > 0
                                                         ? orientation->anchor_direction
                                                         : fit.frame.axes.col(0));
    }

    std::vector<Vec3> local;
    local.reserve(cms_points.size());
    for (const auto& p : cms_points) {
        const Vec2 xy = fit.frame.to_plane(p);
        local.emplace_back(xy.x(), xy.y(), fit.frame.height(p));
    }
    const auto poly = fit_poly2(local, degree);
    fit.surface = poly.poly;
    fit.rms = poly.rms;
    return fit;
}

Vec3 SpineFit::at_fraction(double f) const {
    const double l = clamp01(f) * length();
    const auto it = std::lower_bound(cumlen.begin(), cumlen.end(), l);
    if (it == cumlen.begin()) return points.front();
    const std::size_t i = it - cumlen.begin();
    const double seg = cumlen[i] - cumlen[i - 1];
    const double t = seg > 0 ? (l - cumlen[i - 1]) / seg : 0;
    return points[i - 1] + t * (points[i] - points[i - 1]);
}

Vec3 SpineFit::tangent_at_fraction(double f) const {
    const double l = clamp01(f) * length();
    auto it = std::lower_bound(cumlen.begin(), cumlen.end(), l);
    std::size_t i = it - cumlen.begin();
    i = std::min(std::max<std::size_t>(i, 1), points.size() - 1);
    return (points[i] - points[i - 1]).normalized();
}

double SpineFit::fraction_nearest(const Vec3& p) const {
    double best = 0, best_d = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = (points[i] - p).norm();
        if (d < best_d) {
            best_d = d;
            best = cumlen[i] / length();
        }
    }
    return best;
}

namespace {

// side-labeled projection of the crest loop: the two arcs between the
// extreme-x points, the upper one labeled top
Polygon2 project_crest(const PcaFrame& frame, const std::vector<Vec3>& crest_loop) {
    Polygon2 poly;
    for (const auto& p : crest_loop) poly.points.push_back(frame.to_plane(p));
    const int n = poly.size();
    if (n < 4) throw Error("sweep", "crest loop too short");

    int v0 = 0, v1 = 0;
    for (int i = 1; i < n; ++i) {
        if (poly.points[i].x() < poly.points[v0].x()) v0 = i;
        if (poly.points[i].x() > poly.points[v1].x()) v1 = i;
    }
    poly.labels.assign(n, 0);
    double mean_a = 0, mean_b = 0;
    int count_a = 0, count_b = 0;
    for (int i = v0; i % n != v1; ++i) {
        mean_a += poly.points[i % n].y();
        ++count_a;
    }
    for (int i = v1; i % n != v0; ++i) {
        mean_b += poly.points[i % n].y();
        ++count_b;
    }
    const bool arc_a_is_top = mean_a / std::max(count_a, 1) > mean_b / std::max(count_b, 1);
    for (int i = v0; i % n != v1; ++i) poly.labels[i % n] = arc_a_is_top ? 1 : 0;
    for (int i = v1; i % n != v0; ++i) poly.labels[i % n] = arc_a_is_top ? 0 : 1;
    poly.labels[v1] = poly.labels[((v1 - 1) % n + n) % n];
    return poly;
}

double polyline_length(const std::vector<Vec3>& pts) {
    double l = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) l += (pts[i] - pts[i - 1]).norm();
    return l;
}

Vec3 sample_polyline(const std::vector<Vec3>& pts, double fraction) {
    const double total = polyline_length(pts);
    double want = clamp01(fraction) * total, run = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double seg = (pts[i] - pts[i - 1]).norm();
        if (run + seg >= want)
            return pts[i - 1] + (seg > 0 ? (want - run) / seg : 0) * (pts[i] - pts[i - 1]);
        run += seg;
    }
    return pts.back();
}

}  // namespace

SpineFit fit_spine(const SheetFit& sheet, const std::vector<Vec3>& crest_loop, int degree,
                   bool chordal_spine) {
    SpineFit spine;
    spine.degree = degree;
    spine.crest2d = project_crest(sheet.frame, crest_loop);

    const auto cms2d = extract_cms(spine.crest2d);
    auto fit = fit_relaxed_cms_2d(cms2d.points, degree);
    if (chordal_spine) {
        const auto gc = semi_chordal_structure(fit.poly, spine.crest2d, 40);
        std::vector<Vec2> midpoints;
        for (const auto& c : gc.chords) midpoints.push_back(c.midpoint());
        fit = fit_relaxed_cms_2d(midpoints, degree);
    }
    spine.curve2d = fit.poly;

    // extend the curve from the domain center until it crosses the projected
    // crest loop; the crossings are the spine endpoints
    Vec2 lo, hi;
    spine.crest2d.bounding_box(lo, hi);
    const double step = (hi - lo).norm() / 2000.0;
    const double x_center = 0.5 * (fit.poly.x_min + fit.poly.x_max);
    if (!point_in_polygon(spine.crest2d, {x_center, fit.poly.eval(x_center)}))
        throw Error("sweep", "center curve leaves the flattened sheet domain");
    auto cross_at = [&](double direction) {
        double x = x_center;
        while (point_in_polygon(spine.crest2d, {x, fit.poly.eval(x)})) {
            x += direction * step;
            if (std::abs(x - x_center) > 4 * (hi - lo).norm())
                throw Error("sweep", "center curve never crosses the projected crest");
        }
        double in = x - direction * step, out = x;
        for (int i = 0; i < 50; ++i) {
            const double m = 0.5 * (in + out);
            (point_in_polygon(spine.crest2d, {m, fit.poly.eval(m)}) ? in : out) = m;
        }
        return 0.5 * (in + out);
    };
    const double x_a = cross_at(-1.0), x_b = cross_at(+1.0);

    const int samples = 400;
    spine.points.reserve(samples + 1);
    for (int i = 0; i <= samples; ++i) {
        const double x = x_a + (x_b - x_a) * i / samples;
        spine.points.push_back(sheet.lift({x, fit.poly.eval(x)}));
    }
    spine.cumlen.resize(spine.points.size());
    spine.cumlen[0] = 0;
    for (std::size_t i = 1; i < spine.points.size(); ++i)
        spine.cumlen[i] = spine.cumlen[i - 1] + (spine.points[i] - spine.points[i - 1]).norm();
    if (spine.length() <= 0) throw Error("sweep", "degenerate spine");

    const KdTree3 crest_tree(crest_loop);
    spine.vertex_a = crest_loop[crest_tree.nearest(spine.points.front()).first];
    spine.vertex_b = crest_loop[crest_tree.nearest(spine.points.back()).first];
    return spine;
}

namespace {

struct VeinMarcher {
    const SheetFit& sheet;
    const Polygon2& crest2d;
    const Vec3 plane_normal;
    const Vec3 plane_point;

    double g(const Vec2& xy) const { return plane_normal.dot(sheet.lift(xy) - plane_point); }
    Vec2 grad(const Vec2& xy) const {
        const Vec2 zg = sheet.surface.gradient(xy.x(), xy.y());
        const Vec3 dx = sheet.frame.axes.col(0) + zg.x() * sheet.frame.axes.col(2);
        const Vec3 dy = sheet.frame.axes.col(1) + zg.y() * sheet.frame.axes.col(2);
        return {plane_normal.dot(dx), plane_normal.dot(dy)};
    }
    Vec2 correct(Vec2 xy) const {
        for (int i = 0; i < 3; ++i) {
            const Vec2 gr = grad(xy);
            const double n2 = gr.squaredNorm();
            if (n2 < 1e-20) break;
            xy -= (g(xy) / n2) * gr;
        }
        return xy;
    }

    // marches from the station along the in-plane surface direction until the
    // projected crest is left; returns surface points excluding the start
    std::vector<Vec3> march(const Vec2& start, const Vec2& first_dir, double step) const {
        std::vector<Vec3> out;
        Vec2 xy = start;
        Vec2 prev_dir = first_dir;
        for (int iter = 0; iter < 10000; ++iter) {
            const Vec2 gr = grad(xy);
            Vec2 dir(-gr.y(), gr.x());
            if (dir.norm() < 1e-14) break;
            dir.normalize();
            if (dir.dot(prev_dir) < 0) dir = -dir;
            Vec2 next = correct(xy + step * dir);
            if (!point_in_polygon(crest2d, next)) return out;
            out.push_back(sheet.lift(next));
            prev_dir = dir;
            xy = next;
        }
        throw Error("sweep", "vein march did not terminate");
    }
};

// crossing of the closed crest polyline with the plane, restricted to the
// half-space along side_dir, nearest to near_point
std::optional<Vec3> crest_plane_crossing(const std::vector<Vec3>& crest, const Vec3& plane_point,
                                         const Vec3& plane_normal, const Vec3& station,
                                         const Vec3& side_dir, const Vec3& near_point) {
    std::optional<Vec3> best;
    double best_d = std::numeric_limits<double>::max();
    const int n = int(crest.size());
    for (int i = 0; i < n; ++i) {
        const Vec3& a = crest[i];
        const Vec3& b = crest[(i + 1) % n];
        const double sa = plane_normal.dot(a - plane_point);
        const double sb = plane_normal.dot(b - plane_point);
        if ((sa > 0) == (sb > 0)) continue;
        const double t = sa / (sa - sb);
        const Vec3 q = a + t * (b - a);
        if ((q - station).dot(side_dir) <= 0) continue;
        const double d = (q - near_point).norm();
        if (d < best_d) {
            best_d = d;
            best = q;
        }
    }
    return best;
}

std::vector<Vec3> surface_distance_samples(const TriangleMesh& mesh) {
    std::vector<Vec3> pts = mesh.vertices();
    for (int f = 0; f < mesh.face_count(); ++f) pts.push_back(mesh.face_centroid(f));
    return pts;
}

Mat3 frame_columns(const Vec3& normal, const Vec3& tangent) {
    return orthonormal_frame(normal, tangent);
}

}  // namespace

Mat3 orthonormal_frame(const Vec3& normal, const Vec3& tangent) {
    Vec3 n = normal.normalized();
    Vec3 b = tangent - tangent.dot(n) * n;
    const double len = b.norm();
    if (len < 1e-14) throw Error("sweep", "tangent parallel to the sheet normal");
    b /= len;
    Mat3 f;
    f.col(0) = n;
    f.col(1) = b;
    f.col(2) = n.cross(b);
    return f;
}

namespace {

std::vector<Vec3> tangents_along(const std::vector<Vec3>& pts) {
    const int n = int(pts.size());
    std::vector<Vec3> t(n);
    for (int i = 0; i < n; ++i) {
        const Vec3 d = pts[std::min(i + 1, n - 1)] - pts[std::max(i - 1, 0)];
        t[i] = d.norm() > 0 ? Vec3(d.normalized()) : Vec3(1, 0, 0);
    }
    return t;
}

}  // namespace

std::vector<Mat3> rotation_minimizing_frames(const std::vector<Vec3>& points,
                                             const Vec3& seed_normal) {
    const int n = int(points.size());
    if (n < 2) throw Error("sweep", "need at least 2 points for moving frames");
    const auto tangents = tangents_along(points);

    std::vector<Mat3> frames(n);
    Vec3 t0 = tangents[0];
    Vec3 n0 = seed_normal - seed_normal.dot(t0) * t0;
    if (n0.norm() < 1e-12) {
        int k = std::abs(t0.x()) < std::abs(t0.y()) ? 0 : 1;
        if (std::abs(t0.z()) < std::abs(t0[k])) k = 2;
        Vec3 e = Vec3::Zero();
        e[k] = 1;
        n0 = e - e.dot(t0) * t0;
    }
    n0.normalize();
    frames[0].col(0) = t0;
    frames[0].col(1) = n0;
    frames[0].col(2) = t0.cross(n0);

    // double reflection
    for (int i = 0; i + 1 < n; ++i) {
        const Vec3 v1 = points[i + 1] - points[i];
        const double c1 = v1.squaredNorm();
        Vec3 nL = frames[i].col(1), tL = tangents[i];
        if (c1 > 1e-24) {
            nL = nL - (2.0 * v1.dot(nL) / c1) * v1;
            tL = tL - (2.0 * v1.dot(tL) / c1) * v1;
        }
        const Vec3 v2 = tangents[i + 1] - tL;
        const double c2 = v2.squaredNorm();
        Vec3 ni = c2 > 1e-24 ? Vec3(nL - (2.0 * v2.dot(nL) / c2) * v2) : nL;
        ni = (ni - ni.dot(tangents[i + 1]) * tangents[i + 1]).normalized();
        frames[i + 1].col(0) = tangents[i + 1];
        frames[i + 1].col(1) = ni;
        frames[i + 1].col(2) = tangents[i + 1].cross(ni);
    }
    return frames;
}

SweptModel build_cross_sections(const SheetFit& sheet, const SpineFit& spine,
                                const TriangleMesh& mesh, const BoundaryDivision& division,
                                int stations, PlaneMode mode) {
    if (stations < 3) throw Error("sweep", "need at least 3 stations");

    SweptModel model;
    model.sheet = sheet;
    model.spine = spine;
    model.mode = mode;
    model.stations = stations;

    const auto crest3d = crest_polyline(mesh, division.crest);
    const Vec3 e3 = sheet.frame.axes.col(2);

    const bool chordal_planes = mode != PlaneMode::RelaxedSpineNormalPlanes;
    if (chordal_planes)
        model.flat_gc = semi_chordal_structure(spine.curve2d, spine.crest2d, stations);

    std::vector<Vec3> station_pts(stations);
    std::vector<Vec3> normals(stations);
    std::vector<double> fractions(stations);
    if (chordal_planes) {
        for (int k = 0; k < stations; ++k) {
            const auto& chord = model.flat_gc.chords[k];
            Vec2 cdir2 = chord.up_tip - chord.down_tip;
            if (cdir2.norm() < 1e-14) throw Error("sweep", "degenerate chord");
            cdir2.normalize();
            const Vec3 cdir =
                cdir2.x() * sheet.frame.axes.col(0) + cdir2.y() * sheet.frame.axes.col(1);
            const Vec3 n = cdir.cross(e3).normalized();
            const Vec3 q0 = sheet.lift(chord.midpoint());

            // station = spine crossing of the plane, nearest to the chord
            std::optional<Vec3> best;
            double best_d = std::numeric_limits<double>::max(), best_frac = 0;
            for (std::size_t i = 0; i + 1 < spine.points.size(); ++i) {
                const double sa = n.dot(spine.points[i] - q0);
                const double sb = n.dot(spine.points[i + 1] - q0);
                if ((sa > 0) == (sb > 0)) continue;
                const double t = sa / (sa - sb);
                const Vec3 q = spine.points[i] + t * (spine.points[i + 1] - spine.points[i]);
                const double d = (q - q0).norm();
                if (d < best_d) {
                    best_d = d;
                    best = q;
                    best_frac =
                        (spine.cumlen[i] + t * (spine.cumlen[i + 1] - spine.cumlen[i])) /
                        spine.length();
                }
            }
            if (!best)
                throw Error("sweep",
                            "slicing plane misses the spine at station " + std::to_string(k));
            station_pts[k] = *best;
            normals[k] = n;
            fractions[k] = best_frac;
        }
    } else {
        for (int k = 0; k < stations; ++k) {
            const double f = double(k + 1) / (stations + 1);
            fractions[k] = f;
            station_pts[k] = spine.at_fraction(f);
            normals[k] = spine.tangent_at_fraction(f);
        }
        model.rmf = rotation_minimizing_frames(
            station_pts, sheet.normal_world(sheet.frame.to_plane(station_pts[0])));
    }

    Vec2 lo2, hi2;
    spine.crest2d.bounding_box(lo2, hi2);
    const double march_step = (hi2 - lo2).norm() / 400.0;

    for (int k = 0; k < stations; ++k) {
        CrossSection section;
        section.station = station_pts[k];
        section.plane_normal = normals[k];
        section.fraction = fractions[k];

        const Vec2 station_xy = sheet.frame.to_plane(section.station);
        const Vec3 n_surf = sheet.normal_world(station_xy);
        Vec3 w = normals[k].cross(n_surf);
        if (w.norm() < 1e-12) throw Error("sweep", "slicing plane tangent to the sheet");
        w.normalize();
        // "right" = positive second-axis side of travel along the spine, in
        // sheet coordinates
        const Vec2 spine_t2 = Vec2(1.0, spine.curve2d.deriv(station_xy.x())).normalized();
        const Vec2 right2(spine_t2.y(), -spine_t2.x());
        const Vec2 w2(w.dot(sheet.frame.axes.col(0)), w.dot(sheet.frame.axes.col(1)));
        const Vec3 w_right = w2.dot(right2) >= 0 ? w : Vec3(-w);

        const VeinMarcher marcher{sheet, spine.crest2d, normals[k], section.station};
        for (int side = 0; side < 2; ++side) {
            const Vec3 dir3 = side == 0 ? w_right : Vec3(-w_right);
            const Vec2 dir2 =
                Vec2(dir3.dot(sheet.frame.axes.col(0)), dir3.dot(sheet.frame.axes.col(1)))
                    .normalized();
            auto pts = marcher.march(station_xy, dir2, march_step);
            std::vector<Vec3> vein{section.station};
            vein.insert(vein.end(), pts.begin(), pts.end());
            const Vec3 near_pt = vein.back();
            const auto clip = crest_plane_crossing(crest3d, section.station, normals[k],
                                                   section.station, dir3, near_pt);
            if (!clip)
                throw Error("sweep",
                            "slicing plane fails to intersect the crest on one side at "
                            "station " +
                                std::to_string(k));
            vein.push_back(*clip);
            (side == 0 ? section.vein_right : section.vein_left) = std::move(vein);
        }
        model.vein_len_right.push_back(polyline_length(section.vein_right));
        model.vein_len_left.push_back(polyline_length(section.vein_left));
        model.sections.push_back(std::move(section));
    }

    // relative curvature check: the intersection line of consecutive slicing
    // planes must stay outside the object
    const TriBvh bvh(mesh);
    const KdTree3 surface_tree(surface_distance_samples(mesh));
    const double diag = mesh.bounds().diagonal();
    for (int k = 0; k + 1 < stations; ++k) {
        const Vec3& n1 = model.sections[k].plane_normal;
        const Vec3& n2 = model.sections[k + 1].plane_normal;
        const Vec3& p1 = model.sections[k].station;
        const Vec3& p2 = model.sections[k + 1].station;
        RccPair pair;
        pair.margin = diag;
        const Vec3 d = n1.cross(n2);
        if (d.norm() > 1e-10) {
            Eigen::Matrix2d gram;
            gram << 1.0, n1.dot(n2), n1.dot(n2), 1.0;
            const Vec2 rhs(n1.dot(p1), n2.dot(p2));
            const Vec2 c = gram.ldlt().solve(rhs);
            const Vec3 x0 = c.x() * n1 + c.y() * n2;
            const Vec3 dn = d.normalized();

            const double t_mid = dn.dot(mesh.bounds().center() - x0);
            for (int s = 0; s <= 200; ++s) {
                const double t = t_mid + diag * (s / 100.0 - 1.0);
                const Vec3 q = x0 + t * dn;
                if (!mesh.bounds().contains(q)) continue;
                const double dist = surface_tree.nearest_distance(q);
                const double signed_dist = bvh.inside(q) ? -dist : dist;
                pair.margin = std::min(pair.margin, signed_dist);
            }
            pair.intersects_inside = pair.margin < 0;
        }
        model.rcc.pairs.push_back(pair);
    }
    return model;
}

void compute_spokes(SweptModel& model, const TriangleMesh& mesh,
                    const BoundaryDivision& division, int samples_per_vein) {
    if (samples_per_vein < 1) throw Error("sweep", "need at least 1 sample per vein");
    model.vein_samples = samples_per_vein;
    model.spokes.sites.clear();
    model.spokes.stations = model.stations;
    model.spokes.per_side = samples_per_vein;

    std::vector<std::uint8_t> face_top(mesh.face_count());
    for (int f = 0; f < mesh.face_count(); ++f) {
        const auto& t = mesh.faces()[f];
        face_top[f] =
            (division.is_top(t[0]) + division.is_top(t[1]) + division.is_top(t[2])) >= 2;
    }
    const TriBvh bvh(mesh);
    const std::function<bool(int)> top_filter = [&](int f) { return face_top[f] != 0; };
    const std::function<bool(int)> bottom_filter = [&](int f) { return face_top[f] == 0; };

    // the sheet normal points along the frame's third axis, which is oriented
    // toward the top part, so +normal is the up side
    auto make_site = [&](const Vec3& pos, int station, int side, int slot) {
        SpokeSite site;
        site.position = pos;
        site.station = station;
        site.side = side;
        site.slot = slot;
        Vec3 u = model.sheet.normal_world(model.sheet.frame.to_plane(pos));
        if (model.mode != PlaneMode::RelaxedSpineNormalPlanes) {
            const Vec3& pn = model.sections[station].plane_normal;
            u = (u - u.dot(pn) * pn);
            if (u.norm() < 1e-12)
                throw Error("sweep", "spoke direction degenerate in the slicing plane");
            u.normalize();
        }
        site.up_dir = u;
        const auto up = bvh.intersect(pos, u, 1e-10, &top_filter);
        const auto down = bvh.intersect(pos, -u, 1e-10, &bottom_filter);
        if (!up || !down)
            throw Error("sweep", "spoke ray missed its boundary part at station " +
                                     std::to_string(station));
        site.tip_up = up->point;
        site.r_up = up->t;
        site.face_up = up->face;
        site.tip_down = down->point;
        site.r_down = down->t;
        site.face_down = down->face;
        return site;
    };

    for (int k = 0; k < model.stations; ++k) {
        const auto& sec = model.sections[k];
        model.spokes.sites.push_back(make_site(sec.station, k, 0, 0));
        for (int side = 0; side < 2; ++side) {
            const auto& vein = side == 0 ? sec.vein_right : sec.vein_left;
            for (int j = 1; j <= samples_per_vein; ++j) {
                const Vec3 pos = sample_polyline(vein, double(j) / (samples_per_vein + 1));
                model.spokes.sites.push_back(make_site(pos, k, side == 0 ? 1 : -1, j));
            }
        }
    }

    // moving frames for the tidiness measures: along the spine including both
    // endpoints, and along each full section curve (left crest to right crest)
    model.frames.spine.clear();
    model.frames.sections.clear();
    model.frames.rotation_offsets.clear();

    std::vector<Vec3> spine_pts{model.spine.points.front()};
    for (const auto& sec : model.sections) spine_pts.push_back(sec.station);
    spine_pts.push_back(model.spine.points.back());
    const auto spine_tans = tangents_along(spine_pts);
    for (std::size_t i = 0; i < spine_pts.size(); ++i) {
        const Vec3 n = model.sheet.normal_world(model.sheet.frame.to_plane(spine_pts[i]));
        model.frames.spine.push_back(frame_columns(n, spine_tans[i]));
    }

    for (int k = 0; k < model.stations; ++k) {
        const auto& sec = model.sections[k];
        std::vector<Vec3> curve;
        curve.push_back(sec.vein_left.back());
        for (int j = samples_per_vein; j >= 1; --j)
            curve.push_back(sample_polyline(sec.vein_left, double(j) / (samples_per_vein + 1)));
        curve.push_back(sec.station);
        for (int j = 1; j <= samples_per_vein; ++j)
            curve.push_back(sample_polyline(sec.vein_right, double(j) / (samples_per_vein + 1)));
        curve.push_back(sec.vein_right.back());

        const auto tans = tangents_along(curve);
        std::vector<Mat3> frames;
        for (std::size_t i = 0; i < curve.size(); ++i) {
            const Vec3 n = model.sheet.normal_world(model.sheet.frame.to_plane(curve[i]));
            frames.push_back(frame_columns(n, tans[i]));
        }
        const Vec3 b_perp_spine = model.frames.spine[k + 1].col(2);
        const Vec3 b_section = frames[samples_per_vein + 1].col(1);
        model.frames.rotation_offsets.push_back(angle_first_quadrant(b_perp_spine, b_section));
        model.frames.sections.push_back(std::move(frames));
    }
}

SweptModel fit_swept_model(const TriangleMesh& mesh, const BoundaryDivision& division,
                           const CmsPointSet3& cms, const SweepOptions& options) {
    SheetOrientation orient;
    Vec3 mean_top = Vec3::Zero(), mean_bottom = Vec3::Zero();
    long nt = 0, nb = 0;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (division.is_top(v)) {
            mean_top += mesh.vertices()[v];
            ++nt;
        } else {
            mean_bottom += mesh.vertices()[v];
            ++nb;
        }
    }
    if (nt == 0 || nb == 0) throw Error("sweep", "degenerate division");
    orient.top_direction = (mean_top / double(nt) - mean_bottom / double(nb)).normalized();

    SheetFit sheet =
        fit_skeletal_sheet(cms.points, options.sheet_degree, &orient, options.allow_irregular);

    // anchor the first axis to a crest vertex so repeated fits of the same
    // mesh and fits of rigidly moved copies orient the spine consistently:
    // among crest vertices near the extreme projections, the smallest mesh
    // index wins
    {
        const Vec3 axis1 = sheet.frame.axes.col(0);
        double pmin = std::numeric_limits<double>::max(), pmax = -pmin;
        for (int v : division.crest) {
            const double p = axis1.dot(mesh.vertices()[v] - sheet.frame.centroid);
            pmin = std::min(pmin, p);
            pmax = std::max(pmax, p);
        }
        const double band = 0.05 * (pmax - pmin);
        int anchor = -1;
        for (int v : division.crest) {
            const double p = axis1.dot(mesh.vertices()[v] - sheet.frame.centroid);
            if (std::abs(p) >= std::max(std::abs(pmin), std::abs(pmax)) - band)
                if (anchor < 0 || v < anchor) anchor = v;
        }
        if (anchor >= 0) {
            orient.anchor_direction = mesh.vertices()[anchor] - sheet.frame.centroid;
            sheet = fit_skeletal_sheet(cms.points, options.sheet_degree, &orient,
                                       options.allow_irregular);
        }
    }

    const auto crest3d = crest_polyline(mesh, division.crest);
    const SpineFit spine = fit_spine(sheet, crest3d, options.spine_degree,
                                     options.mode == PlaneMode::ChordalSpineChordalPlanes);
    SweptModel model =
        build_cross_sections(sheet, spine, mesh, division, options.stations, options.mode);
    compute_spokes(model, mesh, division, options.vein_samples);
    return model;
}

void save_swept_model_ply(const SweptModel& model, const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);

    save_ply_points(model.spine.points, (fs::path(directory) / "spine.ply").string());

    std::vector<Vec3> vpts;
    std::vector<std::array<int, 2>> vsegs;
    for (const auto& sec : model.sections)
        for (const auto* vein : {&sec.vein_right, &sec.vein_left}) {
            for (std::size_t i = 0; i < vein->size(); ++i) {
                vpts.push_back((*vein)[i]);
                if (i > 0) vsegs.push_back({int(vpts.size()) - 2, int(vpts.size()) - 1});
            }
        }
    save_ply_edges(vpts, vsegs, (fs::path(directory) / "veins.ply").string());

    std::vector<Vec3> spts;
    std::vector<std::array<int, 2>> ssegs;
    for (const auto& site : model.spokes.sites) {
        const int base = int(spts.size());
        spts.push_back(site.position);
        spts.push_back(site.tip_up);
        spts.push_back(site.tip_down);
        ssegs.push_back({base, base + 1});
        ssegs.push_back({base, base + 2});
    }
    save_ply_edges(spts, ssegs, (fs::path(directory) / "spokes.ply").string());
}

}  // namespace dss
