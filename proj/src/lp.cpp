#include <dss/lp.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>

namespace dss {

namespace {

Quat canonical(const Quat& q) {
    // q and -q are the same rotation; fix a hemisphere for stable output
    if (q.w() < 0 || (q.w() == 0 && (q.x() < 0 || (q.x() == 0 && (q.y() < 0 ||
        (q.y() == 0 && q.z() < 0))))))
        return Quat(-q.w(), -q.x(), -q.y(), -q.z());
    return q;
}

Vec3 polyline_tangent_at(const std::vector<Vec3>& pts, const Vec3& p) {
    // tangent of the segment nearest to p, oriented along the polyline
    double best_d = std::numeric_limits<double>::max();
    Vec3 best = Vec3(1, 0, 0);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Vec3 a = pts[i], b = pts[i + 1];
        const Vec3 ab = b - a;
        const double len2 = ab.squaredNorm();
        if (len2 < 1e-24) continue;
        const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
        const double d = (a + t * ab - p).norm();
        if (d < best_d) {
            best_d = d;
            best = ab.normalized();
        }
    }
    return best;
}

}  // namespace

void LpDssRep::validate() const {
    const int nf = frame_count();
    const int nc = connection_count();
    if (nc != nf - 1) throw Error("lp", "connection count must be frame count - 1");
    if (int(parent.size()) != nf || int(spoke_dirs.size()) != nf ||
        int(spoke_lens_up.size()) != nf || int(spoke_lens_down.size()) != nf ||
        int(connection_lens.size()) != nc || int(connection_child.size()) != nc)
        throw Error("lp", "tuple size mismatch");
    if (root < 0 || root >= nf || parent[root] != -1) throw Error("lp", "invalid root");

    std::vector<int> children(nf, 0);
    int roots = 0;
    for (int i = 0; i < nf; ++i) {
        if (parent[i] < 0) {
            ++roots;
            continue;
        }
        ++children[parent[i]];
    }
    if (roots != 1) throw Error("lp", "exactly one root required");
    for (int i = 0; i < nf; ++i) {
        const int limit = i == root ? 4 : 3;  // the root carries both spine
                                              // directions plus its two veins
        if (children[i] > limit)
            throw Error("lp", "frame " + std::to_string(i) + " has too many children");
    }
    // connectivity: every frame reaches the root
    for (int i = 0; i < nf; ++i) {
        int v = i, hops = 0;
        while (v != root) {
            v = parent[v];
            if (v < 0 || ++hops > nf) throw Error("lp", "tree is not rooted");
        }
    }
    for (int i = 0; i < nf; ++i) {
        if (std::abs(frames[i].norm() - 1.0) > 1e-9)
            throw Error("lp", "non-unit frame quaternion");
        if (std::abs(spoke_dirs[i].norm() - 1.0) > 1e-9)
            throw Error("lp", "non-unit spoke direction");
        if (!(spoke_lens_up[i] > 0) || !(spoke_lens_down[i] > 0))
            throw Error("lp", "non-positive spoke length");
    }
    for (int j = 0; j < nc; ++j) {
        if (std::abs(connection_dirs[j].norm() - 1.0) > 1e-9)
            throw Error("lp", "non-unit connection direction");
        if (!(connection_lens[j] > 0)) throw Error("lp", "non-positive connection length");
    }
}

LpDssRep build_lp_dssrep(const SweptModel& model) {
    const int n_st = model.stations;
    const int m = model.vein_samples;
    if (n_st % 2 == 0)
        throw Error("lp", "station count must be odd so a central station exists");
    if (n_st < 5) throw Error("lp", "need at least 5 stations for interior frames");
    if (model.spokes.sites.empty()) throw Error("lp", "spokes not computed");

    // interior stations only; per station: spinal site, right 1..m, left 1..m
    const int first = 1, last = n_st - 2;
    const int per_station = 2 * m + 1;
    const int lp_stations = last - first + 1;
    const int nf = lp_stations * per_station;
    const int central = (n_st - 1) / 2;

    LpDssRep rep;
    rep.meta.mode = to_string(model.mode);
    rep.meta.sheet_degree = model.sheet.degree;
    rep.meta.spine_degree = model.spine.degree;
    rep.meta.stations = n_st;
    rep.meta.vein_samples = m;

    // frame index: (station - first) * per_station + offset
    auto fidx = [&](int station, int side, int slot) {
        const int offset = side == 0 ? 0 : (side > 0 ? slot : m + slot);
        return (station - first) * per_station + offset;
    };

    // world pose per frame from the spoke grid geometry
    std::vector<Mat3> world(nf);
    rep.origins.resize(nf);
    rep.parent.assign(nf, -1);
    rep.site_station.resize(nf);
    rep.site_side.resize(nf);
    rep.site_slot.resize(nf);

    for (const auto& site : model.spokes.sites) {
        if (site.station < first || site.station > last) continue;
        const int i = fidx(site.station, site.side, site.slot);
        const Vec3 n = model.sheet.normal_world(model.sheet.frame.to_plane(site.position));
        Vec3 b;
        if (site.side == 0) {
            b = model.frames.spine[site.station + 1].col(1);
        } else {
            const auto& sec = model.sections[site.station];
            const auto& vein = site.side > 0 ? sec.vein_right : sec.vein_left;
            b = polyline_tangent_at(vein, site.position);  // outward along the vein
        }
        world[i] = orthonormal_frame(n, b);
        rep.origins[i] = site.position;
        rep.site_station[i] = site.station;
        rep.site_side[i] = site.side;
        rep.site_slot[i] = site.slot;
    }

    rep.root = fidx(central, 0, 0);
    for (int s = first; s <= last; ++s) {
        // spine chain outward from the central station
        if (s != central)
            rep.parent[fidx(s, 0, 0)] = fidx(s < central ? s + 1 : s - 1, 0, 0);
        // vein chains outward from their spinal frame
        for (int side : {+1, -1})
            for (int j = 1; j <= m; ++j)
                rep.parent[fidx(s, side, j)] =
                    j == 1 ? fidx(s, 0, 0) : fidx(s, side, j - 1);
    }

    rep.frames.resize(nf);
    rep.spoke_dirs.resize(nf);
    rep.spoke_lens_up.resize(nf);
    rep.spoke_lens_down.resize(nf);
    for (const auto& site : model.spokes.sites) {
        if (site.station < first || site.station > last) continue;
        const int i = fidx(site.station, site.side, site.slot);
        rep.spoke_dirs[i] = world[i].transpose() * site.up_dir;
        rep.spoke_lens_up[i] = site.r_up;
        rep.spoke_lens_down[i] = site.r_down;
        if (rep.parent[i] < 0) {
            rep.frames[i] = Quat::Identity();
        } else {
            rep.frames[i] =
                canonical(Quat(Mat3(world[rep.parent[i]].transpose() * world[i])));
        }
    }
    rep.root_origin = rep.origins[rep.root];
    rep.root_world = canonical(Quat(world[rep.root]));

    for (int i = 0; i < nf; ++i) {
        if (i == rep.root) continue;
        const int p = rep.parent[i];
        const Vec3 delta = rep.origins[i] - rep.origins[p];
        const double len = delta.norm();
        if (len <= 0) throw Error("lp", "coincident frame origins");
        rep.connection_child.push_back(i);
        rep.connection_dirs.push_back(world[p].transpose() * (delta / len));
        rep.connection_lens.push_back(len);
    }

    rep.validate();
    return rep;
}

double lp_size(const LpDssRep& rep) {
    double sum = 0;
    long count = 0;
    for (double v : rep.connection_lens) {
        sum += std::log(v);
        ++count;
    }
    for (double v : rep.spoke_lens_up) {
        sum += std::log(v);
        ++count;
    }
    for (double v : rep.spoke_lens_down) {
        sum += std::log(v);
        ++count;
    }
    if (count == 0) throw Error("lp", "empty representation");
    return std::exp(sum / double(count));
}

LpDssRep normalize(const LpDssRep& rep) {
    const double size = lp_size(rep);
    LpDssRep out = rep;
    for (double& v : out.connection_lens) v /= size;
    for (double& v : out.spoke_lens_up) v /= size;
    for (double& v : out.spoke_lens_down) v /= size;
    return out;
}

std::vector<Vec3> reconstruct_origins(const LpDssRep& rep) {
    const int nf = rep.frame_count();
    std::vector<Vec3> origins(nf);
    std::vector<Mat3> world(nf);
    origins[rep.root] = rep.root_origin;
    world[rep.root] = rep.root_world.toRotationMatrix();

    // children sorted by depth via repeated sweeps over the connection list
    std::vector<bool> done(nf, false);
    done[rep.root] = true;
    for (int pass = 0; pass < nf; ++pass) {
        bool progress = false;
        for (std::size_t j = 0; j < rep.connection_child.size(); ++j) {
            const int child = rep.connection_child[j];
            const int p = rep.parent[child];
            if (done[child] || !done[p]) continue;
            world[child] = world[p] * rep.frames[child].toRotationMatrix();
            origins[child] =
                origins[p] + world[p] * (rep.connection_lens[j] * rep.connection_dirs[j]);
            done[child] = true;
            progress = true;
        }
        if (!progress) break;
    }
    for (int i = 0; i < nf; ++i)
        if (!done[i]) throw Error("lp", "disconnected tree in reconstruction");
    return origins;
}

// ------------------------------------------------------------------ json

void save_lp_json(const LpDssRep& rep, const std::string& path) {
    nlohmann::json j;
    j["topology"]["parent"] = rep.parent;
    j["topology"]["root"] = rep.root;
    for (const auto& q : rep.frames) j["frames"].push_back({q.w(), q.x(), q.y(), q.z()});
    for (const auto& v : rep.connection_dirs)
        j["connection_dirs"].push_back({v.x(), v.y(), v.z()});
    j["connection_child"] = rep.connection_child;
    j["connection_lens"] = rep.connection_lens;
    for (const auto& v : rep.spoke_dirs) j["spoke_dirs"].push_back({v.x(), v.y(), v.z()});
    j["spoke_lens"]["up"] = rep.spoke_lens_up;
    j["spoke_lens"]["down"] = rep.spoke_lens_down;
    j["sites"]["station"] = rep.site_station;
    j["sites"]["side"] = rep.site_side;
    j["sites"]["slot"] = rep.site_slot;
    j["root_pose"]["origin"] = {rep.root_origin.x(), rep.root_origin.y(), rep.root_origin.z()};
    j["root_pose"]["rotation"] = {rep.root_world.w(), rep.root_world.x(), rep.root_world.y(),
                                  rep.root_world.z()};
    for (const auto& o : rep.origins) j["origins"].push_back({o.x(), o.y(), o.z()});
    j["meta"] = {{"mode", rep.meta.mode},
                 {"sheet_degree", rep.meta.sheet_degree},
                 {"spine_degree", rep.meta.spine_degree},
                 {"stations", rep.meta.stations},
                 {"vein_samples", rep.meta.vein_samples},
                 {"delta", rep.meta.delta}};
    std::ofstream out(path);
    if (!out) throw Error("lp", "cannot write " + path);
    out << j.dump(1) << '\n';
}

LpDssRep load_lp_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("lp", "cannot open " + path);
    nlohmann::json j;
    in >> j;

    LpDssRep rep;
    rep.parent = j["topology"]["parent"].get<std::vector<int>>();
    rep.root = j["topology"]["root"].get<int>();
    for (const auto& q : j["frames"])
        rep.frames.emplace_back(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                                q[3].get<double>());
    for (const auto& v : j["connection_dirs"])
        rep.connection_dirs.emplace_back(v[0].get<double>(), v[1].get<double>(),
                                         v[2].get<double>());
    rep.connection_child = j["connection_child"].get<std::vector<int>>();
    rep.connection_lens = j["connection_lens"].get<std::vector<double>>();
    for (const auto& v : j["spoke_dirs"])
        rep.spoke_dirs.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    rep.spoke_lens_up = j["spoke_lens"]["up"].get<std::vector<double>>();
    rep.spoke_lens_down = j["spoke_lens"]["down"].get<std::vector<double>>();
    rep.site_station = j["sites"]["station"].get<std::vector<int>>();
    rep.site_side = j["sites"]["side"].get<std::vector<int>>();
    rep.site_slot = j["sites"]["slot"].get<std::vector<int>>();
    const auto& o = j["root_pose"]["origin"];
    rep.root_origin = Vec3(o[0].get<double>(), o[1].get<double>(), o[2].get<double>());
    const auto& r = j["root_pose"]["rotation"];
    rep.root_world =
        Quat(r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>());
    for (const auto& p : j["origins"])
        rep.origins.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    rep.meta.mode = j["meta"]["mode"].get<std::string>();
    rep.meta.sheet_degree = j["meta"]["sheet_degree"].get<int>();
    rep.meta.spine_degree = j["meta"]["spine_degree"].get<int>();
    rep.meta.stations = j["meta"]["stations"].get<int>();
    rep.meta.vein_samples = j["meta"]["vein_samples"].get<int>();
    rep.meta.delta = j["meta"]["delta"].get<double>();
    rep.validate();
    return rep;
}

}  // namespace dss
