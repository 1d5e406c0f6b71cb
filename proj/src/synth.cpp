#include <dss/synth.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <map>

namespace dss {

void SynthSpec::validate() const {
    if (!(a > b && b > c && c > 0)) throw Error("synth", "radii must satisfy a > b > c > 0");
    if (protrusion && !(protrusion->height < c))
        throw Error("synth", "protrusion height must be below c");
    if (bend && !(bend->angle_deg >= 0 && bend->angle_deg <= 80))
        throw Error("synth", "bend angle must be within [0, 80] degrees");
    if (resolution < 0 || resolution > 7) throw Error("synth", "resolution must be in 0..7");
}

namespace {

void icosphere(int subdivisions, std::vector<Vec3>& verts,
               std::vector<std::array<int, 3>>& faces) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    verts = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
             {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
             {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (auto& v : verts) v.normalize();
    faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int i, int j) {
            const auto key = std::minmax(i, j);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            Vec3 m = 0.5 * (verts[i] + verts[j]);
            m.normalize();
            const int id = int(verts.size());
            verts.push_back(m);
            mid.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& [i, j, k] : faces) {
            const int ij = midpoint(i, j), jk = midpoint(j, k), ki = midpoint(k, i);
            next.push_back({i, ij, ki});
            next.push_back({j, jk, ij});
            next.push_back({k, ki, jk});
            next.push_back({ij, jk, ki});
        }
        faces = std::move(next);
    }
}

}  // namespace

TriangleMesh make_ellipsoid(double a, double b, double c, int resolution) {
    if (!(a >= b && b >= c && c > 0)) throw Error("synth", "radii must be ordered a >= b >= c > 0");
    std::vector<Vec3> verts;
    std::vector<std::array<int, 3>> faces;
    icosphere(resolution, verts, faces);
    for (auto& v : verts) v = Vec3(v.x() * a, v.y() * b, v.z() * c);
    return TriangleMesh::build(std::move(verts), std::move(faces));
}

TriangleMesh deform(const TriangleMesh& mesh, const SynthSpec& spec) {
    spec.validate();
    std::vector<Vec3> verts = mesh.vertices();

    if (spec.protrusion && spec.protrusion->height > 0) {
        const ProtrusionSpec& pr = *spec.protrusion;
        const double arc = pr.arc_fraction * M_PI / 2.0;  // pole-to-equator slerp
        const Vec3 cap_center(std::sin(arc), 0.0, std::cos(arc));
        const double cap_radius = pr.angular_radius_deg * M_PI / 180.0;
        const double sigma = cap_radius / 3.0;
        const double floor = std::exp(-cap_radius * cap_radius / (2 * sigma * sigma));
        for (std::size_t i = 0; i < verts.size(); ++i) {
            const Vec3 u =
                Vec3(verts[i].x() / spec.a, verts[i].y() / spec.b, verts[i].z() / spec.c)
                    .normalized();
            const double theta = safe_acos(u.dot(cap_center));
            if (theta >= cap_radius) continue;
            // truncated Gaussian shifted to reach zero exactly at the rim
            const double g = std::exp(-theta * theta / (2 * sigma * sigma));
            const double w = (g - floor) / (1.0 - floor);
            verts[i] += pr.height * w * mesh.vertex_normals()[i];
        }
    }

    if (spec.bend && spec.bend->angle_deg > 0) {
        const BendSpec& bd = *spec.bend;
        const double angle = bd.angle_deg * M_PI / 180.0;
        double max_x = 0;
        for (const auto& v : verts) max_x = std::max(max_x, v.x());
        const double band =
            bd.blend_width > 0 ? bd.blend_width : 0.1 * std::max(1e-9, max_x - bd.elbow_x);
        const Vec3 elbow(bd.elbow_x, 0, 0);
        for (auto& v : verts) {
            const double s = (v.x() - bd.elbow_x) / band;
            if (s <= 0) continue;
            // C1 ramp: smoothstep inside the band, exactly `angle` beyond it
            const double w = s >= 1.0 ? 1.0 : s * s * (3 - 2 * s);
            const double phi = w * angle;
            const Vec3 d = v - elbow;
            v = elbow + Vec3(d.x() * std::cos(phi) - d.y() * std::sin(phi),
                             d.x() * std::sin(phi) + d.y() * std::cos(phi), d.z());
        }
    }

    return TriangleMesh::build(std::move(verts), mesh.faces());
}

SimulatedGroups simulate_groups(int n_per_group, GroupEffect effect, std::uint64_t seed,
                                int resolution) {
    if (n_per_group < 1) throw Error("synth", "n_per_group must be positive");
    SimulatedGroups out;
    Rng root(seed);
    for (int group = 0; group < 2; ++group) {
        for (int i = 0; i < n_per_group; ++i) {
            Rng rng = root.fork(std::uint64_t(group) * 1000000 + i);
            SynthSpec spec;
            spec.resolution = resolution;
            spec.seed = seed;
            do {
                spec.a = rng.uniform(1.8, 2.2);
                spec.b = rng.uniform(0.9, 1.1);
                spec.c = rng.uniform(0.45, 0.55);
            } while (!(spec.a > spec.b && spec.b > spec.c));
            TriangleMesh mesh = make_ellipsoid(spec.a, spec.b, spec.c, spec.resolution);
            if (group == 1 && effect == GroupEffect::Protrusion) {
                spec.protrusion = ProtrusionSpec{};
                spec.protrusion->height = 0.3 * spec.c;
                mesh = deform(mesh, spec);
            }
            auto& meshes = group == 0 ? out.group_a : out.group_b;
            auto& specs = group == 0 ? out.specs_a : out.specs_b;
            meshes.push_back(std::move(mesh));
            specs.push_back(spec);
        }
    }
    return out;
}

namespace {

nlohmann::json spec_to_json(const SynthSpec& s) {
    nlohmann::json j{{"a", s.a}, {"b", s.b}, {"c", s.c},
                     {"resolution", s.resolution}, {"seed", s.seed}};
    if (s.protrusion)
        j["protrusion"] = {{"arc_fraction", s.protrusion->arc_fraction},
                           {"angular_radius_deg", s.protrusion->angular_radius_deg},
                           {"height", s.protrusion->height}};
    if (s.bend)
        j["bend"] = {{"elbow_x", s.bend->elbow_x},
                     {"angle_deg", s.bend->angle_deg},
                     {"blend_width", s.bend->blend_width}};
    return j;
}

}  // namespace

void write_cohort(const std::vector<TriangleMesh>& meshes, const std::vector<SynthSpec>& specs,
                  const std::string& directory, const std::string& format) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    nlohmann::json manifest;
    manifest["count"] = meshes.size();
    manifest["format"] = format;
    manifest["objects"] = nlohmann::json::array();
    for (std::size_t i = 0; i < meshes.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "object_%04zu.%s", i, format.c_str());
        const std::string path = (fs::path(directory) / name).string();
        if (format == "obj")
            save_obj(meshes[i], path);
        else if (format == "ply")
            save_ply(meshes[i], path);
        else
            throw Error("synth", "unknown cohort format " + format);
        nlohmann::json entry;
        entry["file"] = name;
        if (i < specs.size()) entry["spec"] = spec_to_json(specs[i]);
        manifest["objects"].push_back(entry);
    }
    std::ofstream out(fs::path(directory) / "manifest.json");
    out << manifest.dump(2) << '\n';
    if (!out) throw Error("synth", "cannot write manifest in " + directory);
}

}  // namespace dss
