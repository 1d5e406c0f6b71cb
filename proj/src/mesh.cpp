#include <dss/mesh.hpp>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace dss {

namespace {

double triple_volume(const Vec3& a, const Vec3& b, const Vec3& c) {
    return a.dot(b.cross(c)) / 6.0;
}

}  // namespace

TriangleMesh TriangleMesh::build(std::vector<Vec3> vertices,
                                 std::vector<std::array<int, 3>> faces) {
    const int nv = int(vertices.size());
    if (nv < 4 || faces.size() < 4) throw Error("mesh", "too few vertices or faces");

    std::map<std::pair<int, int>, int> directed;
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto& t = faces[f];
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            if (a < 0 || a >= nv || b < 0 || b >= nv)
                throw Error("mesh", "face index out of range");
            if (a == b) throw Error("mesh", "degenerate face (repeated vertex)");
            auto [it, inserted] = directed.insert({{a, b}, int(f)});
            if (!inserted)
                throw Error("mesh", "non-manifold or inconsistently oriented edge (" +
                                        std::to_string(a) + "," + std::to_string(b) +
                                        ") shared by faces " + std::to_string(it->second) +
                                        " and " + std::to_string(f));
        }
    }
    long undirected = 0;
    for (const auto& [e, f] : directed) {
        if (e.first < e.second) {
            if (!directed.count({e.second, e.first}))
                throw Error("mesh", "open boundary edge (" + std::to_string(e.first) + "," +
                                        std::to_string(e.second) + ")");
            ++undirected;
        } else if (!directed.count({e.second, e.first})) {
            throw Error("mesh", "open boundary edge (" + std::to_string(e.second) + "," +
                                    std::to_string(e.first) + ")");
        }
    }

    const long euler = long(nv) - undirected + long(faces.size());
    if (euler != 2)
        throw Error("mesh", "Euler characteristic " + std::to_string(euler) +
                                ", expected 2 (genus-0 closed surface)");

    TriangleMesh m;
    m.vertices_ = std::move(vertices);
    m.faces_ = std::move(faces);
    m.finish();

    if (m.signed_volume() <= 0.0)
        throw Error("mesh", "non-positive signed volume; faces are not oriented outward");
    return m;
}

TriangleMesh TriangleMesh::build_unchecked(std::vector<Vec3> vertices,
                                           std::vector<std::array<int, 3>> faces) {
    TriangleMesh m;
    m.vertices_ = std::move(vertices);
    m.faces_ = std::move(faces);
    m.finish();
    return m;
}

void TriangleMesh::finish() {
    const int nv = int(vertices_.size());
    normals_.assign(nv, Vec3::Zero());
    for (const auto& t : faces_) {
        const Vec3 n = (vertices_[t[1]] - vertices_[t[0]])
                           .cross(vertices_[t[2]] - vertices_[t[0]]);
        normals_[t[0]] += n;  // cross product magnitude = 2*area
        normals_[t[1]] += n;
        normals_[t[2]] += n;
    }
    for (auto& n : normals_) {
        const double len = n.norm();
        if (len > 0) n /= len;
    }

    std::vector<std::pair<int, int>> es;
    es.reserve(faces_.size() * 3 / 2);
    for (const auto& t : faces_)
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            if (a < b) es.emplace_back(a, b);
        }
    std::sort(es.begin(), es.end());
    es.erase(std::unique(es.begin(), es.end()), es.end());
    edges_.reserve(es.size());
    adjacency_.assign(nv, {});
    for (const auto& [a, b] : es) {
        edges_.push_back({a, b});
        adjacency_[a].push_back(b);
        adjacency_[b].push_back(a);
    }

    bounds_ = bounds_of(vertices_);
}

double TriangleMesh::signed_volume() const {
    double v = 0;
    for (const auto& t : faces_)
        v += triple_volume(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
    return v;
}

double TriangleMesh::surface_area() const {
    double a = 0;
    for (const auto& t : faces_)
        a += 0.5 * (vertices_[t[1]] - vertices_[t[0]])
                       .cross(vertices_[t[2]] - vertices_[t[0]])
                       .norm();
    return a;
}

double TriangleMesh::mean_edge_length() const {
    if (edges_.empty()) return 0;
    double s = 0;
    for (const auto& [a, b] : edges_) s += (vertices_[a] - vertices_[b]).norm();
    return s / double(edges_.size());
}

Vec3 TriangleMesh::face_normal(int f) const {
    const auto& t = faces_[f];
    Vec3 n = (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]);
    const double len = n.norm();
    return len > 0 ? Vec3(n / len) : Vec3::Zero();
}

Vec3 TriangleMesh::face_centroid(int f) const {
    const auto& t = faces_[f];
    return (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0;
}

// ---------------------------------------------------------------- OBJ

namespace {

TriangleMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("mesh", "cannot open " + path);
    std::vector<Vec3> verts;
    std::vector<std::array<int, 3>> faces;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p.x() >> p.y() >> p.z()))
                throw Error("mesh", path + ":" + std::to_string(lineno) + ": bad vertex record");
            verts.push_back(p);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                // accept v, v/t, v/t/n, v//n
                const auto slash = tok.find('/');
                const std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
                int i = 0;
                try {
                    i = std::stoi(head);
                } catch (...) {
                    throw Error("mesh",
                                path + ":" + std::to_string(lineno) + ": bad face index '" + tok + "'");
                }
                if (i < 0) i = int(verts.size()) + 1 + i;  // negative = relative
                idx.push_back(i - 1);
            }
            if (idx.size() < 3)
                throw Error("mesh", path + ":" + std::to_string(lineno) + ": face with <3 vertices");
            for (std::size_t k = 1; k + 1 < idx.size(); ++k)  // fan-triangulate
                faces.push_back({idx[0], idx[k], idx[k + 1]});
        }
    }
    return TriangleMesh::build(std::move(verts), std::move(faces));
}

// ---------------------------------------------------------------- PLY

struct PlyProperty {
    std::string type;  // scalar type, or list count/value types joined by space
    std::string name;
    bool is_list = false;
    std::string count_type, value_type;
};

struct PlyElement {
    std::string name;
    long count = 0;
    std::vector<PlyProperty> props;
};

double read_scalar_ascii(std::istream& in) {
    double v;
    if (!(in >> v)) throw Error("mesh", "truncated PLY body");
    return v;
}

long scalar_size(const std::string& t) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
        t == "float32")
        return 4;
    if (t == "double" || t == "float64") return 8;
    throw Error("mesh", "unknown PLY scalar type " + t);
}

double read_scalar_binary(std::istream& in, const std::string& t) {
    char buf[8];
    in.read(buf, scalar_size(t));
    if (!in) throw Error("mesh", "truncated PLY body");
    if (t == "char" || t == "int8") return double(*reinterpret_cast<std::int8_t*>(buf));
    if (t == "uchar" || t == "uint8") return double(*reinterpret_cast<std::uint8_t*>(buf));
    if (t == "short" || t == "int16") {
        std::int16_t v;
        std::memcpy(&v, buf, 2);
        return v;
    }
    if (t == "ushort" || t == "uint16") {
        std::uint16_t v;
        std::memcpy(&v, buf, 2);
        return v;
    }
    if (t == "int" || t == "int32") {
        std::int32_t v;
        std::memcpy(&v, buf, 4);
        return v;
    }
    if (t == "uint" || t == "uint32") {
        std::uint32_t v;
        std::memcpy(&v, buf, 4);
        return v;
    }
    if (t == "float" || t == "float32") {
        float v;
        std::memcpy(&v, buf, 4);
        return v;
    }
    double v;
    std::memcpy(&v, buf, 8);
    return v;
}

TriangleMesh load_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("mesh", "cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("ply", 0) != 0)
        throw Error("mesh", path + ": not a PLY file");

    bool binary = false;
    std::vector<PlyElement> elements;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "comment" || tag == "obj_info") continue;
        if (tag == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "binary_little_endian")
                binary = true;
            else if (fmt != "ascii")
                throw Error("mesh", path + ": unsupported PLY format " + fmt);
        } else if (tag == "element") {
            PlyElement e;
            ls >> e.name >> e.count;
            elements.push_back(e);
        } else if (tag == "property") {
            if (elements.empty()) throw Error("mesh", path + ": property before element");
            PlyProperty p;
            std::string t;
            ls >> t;
            if (t == "list") {
                p.is_list = true;
                ls >> p.count_type >> p.value_type >> p.name;
            } else {
                p.type = t;
                ls >> p.name;
            }
            elements.back().props.push_back(p);
        } else if (tag == "end_header") {
            break;
        }
    }

    std::vector<Vec3> verts;
    std::vector<std::array<int, 3>> faces;
    for (const auto& e : elements) {
        if (e.name == "vertex") {
            verts.reserve(e.count);
            for (long i = 0; i < e.count; ++i) {
                double x = 0, y = 0, z = 0;
                for (const auto& p : e.props) {
                    if (p.is_list) throw Error("mesh", path + ": list property on vertex");
                    const double v =
                        binary ? read_scalar_binary(in, p.type) : read_scalar_ascii(in);
                    if (p.name == "x") x = v;
                    else if (p.name == "y") y = v;
                    else if (p.name == "z") z = v;
                }
                verts.emplace_back(x, y, z);
            }
        } else {
            const bool is_face = e.name == "face";
            for (long i = 0; i < e.count; ++i) {
                for (const auto& p : e.props) {
                    if (p.is_list) {
                        const long n = long(binary ? read_scalar_binary(in, p.count_type)
                                                   : read_scalar_ascii(in));
                        std::vector<int> idx(n);
                        for (long k = 0; k < n; ++k)
                            idx[k] = int(binary ? read_scalar_binary(in, p.value_type)
                                                : read_scalar_ascii(in));
                        if (is_face && (p.name == "vertex_indices" || p.name == "vertex_index")) {
                            if (n < 3) throw Error("mesh", path + ": face with <3 vertices");
                            for (long k = 1; k + 1 < n; ++k)
                                faces.push_back({idx[0], idx[k], idx[k + 1]});
                        }
                    } else {
                        binary ? read_scalar_binary(in, p.type) : read_scalar_ascii(in);
                    }
                }
            }
        }
    }
    return TriangleMesh::build(std::move(verts), std::move(faces));
}

MeshFormat format_from_path(const std::string& path) {
    const auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    for (auto& c : ext) c = char(std::tolower(c));
    if (ext == "obj") return MeshFormat::Obj;
    if (ext == "ply") return MeshFormat::Ply;
    throw Error("mesh", "cannot infer format of " + path + " (expected .obj or .ply)");
}

}  // namespace

TriangleMesh load_mesh(const std::string& path) {
    return load_mesh(path, format_from_path(path));
}

TriangleMesh load_mesh(const std::string& path, MeshFormat format) {
    return format == MeshFormat::Obj ? load_obj(path) : load_ply(path);
}

void save_obj(const TriangleMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("mesh", "cannot write " + path);
    out.precision(17);
    for (const auto& v : mesh.vertices())
        out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& f : mesh.faces())
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    if (!out) throw Error("mesh", "write failure on " + path);
}

void save_ply(const TriangleMesh& mesh, const std::string& path, bool binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("mesh", "cannot write " + path);
    out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
        << "element vertex " << mesh.vertex_count() << "\n"
        << "property double x\nproperty double y\nproperty double z\n"
        << "element face " << mesh.face_count() << "\n"
        << "property list uchar int vertex_indices\nend_header\n";
    if (binary) {
        for (const auto& v : mesh.vertices()) {
            double xyz[3] = {v.x(), v.y(), v.z()};
            out.write(reinterpret_cast<const char*>(xyz), 24);
        }
        for (const auto& f : mesh.faces()) {
            const unsigned char n = 3;
            std::int32_t idx[3] = {f[0], f[1], f[2]};
            out.write(reinterpret_cast<const char*>(&n), 1);
            out.write(reinterpret_cast<const char*>(idx), 12);
        }
    } else {
        out.precision(17);
        for (const auto& v : mesh.vertices())
            out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
        for (const auto& f : mesh.faces())
            out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    }
    if (!out) throw Error("mesh", "write failure on " + path);
}

void save_ply_points(const std::vector<Vec3>& points, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("mesh", "cannot write " + path);
    out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
        << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
    out.precision(17);
    for (const auto& p : points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    if (!out) throw Error("mesh", "write failure on " + path);
}

void save_ply_edges(const std::vector<Vec3>& points,
                    const std::vector<std::array<int, 2>>& segments,
                    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("mesh", "cannot write " + path);
    out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
        << "\nproperty double x\nproperty double y\nproperty double z\n"
        << "element edge " << segments.size()
        << "\nproperty int vertex1\nproperty int vertex2\nend_header\n";
    out.precision(17);
    for (const auto& p : points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    for (const auto& s : segments) out << s[0] << ' ' << s[1] << '\n';
    if (!out) throw Error("mesh", "write failure on " + path);
}

}  // namespace dss
