#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dss {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

// Runtime failure tagged with the subsystem that raised it.
class Error : public std::runtime_error {
public:
    Error(const std::string& module, const std::string& message)
        : std::runtime_error(module + ": " + message), module_(module) {}
    const std::string& module() const { return module_; }

private:
    std::string module_;
};

struct Aabb {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
    Vec3 hi = Vec3::Constant(std::numeric_limits<double>::lowest());

    void expand(const Vec3& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    void expand(const Aabb& b) {
        lo = lo.cwiseMin(b.lo);
        hi = hi.cwiseMax(b.hi);
    }
    Vec3 extent() const { return hi - lo; }
    Vec3 center() const { return 0.5 * (lo + hi); }
    double diagonal() const { return extent().norm(); }
    bool contains(const Vec3& p) const {
        return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
    }
};

inline Aabb bounds_of(const std::vector<Vec3>& pts) {
    Aabb b;
    for (const auto& p : pts) b.expand(p);
    return b;
}

// Deterministic random source. All randomness in the toolkit flows through
// this so that a seed fully reproduces a run; distributions are implemented
// explicitly rather than via std:: ones, whose sequences are
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // rejection sampling, no modulo bias
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    double normal() {
        // Box-Muller, one value per call
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Vec3 unit_vec3() {
        while (true) {
            Vec3 v(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
            double n2 = v.squaredNorm();
            if (n2 > 1e-12 && n2 <= 1.0) return v / std::sqrt(n2);
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    // Independent stream for a sub-task; stable under reordering of tasks.
    Rng fork(std::uint64_t stream) const {
        Rng r(state_ ^ (0x632be59bd9b4e019ULL * (stream + 1)));
        r.next_u64();
        return r;
    }

private:
    std::uint64_t state_;
};

// Worker count for data-parallel loops; DSS_THREADS env var, default 1.
int worker_count();

// Runs fn(i) for i in [0,n). Work is split into contiguous chunks so results
// must not depend on execution order; callers write to disjoint slots, which
// keeps output bit-identical to the sequential loop.
void parallel_for(int n, const std::function<void(int)>& fn);

inline double clamp01(double x) { return x < 0 ? 0 : (x > 1 ? 1 : x); }

inline double safe_acos(double x) { return std::acos(std::max(-1.0, std::min(1.0, x))); }

// First-quadrant angle between unit vectors, arccos|x.y|.
template <typename V>
double angle_first_quadrant(const V& a, const V& b) {
    return safe_acos(std::abs(a.dot(b)));
}

}  // namespace dss
