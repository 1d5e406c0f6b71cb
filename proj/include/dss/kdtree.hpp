#pragma once

#include <dss/common.hpp>

#include <algorithm>
#include <numeric>

namespace dss {

// Exact nearest-neighbor k-d tree over fixed-dimension points.
template <int Dim>
class KdTree {
public:
    using Point = Eigen::Matrix<double, Dim, 1>;

    KdTree() = default;
    explicit KdTree(std::vector<Point> points) : points_(std::move(points)) {
        if (points_.empty()) throw Error("kdtree", "empty point set");
        order_.resize(points_.size());
        std::iota(order_.begin(), order_.end(), 0);
        nodes_.reserve(2 * points_.size());
        root_ = build(0, int(points_.size()), 0);
    }

    const std::vector<Point>& points() const { return points_; }

    // Index of the nearest point and its distance.
    std::pair<int, double> nearest(const Point& q) const {
        int best = -1;
        double best_d2 = std::numeric_limits<double>::max();
        search(root_, q, best, best_d2);
        return {best, std::sqrt(best_d2)};
    }

    double nearest_distance(const Point& q) const { return nearest(q).second; }

    // Indices of the k nearest points, nearest first.
    std::vector<int> knearest(const Point& q, int k) const {
        std::vector<std::pair<double, int>> heap;  // max-heap on distance
        knn_search(root_, q, k, heap);
        std::sort(heap.begin(), heap.end());
        std::vector<int> out;
        out.reserve(heap.size());
        for (const auto& [d2, i] : heap) out.push_back(i);
        return out;
    }

private:
    struct Node {
        int axis = 0;
        int point = -1;
        int left = -1, right = -1;
    };

    int build(int begin, int end, int depth) {
        if (begin >= end) return -1;
        const int axis = depth % Dim;
        const int mid = (begin + end) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
        const int id = int(nodes_.size());
        nodes_.push_back({axis, order_[mid], -1, -1});
        const int l = build(begin, mid, depth + 1);
        const int r = build(mid + 1, end, depth + 1);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    void search(int node, const Point& q, int& best, double& best_d2) const {
        if (node < 0) return;
        const Node& n = nodes_[node];
        const double d2 = (points_[n.point] - q).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = n.point;
        }
        const double delta = q[n.axis] - points_[n.point][n.axis];
        const int near = delta < 0 ? n.left : n.right;
        const int far = delta < 0 ? n.right : n.left;
        search(near, q, best, best_d2);
        if (delta * delta < best_d2) search(far, q, best, best_d2);
    }

    void knn_search(int node, const Point& q, int k,
                    std::vector<std::pair<double, int>>& heap) const {
        if (node < 0) return;
        const Node& n = nodes_[node];
        const double d2 = (points_[n.point] - q).squaredNorm();
        if (int(heap.size()) < k) {
            heap.emplace_back(d2, n.point);
            std::push_heap(heap.begin(), heap.end());
        } else if (d2 < heap.front().first) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = {d2, n.point};
            std::push_heap(heap.begin(), heap.end());
        }
        const double delta = q[n.axis] - points_[n.point][n.axis];
        const int near = delta < 0 ? n.left : n.right;
        const int far = delta < 0 ? n.right : n.left;
        knn_search(near, q, k, heap);
        if (int(heap.size()) < k || delta * delta < heap.front().first)
            knn_search(far, q, k, heap);
    }

    std::vector<Point> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

using KdTree2 = KdTree<2>;
using KdTree3 = KdTree<3>;

}  // namespace dss
