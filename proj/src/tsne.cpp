#include <dss/flatten.hpp>

namespace dss {

namespace {

// Row of conditional probabilities with the precision solving the perplexity
// equation H(P_i) = log(perplexity).
void conditional_row(const MatX& d2, int i, double perplexity, VecX& row) {
    const int n = int(d2.rows());
    const double target = std::log(perplexity);
    double beta = 1.0, beta_lo = 0, beta_hi = std::numeric_limits<double>::max();
    for (int iter = 0; iter < 100; ++iter) {
        double sum = 0, sum_dp = 0;
        for (int j = 0; j < n; ++j) {
            if (j == i) {
                row[j] = 0;
                continue;
            }
            row[j] = std::exp(-beta * d2(i, j));
            sum += row[j];
            sum_dp += row[j] * d2(i, j);
        }
        if (sum <= 0) {  // kernel underflow: beta overshot, treat as too sharp
            beta_hi = beta;
            beta = 0.5 * (beta + beta_lo);
            continue;
        }
        const double entropy = std::log(sum) + beta * sum_dp / sum;
        const double diff = entropy - target;
        if (std::abs(diff) < 1e-7) {
            row /= sum;
            return;
        }
        if (diff > 0) {  // entropy too high -> sharpen
            beta_lo = beta;
            beta = beta_hi == std::numeric_limits<double>::max() ? beta * 2 : 0.5 * (beta + beta_hi);
        } else {
            beta_hi = beta;
            beta = beta_lo == 0 ? beta / 2 : 0.5 * (beta + beta_lo);
        }
    }
    throw Error("flatten", "t-SNE: perplexity search did not converge for sample " +
                               std::to_string(i));
}

}  // namespace

FlatteningMap tsne_flatten(const std::vector<Vec3>& samples, const TsneOptions& opt) {
    const int n = int(samples.size());
    if (n > 5000) throw Error("flatten", "t-SNE limited to 5000 samples (exact O(n^2))");
    if (n < 5) throw Error("flatten", "too few samples for t-SNE");
    if (!(opt.perplexity > 1 && opt.perplexity < n / 3.0))
        throw Error("flatten", "perplexity must lie in (1, n/3)");

    MatX d2(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d2(i, j) = (samples[i] - samples[j]).squaredNorm();

    MatX p(n, n);
    VecX row(n);
    for (int i = 0; i < n; ++i) {
        conditional_row(d2, i, opt.perplexity, row);
        p.row(i) = row;
    }
    p = ((p + p.transpose()) / (2.0 * n)).eval();
    const double p_floor = 1e-12;

    Rng rng(opt.seed);
    MatX y(n, 2);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < 2; ++d) y(i, d) = 1e-2 * rng.normal();

    FlatteningMap map;
    map.method = FlattenMethod::Tsne;
    map.kl_history.reserve(opt.iterations);

    MatX velocity = MatX::Zero(n, 2);
    MatX gradient(n, 2);
    MatX q(n, n), num(n, n);
    const double lr = std::max(1.0, n / 12.0);

    for (int iter = 0; iter < opt.iterations; ++iter) {
        const double exaggeration = iter < opt.exaggeration_iters ? opt.exaggeration : 1.0;
        const double momentum = iter < opt.exaggeration_iters ? 0.5 : 0.8;

        double q_sum = 0;
        for (int i = 0; i < n; ++i) {
            num(i, i) = 0;
            for (int j = i + 1; j < n; ++j) {
                const double dy2 = (y.row(i) - y.row(j)).squaredNorm();
                const double k = 1.0 / (1.0 + dy2);
                num(i, j) = num(j, i) = k;
                q_sum += 2 * k;
            }
        }
        q = num / q_sum;

        gradient.setZero();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const double coeff =
                    4.0 * (exaggeration * p(i, j) - q(i, j)) * num(i, j);
                gradient.row(i) += coeff * (y.row(i) - y.row(j));
            }

        velocity = momentum * velocity - lr * gradient;
        y += velocity;
        y.rowwise() -= y.colwise().mean();  // keep the embedding centered

        double kl = 0;  // true objective, without exaggeration
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j || p(i, j) <= p_floor) continue;
                kl += p(i, j) * std::log(p(i, j) / std::max(q(i, j), p_floor));
            }
        map.kl_history.push_back(kl);
    }

    map.image.resize(n);
    for (int i = 0; i < n; ++i) map.image[i] = Vec2(y(i, 0), y(i, 1));
    map.flatable = true;
    return map;
}

}  // namespace dss
