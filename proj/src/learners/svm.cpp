#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "conrad/error.hpp"
#include "conrad/learners.hpp"

namespace conrad::learners {

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const noexcept {
    if (kind == KernelKind::Linear) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
        return s;
    }
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
    return std::exp(-gamma * d2);
}

double KernelModel::decision(std::span<const double> x) const noexcept {
    double s = intercept;
    for (std::size_t k = 0; k < support_vectors.size(); ++k) s += dual_coef[k] * kernel(support_vectors[k], x);
    return s;
}

LinearModel KernelModel::to_linear() const {
    if (kernel.kind != KernelKind::Linear) throw Error(ErrorKind::Contract, "primal weights exist only for the linear kernel");
    LinearModel m;
    const std::size_t d = support_vectors.empty() ? 0 : support_vectors.front().size();
    m.weights.assign(d, 0.0);
    for (std::size_t k = 0; k < support_vectors.size(); ++k)
        for (std::size_t j = 0; j < d; ++j) m.weights[j] += dual_coef[k] * support_vectors[k][j];
    m.intercept = intercept;
    m.penalty = Penalty::Hinge;
    m.strength = c;
    return m;
}

KernelModel svm_fit(const DesignMatrix& x, std::span<const int> y01, double c, Kernel kernel, const SvmOptions& options) {
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorKind::Config, "C must be a positive finite number");
    if (kernel.kind == KernelKind::Rbf && !(kernel.gamma > 0.0)) throw Error(ErrorKind::Config, "rbf gamma must be positive");
    check_binary_labels(y01, x.rows(), true);

    const std::size_t n = x.rows();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = y01[i] == 1 ? 1.0 : -1.0;

    // Q_ij = y_i y_j K(x_i, x_j), precomputed.
    std::vector<double> Q(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double q = y[i] * y[j] * kernel(x.row(i), x.row(j));
            Q[i * n + j] = q;
            Q[j * n + i] = q;
        }
    }

    constexpr double kTau = 1e-12;
    std::vector<double> alpha(n, 0.0);
    std::vector<double> G(n, -1.0);
    auto is_upper = [&](std::size_t t) { return alpha[t] >= c; };
    auto is_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

    long iter = 0;
    for (;; ++iter) {
        if (iter >= options.max_iterations) {
            throw Error(ErrorKind::Convergence,
                        "SMO did not converge within the iteration cap of " + std::to_string(options.max_iterations));
        }
        // Maximal violating pair, lowest index on ties.
        double g_max = -std::numeric_limits<double>::infinity();
        double g_min = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * G[t];
            const bool up = y[t] > 0 ? !is_upper(t) : !is_lower(t);
            const bool low = y[t] > 0 ? !is_lower(t) : !is_upper(t);
            if (up && v > g_max) {
                g_max = v;
                i = t;
            }
            if (low && v < g_min) {
                g_min = v;
                j = t;
            }
        }
        if (i == n || j == n || g_max - g_min < options.tolerance) break;

        const double* Qi = &Q[i * n];
        const double* Qj = &Q[j * n];
        const double old_i = alpha[i], old_j = alpha[j];
        if (y[i] != y[j]) {
            double quad = Qi[i] + Qj[j] + 2.0 * Qi[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = Qi[i] + Qj[j] - 2.0 * Qi[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (G[i] - G[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) G[t] += Qi[t] * di + Qj[t] * dj;
    }

    // Offset: mean over free vectors, else the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * G[t];
        if (is_upper(t)) {
            if (y[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (is_lower(t)) {
            if (y[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

    KernelModel m;
    m.kernel = kernel;
    m.c = c;
    m.intercept = -rho;
    m.iterations = iter;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            const auto r = x.row(t);
            m.support_vectors.emplace_back(r.begin(), r.end());
            m.support_indices.push_back(t);
            m.dual_coef.push_back(alpha[t] * y[t]);
        }
    }
    return m;
}

}  // namespace conrad::learners
