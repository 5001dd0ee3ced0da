#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "conrad/error.hpp"
#include "conrad/learners.hpp"

namespace conrad::learners {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixView = Eigen::Map<const RowMatrix>;

MatrixView view(const DesignMatrix& x) {
    return MatrixView(x.values().data(), static_cast<Eigen::Index>(x.rows()), static_cast<Eigen::Index>(x.cols()));
}

double softplus(double t) noexcept { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

Eigen::VectorXd label_vector(std::span<const int> y) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) v[static_cast<Eigen::Index>(i)] = y[i];
    return v;
}

/// Mean logistic loss at linear predictor eta.
double mean_loss(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) s += softplus(eta[i]) - y[i] * eta[i];
    return s / static_cast<double>(eta.size());
}

Eigen::VectorXd probabilities(const Eigen::VectorXd& eta) {
    return eta.unaryExpr([](double t) { return logistic_probability(t); });
}

void validate(const DesignMatrix& x, std::span<const int> y) {
    check_binary_labels(y, x.rows(), true);
    if (x.rows() < 2) throw Error(ErrorKind::InvalidInput, "logistic regression needs at least 2 samples");
}

// theta = (w, b). L-BFGS with a backtracking Armijo line search.
LinearModel fit_unpenalized(const MatrixView& X, const Eigen::VectorXd& y, const LogisticOptions& opt) {
    const Eigen::Index d = X.cols();
    const double n = static_cast<double>(X.rows());
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);

    auto evaluate = [&](const Eigen::VectorXd& th, Eigen::VectorXd& grad) {
        const Eigen::VectorXd eta = (X * th.head(d)).array() + th[d];
        const Eigen::VectorXd r = probabilities(eta) - y;
        grad.resize(d + 1);
        grad.head(d) = X.transpose() * r / n;
        grad[d] = r.sum() / n;
        return mean_loss(eta, y);
    };

    constexpr std::size_t kMemory = 10;
    std::deque<Eigen::VectorXd> s_hist, y_hist;
    Eigen::VectorXd g;
    double f = evaluate(theta, g);
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        if (g.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance) break;

        // Two-loop recursion.
        Eigen::VectorXd q = g;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t k = s_hist.size(); k-- > 0;) {
            alpha[k] = s_hist[k].dot(q) / y_hist[k].dot(s_hist[k]);
            q -= alpha[k] * y_hist[k];
        }
        double gamma = 1.0;
        if (!s_hist.empty()) gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        Eigen::VectorXd dir = gamma * q;
        for (std::size_t k = 0; k < s_hist.size(); ++k) {
            const double beta = y_hist[k].dot(dir) / y_hist[k].dot(s_hist[k]);
            dir += s_hist[k] * (alpha[k] - beta);
        }
        dir = -dir;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            dir = -g;
            slope = -g.squaredNorm();
        }

        double step = 1.0;
        Eigen::VectorXd g_new;
        Eigen::VectorXd theta_new;
        double f_new = f;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            theta_new = theta + step * dir;
            f_new = evaluate(theta_new, g_new);
            if (f_new <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        Eigen::VectorXd s = theta_new - theta;
        Eigen::VectorXd yk = g_new - g;
        if (s.dot(yk) > 1e-300) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(yk));
            if (s_hist.size() > kMemory) {
                s_hist.pop_front();
                y_hist.pop_front();
            }
        }
        theta = std::move(theta_new);
        g = std::move(g_new);
        f = f_new;
    }

    LinearModel m;
    m.weights.assign(theta.data(), theta.data() + d);
    m.intercept = theta[d];
    m.penalty = Penalty::None;
    m.iterations = it;
    return m;
}

// Proximal Newton: a weighted quadratic model of the loss is minimized by
// cyclic coordinate descent with soft-thresholding, then a line search on
// the penalized objective damps the step. The inner solve is inexact: its
// tolerance tracks the last outer change down to change_tolerance / 100.
struct LassoState {
    Eigen::VectorXd w;
    double b = 0.0;
    int outer = 0;
};

constexpr double kInnerResidual = 1e-9;

bool lasso_stage(const MatrixView& X, const Eigen::VectorXd& y, double lambda, double change_tol, const LogisticOptions& opt,
                 LassoState& s) {
    const Eigen::Index n = X.rows(), d = X.cols();
    const double nd = static_cast<double>(n);
    auto objective = [&](const Eigen::VectorXd& eta, const Eigen::VectorXd& ww) { return mean_loss(eta, y) + lambda * ww.lpNorm<1>(); };

    Eigen::VectorXd eta = (X * s.w).array() + s.b;
    double f = objective(eta, s.w);
    const double floor_tol = change_tol * 0.01;
    double last_change = std::numeric_limits<double>::infinity();
    for (int outer = 0; outer < opt.max_iterations; ++outer, ++s.outer) {
        const double inner_tol = std::clamp(0.1 * last_change, floor_tol, 1e-3);
        const Eigen::VectorXd p = probabilities(eta);
        const Eigen::VectorXd hw = (p.array() * (1.0 - p.array())).max(1e-5).matrix();
        Eigen::VectorXd resid = ((y - p).array() / hw.array()).matrix();  // z - eta
        Eigen::VectorXd h(d);
        for (Eigen::Index j = 0; j < d; ++j) h[j] = (X.col(j).array().square() * hw.array()).sum() / nd;
        const double hw_sum = hw.sum();

        Eigen::VectorXd w_new = s.w;
        double b_new = s.b;
        int sweeps = 0;
        double residual = 0.0;  // largest coordinate prox residual of the last sweep
        auto sweep = [&](bool active_only) {
            double max_change = 0.0;
            residual = 0.0;
            for (Eigen::Index j = 0; j < d; ++j) {
                if (active_only && w_new[j] == 0.0) continue;
                if (h[j] <= 0.0) {
                    w_new[j] = 0.0;
                    continue;
                }
                const double grad = (X.col(j).array() * hw.array() * resid.array()).sum() / nd;
                const double u = h[j] * w_new[j] + grad;
                const double next = std::copysign(std::max(std::abs(u) - lambda, 0.0), u) / h[j];
                const double delta = next - w_new[j];
                if (delta != 0.0) {
                    resid -= delta * X.col(j);
                    w_new[j] = next;
                    max_change = std::max(max_change, std::abs(delta) * std::sqrt(h[j]));
                    residual = std::max(residual, std::abs(delta) * h[j]);
                }
            }
            const double db = (hw.array() * resid.array()).sum() / hw_sum;
            resid.array() -= db;
            b_new += db;
            max_change = std::max(max_change, std::abs(db) * std::sqrt(hw_sum / nd));
            residual = std::max(residual, std::abs(db) * hw_sum / nd);
            ++sweeps;
            return max_change;
        };
        // Nearly collinear columns leave a flat valley that cyclic descent
        // crawls along in tiny steps; a small prox residual ends the solve there.
        auto settled = [&](double change) { return change < inner_tol || residual < kInnerResidual; };
        while (sweeps < opt.max_coordinate_sweeps) {
            if (settled(sweep(false))) break;
            while (sweeps < opt.max_coordinate_sweeps && !settled(sweep(true))) {
            }
        }
        if (sweeps >= opt.max_coordinate_sweeps) {
            throw Error(ErrorKind::Convergence, "lasso coordinate descent exceeded " + std::to_string(opt.max_coordinate_sweeps) +
                                                    " sweeps in one Newton step");
        }

        const Eigen::VectorXd dw = w_new - s.w;
        const double db = b_new - s.b;
        const Eigen::VectorXd gradient = X.transpose() * (p - y) / nd;
        const double descent = gradient.dot(dw) + (p - y).mean() * db + lambda * (w_new.lpNorm<1>() - s.w.lpNorm<1>());

        double step = 1.0;
        Eigen::VectorXd eta_next;
        double f_next = f;
        for (int bt = 0; bt < 60; ++bt) {
            eta_next = (X * (s.w + step * dw)).array() + (s.b + step * db);
            f_next = objective(eta_next, s.w + step * dw);
            if (f_next <= f + 1e-4 * step * std::min(descent, 0.0)) break;
            step *= 0.5;
        }
        s.w += step * dw;
        s.b += step * db;
        eta = std::move(eta_next);
        f = f_next;
        last_change = step * std::max(dw.lpNorm<Eigen::Infinity>(), std::abs(db));
        if (last_change < change_tol && inner_tol <= floor_tol) return true;
    }
    return false;
}

// Warm-started path from lambda_max down to the target, halving at most per
// stage; intermediate stages are solved loosely.
LinearModel fit_lasso(const MatrixView& X, const Eigen::VectorXd& y, double lambda_max, const LogisticOptions& opt) {
    const double lambda = opt.l1_lambda;
    LassoState s;
    s.w = Eigen::VectorXd::Zero(X.cols());
    const double ybar = y.mean();
    s.b = std::log(ybar / (1.0 - ybar));

    const int stages = std::max(1, static_cast<int>(std::ceil(std::log2(lambda_max / lambda))));
    for (int k = 1; k < stages; ++k) {
        const double lk = lambda_max * std::pow(lambda / lambda_max, static_cast<double>(k) / stages);
        lasso_stage(X, y, lk, std::max(opt.change_tolerance, 1e-5), opt, s);
    }
    if (!lasso_stage(X, y, lambda, opt.change_tolerance, opt, s)) {
        throw Error(ErrorKind::Convergence,
                    "lasso did not converge within " + std::to_string(opt.max_iterations) + " Newton iterations");
    }

    LinearModel m;
    m.weights.assign(s.w.data(), s.w.data() + s.w.size());
    m.intercept = s.b;
    m.penalty = Penalty::L1;
    m.strength = lambda;
    m.iterations = s.outer;
    return m;
}

}  // namespace

double logistic_probability(double t) noexcept {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double lasso_lambda_max(const DesignMatrix& x, std::span<const int> y) {
    check_binary_labels(y, x.rows(), false);
    const auto X = view(x);
    const Eigen::VectorXd yv = label_vector(y);
    const Eigen::VectorXd centered = yv.array() - yv.mean();
    return (X.transpose() * centered).lpNorm<Eigen::Infinity>() / static_cast<double>(x.rows());
}

std::vector<double> logistic_gradient(const DesignMatrix& x, std::span<const int> y, const LinearModel& m) {
    const auto X = view(x);
    const Eigen::VectorXd yv = label_vector(y);
    const Eigen::Map<const Eigen::VectorXd> w(m.weights.data(), static_cast<Eigen::Index>(m.weights.size()));
    const Eigen::VectorXd eta = (X * w).array() + m.intercept;
    const Eigen::VectorXd r = probabilities(eta) - yv;
    const double n = static_cast<double>(x.rows());
    std::vector<double> g(x.cols() + 1);
    Eigen::Map<Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(x.cols())) = X.transpose() * r / n;
    g.back() = r.sum() / n;
    return g;
}

LinearModel logistic_fit(const DesignMatrix& x, std::span<const int> y, const LogisticOptions& options) {
    validate(x, y);
    if (!(options.l1_lambda >= 0.0) || !std::isfinite(options.l1_lambda)) {
        throw Error(ErrorKind::Config, "lambda must be a finite non-negative number");
    }
    const auto X = view(x);
    const Eigen::VectorXd yv = label_vector(y);
    if (options.l1_lambda == 0.0) return fit_unpenalized(X, yv, options);

    const double lambda_max = lasso_lambda_max(x, y);
    if (options.l1_lambda >= lambda_max) {
        LinearModel m;
        m.weights.assign(x.cols(), 0.0);
        const double ybar = yv.mean();
        m.intercept = std::log(ybar / (1.0 - ybar));
        m.penalty = Penalty::L1;
        m.strength = options.l1_lambda;
        return m;
    }
    return fit_lasso(X, yv, lambda_max, options);
}

}  // namespace conrad::learners
