#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "conrad/error.hpp"
#include "conrad/evaluation.hpp"

namespace conrad::evaluation {

Confusion confusion(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.size() != predicted.size()) throw Error(ErrorKind::Contract, "truth and predictions differ in length");
    Confusion c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 1) (predicted[i] == 1 ? c.tp : c.fn)++;
        else (predicted[i] == 1 ? c.fp : c.tn)++;
    }
    return c;
}

std::optional<double> recall(const Confusion& c) {
    if (c.tp + c.fn == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

std::optional<double> precision(const Confusion& c) {
    if (c.tp + c.fp == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

double accuracy(const Confusion& c) {
    const std::size_t n = c.tp + c.fp + c.tn + c.fn;
    if (n == 0) throw Error(ErrorKind::Contract, "accuracy of an empty set");
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw Error(ErrorKind::Contract, "scores and labels differ in length");
    const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) return {};

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    const double P = static_cast<double>(positives), N = static_cast<double>(negatives);
    std::vector<RocPoint> curve;
    curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    for (std::size_t k = 0; k < order.size();) {
        const double t = scores[order[k]];
        while (k < order.size() && scores[order[k]] == t) {
            (labels[order[k]] == 1 ? tp : fp)++;
            ++k;
        }
        curve.push_back({t, static_cast<double>(fp) / N, static_cast<double>(tp) / P});
    }
    curve.push_back({-std::numeric_limits<double>::infinity(), 1.0, 1.0});
    return curve;
}

double roc_area(std::span<const RocPoint> curve) {
    double a = 0.0;
    for (std::size_t k = 1; k < curve.size(); ++k) {
        a += (curve[k].fpr - curve[k - 1].fpr) * (curve[k].tpr + curve[k - 1].tpr) / 2.0;
    }
    return a;
}

std::optional<double> auc(std::span<const double> scores, std::span<const int> labels) {
    const auto curve = roc_curve(scores, labels);
    if (curve.empty()) return std::nullopt;
    return roc_area(curve);
}

std::vector<double> roc_grid() {
    const int steps = static_cast<int>(std::lround(1.0 / kRocGridStep));
    std::vector<double> g(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) g[static_cast<std::size_t>(i)] = static_cast<double>(i) / steps;
    return g;
}

std::vector<double> interpolate_tpr(std::span<const RocPoint> curve, std::span<const double> grid) {
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double x = grid[g];
        double best = 0.0;
        for (std::size_t k = 1; k < curve.size(); ++k) {
            const auto& a = curve[k - 1];
            const auto& b = curve[k];
            if (x < a.fpr || x > b.fpr) continue;
            double v;
            if (b.fpr == a.fpr) v = std::max(a.tpr, b.tpr);
            else v = a.tpr + (b.tpr - a.tpr) * (x - a.fpr) / (b.fpr - a.fpr);
            best = std::max(best, v);
        }
        out[g] = best;
    }
    return out;
}

}  // namespace conrad::evaluation
