#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>

#include "detail.hpp"

namespace conrad::radiomics {

namespace {

// Features of one normalized, symmetric co-occurrence matrix. `ng` is the
// number of gray levels that take part in any co-occurrence.
FeatureList glcm_from_matrix(const CountMatrix& counts, double ng) {
    const std::size_t n = counts.rows;
    const double total = counts.sum();
    std::vector<double> p(counts.data.size());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = counts.data[k] / total;
    auto P = [&](std::size_t i, std::size_t j) { return p[i * n + j]; };

    std::vector<double> px(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) px[i] += P(i, j);
    const std::vector<double>& py = px;  // symmetric matrix

    double mu = 0.0;
    for (std::size_t i = 0; i < n; ++i) mu += static_cast<double>(i + 1) * px[i];
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (static_cast<double>(i + 1) - mu) * (static_cast<double>(i + 1) - mu) * px[i];

    std::vector<double> p_sum(2 * n + 1, 0.0);  // index k = i + j (levels)
    std::vector<double> p_diff(n, 0.0);         // index k = |i - j|
    double autocorr = 0, prominence = 0, shade = 0, tendency = 0, contrast = 0, joint_energy = 0, joint_entropy = 0;
    double idm = 0, idmn = 0, id = 0, idn = 0, max_prob = 0, hxy1 = 0, hxy2 = 0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            const double pij = P(a, b);
            const double i = static_cast<double>(a + 1), j = static_cast<double>(b + 1);
            const double pxy = px[a] * py[b];
            if (pxy > 0.0) hxy2 -= pxy * std::log2(pxy);
            if (pij == 0.0) continue;
            const double c = i + j - 2.0 * mu;
            const double d = std::abs(i - j);
            autocorr += pij * i * j;
            prominence += pij * c * c * c * c;
            shade += pij * c * c * c;
            tendency += pij * c * c;
            contrast += pij * d * d;
            joint_energy += pij * pij;
            joint_entropy -= pij * std::log2(pij);
            idm += pij / (1.0 + d * d);
            idmn += pij / (1.0 + d * d / (ng * ng));
            id += pij / (1.0 + d);
            idn += pij / (1.0 + d / ng);
            max_prob = std::max(max_prob, pij);
            hxy1 -= pij * std::log2(pxy);
            p_sum[a + b + 2] += pij;
            p_diff[static_cast<std::size_t>(d)] += pij;
        }
    }

    const double correlation = var > 0.0 ? (autocorr - mu * mu) / var : 1.0;

    double diff_avg = 0, diff_entropy = 0, inv_var = 0;
    for (std::size_t k = 0; k < n; ++k) {
        diff_avg += static_cast<double>(k) * p_diff[k];
        diff_entropy += detail::neg_plog2p(p_diff[k]);
        if (k > 0) inv_var += p_diff[k] / static_cast<double>(k * k);
    }
    double diff_var = 0;
    for (std::size_t k = 0; k < n; ++k) diff_var += (static_cast<double>(k) - diff_avg) * (static_cast<double>(k) - diff_avg) * p_diff[k];

    double sum_avg = 0, sum_entropy = 0;
    for (std::size_t k = 2; k < p_sum.size(); ++k) {
        sum_avg += static_cast<double>(k) * p_sum[k];
        sum_entropy += detail::neg_plog2p(p_sum[k]);
    }

    double hx = 0;
    for (double v : px) hx += detail::neg_plog2p(v);
    const double imc1 = hx > 0.0 ? (joint_entropy - hxy1) / hx : 0.0;
    const double imc2 = hxy2 > joint_entropy ? std::sqrt(1.0 - std::exp(-2.0 * (hxy2 - joint_entropy))) : 0.0;

    // MCC: Q = Dx^-1 P Dx^-1 P is similar to B^2 with B = Dx^-1/2 P Dx^-1/2,
    // so its eigenvalues are the squared eigenvalues of the symmetric B.
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < n; ++i)
        if (px[i] > 0.0) live.push_back(i);
    double mcc = 1.0;
    if (live.size() > 1) {
        Eigen::MatrixXd B(live.size(), live.size());
        for (std::size_t a = 0; a < live.size(); ++a)
            for (std::size_t b = 0; b < live.size(); ++b)
                B(a, b) = P(live[a], live[b]) / std::sqrt(px[live[a]] * px[live[b]]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B, Eigen::EigenvaluesOnly);
        std::vector<double> sq;
        for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) sq.push_back(eig.eigenvalues()[k] * eig.eigenvalues()[k]);
        std::sort(sq.begin(), sq.end(), std::greater<>());
        mcc = std::sqrt(std::max(0.0, sq[1]));
    }

    FeatureList out;
    constexpr std::string_view f = "glcm";
    detail::push(out, f, "Autocorrelation", autocorr);
    detail::push(out, f, "JointAverage", mu);
    detail::push(out, f, "ClusterProminence", prominence);
    detail::push(out, f, "ClusterShade", shade);
    detail::push(out, f, "ClusterTendency", tendency);
    detail::push(out, f, "Contrast", contrast);
    detail::push(out, f, "Correlation", correlation);
    detail::push(out, f, "DifferenceAverage", diff_avg);
    detail::push(out, f, "DifferenceEntropy", diff_entropy);
    detail::push(out, f, "DifferenceVariance", diff_var);
    detail::push(out, f, "JointEnergy", joint_energy);
    detail::push(out, f, "JointEntropy", joint_entropy);
    detail::push(out, f, "Imc1", imc1);
    detail::push(out, f, "Imc2", imc2);
    detail::push(out, f, "Idm", idm);
    detail::push(out, f, "Idmn", idmn);
    detail::push(out, f, "Id", id);
    detail::push(out, f, "Idn", idn);
    detail::push(out, f, "InverseVariance", inv_var);
    detail::push(out, f, "MaximumProbability", max_prob);
    detail::push(out, f, "MCC", mcc);
    detail::push(out, f, "SumAverage", sum_avg);
    detail::push(out, f, "SumEntropy", sum_entropy);
    detail::push(out, f, "SumSquares", var);
    return out;
}

}  // namespace

FeatureList glcm_features(const DiscretizedROI& d, int distance) {
    auto mats = glcm_matrices(d, distance);

    std::vector<char> participates(static_cast<std::size_t>(d.n_bins), 0);
    for (const auto& m : mats)
        for (std::size_t i = 0; i < m.rows; ++i)
            for (std::size_t j = 0; j < m.cols; ++j)
                if (m(i, j) != 0.0) participates[i] = 1;
    double ng = static_cast<double>(std::count(participates.begin(), participates.end(), 1));

    std::vector<FeatureList> per_dir;
    for (const auto& m : mats)
        if (m.sum() > 0.0) per_dir.push_back(glcm_from_matrix(m, ng));

    if (per_dir.empty()) {
        // No voxel pair at this distance: score the ROI as a single
        // self-co-occurrence of its lowest level.
        const auto levels = d.present_levels();
        CountMatrix single(static_cast<std::size_t>(d.n_bins), static_cast<std::size_t>(d.n_bins));
        single(levels.front() - 1, levels.front() - 1) = 1.0;
        per_dir.push_back(glcm_from_matrix(single, 1.0));
    }
    return detail::average_lists(per_dir);
}

}  // namespace conrad::radiomics
