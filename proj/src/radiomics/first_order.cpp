#include <algorithm>
#include <cmath>
#include <vector>

#include "conrad/error.hpp"
#include "detail.hpp"

namespace conrad::radiomics {

namespace {

// Linear interpolation between closest ranks (the numpy default).
double percentile(const std::vector<double>& sorted, double q) {
    const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

}  // namespace

FeatureList first_order_features(const volume::ScalarVolume& v, const volume::SegMask& m, double bin_width) {
    const DiscretizedROI d = discretize(v, m, bin_width);

    std::vector<double> x;
    std::vector<double> bin_counts(static_cast<std::size_t>(d.n_bins) + 1, 0.0);
    const auto vox = v.voxels();
    for (std::size_t i = 0; i < vox.size(); ++i) {
        if (m[i]) {
            x.push_back(vox[i]);
            bin_counts[static_cast<std::size_t>(d.bins[i])] += 1.0;
        }
    }
    const double n = static_cast<double>(x.size());
    std::sort(x.begin(), x.end());

    double sum = 0.0, energy = 0.0;
    for (double xi : x) {
        sum += xi;
        energy += xi * xi;
    }
    const double mean = sum / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0, mad = 0.0;
    for (double xi : x) {
        const double c = xi - mean;
        m2 += c * c;
        m3 += c * c * c;
        m4 += c * c * c * c;
        mad += std::abs(c);
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    mad /= n;

    const double p10 = percentile(x, 10.0);
    const double p90 = percentile(x, 90.0);
    double robust_sum = 0.0, robust_n = 0.0;
    for (double xi : x) {
        if (xi >= p10 && xi <= p90) {
            robust_sum += xi;
            robust_n += 1.0;
        }
    }
    const double robust_mean = robust_sum / robust_n;
    double rmad = 0.0;
    for (double xi : x) {
        if (xi >= p10 && xi <= p90) rmad += std::abs(xi - robust_mean);
    }
    rmad /= robust_n;

    double entropy = 0.0, uniformity = 0.0;
    for (double c : bin_counts) {
        const double p = c / n;
        entropy += detail::neg_plog2p(p);
        uniformity += p * p;
    }

    FeatureList out;
    constexpr std::string_view f = "firstorder";
    detail::push(out, f, "Energy", energy);
    detail::push(out, f, "TotalEnergy", energy * v.spacing().voxel_volume());
    detail::push(out, f, "Entropy", entropy);
    detail::push(out, f, "Minimum", x.front());
    detail::push(out, f, "10Percentile", p10);
    detail::push(out, f, "90Percentile", p90);
    detail::push(out, f, "Maximum", x.back());
    detail::push(out, f, "Mean", mean);
    detail::push(out, f, "Median", percentile(x, 50.0));
    detail::push(out, f, "InterquartileRange", percentile(x, 75.0) - percentile(x, 25.0));
    detail::push(out, f, "Range", x.back() - x.front());
    detail::push(out, f, "MeanAbsoluteDeviation", mad);
    detail::push(out, f, "RobustMeanAbsoluteDeviation", rmad);
    detail::push(out, f, "RootMeanSquared", std::sqrt(energy / n));
    detail::push(out, f, "Skewness", m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0);
    detail::push(out, f, "Kurtosis", m2 > 0.0 ? m4 / (m2 * m2) : 0.0);
    detail::push(out, f, "Variance", m2);
    detail::push(out, f, "Uniformity", uniformity);
    return out;
}

}  // namespace conrad::radiomics
