#include <cmath>

#include "detail.hpp"

namespace conrad::radiomics {

namespace {
constexpr double kCoarsenessCap = 1e6;
}

FeatureList ngtdm_features(const DiscretizedROI& d) {
    const auto t = ngtdm_table(d);

    double nvp = 0.0;
    for (double c : t.count) nvp += c;

    struct Level {
        double i, p, s;
    };
    std::vector<Level> levels;
    double s_total = 0.0;
    for (std::size_t k = 0; k < t.count.size(); ++k) {
        if (t.count[k] > 0.0) {
            levels.push_back({static_cast<double>(k + 1), t.count[k] / nvp, t.s[k]});
            s_total += t.s[k];
        }
    }

    double coarseness = kCoarsenessCap, contrast = 0, busyness = 0, complexity = 0, strength = 0;
    if (!levels.empty()) {
        double ps = 0.0;
        for (const auto& l : levels) ps += l.p * l.s;
        if (ps > 0.0) coarseness = 1.0 / ps;

        double pair_contrast = 0, busy_den = 0, complex_sum = 0, strength_sum = 0;
        for (const auto& a : levels) {
            for (const auto& b : levels) {
                const double diff = a.i - b.i;
                pair_contrast += a.p * b.p * diff * diff;
                busy_den += std::abs(a.i * a.p - b.i * b.p);
                complex_sum += std::abs(diff) * (a.p * a.s + b.p * b.s) / (a.p + b.p);
                strength_sum += (a.p + b.p) * diff * diff;
            }
        }
        const double ngp = static_cast<double>(levels.size());
        if (levels.size() > 1) contrast = pair_contrast / (ngp * (ngp - 1.0)) * (s_total / nvp);
        if (busy_den > 0.0) busyness = ps / busy_den;
        complexity = complex_sum / nvp;
        if (s_total > 0.0) strength = strength_sum / s_total;
    }

    FeatureList out;
    constexpr std::string_view f = "ngtdm";
    detail::push(out, f, "Coarseness", coarseness);
    detail::push(out, f, "Contrast", contrast);
    detail::push(out, f, "Busyness", busyness);
    detail::push(out, f, "Complexity", complexity);
    detail::push(out, f, "Strength", strength);
    return out;
}

}  // namespace conrad::radiomics
