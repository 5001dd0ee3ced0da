#include <algorithm>

#include "detail.hpp"

namespace conrad::radiomics {

namespace {

double roi_size(const DiscretizedROI& d) {
    return static_cast<double>(d.bins.size() - static_cast<std::size_t>(std::count(d.bins.begin(), d.bins.end(), 0)));
}

}  // namespace

FeatureList glrlm_features(const DiscretizedROI& d) {
    const double np = roi_size(d);
    std::vector<FeatureList> per_dir;
    for (const auto& m : glrlm_matrices(d)) {
        const auto cells = detail::nonzero_cells(m);
        if (cells.empty()) continue;
        const auto s = detail::emphasis_stats(cells, np);
        FeatureList out;
        constexpr std::string_view f = "glrlm";
        detail::push(out, f, "ShortRunEmphasis", s.small_emphasis);
        detail::push(out, f, "LongRunEmphasis", s.large_emphasis);
        detail::push(out, f, "GrayLevelNonUniformity", s.gray_nonuniformity);
        detail::push(out, f, "GrayLevelNonUniformityNormalized", s.gray_nonuniformity_norm);
        detail::push(out, f, "RunLengthNonUniformity", s.size_nonuniformity);
        detail::push(out, f, "RunLengthNonUniformityNormalized", s.size_nonuniformity_norm);
        detail::push(out, f, "RunPercentage", s.percentage);
        detail::push(out, f, "GrayLevelVariance", s.gray_variance);
        detail::push(out, f, "RunVariance", s.size_variance);
        detail::push(out, f, "RunEntropy", s.entropy);
        detail::push(out, f, "LowGrayLevelRunEmphasis", s.low_gray);
        detail::push(out, f, "HighGrayLevelRunEmphasis", s.high_gray);
        detail::push(out, f, "ShortRunLowGrayLevelEmphasis", s.small_low_gray);
        detail::push(out, f, "ShortRunHighGrayLevelEmphasis", s.small_high_gray);
        detail::push(out, f, "LongRunLowGrayLevelEmphasis", s.large_low_gray);
        detail::push(out, f, "LongRunHighGrayLevelEmphasis", s.large_high_gray);
        per_dir.push_back(std::move(out));
    }
    return detail::average_lists(per_dir);
}

FeatureList glszm_features(const DiscretizedROI& d, int connectivity) {
    const auto s = detail::emphasis_stats(detail::glszm_cells(d, connectivity), roi_size(d));
    FeatureList out;
    constexpr std::string_view f = "glszm";
    detail::push(out, f, "SmallAreaEmphasis", s.small_emphasis);
    detail::push(out, f, "LargeAreaEmphasis", s.large_emphasis);
    detail::push(out, f, "GrayLevelNonUniformity", s.gray_nonuniformity);
    detail::push(out, f, "GrayLevelNonUniformityNormalized", s.gray_nonuniformity_norm);
    detail::push(out, f, "SizeZoneNonUniformity", s.size_nonuniformity);
    detail::push(out, f, "SizeZoneNonUniformityNormalized", s.size_nonuniformity_norm);
    detail::push(out, f, "ZonePercentage", s.percentage);
    detail::push(out, f, "GrayLevelVariance", s.gray_variance);
    detail::push(out, f, "ZoneVariance", s.size_variance);
    detail::push(out, f, "ZoneEntropy", s.entropy);
    detail::push(out, f, "LowGrayLevelZoneEmphasis", s.low_gray);
    detail::push(out, f, "HighGrayLevelZoneEmphasis", s.high_gray);
    detail::push(out, f, "SmallAreaLowGrayLevelEmphasis", s.small_low_gray);
    detail::push(out, f, "SmallAreaHighGrayLevelEmphasis", s.small_high_gray);
    detail::push(out, f, "LargeAreaLowGrayLevelEmphasis", s.large_low_gray);
    detail::push(out, f, "LargeAreaHighGrayLevelEmphasis", s.large_high_gray);
    return out;
}

FeatureList gldm_features(const DiscretizedROI& d, int dependence_tolerance) {
    const auto s = detail::emphasis_stats(detail::nonzero_cells(gldm_matrix(d, dependence_tolerance)), roi_size(d));
    FeatureList out;
    constexpr std::string_view f = "gldm";
    detail::push(out, f, "SmallDependenceEmphasis", s.small_emphasis);
    detail::push(out, f, "LargeDependenceEmphasis", s.large_emphasis);
    detail::push(out, f, "GrayLevelNonUniformity", s.gray_nonuniformity);
    detail::push(out, f, "DependenceNonUniformity", s.size_nonuniformity);
    detail::push(out, f, "DependenceNonUniformityNormalized", s.size_nonuniformity_norm);
    detail::push(out, f, "GrayLevelVariance", s.gray_variance);
    detail::push(out, f, "DependenceVariance", s.size_variance);
    detail::push(out, f, "DependenceEntropy", s.entropy);
    detail::push(out, f, "LowGrayLevelEmphasis", s.low_gray);
    detail::push(out, f, "HighGrayLevelEmphasis", s.high_gray);
    detail::push(out, f, "SmallDependenceLowGrayLevelEmphasis", s.small_low_gray);
    detail::push(out, f, "SmallDependenceHighGrayLevelEmphasis", s.small_high_gray);
    detail::push(out, f, "LargeDependenceLowGrayLevelEmphasis", s.large_low_gray);
    detail::push(out, f, "LargeDependenceHighGrayLevelEmphasis", s.large_high_gray);
    return out;
}

}  // namespace conrad::radiomics
