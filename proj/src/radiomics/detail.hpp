#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "conrad/radiomics.hpp"

namespace conrad::radiomics::detail {

/// -p log2 p with the 0 log 0 = 0 convention.
inline double neg_plog2p(double p) noexcept { return p > 0.0 ? -p * std::log2(p) : 0.0; }

inline void push(FeatureList& out, std::string_view family, std::string_view name, double value) {
    out.push_back({std::string(family) + "." + std::string(name), value});
}

/// Unweighted mean of per-direction feature lists sharing the same names.
FeatureList average_lists(const std::vector<FeatureList>& per_direction);

/// Nonzero cell of a gray-level x size matrix (run length, zone size or
/// dependence count). Entries are kept sorted by (level, size).
struct LevelSizeCount {
    int level;
    int size;
    double count;
};

std::vector<LevelSizeCount> nonzero_cells(const CountMatrix& m);

/// Statistics shared by the run-length, size-zone and dependence families.
/// `n_voxels` is the ROI voxel count.
struct EmphasisStats {
    double small_emphasis = 0, large_emphasis = 0;
    double gray_nonuniformity = 0, gray_nonuniformity_norm = 0;
    double size_nonuniformity = 0, size_nonuniformity_norm = 0;
    double percentage = 0;
    double gray_variance = 0, size_variance = 0, entropy = 0;
    double low_gray = 0, high_gray = 0;
    double small_low_gray = 0, small_high_gray = 0, large_low_gray = 0, large_high_gray = 0;
};

EmphasisStats emphasis_stats(const std::vector<LevelSizeCount>& cells, double n_voxels);

/// Size-zone cells for the given connectivity, sorted by (level, size).
std::vector<LevelSizeCount> glszm_cells(const DiscretizedROI& d, int connectivity);

/// Neighbour offsets for the given connectivity (6, 18 or 26).
std::vector<Offset> neighbourhood(int connectivity);

}  // namespace conrad::radiomics::detail
