#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "conrad/volume.hpp"

namespace conrad::radiomics {

/// Fixed-bin-width discretization of the ROI. `bins` covers the full grid:
/// 0 outside the mask, 1..n_bins inside, with
/// bin = floor((x - roi_min) / bin_width) + 1.
struct DiscretizedROI {
    volume::Dims dims;
    std::vector<int> bins;
    int n_bins = 0;
    double bin_width = 0.0;
    double roi_min = 0.0;

    int at(int x, int y, int z) const noexcept { return bins[dims.index(x, y, z)]; }
    /// Bin values that occur in the ROI, ascending.
    std::vector<int> present_levels() const;
};

inline constexpr double kDefaultBinWidth = 25.0;

DiscretizedROI discretize(const volume::ScalarVolume& v, const volume::SegMask& m,
                          double bin_width = kDefaultBinWidth);

struct Feature {
    std::string name;
    double value;
};
using FeatureList = std::vector<Feature>;

// ---------------------------------------------------------------------------
// Feature families. Each returns its features in registry order.

FeatureList first_order_features(const volume::ScalarVolume& v, const volume::SegMask& m,
                                 double bin_width = kDefaultBinWidth);

FeatureList shape_features(const volume::SegMask& m, const volume::Spacing& spacing);

FeatureList glcm_features(const DiscretizedROI& d, int distance = 1);
FeatureList glrlm_features(const DiscretizedROI& d);
FeatureList glszm_features(const DiscretizedROI& d, int connectivity = 26);
FeatureList ngtdm_features(const DiscretizedROI& d);
FeatureList gldm_features(const DiscretizedROI& d, int dependence_tolerance = 0);

// ---------------------------------------------------------------------------
// Texture matrices, exposed for inspection and testing. Gray levels are bin
// indices; matrix row/column g-1 holds level g.

using Offset = std::array<int, 3>;

/// The 13 unique 3D neighbour directions (one of each +/- pair).
const std::array<Offset, 13>& unique_directions();

/// Dense square-or-rectangular count matrix, row-major.
struct CountMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    CountMatrix() = default;
    CountMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& operator()(std::size_t r, std::size_t c) noexcept { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data[r * cols + c]; }
    double sum() const noexcept;
};

/// Symmetrized co-occurrence counts per direction (unnormalized).
std::vector<CountMatrix> glcm_matrices(const DiscretizedROI& d, int distance = 1);

/// Run-length counts per direction; column j-1 holds runs of length j.
std::vector<CountMatrix> glrlm_matrices(const DiscretizedROI& d);

/// Zone counts; column s-1 holds zones of size s.
CountMatrix glszm_matrix(const DiscretizedROI& d, int connectivity = 26);

struct NgtdmTable {
    std::vector<double> count;  // n_i per level
    std::vector<double> s;      // sum |i - neighbourhood mean|
};
NgtdmTable ngtdm_table(const DiscretizedROI& d);

/// Dependence counts; column k-1 holds voxels with dependence k (the centre
/// voxel counts itself, so k >= 1).
CountMatrix gldm_matrix(const DiscretizedROI& d, int dependence_tolerance = 0);

// ---------------------------------------------------------------------------
// Triangulated iso-surface of a binary mask at level 0.5 with edge-midpoint
// vertices, in millimetres.

struct MeshMeasures {
    double volume = 0.0;
    double surface_area = 0.0;
    std::size_t triangles = 0;
};

MeshMeasures mask_mesh_measures(const volume::SegMask& m, const volume::Spacing& spacing);

// ---------------------------------------------------------------------------

struct Settings {
    double bin_width = kDefaultBinWidth;
    int glcm_distance = 1;
    int zone_connectivity = 26;  // 6, 18 or 26
};

inline constexpr std::size_t kFeatureCount = 107;

/// Versioned registry of the 107 feature names, in CSV column order.
const std::vector<std::string>& feature_names();
inline constexpr std::string_view kRegistryVersion = "conrad-radiomics/1";

/// All 107 features in registry order.
std::vector<double> extract_all(const volume::ScalarVolume& v, const volume::SegMask& m,
                                const Settings& settings = {});

}  // namespace conrad::radiomics
