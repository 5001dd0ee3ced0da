#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace conrad::volume {

struct Dims {
    int nx = 0;
    int ny = 0;
    int nz = 0;

    std::size_t count() const noexcept {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    }
    bool contains(int x, int y, int z) const noexcept {
        return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz;
    }
    // x-fastest linear order
    std::size_t index(int x, int y, int z) const noexcept {
        return (static_cast<std::size_t>(z) * ny + y) * nx + x;
    }
    friend bool operator==(const Dims&, const Dims&) = default;
};

/// Physical voxel size in millimetres.
struct Spacing {
    double x = 1.0;
    double y = 1.0;
    double z = 1.0;

    double voxel_volume() const noexcept { return x * y * z; }
    friend bool operator==(const Spacing&, const Spacing&) = default;
};

struct VoxelCoord {
    int x = 0;
    int y = 0;
    int z = 0;
    friend bool operator==(const VoxelCoord&, const VoxelCoord&) = default;
};

/// 3D grid of Hounsfield-unit samples. Construction validates the voxel count,
/// positive spacing, and finiteness, so a live ScalarVolume is always valid.
class ScalarVolume {
public:
    ScalarVolume() = default;
    ScalarVolume(Dims dims, Spacing spacing, std::vector<double> voxels);
    ScalarVolume(Dims dims, Spacing spacing, double fill);

    const Dims& dims() const noexcept { return dims_; }
    const Spacing& spacing() const noexcept { return spacing_; }
    std::span<const double> voxels() const noexcept { return voxels_; }

    double at(int x, int y, int z) const noexcept { return voxels_[dims_.index(x, y, z)]; }
    double operator[](std::size_t i) const noexcept { return voxels_[i]; }

private:
    Dims dims_;
    Spacing spacing_;
    std::vector<double> voxels_;
};

/// Binary region of interest aligned with a ScalarVolume.
class SegMask {
public:
    SegMask() = default;
    explicit SegMask(Dims dims);
    SegMask(Dims dims, std::vector<std::uint8_t> bits);

    const Dims& dims() const noexcept { return dims_; }
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    bool at(int x, int y, int z) const noexcept { return bits_[dims_.index(x, y, z)] != 0; }
    bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
    void set(int x, int y, int z, bool on) noexcept { bits_[dims_.index(x, y, z)] = on ? 1 : 0; }
    void set(std::size_t i, bool on) noexcept { bits_[i] = on ? 1 : 0; }

    std::size_t count() const noexcept;
    bool empty_roi() const noexcept { return count() == 0; }

    friend bool operator==(const SegMask&, const SegMask&) = default;

private:
    Dims dims_;
    std::vector<std::uint8_t> bits_;
};

enum class Plane { Axial, Coronal, Sagittal };

std::string_view to_string(Plane plane) noexcept;

inline constexpr int kCropSize = 32;

/// A kCropSize x kCropSize slice through a nodule centre. Pixel (u, v) is stored
/// at v * kCropSize + u, where u runs along the first in-plane axis
/// (axial: x/y, coronal: x/z, sagittal: y/z).
struct ViewCrop {
    Plane plane = Plane::Axial;
    VoxelCoord center;
    std::array<double, kCropSize * kCropSize> pixels{};

    double at(int u, int v) const noexcept { return pixels[static_cast<std::size_t>(v) * kCropSize + u]; }
};

struct ViewTriplet {
    ViewCrop axial;
    ViewCrop coronal;
    ViewCrop sagittal;
};

/// Population mean/stddev; stddev == 0 maps every value to 0 on apply.
struct NormalizationParams {
    double mean = 0.0;
    double stddev = 0.0;
    friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;
};

inline constexpr double kDefaultHuFloor = -1000.0;
inline constexpr double kDefaultHuCeiling = 400.0;

/// Trilinear resampling onto a (t, t, t) grid; samples beyond the source
/// extent take the nearest boundary value.
ScalarVolume resample_isotropic(const ScalarVolume& v, double target_spacing_mm);

/// Mask counterpart of resample_isotropic: the 0/1 field is interpolated the
/// same way and thresholded at 0.5.
SegMask resample_mask(const SegMask& m, const Spacing& source_spacing, double target_spacing_mm);

ScalarVolume clamp_hu(const ScalarVolume& v, double lo = kDefaultHuFloor, double hi = kDefaultHuCeiling);

ViewTriplet extract_views(const ScalarVolume& v, VoxelCoord center, double fill = kDefaultHuFloor);

NormalizationParams znorm_fit(std::span<const double> values);
std::vector<double> znorm_apply(std::span<const double> values, const NormalizationParams& p);
double znorm_apply(double value, const NormalizationParams& p) noexcept;

/// Rounded centre of mass of the ROI, in voxel indices.
VoxelCoord mask_centroid(const SegMask& m);

}  // namespace conrad::volume
