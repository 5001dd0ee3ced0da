#include "conrad/volume.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "conrad/error.hpp"

namespace conrad::volume {

namespace {

void check_dims(const Dims& d) {
    if (d.nx <= 0 || d.ny <= 0 || d.nz <= 0) {
        throw Error(ErrorKind::InvalidInput, "volume dims must be positive, got (" + std::to_string(d.nx) + ", " +
                                                 std::to_string(d.ny) + ", " + std::to_string(d.nz) + ")");
    }
}

void check_spacing(const Spacing& s) {
    if (!(s.x > 0.0 && s.y > 0.0 && s.z > 0.0) || !std::isfinite(s.x) || !std::isfinite(s.y) ||
        !std::isfinite(s.z)) {
        throw Error(ErrorKind::InvalidInput, "voxel spacing must be positive and finite");
    }
}

int resampled_extent(int n, double ratio) {
    // ratio = target / source spacing; the epsilon absorbs representation error
    // in n / ratio so an exact multiple never rounds up an extra voxel.
    const double raw = static_cast<double>(n) / ratio;
    return std::max(1, static_cast<int>(std::ceil(raw - 1e-9)));
}

struct AxisSample {
    int lo;
    int hi;
    double frac;
};

AxisSample axis_sample(int out_index, double ratio, int n) {
    double pos = static_cast<double>(out_index) * ratio;
    if (pos <= 0.0) return {0, 0, 0.0};
    const double last = static_cast<double>(n - 1);
    if (pos >= last) return {n - 1, n - 1, 0.0};
    const int lo = static_cast<int>(std::floor(pos));
    return {lo, std::min(lo + 1, n - 1), pos - lo};
}

template <typename Sample>
std::vector<double> trilinear_grid(const Dims& src, const Spacing& spacing, double t, Dims& out_dims,
                                   Sample&& sample) {
    const double rx = t / spacing.x;
    const double ry = t / spacing.y;
    const double rz = t / spacing.z;
    out_dims = {resampled_extent(src.nx, rx), resampled_extent(src.ny, ry), resampled_extent(src.nz, rz)};

    std::vector<AxisSample> xs(out_dims.nx), ys(out_dims.ny), zs(out_dims.nz);
    for (int i = 0; i < out_dims.nx; ++i) xs[i] = axis_sample(i, rx, src.nx);
    for (int i = 0; i < out_dims.ny; ++i) ys[i] = axis_sample(i, ry, src.ny);
    for (int i = 0; i < out_dims.nz; ++i) zs[i] = axis_sample(i, rz, src.nz);

    std::vector<double> out(out_dims.count());
    std::size_t o = 0;
    for (int k = 0; k < out_dims.nz; ++k) {
        const auto& az = zs[k];
        for (int j = 0; j < out_dims.ny; ++j) {
            const auto& ay = ys[j];
            for (int i = 0; i < out_dims.nx; ++i, ++o) {
                const auto& ax = xs[i];
                auto lerp = [](double a, double b, double f) { return f == 0.0 ? a : a + (b - a) * f; };
                const double c00 = lerp(sample(ax.lo, ay.lo, az.lo), sample(ax.hi, ay.lo, az.lo), ax.frac);
                const double c10 = lerp(sample(ax.lo, ay.hi, az.lo), sample(ax.hi, ay.hi, az.lo), ax.frac);
                const double c01 = lerp(sample(ax.lo, ay.lo, az.hi), sample(ax.hi, ay.lo, az.hi), ax.frac);
                const double c11 = lerp(sample(ax.lo, ay.hi, az.hi), sample(ax.hi, ay.hi, az.hi), ax.frac);
                const double c0 = lerp(c00, c10, ay.frac);
                const double c1 = lerp(c01, c11, ay.frac);
                out[o] = lerp(c0, c1, az.frac);
            }
        }
    }
    return out;
}

void check_target(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw Error(ErrorKind::InvalidInput, "target spacing must be positive");
    }
}

}  // namespace

ScalarVolume::ScalarVolume(Dims dims, Spacing spacing, std::vector<double> voxels)
    : dims_(dims), spacing_(spacing), voxels_(std::move(voxels)) {
    check_dims(dims_);
    check_spacing(spacing_);
    if (voxels_.size() != dims_.count()) {
        throw Error(ErrorKind::InvalidInput, "voxel count " + std::to_string(voxels_.size()) +
                                                 " does not match dims product " + std::to_string(dims_.count()));
    }
    for (std::size_t i = 0; i < voxels_.size(); ++i) {
        if (!std::isfinite(voxels_[i])) {
            throw Error(ErrorKind::InvalidInput, "non-finite voxel at linear index " + std::to_string(i));
        }
    }
}

ScalarVolume::ScalarVolume(Dims dims, Spacing spacing, double fill)
    : ScalarVolume(dims, spacing, std::vector<double>(dims.nx > 0 && dims.ny > 0 && dims.nz > 0 ? dims.count() : 0, fill)) {}

SegMask::SegMask(Dims dims) : dims_(dims) {
    check_dims(dims_);
    bits_.assign(dims_.count(), 0);
}

SegMask::SegMask(Dims dims, std::vector<std::uint8_t> bits) : dims_(dims), bits_(std::move(bits)) {
    check_dims(dims_);
    if (bits_.size() != dims_.count()) {
        throw Error(ErrorKind::InvalidInput, "mask size does not match dims product");
    }
    for (auto& b : bits_) {
        if (b > 1) throw Error(ErrorKind::InvalidInput, "mask values must be 0 or 1");
    }
}

std::size_t SegMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::string_view to_string(Plane plane) noexcept {
    switch (plane) {
    case Plane::Axial: return "axial";
    case Plane::Coronal: return "coronal";
    case Plane::Sagittal: return "sagittal";
    }
    return "unknown";
}

ScalarVolume resample_isotropic(const ScalarVolume& v, double target_spacing_mm) {
    check_target(target_spacing_mm);
    const auto& d = v.dims();
    const auto vox = v.voxels();
    for (std::size_t i = 0; i < vox.size(); ++i) {
        if (!std::isfinite(vox[i])) throw Error(ErrorKind::InvalidInput, "non-finite voxel encountered");
    }
    Dims out_dims;
    auto out = trilinear_grid(d, v.spacing(), target_spacing_mm, out_dims,
                              [&](int x, int y, int z) { return vox[d.index(x, y, z)]; });
    return ScalarVolume(out_dims, {target_spacing_mm, target_spacing_mm, target_spacing_mm}, std::move(out));
}

SegMask resample_mask(const SegMask& m, const Spacing& source_spacing, double target_spacing_mm) {
    check_target(target_spacing_mm);
    check_spacing(source_spacing);
    const auto& d = m.dims();
    const auto bits = m.bits();
    Dims out_dims;
    auto field = trilinear_grid(d, source_spacing, target_spacing_mm, out_dims,
                                [&](int x, int y, int z) { return static_cast<double>(bits[d.index(x, y, z)]); });
    std::vector<std::uint8_t> out(field.size());
    std::transform(field.begin(), field.end(), out.begin(), [](double f) { return f >= 0.5 ? 1 : 0; });
    return SegMask(out_dims, std::move(out));
}

ScalarVolume clamp_hu(const ScalarVolume& v, double lo, double hi) {
    if (!(lo < hi)) {
        throw Error(ErrorKind::Config, "clamp bounds require lo < hi, got lo=" + std::to_string(lo) +
                                           " hi=" + std::to_string(hi));
    }
    std::vector<double> out(v.voxels().begin(), v.voxels().end());
    for (auto& x : out) x = std::min(std::max(x, lo), hi);
    return ScalarVolume(v.dims(), v.spacing(), std::move(out));
}

ViewTriplet extract_views(const ScalarVolume& v, VoxelCoord c, double fill) {
    const auto& d = v.dims();
    if (!d.contains(c.x, c.y, c.z)) {
        throw Error(ErrorKind::OutOfBounds, "crop centre (" + std::to_string(c.x) + ", " + std::to_string(c.y) +
                                                ", " + std::to_string(c.z) + ") lies outside the volume");
    }
    constexpr int half = kCropSize / 2;

    auto make = [&](Plane plane, auto&& coord_of) {
        ViewCrop crop;
        crop.plane = plane;
        crop.center = c;
        for (int vv = 0; vv < kCropSize; ++vv) {
            for (int u = 0; u < kCropSize; ++u) {
                const VoxelCoord p = coord_of(u - half, vv - half);
                crop.pixels[static_cast<std::size_t>(vv) * kCropSize + u] =
                    d.contains(p.x, p.y, p.z) ? v.at(p.x, p.y, p.z) : fill;
            }
        }
        return crop;
    };

    ViewTriplet views;
    views.axial = make(Plane::Axial, [&](int a, int b) { return VoxelCoord{c.x + a, c.y + b, c.z}; });
    views.coronal = make(Plane::Coronal, [&](int a, int b) { return VoxelCoord{c.x + a, c.y, c.z + b}; });
    views.sagittal = make(Plane::Sagittal, [&](int a, int b) { return VoxelCoord{c.x, c.y + a, c.z + b}; });
    return views;
}

NormalizationParams znorm_fit(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorKind::InvalidInput, "cannot fit normalization on an empty sequence");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : values) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / n)};
}

double znorm_apply(double value, const NormalizationParams& p) noexcept {
    return p.stddev == 0.0 ? 0.0 : (value - p.mean) / p.stddev;
}

std::vector<double> znorm_apply(std::span<const double> values, const NormalizationParams& p) {
    if (values.empty()) throw Error(ErrorKind::InvalidInput, "cannot normalize an empty sequence");
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [&](double x) { return znorm_apply(x, p); });
    return out;
}

VoxelCoord mask_centroid(const SegMask& m) {
    const auto& d = m.dims();
    double sx = 0, sy = 0, sz = 0;
    std::size_t n = 0;
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x)
                if (m.at(x, y, z)) {
                    sx += x;
                    sy += y;
                    sz += z;
                    ++n;
                }
    if (n == 0) throw Error(ErrorKind::InvalidInput, "centroid of an empty mask is undefined");
    const double inv = 1.0 / static_cast<double>(n);
    return {static_cast<int>(std::lround(sx * inv)), static_cast<int>(std::lround(sy * inv)),
            static_cast<int>(std::lround(sz * inv))};
}

}  // namespace conrad::volume
