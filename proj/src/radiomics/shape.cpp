#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "conrad/error.hpp"
#include "detail.hpp"

namespace conrad::radiomics {

namespace {

struct SurfacePoint {
    int x, y, z;
    double px, py, pz;
};

std::vector<SurfacePoint> surface_voxels(const volume::SegMask& m, const volume::Spacing& s) {
    const auto& d = m.dims();
    auto inside = [&](int x, int y, int z) { return d.contains(x, y, z) && m.at(x, y, z); };
    std::vector<SurfacePoint> pts;
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x) {
                if (!m.at(x, y, z)) continue;
                const bool border = !inside(x - 1, y, z) || !inside(x + 1, y, z) || !inside(x, y - 1, z) ||
                                    !inside(x, y + 1, z) || !inside(x, y, z - 1) || !inside(x, y, z + 1);
                if (border) pts.push_back({x, y, z, x * s.x, y * s.y, z * s.z});
            }
    return pts;
}

struct Diameters {
    double max3d = 0.0, slice = 0.0, column = 0.0, row = 0.0;
};

Diameters max_diameters(const std::vector<SurfacePoint>& pts) {
    double best3 = 0.0, best_slice = 0.0, best_col = 0.0, best_row = 0.0;
    for (std::size_t a = 0; a < pts.size(); ++a) {
        const auto& p = pts[a];
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            const auto& q = pts[b];
            const double dx = p.px - q.px, dy = p.py - q.py, dz = p.pz - q.pz;
            const double d2 = dx * dx + dy * dy + dz * dz;
            best3 = std::max(best3, d2);
            if (p.z == q.z) best_slice = std::max(best_slice, d2);
            if (p.y == q.y) best_col = std::max(best_col, d2);
            if (p.x == q.x) best_row = std::max(best_row, d2);
        }
    }
    return {std::sqrt(best3), std::sqrt(best_slice), std::sqrt(best_col), std::sqrt(best_row)};
}

}  // namespace

FeatureList shape_features(const volume::SegMask& m, const volume::Spacing& s) {
    if (!(s.x > 0 && s.y > 0 && s.z > 0)) throw Error(ErrorKind::InvalidInput, "spacing must be positive");
    const std::size_t n = m.count();
    if (n == 0) throw Error(ErrorKind::InvalidInput, "shape features need a non-empty mask");

    const double voxel_volume = static_cast<double>(n) * s.voxel_volume();

    double mesh_volume = 0.0, area = 0.0;
    if (n == 1) {
        // A lone voxel has no meaningful iso-surface; use the voxel box.
        mesh_volume = voxel_volume;
        area = 2.0 * (s.x * s.y + s.y * s.z + s.x * s.z);
    } else {
        const auto mesh = mask_mesh_measures(m, s);
        mesh_volume = mesh.volume;
        area = mesh.surface_area;
    }
    const double sphericity = std::cbrt(std::numbers::pi) * std::pow(6.0 * mesh_volume, 2.0 / 3.0) / area;

    const auto diam = max_diameters(surface_voxels(m, s));

    // PCA of physical voxel-centre coordinates (population covariance).
    const auto& d = m.dims();
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x)
                if (m.at(x, y, z)) mean += Eigen::Vector3d(x * s.x, y * s.y, z * s.z);
    mean /= static_cast<double>(n);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x)
                if (m.at(x, y, z)) {
                    const Eigen::Vector3d c = Eigen::Vector3d(x * s.x, y * s.y, z * s.z) - mean;
                    cov += c * c.transpose();
                }
    cov /= static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov, Eigen::EigenvaluesOnly);
    const Eigen::Vector3d lam = eig.eigenvalues().cwiseMax(0.0);  // ascending
    const double least = lam[0], minor = lam[1], major = lam[2];

    FeatureList out;
    constexpr std::string_view f = "shape";
    detail::push(out, f, "MeshVolume", mesh_volume);
    detail::push(out, f, "VoxelVolume", voxel_volume);
    detail::push(out, f, "SurfaceArea", area);
    detail::push(out, f, "SurfaceVolumeRatio", area / mesh_volume);
    detail::push(out, f, "Sphericity", sphericity);
    detail::push(out, f, "Maximum3DDiameter", diam.max3d);
    detail::push(out, f, "Maximum2DDiameterSlice", diam.slice);
    detail::push(out, f, "Maximum2DDiameterColumn", diam.column);
    detail::push(out, f, "Maximum2DDiameterRow", diam.row);
    detail::push(out, f, "MajorAxisLength", 4.0 * std::sqrt(major));
    detail::push(out, f, "MinorAxisLength", 4.0 * std::sqrt(minor));
    detail::push(out, f, "LeastAxisLength", 4.0 * std::sqrt(least));
    detail::push(out, f, "Elongation", major > 0.0 ? std::sqrt(minor / major) : 1.0);
    detail::push(out, f, "Flatness", major > 0.0 ? std::sqrt(least / major) : 1.0);
    return out;
}

}  // namespace conrad::radiomics
