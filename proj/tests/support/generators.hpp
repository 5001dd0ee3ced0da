#pragma once

// Hand-rolled random fixture generators for the property suites and the
// acceptance gate. Every generator draws from a caller-supplied Rng so a
// failing case is reproduced from its seed alone.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "conrad/evaluation.hpp"
#include "conrad/learners.hpp"
#include "conrad/random.hpp"
#include "conrad/volume.hpp"
#include "oracles.hpp"

namespace gen {

inline int uniform_int(conrad::Rng& rng, int lo, int hi) {
    return lo + static_cast<int>(rng.index(static_cast<std::size_t>(hi - lo + 1)));
}

/// A small ROI with integer HU values (as stored on disk), a random mask of at
/// least one voxel, and a bin width giving at most ~16 gray levels.
inline oracle::Roi roi(conrad::Rng& rng, int min_side = 3, int max_side = 5) {
    oracle::Roi r;
    r.dims = {uniform_int(rng, min_side, max_side), uniform_int(rng, min_side, max_side),
              uniform_int(rng, min_side, max_side)};
    r.spacing = {rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5), rng.uniform(0.5, 2.5)};
    const std::array<double, 4> widths = {5.0, 10.0, 25.0, 50.0};
    r.bin_width = widths[rng.index(widths.size())];
    const int levels = uniform_int(rng, 1, 16);
    const int span = static_cast<int>(r.bin_width) * levels - 1;
    const int base = uniform_int(rng, -400, 200);
    const double fill = rng.uniform(0.4, 1.0);
    const std::size_t n = r.dims.count();
    r.values.resize(n);
    r.inside.resize(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        r.values[i] = base + uniform_int(rng, 0, span);
        r.inside[i] = rng.uniform() < fill;
        any = any || r.inside[i];
    }
    if (!any) r.inside[rng.index(n)] = true;
    return r;
}

inline conrad::volume::ScalarVolume volume_of(const oracle::Roi& r) {
    return conrad::volume::ScalarVolume(r.dims, r.spacing, r.values);
}

inline conrad::volume::SegMask mask_of(const oracle::Roi& r) {
    conrad::volume::SegMask m(r.dims);
    for (std::size_t i = 0; i < r.inside.size(); ++i) m.set(i, r.inside[i]);
    return m;
}

inline conrad::volume::ScalarVolume random_volume(conrad::Rng& rng, conrad::volume::Dims dims,
                                                  conrad::volume::Spacing spacing, double lo = -1000.0,
                                                  double hi = 400.0) {
    std::vector<double> v(dims.count());
    for (auto& x : v) x = rng.uniform(lo, hi);
    return conrad::volume::ScalarVolume(dims, spacing, std::move(v));
}

inline conrad::volume::SegMask random_mask(conrad::Rng& rng, conrad::volume::Dims dims, double p) {
    conrad::volume::SegMask m(dims);
    for (std::size_t i = 0; i < dims.count(); ++i) m.set(i, rng.uniform() < p);
    return m;
}

/// Mask of the solid ellipsoid with semi-axes (a, b, c) mm sampled at voxel centres.
inline conrad::volume::SegMask ellipsoid(double a, double b, double c, double spacing) {
    const int nx = static_cast<int>(std::ceil(2 * a / spacing)) + 5;
    const int ny = static_cast<int>(std::ceil(2 * b / spacing)) + 5;
    const int nz = static_cast<int>(std::ceil(2 * c / spacing)) + 5;
    conrad::volume::SegMask m({nx, ny, nz});
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                const double px = (x - (nx - 1) / 2.0) * spacing / a;
                const double py = (y - (ny - 1) / 2.0) * spacing / b;
                const double pz = (z - (nz - 1) / 2.0) * spacing / c;
                m.set(x, y, z, px * px + py * py + pz * pz <= 1.0);
            }
    return m;
}

/// Solid cube of `side` voxels with a one-voxel empty border.
inline conrad::volume::SegMask cube(int side) {
    conrad::volume::SegMask m({side + 2, side + 2, side + 2});
    for (int z = 1; z <= side; ++z)
        for (int y = 1; y <= side; ++y)
            for (int x = 1; x <= side; ++x) m.set(x, y, z, true);
    return m;
}

struct Labeled {
    conrad::learners::DesignMatrix x;
    std::vector<int> y;
};

inline std::vector<std::string> column_names(std::size_t d, const std::string& prefix = "f") {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < d; ++j) names.push_back(prefix + std::to_string(j));
    return names;
}

/// Gaussian features with labels drawn from a logistic model over the first
/// `informative` columns; both classes are always present.
inline Labeled logistic_data(conrad::Rng& rng, std::size_t n, std::size_t d, std::size_t informative,
                             double signal = 1.0) {
    std::vector<double> w(d, 0.0);
    for (std::size_t j = 0; j < informative && j < d; ++j) w[j] = signal * (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);
    std::vector<double> v(n * d);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double eta = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            v[i * d + j] = rng.normal();
            eta += w[j] * v[i * d + j];
        }
        y[i] = rng.uniform() < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
    }
    y[0] = 0;
    y[1] = 1;
    return {conrad::learners::DesignMatrix(column_names(d), n, std::move(v)), std::move(y)};
}

/// Two Gaussian blobs in 2D centred at (+-gap, +-gap).
inline Labeled blobs(conrad::Rng& rng, std::size_t n, double gap, double spread) {
    std::vector<double> v;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        const double c = label == 1 ? gap : -gap;
        v.push_back(c + spread * rng.normal());
        v.push_back(c + spread * rng.normal());
        y.push_back(label);
    }
    return {conrad::learners::DesignMatrix(column_names(2), n, std::move(v)), std::move(y)};
}

/// Two interleaved half circles with Gaussian noise.
inline Labeled two_moons(conrad::Rng& rng, std::size_t n, double noise) {
    std::vector<double> v;
    std::vector<int> y;
    const double pi = 3.14159265358979323846;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        const double t = rng.uniform() * pi;
        const double px = label == 0 ? std::cos(t) : 1.0 - std::cos(t);
        const double py = label == 0 ? std::sin(t) : 0.5 - std::sin(t);
        v.push_back(px + noise * rng.normal());
        v.push_back(py + noise * rng.normal());
        y.push_back(label);
    }
    return {conrad::learners::DesignMatrix(column_names(2), n, std::move(v)), std::move(y)};
}

inline Labeled xor_corners() {
    return {conrad::learners::DesignMatrix(column_names(2), 4, {1, 1, -1, -1, 1, -1, -1, 1}), {1, 1, 0, 0}};
}

struct Scored {
    std::vector<double> scores;
    std::vector<int> labels;
};

/// Scores rounded to a coarse grid so ties are common; both classes present.
inline Scored scores(conrad::Rng& rng, std::size_t n) {
    Scored s;
    const double shift = rng.uniform(0.0, 2.0);
    const double grid = std::array<double, 3>{0.1, 0.25, 1.0}[rng.index(3)];
    for (std::size_t i = 0; i < n; ++i) {
        const int label = i < 2 ? static_cast<int>(i) : (rng.uniform() < 0.5 ? 1 : 0);
        const double raw = rng.normal() + (label == 1 ? shift : 0.0);
        s.scores.push_back(std::round(raw / grid) * grid);
        s.labels.push_back(label);
    }
    return s;
}

inline std::vector<std::string> nodule_ids(std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) {
        std::string s = std::to_string(i);
        ids.push_back("N" + std::string(4 - std::min<std::size_t>(4, s.size()), '0') + s);
    }
    return ids;
}

/// Source-tagged table of standard normal values.
inline conrad::evaluation::FeatureTable table(conrad::Rng& rng, const std::vector<std::string>& ids,
                                              std::vector<std::string> columns, conrad::evaluation::Source source) {
    std::vector<double> v(ids.size() * columns.size());
    for (auto& x : v) x = rng.normal();
    std::vector<conrad::evaluation::Source> tags(columns.size(), source);
    return {ids, std::move(columns), std::move(tags), std::move(v)};
}

/// Table view of a labeled design matrix, every column tagged radiomic.
inline conrad::evaluation::FeatureTable table_of(const Labeled& d) {
    std::vector<double> v(d.x.values().begin(), d.x.values().end());
    return {nodule_ids(d.x.rows()), d.x.names(),
            std::vector<conrad::evaluation::Source>(d.x.cols(), conrad::evaluation::Source::Radiomic), std::move(v)};
}

}  // namespace gen
