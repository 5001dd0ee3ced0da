#include <algorithm>
#include <cstdlib>
#include <map>
#include <utility>

#include "conrad/error.hpp"
#include "detail.hpp"

namespace conrad::radiomics {

const std::array<Offset, 13>& unique_directions() {
    static const std::array<Offset, 13> dirs = {{
        {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
        {1, 1, 0}, {1, -1, 0}, {1, 0, 1}, {1, 0, -1}, {0, 1, 1}, {0, 1, -1},
        {1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {1, -1, -1},
    }};
    return dirs;
}

namespace detail {

std::vector<Offset> neighbourhood(int connectivity) {
    if (connectivity != 6 && connectivity != 18 && connectivity != 26) {
        throw Error(ErrorKind::Config, "connectivity must be 6, 18 or 26, got " + std::to_string(connectivity));
    }
    const int max_l1 = connectivity == 6 ? 1 : connectivity == 18 ? 2 : 3;
    std::vector<Offset> out;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int l1 = std::abs(dx) + std::abs(dy) + std::abs(dz);
                if (l1 != 0 && l1 <= max_l1) out.push_back({dx, dy, dz});
            }
    return out;
}

std::vector<LevelSizeCount> nonzero_cells(const CountMatrix& m) {
    std::vector<LevelSizeCount> out;
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c)
            if (m(r, c) != 0.0) out.push_back({static_cast<int>(r) + 1, static_cast<int>(c) + 1, m(r, c)});
    return out;
}

EmphasisStats emphasis_stats(const std::vector<LevelSizeCount>& cells, double n_voxels) {
    EmphasisStats s;
    double total = 0.0;
    std::map<int, double> per_level, per_size;
    for (const auto& c : cells) {
        total += c.count;
        per_level[c.level] += c.count;
        per_size[c.size] += c.count;
    }
    if (total <= 0.0) return s;

    double mu_level = 0.0, mu_size = 0.0;
    for (const auto& c : cells) {
        const double i = c.level, j = c.size, p = c.count / total;
        const double i2 = i * i, j2 = j * j;
        s.small_emphasis += c.count / j2;
        s.large_emphasis += c.count * j2;
        s.low_gray += c.count / i2;
        s.high_gray += c.count * i2;
        s.small_low_gray += c.count / (i2 * j2);
        s.small_high_gray += c.count * i2 / j2;
        s.large_low_gray += c.count * j2 / i2;
        s.large_high_gray += c.count * i2 * j2;
        s.entropy += neg_plog2p(p);
        mu_level += p * i;
        mu_size += p * j;
    }
    for (const auto& c : cells) {
        const double p = c.count / total;
        s.gray_variance += p * (c.level - mu_level) * (c.level - mu_level);
        s.size_variance += p * (c.size - mu_size) * (c.size - mu_size);
    }
    for (const auto& [level, n] : per_level) s.gray_nonuniformity += n * n;
    for (const auto& [size, n] : per_size) s.size_nonuniformity += n * n;

    s.small_emphasis /= total;
    s.large_emphasis /= total;
    s.low_gray /= total;
    s.high_gray /= total;
    s.small_low_gray /= total;
    s.small_high_gray /= total;
    s.large_low_gray /= total;
    s.large_high_gray /= total;
    s.gray_nonuniformity_norm = s.gray_nonuniformity / (total * total);
    s.gray_nonuniformity /= total;
    s.size_nonuniformity_norm = s.size_nonuniformity / (total * total);
    s.size_nonuniformity /= total;
    s.percentage = total / n_voxels;
    return s;
}

FeatureList average_lists(const std::vector<FeatureList>& per_direction) {
    if (per_direction.empty()) return {};
    FeatureList out = per_direction.front();
    for (std::size_t k = 1; k < per_direction.size(); ++k)
        for (std::size_t f = 0; f < out.size(); ++f) out[f].value += per_direction[k][f].value;
    for (auto& f : out) f.value /= static_cast<double>(per_direction.size());
    return out;
}

}  // namespace detail

namespace {

void require_levels(const DiscretizedROI& d) {
    if (d.n_bins < 1 || d.bins.size() != d.dims.count()) {
        throw Error(ErrorKind::InvalidInput, "discretized ROI is malformed");
    }
}

}  // namespace

std::vector<CountMatrix> glcm_matrices(const DiscretizedROI& d, int distance) {
    require_levels(d);
    if (distance < 1) throw Error(ErrorKind::Config, "GLCM distance must be >= 1");
    const auto ng = static_cast<std::size_t>(d.n_bins);
    const auto& dims = d.dims;
    std::vector<CountMatrix> out;
    for (const auto& dir : unique_directions()) {
        CountMatrix p(ng, ng);
        const int ox = dir[0] * distance, oy = dir[1] * distance, oz = dir[2] * distance;
        for (int z = 0; z < dims.nz; ++z)
            for (int y = 0; y < dims.ny; ++y)
                for (int x = 0; x < dims.nx; ++x) {
                    const int a = d.at(x, y, z);
                    if (a == 0 || !dims.contains(x + ox, y + oy, z + oz)) continue;
                    const int b = d.at(x + ox, y + oy, z + oz);
                    if (b == 0) continue;
                    p(a - 1, b - 1) += 1.0;
                    p(b - 1, a - 1) += 1.0;
                }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<CountMatrix> glrlm_matrices(const DiscretizedROI& d) {
    require_levels(d);
    const auto& dims = d.dims;
    const int max_run = std::max({dims.nx, dims.ny, dims.nz});
    std::vector<CountMatrix> out;
    for (const auto& dir : unique_directions()) {
        CountMatrix p(static_cast<std::size_t>(d.n_bins), static_cast<std::size_t>(max_run));
        for (int z = 0; z < dims.nz; ++z)
            for (int y = 0; y < dims.ny; ++y)
                for (int x = 0; x < dims.nx; ++x) {
                    const int g = d.at(x, y, z);
                    if (g == 0) continue;
                    const int px = x - dir[0], py = y - dir[1], pz = z - dir[2];
                    if (dims.contains(px, py, pz) && d.at(px, py, pz) == g) continue;  // not a run start
                    int len = 1;
                    int cx = x + dir[0], cy = y + dir[1], cz = z + dir[2];
                    while (dims.contains(cx, cy, cz) && d.at(cx, cy, cz) == g) {
                        ++len;
                        cx += dir[0];
                        cy += dir[1];
                        cz += dir[2];
                    }
                    p(static_cast<std::size_t>(g - 1), static_cast<std::size_t>(len - 1)) += 1.0;
                }
        out.push_back(std::move(p));
    }
    return out;
}

namespace detail {

// Zones as sparse (level, size) counts; dense storage would be
// n_bins x ROI-size for large homogeneous regions.
std::vector<LevelSizeCount> glszm_cells(const DiscretizedROI& d, int connectivity) {
    require_levels(d);
    const auto offsets = neighbourhood(connectivity);
    const auto& dims = d.dims;
    std::vector<char> visited(d.bins.size(), 0);
    std::map<std::pair<int, int>, double> zones;
    std::vector<std::array<int, 3>> stack;
    for (int z = 0; z < dims.nz; ++z)
        for (int y = 0; y < dims.ny; ++y)
            for (int x = 0; x < dims.nx; ++x) {
                const std::size_t i = dims.index(x, y, z);
                const int g = d.bins[i];
                if (g == 0 || visited[i]) continue;
                int size = 0;
                visited[i] = 1;
                stack.push_back({x, y, z});
                while (!stack.empty()) {
                    const auto c = stack.back();
                    stack.pop_back();
                    ++size;
                    for (const auto& o : offsets) {
                        const int nx = c[0] + o[0], ny = c[1] + o[1], nz = c[2] + o[2];
                        if (!dims.contains(nx, ny, nz)) continue;
                        const std::size_t ni = dims.index(nx, ny, nz);
                        if (!visited[ni] && d.bins[ni] == g) {
                            visited[ni] = 1;
                            stack.push_back({nx, ny, nz});
                        }
                    }
                }
                zones[{g, size}] += 1.0;
            }
    std::vector<LevelSizeCount> out;
    for (const auto& [key, n] : zones) out.push_back({key.first, key.second, n});
    return out;
}

}  // namespace detail

CountMatrix glszm_matrix(const DiscretizedROI& d, int connectivity) {
    const auto cells = detail::glszm_cells(d, connectivity);
    int max_size = 1;
    for (const auto& c : cells) max_size = std::max(max_size, c.size);
    CountMatrix p(static_cast<std::size_t>(d.n_bins), static_cast<std::size_t>(max_size));
    for (const auto& c : cells) p(c.level - 1, c.size - 1) = c.count;
    return p;
}

NgtdmTable ngtdm_table(const DiscretizedROI& d) {
    require_levels(d);
    const auto offsets = detail::neighbourhood(26);
    const auto& dims = d.dims;
    NgtdmTable t;
    t.count.assign(static_cast<std::size_t>(d.n_bins), 0.0);
    t.s.assign(static_cast<std::size_t>(d.n_bins), 0.0);
    for (int z = 0; z < dims.nz; ++z)
        for (int y = 0; y < dims.ny; ++y)
            for (int x = 0; x < dims.nx; ++x) {
                const int g = d.at(x, y, z);
                if (g == 0) continue;
                double sum = 0.0;
                int n = 0;
                for (const auto& o : offsets) {
                    const int nx = x + o[0], ny = y + o[1], nz = z + o[2];
                    if (!dims.contains(nx, ny, nz)) continue;
                    const int h = d.at(nx, ny, nz);
                    if (h == 0) continue;
                    sum += h;
                    ++n;
                }
                if (n == 0) continue;  // isolated voxels have no neighbourhood
                t.count[static_cast<std::size_t>(g - 1)] += 1.0;
                t.s[static_cast<std::size_t>(g - 1)] += std::abs(g - sum / n);
            }
    return t;
}

CountMatrix gldm_matrix(const DiscretizedROI& d, int dependence_tolerance) {
    require_levels(d);
    if (dependence_tolerance < 0) throw Error(ErrorKind::Config, "dependence tolerance must be >= 0");
    const auto offsets = detail::neighbourhood(26);
    const auto& dims = d.dims;
    CountMatrix p(static_cast<std::size_t>(d.n_bins), offsets.size() + 1);
    for (int z = 0; z < dims.nz; ++z)
        for (int y = 0; y < dims.ny; ++y)
            for (int x = 0; x < dims.nx; ++x) {
                const int g = d.at(x, y, z);
                if (g == 0) continue;
                int dep = 1;
                for (const auto& o : offsets) {
                    const int nx = x + o[0], ny = y + o[1], nz = z + o[2];
                    if (!dims.contains(nx, ny, nz)) continue;
                    const int h = d.at(nx, ny, nz);
                    if (h != 0 && std::abs(h - g) <= dependence_tolerance) ++dep;
                }
                p(static_cast<std::size_t>(g - 1), static_cast<std::size_t>(dep - 1)) += 1.0;
            }
    return p;
}

}  // namespace conrad::radiomics
