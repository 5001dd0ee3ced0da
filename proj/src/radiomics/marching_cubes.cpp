#include <array>
#include <cmath>

#include "conrad/radiomics.hpp"

namespace conrad::radiomics {

namespace {

#include "mc_tables.inc"

constexpr std::array<std::array<int, 3>, 8> kCorner = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

constexpr std::array<std::array<int, 2>, 12> kEdge = {{
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

struct P3 {
    double x, y, z;
};

P3 sub(P3 a, P3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
P3 cross(P3 a, P3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
double dot(P3 a, P3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

}  // namespace

MeshMeasures mask_mesh_measures(const volume::SegMask& m, const volume::Spacing& spacing) {
    const auto& d = m.dims();
    auto inside = [&](int x, int y, int z) { return d.contains(x, y, z) && m.at(x, y, z); };

    MeshMeasures out;
    double signed_volume = 0.0;
    // Cells span corner (i, j, k) .. (i+1, j+1, k+1); starting at -1 pads the
    // mask with one layer of background so the surface is closed.
    for (int k = -1; k < d.nz; ++k) {
        for (int j = -1; j < d.ny; ++j) {
            for (int i = -1; i < d.nx; ++i) {
                int cube = 0;
                for (int c = 0; c < 8; ++c) {
                    if (!inside(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2])) cube |= 1 << c;
                }
                if (cube == 0 || cube == 255) continue;

                std::array<P3, 12> vert{};
                for (int e = 0; e < 12; ++e) {
                    const auto& a = kCorner[kEdge[e][0]];
                    const auto& b = kCorner[kEdge[e][1]];
                    vert[e] = {(i + 0.5 * (a[0] + b[0])) * spacing.x, (j + 0.5 * (a[1] + b[1])) * spacing.y,
                               (k + 0.5 * (a[2] + b[2])) * spacing.z};
                }
                for (int t = 0; kTriTable[cube][t] != -1; t += 3) {
                    const P3 a = vert[kTriTable[cube][t]];
                    const P3 b = vert[kTriTable[cube][t + 1]];
                    const P3 c = vert[kTriTable[cube][t + 2]];
                    const P3 n = cross(sub(b, a), sub(c, a));
                    out.surface_area += 0.5 * std::sqrt(dot(n, n));
                    signed_volume += dot(a, cross(b, c)) / 6.0;
                    ++out.triangles;
                }
            }
        }
    }
    out.volume = std::abs(signed_volume);
    return out;
}

}  // namespace conrad::radiomics
