#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "conrad/error.hpp"
#include "conrad/radiomics.hpp"

namespace conrad::radiomics {

namespace {
constexpr double kMaxBins = 4096;
}

std::vector<int> DiscretizedROI::present_levels() const {
    std::vector<char> seen(static_cast<std::size_t>(n_bins) + 1, 0);
    for (int b : bins) seen[static_cast<std::size_t>(b)] = 1;
    std::vector<int> out;
    for (int g = 1; g <= n_bins; ++g)
        if (seen[static_cast<std::size_t>(g)]) out.push_back(g);
    return out;
}

double CountMatrix::sum() const noexcept {
    double s = 0.0;
    for (double x : data) s += x;
    return s;
}

DiscretizedROI discretize(const volume::ScalarVolume& v, const volume::SegMask& m, double bin_width) {
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
        throw Error(ErrorKind::Config, "bin width must be positive");
    }
    if (v.dims() != m.dims()) throw Error(ErrorKind::InvalidInput, "mask dims do not match the volume");

    const auto vox = v.voxels();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < vox.size(); ++i) {
        if (m[i]) {
            lo = std::min(lo, vox[i]);
            hi = std::max(hi, vox[i]);
        }
    }
    if (!std::isfinite(lo)) throw Error(ErrorKind::InvalidInput, "cannot discretize an empty mask");

    const double span = std::floor((hi - lo) / bin_width) + 1.0;
    if (span > kMaxBins) {
        throw Error(ErrorKind::Config, "bin width " + std::to_string(bin_width) + " yields " + std::to_string(span) +
                                           " gray levels; the limit is " + std::to_string(static_cast<int>(kMaxBins)));
    }

    DiscretizedROI d;
    d.dims = v.dims();
    d.bin_width = bin_width;
    d.roi_min = lo;
    d.n_bins = static_cast<int>(std::floor((hi - lo) / bin_width)) + 1;
    d.bins.assign(vox.size(), 0);
    for (std::size_t i = 0; i < vox.size(); ++i) {
        if (m[i]) {
            const int b = static_cast<int>(std::floor((vox[i] - lo) / bin_width)) + 1;
            d.bins[i] = std::clamp(b, 1, d.n_bins);
        }
    }
    return d;
}

}  // namespace conrad::radiomics
