#include <cmath>

#include "conrad/error.hpp"
#include "conrad/radiomics.hpp"

namespace conrad::radiomics {

std::vector<double> extract_all(const volume::ScalarVolume& v, const volume::SegMask& m, const Settings& settings) {
    if (v.dims() != m.dims()) throw Error(ErrorKind::InvalidInput, "mask dims do not match the volume");
    if (m.empty_roi()) throw Error(ErrorKind::InvalidInput, "feature extraction needs a non-empty mask");

    FeatureList all;
    auto append = [&](const char* family, auto&& compute) {
        try {
            auto part = compute();
            all.insert(all.end(), part.begin(), part.end());
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(family) + " features: " + e.what());
        }
    };

    const DiscretizedROI d = discretize(v, m, settings.bin_width);
    append("firstorder", [&] { return first_order_features(v, m, settings.bin_width); });
    append("shape", [&] { return shape_features(m, v.spacing()); });
    append("glcm", [&] { return glcm_features(d, settings.glcm_distance); });
    append("glrlm", [&] { return glrlm_features(d); });
    append("glszm", [&] { return glszm_features(d, settings.zone_connectivity); });
    append("ngtdm", [&] { return ngtdm_features(d); });
    append("gldm", [&] { return gldm_features(d); });

    const auto& names = feature_names();
    if (all.size() != names.size()) {
        throw Error(ErrorKind::Contract, "extracted " + std::to_string(all.size()) + " features, registry lists " +
                                             std::to_string(names.size()));
    }
    std::vector<double> values(all.size());
    for (std::size_t k = 0; k < all.size(); ++k) {
        if (all[k].name != names[k]) {
            throw Error(ErrorKind::Contract, "feature " + std::to_string(k) + " is '" + all[k].name +
                                                 "', registry expects '" + names[k] + "'");
        }
        if (!std::isfinite(all[k].value)) {
            throw Error(ErrorKind::InvalidInput, "feature '" + all[k].name + "' is not finite");
        }
        values[k] = all[k].value;
    }
    return values;
}

}  // namespace conrad::radiomics
