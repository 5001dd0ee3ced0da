#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "conrad/error.hpp"
#include "conrad/evaluation.hpp"

namespace conrad::evaluation {

const Ablation& parse_ablation(std::string_view name) {
    std::string_view canonical = name;
    if (name == "bio") canonical = "biomarkers";
    else if (name == "rad") canonical = "radiomics";
    else if (name == "conrad") canonical = "bio+rad";
    for (const auto& a : kAblations)
        if (a.name == canonical) return a;
    std::string valid;
    for (const auto& a : kAblations) valid += (valid.empty() ? "" : ", ") + std::string(a.name);
    throw Error(ErrorKind::Config, "unknown feature set '" + std::string(name) + "'; valid names: " + valid);
}

FeatureTable fuse(std::span<const FeatureTable> sources, const Ablation& ablation) {
    auto wanted = [&](Source s) {
        return (s == Source::Cnn && ablation.cnn) || (s == Source::Biomarker && ablation.biomarkers) ||
               (s == Source::Radiomic && ablation.radiomics);
    };
    const bool drop_diameter = ablation.biomarkers && ablation.radiomics;

    struct Pick {
        std::size_t table;
        std::size_t col;
    };
    std::vector<Pick> picks;
    std::vector<std::string> columns;
    std::vector<Source> tags;
    std::vector<std::size_t> contributing;
    std::unordered_set<std::string> seen;
    bool have_cnn = false, have_bio = false, have_rad = false;
    for (std::size_t t = 0; t < sources.size(); ++t) {
        bool used = false;
        for (std::size_t j = 0; j < sources[t].cols(); ++j) {
            const Source s = sources[t].sources()[j];
            if (!wanted(s)) continue;
            const std::string& name = sources[t].columns()[j];
            if (drop_diameter && s == Source::Biomarker && name == kDiameterColumn) {
                have_bio = true;
                continue;
            }
            if (!seen.insert(name).second) throw Error(ErrorKind::Contract, "column '" + name + "' appears in more than one source");
            picks.push_back({t, j});
            columns.push_back(name);
            tags.push_back(s);
            (s == Source::Cnn ? have_cnn : s == Source::Biomarker ? have_bio : have_rad) = true;
            used = true;
        }
        if (used) contributing.push_back(t);
    }
    if (ablation.cnn && !have_cnn) throw Error(ErrorKind::Config, "feature set '" + std::string(ablation.name) + "' needs cnn features");
    if (ablation.biomarkers && !have_bio) {
        throw Error(ErrorKind::Config, "feature set '" + std::string(ablation.name) + "' needs biomarker features");
    }
    if (ablation.radiomics && !have_rad) {
        throw Error(ErrorKind::Config, "feature set '" + std::string(ablation.name) + "' needs radiomic features");
    }

    // Inner join: ids present in every contributing table, sorted.
    std::vector<std::unordered_map<std::string, std::size_t>> index(sources.size());
    for (std::size_t t : contributing)
        for (std::size_t i = 0; i < sources[t].rows(); ++i) index[t].emplace(sources[t].ids()[i], i);
    std::vector<std::string> ids;
    for (const auto& id : sources[contributing.front()].ids()) {
        bool everywhere = true;
        for (std::size_t t : contributing) everywhere = everywhere && index[t].count(id) > 0;
        if (everywhere) ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    if (ids.empty()) throw Error(ErrorKind::InvalidInput, "the feature sources share no nodule id");

    std::vector<double> values;
    values.reserve(ids.size() * picks.size());
    for (const auto& id : ids)
        for (const auto& p : picks) values.push_back(sources[p.table].at(index[p.table].at(id), p.col));
    return FeatureTable(std::move(ids), std::move(columns), std::move(tags), std::move(values));
}

}  // namespace conrad::evaluation
