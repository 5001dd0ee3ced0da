#pragma once

#include <cstring>
#include <string>
#include <vector>

#include "conrad/evaluation.hpp"

namespace testing_support {

inline bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

/// Overwrites every feature of the rows in `fold` with 1e9.
inline conrad::evaluation::FeatureTable poison_fold(const conrad::evaluation::FeatureTable& t,
                                                    const std::vector<int>& row_fold, int fold) {
    std::vector<double> v(t.values().begin(), t.values().end());
    for (std::size_t i = 0; i < t.rows(); ++i)
        if (row_fold[i] == fold)
            for (std::size_t j = 0; j < t.cols(); ++j) v[i * t.cols() + j] = 1e9;
    return {t.ids(), t.columns(), t.sources(), std::move(v)};
}

/// Folds whose train-side state (normalization and fitted model) changed when
/// their own test rows were poisoned. Empty means no leakage.
inline std::vector<int> leaking_folds(const conrad::evaluation::FeatureTable& table, std::span<const int> labels,
                                      const conrad::evaluation::ModelSpec& spec,
                                      const conrad::evaluation::FoldPlan& plan) {
    using namespace conrad::evaluation;
    const auto folds = row_folds(table, plan);
    FoldArtifacts clean;
    cross_validate(table, labels, spec, plan, 1, &clean);
    std::vector<int> leaking;
    for (int f = 0; f < plan.k; ++f) {
        FoldArtifacts dirty;
        cross_validate(poison_fold(table, folds, f), labels, spec, plan, 1, &dirty);
        const auto& a = clean.models[static_cast<std::size_t>(f)];
        const auto& b = dirty.models[static_cast<std::size_t>(f)];
        const bool same = same_bits(a.standardizer.mean, b.standardizer.mean) &&
                          same_bits(a.standardizer.stddev, b.standardizer.stddev) &&
                          conrad::learners::model_to_json(a) == conrad::learners::model_to_json(b);
        if (!same) leaking.push_back(f);
    }
    return leaking;
}

}  // namespace testing_support
