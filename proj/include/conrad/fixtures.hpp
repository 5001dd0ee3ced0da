#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "conrad/ingest.hpp"
#include "conrad/volume.hpp"

namespace conrad::fixtures {

struct PhantomOptions {
    double fov_mm = 40.0;
    volume::Spacing spacing{0.8, 0.8, 1.6};
};

/// One synthetic nodule: benign ones are smooth homogeneous ellipsoids,
/// malignant ones lobulated, spiculated and heterogeneous.
struct Phantom {
    std::string nodule_id;
    int label = 0;
    volume::ScalarVolume volume;
    std::vector<ingest::AnnotatorEntry> annotators;
    double diameter_mm = 0.0;
};

Phantom make_phantom(std::size_t index, int label, std::uint64_t seed, const PhantomOptions& options = {});

/// Digitized solid ball of radius `radius_mm` centred in a cube grid.
volume::SegMask ball_mask(double radius_mm, double spacing_mm, int margin_voxels = 2);

struct FixtureOptions {
    std::size_t count = 200;
    std::uint64_t seed = 0;
    std::size_t cnn_width = 2048;
    int k = 5;
    PhantomOptions phantom;
};

struct FixtureSummary {
    std::size_t n_benign = 0;
    std::size_t n_malignant = 0;
    std::filesystem::path cohort_dir;
    std::filesystem::path predicted_biomarkers;
    std::filesystem::path cnn_features;
    std::filesystem::path truth;
};

/// Writes `cohort/` (annotation JSON, volumes, annotator masks),
/// `predicted_biomarkers.csv` (with a fold column), `cnn_features.csv`
/// and `truth.csv` under `out_dir`.
FixtureSummary write_fixtures(const std::filesystem::path& out_dir, const FixtureOptions& options, int jobs = 1);

}  // namespace conrad::fixtures
