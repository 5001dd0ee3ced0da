#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "conrad/volume.hpp"

namespace conrad::ingest {

inline constexpr std::size_t kBiomarkerCount = 8;
inline constexpr std::array<std::string_view, kBiomarkerCount> kBiomarkerNames = {
    "subtlety", "calcification", "sphericity", "margin", "lobulation", "spiculation", "texture", "diameter",
};
inline constexpr std::size_t kMaxAnnotators = 4;

using Biomarkers = std::array<double, kBiomarkerCount>;

struct AnnotatorEntry {
    std::string annotator_id;
    int malignancy_rating = 0;
    Biomarkers biomarkers{};
    volume::SegMask mask;
};

enum class Malignancy { Benign = 0, Malignant = 1, Discard = 2 };

std::string_view to_string(Malignancy m) noexcept;

struct MalignancyVote {
    Malignancy outcome;
    double median;
};

/// A voxel is kept when the fraction of annotators marking it is >= level.
volume::SegMask consensus_mask(std::span<const AnnotatorEntry> entries, double level = 0.5);

/// Median of 1-4 ratings (mean of the central pair for even counts);
/// below 3 benign, above 3 malignant, exactly 3 discarded.
MalignancyVote aggregate_malignancy(std::span<const int> ratings);

Biomarkers average_biomarkers(std::span<const AnnotatorEntry> entries);

struct NoduleRecord {
    std::string nodule_id;
    volume::ViewTriplet views;
    volume::ScalarVolume volume;  // resampled and clamped
    volume::SegMask consensus_mask;  // on the resampled grid
    int label = 0;  // 0 benign, 1 malignant
    Biomarkers annotated_biomarkers{};
    double malignancy_median = 0.0;
};

struct RecordFailure {
    std::string nodule_id;
    std::string message;
};

struct CohortSummary {
    std::size_t n_total = 0;
    std::size_t n_benign = 0;
    std::size_t n_malignant = 0;
    std::size_t n_discarded = 0;
    std::size_t n_inadmissible = 0;
    std::vector<RecordFailure> failures;
};

struct PreprocessSettings {
    double target_spacing_mm = 1.0;
    double hu_floor = volume::kDefaultHuFloor;
    double hu_ceiling = volume::kDefaultHuCeiling;
    double consensus_level = 0.5;
};

struct Cohort {
    std::vector<NoduleRecord> records;  // sorted by nodule_id
    CohortSummary summary;
};

// Annotation file (`*.annotation.json`) per nodule:
// {
//   "nodule_id": "...",
//   "volume": "<relative path to .cvol.json>",
//   "annotations": [
//     {"annotator_id": "...", "malignancy": 1-5,
//      "biomarkers": {"subtlety": .., ..., "diameter": ..},
//      "mask": "<relative path to .cmask.json>"}, ...]
// }
inline constexpr std::string_view kAnnotationSuffix = ".annotation.json";

struct AnnotationFile {
    std::string nodule_id;
    std::filesystem::path volume_header;
    std::vector<AnnotatorEntry> entries;
    volume::Spacing mask_spacing;
};

AnnotationFile read_annotation(const std::filesystem::path& path);

/// Applies consensus, malignancy aggregation, biomarker averaging and the
/// resample -> clamp -> crop chain. Returns std::nullopt for discarded
/// (median 3) nodules; throws on malformed input.
std::optional<NoduleRecord> process_nodule(const AnnotationFile& annotation, const PreprocessSettings& settings);

/// Scans `dir` for annotation files and processes each independently.
/// Per-record failures are collected in the summary; processing continues.
Cohort build_cohort(const std::filesystem::path& dir, const PreprocessSettings& settings = {}, int jobs = 1);

}  // namespace conrad::ingest
