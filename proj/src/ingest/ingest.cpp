#include "conrad/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

#include "conrad/atomic_file.hpp"
#include "conrad/error.hpp"
#include "conrad/parallel.hpp"
#include "conrad/volume_io.hpp"

namespace conrad::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Malignancy m) noexcept {
    switch (m) {
    case Malignancy::Benign: return "benign";
    case Malignancy::Malignant: return "malignant";
    case Malignancy::Discard: return "discard";
    }
    return "unknown";
}

volume::SegMask consensus_mask(std::span<const AnnotatorEntry> entries, double level) {
    if (entries.empty()) throw Error(ErrorKind::InvalidInput, "consensus requires at least one annotator");
    if (entries.size() > kMaxAnnotators) {
        throw Error(ErrorKind::InvalidInput, "consensus accepts at most 4 annotators, got " + std::to_string(entries.size()));
    }
    const auto dims = entries.front().mask.dims();
    for (const auto& e : entries) {
        if (e.mask.dims() != dims) {
            throw Error(ErrorKind::InvalidInput, "annotator '" + e.annotator_id + "' mask dims differ from the first annotator");
        }
    }
    const double n = static_cast<double>(entries.size());
    volume::SegMask out(dims);
    for (std::size_t i = 0; i < dims.count(); ++i) {
        int votes = 0;
        for (const auto& e : entries) votes += e.mask[i] ? 1 : 0;
        out.set(i, static_cast<double>(votes) / n >= level);
    }
    return out;
}

MalignancyVote aggregate_malignancy(std::span<const int> ratings) {
    if (ratings.empty() || ratings.size() > kMaxAnnotators) {
        throw Error(ErrorKind::InvalidInput, "malignancy aggregation expects 1-4 ratings, got " + std::to_string(ratings.size()));
    }
    std::vector<int> sorted(ratings.begin(), ratings.end());
    for (int r : sorted) {
        if (r < 1 || r > 5) throw Error(ErrorKind::InvalidInput, "malignancy rating " + std::to_string(r) + " outside 1-5");
    }
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    Malignancy outcome = Malignancy::Discard;
    if (median < 3.0) outcome = Malignancy::Benign;
    if (median > 3.0) outcome = Malignancy::Malignant;
    return {outcome, median};
}

Biomarkers average_biomarkers(std::span<const AnnotatorEntry> entries) {
    if (entries.empty()) throw Error(ErrorKind::InvalidInput, "cannot average biomarkers over zero annotators");
    Biomarkers mean{};
    for (const auto& e : entries) {
        for (std::size_t k = 0; k < kBiomarkerCount; ++k) {
            if (!std::isfinite(e.biomarkers[k])) {
                throw Error(ErrorKind::InvalidInput, "annotator '" + e.annotator_id + "' has a missing or non-finite " +
                                                         std::string(kBiomarkerNames[k]));
            }
            mean[k] += e.biomarkers[k];
        }
    }
    for (auto& m : mean) m /= static_cast<double>(entries.size());
    return mean;
}

AnnotationFile read_annotation(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidInput, path.string() + ": " + e.what());
    }
    AnnotationFile out;
    try {
        out.nodule_id = j.at("nodule_id").get<std::string>();
        const fs::path base = path.parent_path();
        out.volume_header = base / j.at("volume").get<std::string>();
        const auto& anns = j.at("annotations");
        if (!anns.is_array()) throw Error(ErrorKind::InvalidInput, path.string() + ": 'annotations' must be an array");
        bool first = true;
        for (const auto& a : anns) {
            AnnotatorEntry e;
            e.annotator_id = a.at("annotator_id").get<std::string>();
            e.malignancy_rating = a.at("malignancy").get<int>();
            const auto& bm = a.at("biomarkers");
            for (std::size_t k = 0; k < kBiomarkerCount; ++k) {
                const std::string key(kBiomarkerNames[k]);
                if (!bm.contains(key) || !bm.at(key).is_number()) {
                    throw Error(ErrorKind::InvalidInput, path.string() + ": annotator '" + e.annotator_id +
                                                             "' is missing biomarker '" + key + "'");
                }
                e.biomarkers[k] = bm.at(key).get<double>();
            }
            auto mf = volume::read_mask(base / a.at("mask").get<std::string>());
            e.mask = std::move(mf.mask);
            if (first) out.mask_spacing = mf.spacing;
            first = false;
            out.entries.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidInput, path.string() + ": " + e.what());
    }
    return out;
}

std::optional<NoduleRecord> process_nodule(const AnnotationFile& annotation, const PreprocessSettings& settings) {
    const auto& entries = annotation.entries;
    std::vector<int> ratings;
    for (const auto& e : entries) ratings.push_back(e.malignancy_rating);
    const auto vote = aggregate_malignancy(ratings);
    if (vote.outcome == Malignancy::Discard) return std::nullopt;

    const auto raw = volume::read_volume(annotation.volume_header);
    auto consensus = consensus_mask(entries, settings.consensus_level);
    if (consensus.dims() != raw.dims()) {
        throw Error(ErrorKind::InvalidInput, "mask dims do not match the volume");
    }
    if (consensus.empty_roi()) throw Error(ErrorKind::InvalidInput, "consensus mask is empty");

    NoduleRecord rec;
    rec.nodule_id = annotation.nodule_id;
    rec.label = vote.outcome == Malignancy::Malignant ? 1 : 0;
    rec.malignancy_median = vote.median;
    rec.annotated_biomarkers = average_biomarkers(entries);

    auto resampled = volume::resample_isotropic(raw, settings.target_spacing_mm);
    rec.volume = volume::clamp_hu(resampled, settings.hu_floor, settings.hu_ceiling);
    rec.consensus_mask = volume::resample_mask(consensus, raw.spacing(), settings.target_spacing_mm);
    if (rec.consensus_mask.empty_roi()) {
        throw Error(ErrorKind::InvalidInput, "consensus mask vanished after resampling");
    }
    rec.views = volume::extract_views(rec.volume, volume::mask_centroid(rec.consensus_mask), settings.hu_floor);
    return rec;
}

Cohort build_cohort(const fs::path& dir, const PreprocessSettings& settings, int jobs) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, dir.string() + " is not a directory");

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > kAnnotationSuffix.size() &&
            name.compare(name.size() - kAnnotationSuffix.size(), kAnnotationSuffix.size(), kAnnotationSuffix) == 0) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    enum class Outcome { Kept, Discarded, Inadmissible, Failed };
    struct Slot {
        Outcome outcome = Outcome::Failed;
        std::string id;
        std::optional<NoduleRecord> record;
        std::string error;
    };
    std::vector<Slot> slots(files.size());

    parallel_for(files.size(), jobs, [&](std::size_t i) {
        Slot& s = slots[i];
        const auto stem = files[i].filename().string();
        s.id = stem.substr(0, stem.size() - kAnnotationSuffix.size());
        try {
            auto ann = read_annotation(files[i]);
            s.id = ann.nodule_id;
            if (ann.entries.size() > kMaxAnnotators) {
                s.outcome = Outcome::Inadmissible;
                return;
            }
            if (ann.entries.empty()) throw Error(ErrorKind::InvalidInput, "no annotations");
            s.record = process_nodule(ann, settings);
            s.outcome = s.record ? Outcome::Kept : Outcome::Discarded;
        } catch (const std::exception& e) {
            s.outcome = Outcome::Failed;
            s.error = e.what();
        }
    });

    Cohort cohort;
    for (auto& s : slots) {
        switch (s.outcome) {
        case Outcome::Kept:
            ++cohort.summary.n_total;
            ++(s.record->label == 1 ? cohort.summary.n_malignant : cohort.summary.n_benign);
            cohort.records.push_back(std::move(*s.record));
            break;
        case Outcome::Discarded: ++cohort.summary.n_discarded; break;
        case Outcome::Inadmissible: ++cohort.summary.n_inadmissible; break;
        case Outcome::Failed: cohort.summary.failures.push_back({s.id, s.error}); break;
        }
    }
    std::sort(cohort.records.begin(), cohort.records.end(),
              [](const NoduleRecord& a, const NoduleRecord& b) { return a.nodule_id < b.nodule_id; });
    std::sort(cohort.summary.failures.begin(), cohort.summary.failures.end(),
              [](const RecordFailure& a, const RecordFailure& b) { return a.nodule_id < b.nodule_id; });
    return cohort;
}

}  // namespace conrad::ingest
