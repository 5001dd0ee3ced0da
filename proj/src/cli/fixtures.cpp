#include "conrad/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <json.hpp>

#include "conrad/atomic_file.hpp"
#include "conrad/csv.hpp"
#include "conrad/evaluation.hpp"
#include "conrad/parallel.hpp"
#include "conrad/random.hpp"
#include "conrad/volume_io.hpp"

namespace conrad::fixtures {

namespace fs = std::filesystem;

namespace {

constexpr double kBackgroundHu = -850.0;
constexpr double kBackgroundNoise = 35.0;

struct Vec3 {
    double x, y, z;
};

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

Vec3 random_direction(Rng& rng) {
    while (true) {
        const Vec3 v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const double n = std::sqrt(dot(v, v));
        if (n > 0.1 && n <= 1.0) return {v.x / n, v.y / n, v.z / n};
    }
}

/// Occupancy of a phantom at a physical offset from its centre; `grow`
/// scales the outline to mimic annotator disagreement.
struct Shape {
    bool malignant = false;
    Vec3 axes{};                    // benign ellipsoid semi-axes
    double radius = 0.0;            // malignant core radius
    std::array<Vec3, 4> lobe_dirs{};
    std::array<double, 4> lobe_amp{};
    std::vector<Vec3> spikes;
    std::vector<double> spike_len;
    std::vector<double> spike_width;

    bool inside(const Vec3& p, double grow) const {
        if (!malignant) {
            const double q = (p.x * p.x) / (axes.x * axes.x) + (p.y * p.y) / (axes.y * axes.y) + (p.z * p.z) / (axes.z * axes.z);
            return q <= grow * grow;
        }
        const double r = std::sqrt(dot(p, p));
        if (r < 1e-9) return true;
        const Vec3 u{p.x / r, p.y / r, p.z / r};
        double outline = 1.0;
        for (std::size_t k = 0; k < lobe_dirs.size(); ++k) outline += lobe_amp[k] * std::pow(std::max(0.0, dot(u, lobe_dirs[k])), 3.0);
        if (r <= radius * outline * grow) return true;
        for (std::size_t k = 0; k < spikes.size(); ++k) {
            const double t = dot(p, spikes[k]);
            const double reach = (radius + spike_len[k]) * grow;
            if (t <= 0.0 || t > reach) continue;
            const Vec3 perp{p.x - t * spikes[k].x, p.y - t * spikes[k].y, p.z - t * spikes[k].z};
            const double width = spike_width[k] * (1.0 - t / reach);
            if (dot(perp, perp) <= width * width) return true;
        }
        return false;
    }

    double diameter() const {
        if (!malignant) return 2.0 * std::max({axes.x, axes.y, axes.z});
        double lobe = 0.0;
        for (double a : lobe_amp) lobe = std::max(lobe, a);
        return 2.0 * radius * (1.0 + lobe);
    }
};

Shape make_shape(int label, Rng& rng) {
    Shape s;
    s.malignant = label == 1;
    if (!s.malignant) {
        const double base = rng.uniform(4.0, 8.0);
        s.axes = {base * rng.uniform(0.85, 1.0), base * rng.uniform(0.85, 1.0), base * rng.uniform(0.85, 1.0)};
        return s;
    }
    s.radius = rng.uniform(4.5, 8.0);
    for (std::size_t k = 0; k < s.lobe_dirs.size(); ++k) {
        s.lobe_dirs[k] = random_direction(rng);
        s.lobe_amp[k] = rng.uniform(0.1, 0.35);
    }
    const std::size_t n_spikes = 6 + rng.index(7);
    for (std::size_t k = 0; k < n_spikes; ++k) {
        s.spikes.push_back(random_direction(rng));
        s.spike_len.push_back(rng.uniform(3.0, 7.0));
        s.spike_width.push_back(rng.uniform(1.0, 1.8));
    }
    return s;
}

struct RatingModel {
    double benign;
    double malignant;
    double lo;
    double hi;
};

// subtlety, calcification, sphericity, margin, lobulation, spiculation, texture
constexpr std::array<RatingModel, 7> kRatings = {{
    {3.0, 4.2, 1, 5},
    {4.6, 5.7, 1, 6},
    {4.2, 3.0, 1, 5},
    {4.3, 2.9, 1, 5},
    {1.6, 3.2, 1, 5},
    {1.4, 3.3, 1, 5},
    {4.6, 4.1, 1, 5},
}};

std::string phantom_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "PH-%04zu", index + 1);
    return buf;
}

}  // namespace

volume::SegMask ball_mask(double radius_mm, double spacing_mm, int margin_voxels) {
    const int half = static_cast<int>(std::ceil(radius_mm / spacing_mm)) + margin_voxels;
    const int n = 2 * half + 1;
    volume::SegMask m(volume::Dims{n, n, n});
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                const double dx = (x - half) * spacing_mm, dy = (y - half) * spacing_mm, dz = (z - half) * spacing_mm;
                m.set(x, y, z, dx * dx + dy * dy + dz * dz <= radius_mm * radius_mm);
            }
    return m;
}

Phantom make_phantom(std::size_t index, int label, std::uint64_t seed, const PhantomOptions& options) {
    Rng rng(splitmix64(seed) ^ splitmix64(0x9e37ULL + index));
    const volume::Spacing sp = options.spacing;
    const volume::Dims dims{static_cast<int>(std::lround(options.fov_mm / sp.x)), static_cast<int>(std::lround(options.fov_mm / sp.y)),
                            static_cast<int>(std::lround(options.fov_mm / sp.z))};
    const Shape shape = make_shape(label, rng);
    const Vec3 centre{options.fov_mm / 2 + rng.uniform(-2, 2), options.fov_mm / 2 + rng.uniform(-2, 2),
                      options.fov_mm / 2 + rng.uniform(-2, 2)};

    // Interior attenuation: flat for benign, low-frequency mottling for malignant.
    const double base_hu = label == 1 ? rng.uniform(0, 60) : rng.uniform(-10, 50);
    const double noise_hu = label == 1 ? 55.0 : 15.0;
    const double mottle = label == 1 ? rng.uniform(60, 110) : 0.0;
    const Vec3 phase{rng.uniform(0, 6.28), rng.uniform(0, 6.28), rng.uniform(0, 6.28)};

    std::vector<double> vox(dims.count());
    for (int z = 0; z < dims.nz; ++z)
        for (int y = 0; y < dims.ny; ++y)
            for (int x = 0; x < dims.nx; ++x) {
                const Vec3 p{(x + 0.5) * sp.x - centre.x, (y + 0.5) * sp.y - centre.y, (z + 0.5) * sp.z - centre.z};
                double hu;
                if (shape.inside(p, 1.0)) {
                    hu = base_hu + noise_hu * rng.normal() +
                         mottle * std::sin(0.9 * p.x + phase.x) * std::sin(0.8 * p.y + phase.y) * std::sin(0.7 * p.z + phase.z);
                } else {
                    hu = kBackgroundHu + kBackgroundNoise * rng.normal();
                }
                vox[dims.index(x, y, z)] = std::round(std::clamp(hu, -1024.0, 3000.0));
            }

    Phantom ph;
    ph.nodule_id = phantom_id(index);
    ph.label = label;
    ph.volume = volume::ScalarVolume(dims, sp, std::move(vox));
    ph.diameter_mm = shape.diameter();

    const std::size_t n_annotators = 1 + rng.index(4);
    std::array<double, 7> nodule_level{};
    for (std::size_t k = 0; k < kRatings.size(); ++k) {
        nodule_level[k] = (label == 1 ? kRatings[k].malignant : kRatings[k].benign) + 0.7 * rng.normal();
    }
    const bool dissent = n_annotators >= 2 && rng.uniform() < 0.25;
    for (std::size_t a = 0; a < n_annotators; ++a) {
        ingest::AnnotatorEntry e;
        e.annotator_id = "reader-" + std::to_string(a + 1);
        e.malignancy_rating = label == 1 ? 4 + static_cast<int>(rng.index(2)) : 1 + static_cast<int>(rng.index(2));
        if (dissent && a == 0) e.malignancy_rating = 3;
        for (std::size_t k = 0; k < kRatings.size(); ++k) {
            e.biomarkers[k] = std::clamp(std::round(nodule_level[k] + 0.4 * rng.normal()), kRatings[k].lo, kRatings[k].hi);
        }
        e.biomarkers[7] = std::max(1.0, ph.diameter_mm + 0.8 * rng.normal());

        const double grow = 1.0 + rng.uniform(-0.08, 0.08);
        volume::SegMask m(dims);
        for (int z = 0; z < dims.nz; ++z)
            for (int y = 0; y < dims.ny; ++y)
                for (int x = 0; x < dims.nx; ++x) {
                    const Vec3 p{(x + 0.5) * sp.x - centre.x, (y + 0.5) * sp.y - centre.y, (z + 0.5) * sp.z - centre.z};
                    m.set(x, y, z, shape.inside(p, grow));
                }
        e.mask = std::move(m);
        ph.annotators.push_back(std::move(e));
    }
    return ph;
}

FixtureSummary write_fixtures(const fs::path& out_dir, const FixtureOptions& options, int jobs) {
    FixtureSummary summary;
    summary.cohort_dir = out_dir / "cohort";
    summary.predicted_biomarkers = out_dir / "predicted_biomarkers.csv";
    summary.cnn_features = out_dir / "cnn_features.csv";
    summary.truth = out_dir / "truth.csv";

    // Exactly balanced labels in a seeded order.
    std::vector<int> labels(options.count, 0);
    for (std::size_t i = 0; i < options.count / 2; ++i) labels[i] = 1;
    Rng order_rng(options.seed ^ 0xC0FFEEULL);
    order_rng.shuffle(std::span<int>(labels));

    std::vector<std::string> ids(options.count);
    std::vector<ingest::Biomarkers> mean_markers(options.count);
    parallel_for(options.count, jobs, [&](std::size_t i) {
        const Phantom ph = make_phantom(i, labels[i], options.seed, options.phantom);
        ids[i] = ph.nodule_id;
        mean_markers[i] = ingest::average_biomarkers(ph.annotators);

        const fs::path vol_rel = fs::path("volumes") / (ph.nodule_id + std::string(volume::kVolumeHeaderSuffix));
        volume::write_volume(summary.cohort_dir / vol_rel, ph.volume);
        nlohmann::json anns = nlohmann::json::array();
        for (const auto& e : ph.annotators) {
            const fs::path mask_rel = fs::path("masks") / (ph.nodule_id + "_" + e.annotator_id + std::string(volume::kMaskHeaderSuffix));
            volume::write_mask(summary.cohort_dir / mask_rel, e.mask, ph.volume.spacing());
            nlohmann::json bm;
            for (std::size_t k = 0; k < ingest::kBiomarkerCount; ++k) bm[std::string(ingest::kBiomarkerNames[k])] = e.biomarkers[k];
            anns.push_back({{"annotator_id", e.annotator_id}, {"malignancy", e.malignancy_rating}, {"biomarkers", bm},
                            {"mask", mask_rel.generic_string()}});
        }
        const nlohmann::json doc = {{"nodule_id", ph.nodule_id}, {"volume", vol_rel.generic_string()}, {"annotations", anns}};
        write_file_atomic(summary.cohort_dir / (ph.nodule_id + std::string(ingest::kAnnotationSuffix)), doc.dump(2) + "\n");
    });

    for (int l : labels) ++(l == 1 ? summary.n_malignant : summary.n_benign);

    // Stand-ins for the concept-bottleneck outputs: predicted biomarkers are
    // the annotator means plus regression error; CNN features carry a weak
    // label signal in a small subset of dimensions.
    const auto plan = evaluation::make_folds(ids, labels, options.k, options.seed, true);
    Rng noise(options.seed ^ 0xB10ULL);
    std::string bio = "nodule_id";
    for (auto n : ingest::kBiomarkerNames) bio += "," + std::string(n);
    bio += ",fold\n";
    std::string truth = "nodule_id,label\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        bio += ids[i];
        for (std::size_t k = 0; k < ingest::kBiomarkerCount; ++k) {
            const double err = k == 7 ? 1.0 : 0.35;
            bio += "," + csv::format_double(mean_markers[i][k] + err * noise.normal());
        }
        bio += "," + std::to_string(plan.fold_of(ids[i])) + "\n";
        truth += ids[i] + "," + std::to_string(labels[i]) + "\n";
    }

    Rng cnn_rng(options.seed ^ 0xC1AULL);
    const std::size_t informative = std::max<std::size_t>(1, options.cnn_width / 64);
    std::vector<double> loading(options.cnn_width, 0.0);
    for (std::size_t j = 0; j < informative; ++j) loading[cnn_rng.index(options.cnn_width)] = cnn_rng.uniform(0.15, 0.4);
    std::string cnn = "nodule_id";
    char name[32];
    for (std::size_t j = 0; j < options.cnn_width; ++j) {
        std::snprintf(name, sizeof name, ",cnn_%04zu", j);
        cnn += name;
    }
    cnn += "\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        cnn += ids[i];
        const double sign = labels[i] == 1 ? 1.0 : -1.0;
        for (std::size_t j = 0; j < options.cnn_width; ++j) {
            const double v = std::max(0.0, 1.0 + sign * loading[j] + cnn_rng.normal());  // post-ReLU pooling is non-negative
            cnn += "," + csv::format_double(std::round(v * 1e6) / 1e6);
        }
        cnn += "\n";
    }

    write_file_atomic(summary.predicted_biomarkers, bio);
    write_file_atomic(summary.cnn_features, cnn);
    write_file_atomic(summary.truth, truth);
    return summary;
}

}  // namespace conrad::fixtures
