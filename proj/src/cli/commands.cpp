#include "conrad/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>

#include <json.hpp>

#include "conrad/atomic_file.hpp"
#include "conrad/csv.hpp"
#include "conrad/error.hpp"
#include "conrad/evaluation.hpp"
#include "conrad/fixtures.hpp"
#include "conrad/ingest.hpp"
#include "conrad/parallel.hpp"
#include "conrad/radiomics.hpp"
#include "conrad/volume_io.hpp"

namespace conrad::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kRecordsSchemaVersion = 1;
const std::vector<std::string> kIgnoredColumns = {"fold"};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

fs::path sidecar(const fs::path& p, std::string_view suffix) { return fs::path(p.string() + std::string(suffix)); }

volume::ScalarVolume views_volume(const volume::ViewTriplet& v, double spacing_mm) {
    const volume::Dims dims{volume::kCropSize, volume::kCropSize, 3};
    std::vector<double> px;
    px.reserve(dims.count());
    for (const auto* crop : {&v.axial, &v.coronal, &v.sagittal}) px.insert(px.end(), crop->pixels.begin(), crop->pixels.end());
    return volume::ScalarVolume(dims, volume::Spacing{spacing_mm, spacing_mm, spacing_mm}, std::move(px));
}

struct Sources {
    std::optional<evaluation::FeatureTable> radiomics, biomarkers, cnn;

    std::vector<evaluation::FeatureTable> for_ablation(const evaluation::Ablation& a) const {
        std::vector<evaluation::FeatureTable> out;
        if (a.biomarkers && biomarkers) out.push_back(*biomarkers);
        if (a.radiomics && radiomics) out.push_back(*radiomics);
        if (a.cnn && cnn) out.push_back(*cnn);
        return out;
    }
};

Sources load_sources(const Paths& p, bool want_rad, bool want_bio, bool want_cnn) {
    using evaluation::Source;
    Sources s;
    if (want_rad) s.radiomics = evaluation::read_feature_csv(p.radiomics, Source::Radiomic, kIgnoredColumns);
    if (want_bio) s.biomarkers = evaluation::read_feature_csv(p.biomarkers, Source::Biomarker, kIgnoredColumns);
    if (want_cnn) s.cnn = evaluation::read_feature_csv(p.cnn, Source::Cnn, kIgnoredColumns);
    return s;
}

std::vector<learners::Hyperparameters> rbf_grid(const std::vector<double>& cs, const std::vector<double>& gammas,
                                                const learners::Hyperparameters& base) {
    std::vector<learners::Hyperparameters> grid;
    for (double c : cs)
        for (double g : gammas) {
            learners::Hyperparameters h = base;
            h.c = c;
            h.gamma = g;
            grid.push_back(h);
        }
    return grid;
}

/// Grid from the configuration, or nullopt for the classifier's default.
std::optional<std::vector<learners::Hyperparameters>> configured_grid(const ExperimentConfig& c, learners::ClassifierKind kind,
                                                                      std::size_t n_features,
                                                                      const learners::Hyperparameters& base) {
    using learners::ClassifierKind;
    if (c.grid.empty() && c.gamma.empty()) return std::nullopt;
    if (kind == ClassifierKind::SvmRbf) {
        std::vector<double> cs = c.grid, gammas = c.gamma;
        if (cs.empty()) cs = {0.1, 1.0, 10.0, 100.0};
        if (gammas.empty()) {
            const double d = static_cast<double>(std::max<std::size_t>(1, n_features));
            gammas = {0.1 / d, 1.0 / d, 10.0 / d};
        }
        return rbf_grid(cs, gammas, base);
    }
    std::vector<learners::Hyperparameters> grid;
    for (double v : c.grid) {
        learners::Hyperparameters h = base;
        (kind == ClassifierKind::LogregLasso ? h.lambda : h.c) = v;
        grid.push_back(h);
    }
    return grid;
}

struct RunOutput {
    evaluation::EvalReport report;
    std::string metrics_row;
};

RunOutput run_evaluation(const evaluation::FeatureTable& table, const std::map<std::string, int>& label_map,
                         learners::ClassifierKind kind, std::string_view feature_set, const ExperimentConfig& c,
                         std::uint64_t seed, int jobs, const fs::path& out_dir, bool use_config_grid) {
    const auto labels = evaluation::align_labels(table, label_map);
    evaluation::EvalOptions opts;
    opts.k = c.k;
    opts.seed = seed;
    opts.stratified = c.stratified;
    opts.nested = c.nested;
    opts.jobs = jobs;
    opts.base.n_trees = c.n_trees;
    opts.base.seed = seed;
    if (use_config_grid) opts.grid = configured_grid(c, kind, table.cols(), opts.base);

    RunOutput out;
    out.report = evaluation::evaluate(table, labels, kind, feature_set, opts);
    out.metrics_row = evaluation::metrics_csv_row(out.report);

    const auto plan = evaluation::make_folds(table.ids(), labels, c.k, seed, c.stratified);
    write_file_atomic(out_dir / "folds.json", evaluation::fold_plan_json(plan));
    write_file_atomic(out_dir / "metrics.csv", evaluation::metrics_csv_header() + out.metrics_row);
    write_file_atomic(out_dir / "roc.csv", evaluation::roc_csv(out.report));
    // Written last: its presence marks a finished run.
    write_file_atomic(out_dir / "report.json", evaluation::report_json(out.report));
    return out;
}

std::string format_optional(const std::optional<double>& v) { return v ? csv::format_double(*v) : "null"; }

}  // namespace

int cmd_fixtures(const ExperimentConfig& config, std::ostream& log) {
    validate(config, Command::Fixtures);
    fixtures::FixtureOptions opts;
    opts.count = config.fixture_count;
    opts.seed = resolve_seed(config);
    opts.cnn_width = config.cnn_width;
    opts.k = config.k;
    const auto summary = fixtures::write_fixtures(config.paths.out, opts, config.jobs);
    log << "fixtures: " << summary.n_benign << " benign, " << summary.n_malignant << " malignant, seed " << opts.seed << " -> "
        << config.paths.out.string() << "\n";
    return kExitOk;
}

int cmd_ingest(const ExperimentConfig& config, std::ostream& log) {
    validate(config, Command::Ingest);
    const std::uint64_t seed = resolve_seed(config);
    const fs::path out = config.paths.out;
    const ingest::Cohort cohort = ingest::build_cohort(config.paths.cohort, config.preprocess, config.jobs);

    json records = json::array();
    std::string labels_csv = "nodule_id,label\n";
    std::string bio_csv = "nodule_id";
    for (auto n : ingest::kBiomarkerNames) bio_csv += "," + std::string(n);
    bio_csv += "\n";
    std::vector<std::string> ids;
    std::vector<int> labels;

    parallel_for(cohort.records.size(), config.jobs, [&](std::size_t i) {
        const auto& r = cohort.records[i];
        const fs::path dir = out / "records";
        volume::write_volume(dir / (r.nodule_id + std::string(volume::kVolumeHeaderSuffix)), r.volume);
        volume::write_mask(dir / (r.nodule_id + std::string(volume::kMaskHeaderSuffix)), r.consensus_mask, r.volume.spacing());
        volume::write_volume(dir / (r.nodule_id + ".views" + std::string(volume::kVolumeHeaderSuffix)),
                             views_volume(r.views, config.preprocess.target_spacing_mm));
    });
    for (const auto& r : cohort.records) {
        records.push_back({{"nodule_id", r.nodule_id},
                           {"label", r.label},
                           {"malignancy_median", r.malignancy_median},
                           {"volume", "records/" + r.nodule_id + std::string(volume::kVolumeHeaderSuffix)},
                           {"mask", "records/" + r.nodule_id + std::string(volume::kMaskHeaderSuffix)},
                           {"views", "records/" + r.nodule_id + ".views" + std::string(volume::kVolumeHeaderSuffix)}});
        labels_csv += r.nodule_id + "," + std::to_string(r.label) + "\n";
        bio_csv += r.nodule_id;
        for (double b : r.annotated_biomarkers) bio_csv += "," + csv::format_double(b);
        bio_csv += "\n";
        ids.push_back(r.nodule_id);
        labels.push_back(r.label);
    }

    const auto& s = cohort.summary;
    const json manifest = {{"schema_version", kRecordsSchemaVersion},
                           {"seed", seed},
                           {"preprocess",
                            {{"target_spacing_mm", config.preprocess.target_spacing_mm},
                             {"hu_floor", config.preprocess.hu_floor},
                             {"hu_ceiling", config.preprocess.hu_ceiling},
                             {"consensus_level", config.preprocess.consensus_level}}},
                           {"records", records}};
    json failures = json::array();
    for (const auto& f : s.failures) failures.push_back({{"nodule_id", f.nodule_id}, {"message", f.message}});
    const json summary = {{"n_total", s.n_total},         {"n_benign", s.n_benign},
                          {"n_malignant", s.n_malignant}, {"n_discarded", s.n_discarded},
                          {"n_inadmissible", s.n_inadmissible}, {"n_failed", s.failures.size()}};

    write_file_atomic(out / "records.json", dump(manifest));
    write_file_atomic(out / "labels.csv", labels_csv);
    write_file_atomic(out / "annotated_biomarkers.csv", bio_csv);
    write_file_atomic(out / "failures.json", dump(failures));
    write_file_atomic(out / "summary.json", dump(summary));

    const auto pos = static_cast<int>(std::count(labels.begin(), labels.end(), 1));
    const auto neg = static_cast<int>(labels.size()) - pos;
    if (pos >= config.k && neg >= config.k) {
        write_file_atomic(out / "folds.json", evaluation::fold_plan_json(evaluation::make_folds(ids, labels, config.k, seed, config.stratified)));
    } else {
        log << "ingest: too few nodules per class for " << config.k << " folds; folds.json not written\n";
    }

    log << "ingest: " << s.n_total << " nodules, " << s.n_benign << " benign, " << s.n_malignant << " malignant, "
        << s.n_discarded << " discarded, " << s.failures.size() << " failed\n";
    for (const auto& f : s.failures) log << "  " << f.nodule_id << ": " << f.message << "\n";
    return s.failures.empty() ? kExitOk : kExitPartial;
}

int cmd_extract(const ExperimentConfig& config, std::ostream& log) {
    validate(config, Command::Extract);
    const fs::path root = config.paths.records;
    const json manifest = json::parse(read_file(root / "records.json"));
    if (manifest.value("schema_version", 0) != kRecordsSchemaVersion) {
        throw Error(ErrorKind::InvalidInput, (root / "records.json").string() + ": unsupported schema_version");
    }
    const auto& recs = manifest.at("records");
    const std::size_t n = recs.size();

    std::vector<std::optional<std::vector<double>>> rows(n);
    std::vector<std::string> ids(n), errors(n);
    std::mutex log_mutex;
    std::size_t done = 0;
    parallel_for(n, config.jobs, [&](std::size_t i) {
        ids[i] = recs[i].at("nodule_id").get<std::string>();
        try {
            const auto v = volume::read_volume(root / recs[i].at("volume").get<std::string>());
            const auto m = volume::read_mask(root / recs[i].at("mask").get<std::string>());
            rows[i] = radiomics::extract_all(v, m.mask, config.radiomics);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
        std::lock_guard lock(log_mutex);
        ++done;
        if (done % 25 == 0 || done == n) log << "extract: " << done << "/" << n << "\n";
    });

    std::string out = "nodule_id";
    for (const auto& name : radiomics::feature_names()) out += "," + name;
    out += "\n";
    json failures = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        if (!rows[i]) {
            failures.push_back({{"nodule_id", ids[i]}, {"message", errors[i]}});
            log << "  " << ids[i] << ": " << errors[i] << "\n";
            continue;
        }
        out += ids[i];
        for (double v : *rows[i]) out += "," + csv::format_double(v);
        out += "\n";
    }
    write_file_atomic(sidecar(config.paths.radiomics, ".failures.json"), dump(failures));
    write_file_atomic(config.paths.radiomics, out);
    log << "extract: wrote " << (n - failures.size()) << " rows x " << radiomics::kFeatureCount << " features to "
        << config.paths.radiomics.string() << "\n";
    return failures.empty() ? kExitOk : kExitPartial;
}

int cmd_fuse(const ExperimentConfig& config, std::ostream& log) {
    validate(config, Command::Fuse);
    const auto& ablation = evaluation::parse_ablation(config.features);
    const Sources s = load_sources(config.paths, ablation.radiomics, ablation.biomarkers, ablation.cnn);
    const auto sources = s.for_ablation(ablation);
    const auto table = evaluation::fuse(sources, ablation);

    json columns = json::array();
    for (std::size_t j = 0; j < table.cols(); ++j)
        columns.push_back({{"name", table.columns()[j]}, {"source", evaluation::to_string(table.sources()[j])}});
    write_file_atomic(sidecar(config.paths.fused, ".sources.json"), dump({{"feature_set", ablation.name}, {"columns", columns}}));
    write_file_atomic(config.paths.fused, evaluation::feature_csv_text(table));
    log << "fuse: " << ablation.name << " -> " << table.rows() << " rows x " << table.cols() << " columns\n";
    return kExitOk;
}

int cmd_evaluate(const ExperimentConfig& config, std::ostream& log) {
    validate(config, Command::Evaluate);
    const std::uint64_t seed = resolve_seed(config);
    const auto& ablation = evaluation::parse_ablation(config.features);
    const auto kind = learners::parse_classifier(config.classifier);
    const Sources s = load_sources(config.paths, ablation.radiomics, ablation.biomarkers, ablation.cnn);
    const auto table = evaluation::fuse(s.for_ablation(ablation), ablation);
    const auto label_map = evaluation::read_labels_csv(config.paths.labels);

    const auto run = run_evaluation(table, label_map, kind, ablation.name, config, seed, config.jobs, config.paths.out, true);
    const auto& m = run.report.cv.mean;
    log << "evaluate: " << learners::to_string(kind) << " on " << ablation.name << " (" << table.cols()
        << " columns): accuracy " << format_optional(m.accuracy) << ", recall " << format_optional(m.recall)
        << ", precision " << format_optional(m.precision) << ", auc " << format_optional(m.auc);
    if (run.report.census) log << ", lasso keeps " << run.report.census->selected.size() << "/" << run.report.census->total_columns;
    log << "\n";
    return kExitOk;
}

int cmd_matrix(const ExperimentConfig& config, std::ostream& log) {
    validate(config, Command::Matrix);
    const std::uint64_t seed = resolve_seed(config);
    const Sources s = load_sources(config.paths, true, true, true);
    const auto label_map = evaluation::read_labels_csv(config.paths.labels);

    struct Combo {
        learners::ClassifierKind kind;
        const evaluation::Ablation* ablation;
        fs::path dir;
    };
    std::vector<Combo> combos;
    for (auto name : learners::kClassifierNames) {
        for (const auto& a : evaluation::kAblations) {
            const auto kind = learners::parse_classifier(name);
            combos.push_back({kind, &a, config.paths.out / "runs" / (std::string(name) + "__" + std::string(a.name))});
        }
    }

    std::vector<std::string> rows(combos.size()), errors(combos.size());
    std::vector<char> reused(combos.size(), 0);
    std::mutex log_mutex;
    parallel_for(combos.size(), config.jobs, [&](std::size_t i) {
        const auto& c = combos[i];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if (fs::exists(c.dir / "report.json") && fs::exists(c.dir / "metrics.csv")) {
                const auto parsed = csv::parse(read_file(c.dir / "metrics.csv"), (c.dir / "metrics.csv").string());
                if (parsed.size() == 2 && parsed[1].size() == 8 && parsed[1].back() == std::to_string(seed)) {
                    std::string row;
                    for (const auto& f : parsed[1]) row += (row.empty() ? "" : ",") + f;
                    rows[i] = row + "\n";
                    reused[i] = 1;
                }
            }
            if (!reused[i]) {
                const auto table = evaluation::fuse(s.for_ablation(*c.ablation), *c.ablation);
                rows[i] = run_evaluation(table, label_map, c.kind, c.ablation->name, config, seed, 1, c.dir, false).metrics_row;
            }
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::lock_guard lock(log_mutex);
        log << "matrix: " << learners::to_string(c.kind) << " x " << c.ablation->name << ": "
            << (!errors[i].empty() ? "FAILED " + errors[i] : reused[i] ? std::string("reused") : "done in " + csv::format_double(std::round(secs * 10) / 10) + " s")
            << "\n";
    });

    std::string matrix = evaluation::metrics_csv_header();
    json failures = json::array();
    for (std::size_t i = 0; i < combos.size(); ++i) {
        if (errors[i].empty()) {
            matrix += rows[i];
        } else {
            failures.push_back({{"classifier", learners::to_string(combos[i].kind)},
                                {"feature_set", combos[i].ablation->name},
                                {"message", errors[i]}});
        }
    }
    write_file_atomic(config.paths.out / "matrix_failures.json", dump(failures));
    write_file_atomic(config.paths.out / "matrix.csv", matrix);
    log << "matrix: " << (combos.size() - failures.size()) << "/" << combos.size() << " combinations -> "
        << (config.paths.out / "matrix.csv").string() << "\n";
    return failures.empty() ? kExitOk : kExitPartial;
}

int run_command(Command command, const ExperimentConfig& config, std::ostream& log) {
    switch (command) {
        case Command::Fixtures: return cmd_fixtures(config, log);
        case Command::Ingest: return cmd_ingest(config, log);
        case Command::Extract: return cmd_extract(config, log);
        case Command::Fuse: return cmd_fuse(config, log);
        case Command::Evaluate: return cmd_evaluate(config, log);
        case Command::Matrix: return cmd_matrix(config, log);
    }
    throw Error(ErrorKind::Contract, "unknown command");
}

}  // namespace conrad::cli
