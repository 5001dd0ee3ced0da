#include "conrad/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <variant>

#include <toml.hpp>

#include "conrad/atomic_file.hpp"
#include "conrad/error.hpp"
#include "conrad/evaluation.hpp"
#include "conrad/learners.hpp"

namespace conrad::cli {

namespace fs = std::filesystem;

namespace {

using FieldValue = std::variant<std::int64_t, double, bool, std::string, std::vector<double>>;

struct BadField {
    std::string message;
};

const FieldSpec* find_field(std::string_view key) {
    for (const auto& f : config_fields())
        if (f.key == key) return &f;
    return nullptr;
}

template <class T>
T narrow_int(std::int64_t v, std::int64_t lo, std::int64_t hi) {
    if (v < lo || v > hi) throw BadField{"value " + std::to_string(v) + " is out of range"};
    return static_cast<T>(v);
}

/// Stores a typed value. Range and cross-field checks belong to validation.
void assign(ExperimentConfig& c, std::string_view key, FieldValue v) {
    auto integer = [&] { return std::get<std::int64_t>(v); };
    auto real = [&] { return std::get<double>(v); };
    auto text = [&] { return std::get<std::string>(v); };
    auto boolean = [&] { return std::get<bool>(v); };
    constexpr std::int64_t kIntMax = 1'000'000'000;

    if (key == "seed") c.seed = static_cast<std::uint64_t>(narrow_int<std::int64_t>(integer(), 0, INT64_MAX));
    else if (key == "jobs") c.jobs = narrow_int<int>(integer(), -kIntMax, kIntMax);
    else if (key == "paths.cohort") c.paths.cohort = text();
    else if (key == "paths.records") c.paths.records = text();
    else if (key == "paths.out") c.paths.out = text();
    else if (key == "paths.radiomics") c.paths.radiomics = text();
    else if (key == "paths.biomarkers") c.paths.biomarkers = text();
    else if (key == "paths.cnn") c.paths.cnn = text();
    else if (key == "paths.labels") c.paths.labels = text();
    else if (key == "paths.fused") c.paths.fused = text();
    else if (key == "experiment.features") c.features = text();
    else if (key == "experiment.classifier") c.classifier = text();
    else if (key == "experiment.k") c.k = narrow_int<int>(integer(), -kIntMax, kIntMax);
    else if (key == "experiment.stratified") c.stratified = boolean();
    else if (key == "experiment.nested") c.nested = boolean();
    else if (key == "experiment.grid") c.grid = std::get<std::vector<double>>(v);
    else if (key == "experiment.gamma") c.gamma = std::get<std::vector<double>>(v);
    else if (key == "experiment.n_trees") c.n_trees = narrow_int<int>(integer(), -kIntMax, kIntMax);
    else if (key == "radiomics.bin_width") c.radiomics.bin_width = real();
    else if (key == "radiomics.glcm_distance") c.radiomics.glcm_distance = narrow_int<int>(integer(), -kIntMax, kIntMax);
    else if (key == "radiomics.connectivity") c.radiomics.zone_connectivity = narrow_int<int>(integer(), -kIntMax, kIntMax);
    else if (key == "preprocess.target_spacing_mm") c.preprocess.target_spacing_mm = real();
    else if (key == "preprocess.hu_floor") c.preprocess.hu_floor = real();
    else if (key == "preprocess.hu_ceiling") c.preprocess.hu_ceiling = real();
    else if (key == "preprocess.consensus_level") c.preprocess.consensus_level = real();
    else if (key == "fixtures.count") c.fixture_count = narrow_int<std::size_t>(integer(), 0, kIntMax);
    else if (key == "fixtures.cnn_width") c.cnn_width = narrow_int<std::size_t>(integer(), 0, kIntMax);
    else throw BadField{"unknown key"};
}

const char* type_name(FieldType t) {
    switch (t) {
        case FieldType::Integer: return "an integer";
        case FieldType::Real: return "a number";
        case FieldType::Boolean: return "a boolean";
        case FieldType::Text: return "a string";
        case FieldType::Path: return "a path string";
        case FieldType::RealList: return "an array of numbers";
    }
    return "a value";
}

FieldValue from_toml(const toml::node& node, const FieldSpec& spec, const fs::path& base_dir) {
    const std::string expected = std::string("expected ") + type_name(spec.type);
    switch (spec.type) {
        case FieldType::Integer:
            if (auto v = node.as_integer()) return v->get();
            throw BadField{expected};
        case FieldType::Real:
            if (node.is_integer() || node.is_floating_point()) return *node.value<double>();
            throw BadField{expected};
        case FieldType::Boolean:
            if (auto v = node.as_boolean()) return v->get();
            throw BadField{expected};
        case FieldType::Text:
            if (auto v = node.as_string()) return v->get();
            throw BadField{expected};
        case FieldType::Path:
            if (auto v = node.as_string()) {
                fs::path p(v->get());
                if (!p.empty() && p.is_relative()) p = base_dir / p;
                return p.lexically_normal().string();
            }
            throw BadField{expected};
        case FieldType::RealList: {
            const auto* arr = node.as_array();
            if (!arr) throw BadField{expected};
            std::vector<double> out;
            for (const auto& e : *arr) {
                if (!(e.is_integer() || e.is_floating_point())) throw BadField{expected};
                out.push_back(*e.value<double>());
            }
            return out;
        }
    }
    throw BadField{expected};
}

double parse_real(std::string_view s) {
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw BadField{"'" + std::string(s) + "' is not a number"};
    return v;
}

FieldValue from_text(std::string_view s, const FieldSpec& spec) {
    switch (spec.type) {
        case FieldType::Integer: {
            std::int64_t v = 0;
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
                throw BadField{"'" + std::string(s) + "' is not an integer"};
            return v;
        }
        case FieldType::Real: return parse_real(s);
        case FieldType::Boolean:
            if (s == "true" || s == "1") return true;
            if (s == "false" || s == "0") return false;
            throw BadField{"'" + std::string(s) + "' is not a boolean"};
        case FieldType::Text:
        case FieldType::Path: return std::string(s);
        case FieldType::RealList: {
            std::vector<double> out;
            std::size_t start = 0;
            while (start <= s.size()) {
                const std::size_t comma = std::min(s.find(',', start), s.size());
                out.push_back(parse_real(s.substr(start, comma - start)));
                start = comma + 1;
            }
            return out;
        }
    }
    throw BadField{"unsupported field type"};
}

void walk(const toml::table& table, const std::string& prefix, ExperimentConfig& config, const fs::path& base_dir,
          std::vector<std::string>& errors) {
    for (const auto& [k, node] : table) {
        const std::string key = prefix.empty() ? std::string(k.str()) : prefix + "." + std::string(k.str());
        if (const auto* sub = node.as_table()) {
            walk(*sub, key, config, base_dir, errors);
            continue;
        }
        const FieldSpec* spec = find_field(key);
        if (!spec) {
            errors.push_back(key + ": unknown key");
            continue;
        }
        try {
            assign(config, key, from_toml(node, *spec, base_dir));
        } catch (const BadField& e) {
            errors.push_back(key + ": " + e.message);
        }
    }
}

[[noreturn]] void throw_field_errors(const std::string& what, const std::vector<std::string>& errors) {
    std::string msg = what;
    for (const auto& e : errors) msg += "\n  " + e;
    throw Error(ErrorKind::Config, msg);
}

}  // namespace

std::string_view to_string(Command c) noexcept {
    switch (c) {
        case Command::Fixtures: return "fixtures";
        case Command::Ingest: return "ingest";
        case Command::Extract: return "extract";
        case Command::Fuse: return "fuse";
        case Command::Evaluate: return "evaluate";
        case Command::Matrix: return "matrix";
    }
    return "unknown";
}

const std::vector<FieldSpec>& config_fields() {
    static const std::vector<FieldSpec> fields = {
        {"seed", "seed", FieldType::Integer, "RNG seed (falls back to CONRAD_SEED, then 0)"},
        {"jobs", "jobs", FieldType::Integer, "worker threads"},
        {"paths.cohort", "cohort", FieldType::Path, "directory of *.annotation.json files"},
        {"paths.records", "records", FieldType::Path, "ingest output directory"},
        {"paths.out", "out", FieldType::Path, "output directory"},
        {"paths.radiomics", "radiomics", FieldType::Path, "radiomics feature CSV"},
        {"paths.biomarkers", "biomarkers", FieldType::Path, "predicted biomarker CSV"},
        {"paths.cnn", "cnn", FieldType::Path, "pooled CNN feature CSV"},
        {"paths.labels", "labels", FieldType::Path, "nodule_id,label CSV"},
        {"paths.fused", "fused", FieldType::Path, "fused feature CSV"},
        {"experiment.features", "features", FieldType::Text, "feature set (ablation) name"},
        {"experiment.classifier", "classifier", FieldType::Text, "classifier name"},
        {"experiment.k", "k", FieldType::Integer, "cross-validation folds"},
        {"experiment.stratified", "stratified", FieldType::Boolean, "stratify folds by label"},
        {"experiment.nested", "nested", FieldType::Boolean, "select hyperparameters inside each outer fold"},
        {"experiment.grid", "grid", FieldType::RealList, "C or lambda grid, comma separated"},
        {"experiment.gamma", "gamma", FieldType::RealList, "RBF gamma grid, comma separated"},
        {"experiment.n_trees", "n-trees", FieldType::Integer, "random forest size"},
        {"radiomics.bin_width", "bin-width", FieldType::Real, "HU bin width"},
        {"radiomics.glcm_distance", "glcm-distance", FieldType::Integer, "co-occurrence distance in voxels"},
        {"radiomics.connectivity", "connectivity", FieldType::Integer, "zone connectivity (6, 18, 26)"},
        {"preprocess.target_spacing_mm", "target-spacing", FieldType::Real, "isotropic resampling spacing"},
        {"preprocess.hu_floor", "hu-floor", FieldType::Real, "HU clamp lower bound"},
        {"preprocess.hu_ceiling", "hu-ceiling", FieldType::Real, "HU clamp upper bound"},
        {"preprocess.consensus_level", "consensus-level", FieldType::Real, "annotator agreement fraction"},
        {"fixtures.count", "count", FieldType::Integer, "number of phantom nodules"},
        {"fixtures.cnn_width", "cnn-width", FieldType::Integer, "pooled CNN feature width"},
    };
    return fields;
}

ExperimentConfig parse_config(std::string_view toml_text, const fs::path& base_dir, std::string_view source_name) {
    toml::table root;
    try {
        root = toml::parse(toml_text, source_name);
    } catch (const toml::parse_error& e) {
        const auto& where = e.source().begin;
        throw Error(ErrorKind::Config, std::string(source_name) + ":" + std::to_string(where.line) + ":" +
                                           std::to_string(where.column) + ": " + std::string(e.description()));
    }
    ExperimentConfig config;
    std::vector<std::string> errors;
    walk(root, "", config, base_dir, errors);
    if (!errors.empty()) throw_field_errors(std::string(source_name) + ": invalid configuration", errors);
    return config;
}

ExperimentConfig load_config(const fs::path& path) {
    const std::string text = read_file(path);
    return parse_config(text, path.parent_path(), path.string());
}

void set_field(ExperimentConfig& config, std::string_view key, std::string_view text) {
    const FieldSpec* spec = find_field(key);
    if (!spec) throw Error(ErrorKind::Config, std::string(key) + ": unknown key");
    try {
        assign(config, key, from_text(text, *spec));
    } catch (const BadField& e) {
        throw Error(ErrorKind::Config, "--" + std::string(spec->flag) + " (" + std::string(key) + "): " + e.message);
    }
}

std::uint64_t resolve_seed(const ExperimentConfig& config) {
    if (config.seed) return *config.seed;
    if (const char* env = std::getenv("CONRAD_SEED"); env && *env) {
        const std::string_view s(env);
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            throw Error(ErrorKind::Config, "CONRAD_SEED: '" + std::string(s) + "' is not a non-negative integer");
        }
        return v;
    }
    return 0;
}

std::vector<std::string> validation_errors(const ExperimentConfig& c, Command command) {
    std::vector<std::string> errors;
    auto need_dir = [&](std::string_view key, const fs::path& p) {
        if (p.empty()) errors.push_back(std::string(key) + ": required");
        else if (!fs::is_directory(p)) errors.push_back(std::string(key) + ": directory '" + p.string() + "' does not exist");
    };
    auto need_file = [&](std::string_view key, const fs::path& p) {
        if (p.empty()) errors.push_back(std::string(key) + ": required");
        else if (!fs::is_regular_file(p)) errors.push_back(std::string(key) + ": file '" + p.string() + "' does not exist");
    };
    auto need_output = [&](std::string_view key, const fs::path& p) {
        if (p.empty()) errors.push_back(std::string(key) + ": required");
    };

    if (c.jobs < 1) errors.push_back("jobs: must be >= 1, got " + std::to_string(c.jobs));

    const evaluation::Ablation* ablation = nullptr;
    std::optional<learners::ClassifierKind> kind;
    const bool uses_ablation = command == Command::Fuse || command == Command::Evaluate;
    if (uses_ablation) {
        try {
            ablation = &evaluation::parse_ablation(c.features);
        } catch (const Error& e) {
            errors.push_back("experiment.features: " + std::string(e.what()));
        }
    }
    if (command == Command::Evaluate) {
        try {
            kind = learners::parse_classifier(c.classifier);
        } catch (const Error& e) {
            errors.push_back("experiment.classifier: " + std::string(e.what()));
        }
    }
    if (command == Command::Evaluate || command == Command::Matrix || command == Command::Fixtures ||
        command == Command::Ingest) {
        if (c.k < 2) errors.push_back("experiment.k: must be >= 2, got " + std::to_string(c.k));
    }
    if (command == Command::Evaluate || command == Command::Matrix) {
        if (c.n_trees < 1) errors.push_back("experiment.n_trees: must be >= 1, got " + std::to_string(c.n_trees));
        for (double g : c.gamma)
            if (!(g > 0.0)) errors.push_back("experiment.gamma: values must be > 0");
        if (command == Command::Matrix && !c.grid.empty()) {
            errors.push_back("experiment.grid: matrix runs use each classifier's default grid");
        }
        if (command == Command::Matrix && !c.gamma.empty()) {
            errors.push_back("experiment.gamma: matrix runs use each classifier's default grid");
        }
        if (kind && !c.grid.empty()) {
            using learners::ClassifierKind;
            if (*kind == ClassifierKind::Logreg || *kind == ClassifierKind::RandomForest) {
                errors.push_back("experiment.grid: " + std::string(learners::to_string(*kind)) + " has no tuned hyperparameter");
            }
            for (double v : c.grid) {
                const bool ok = *kind == ClassifierKind::LogregLasso ? v >= 0.0 : v > 0.0;
                if (!ok || !std::isfinite(v)) {
                    errors.push_back("experiment.grid: value " + std::to_string(v) + " is not admissible");
                    break;
                }
            }
        }
        if (kind && !c.gamma.empty() && *kind != learners::ClassifierKind::SvmRbf) {
            errors.push_back("experiment.gamma: only used by svm-rbf");
        }
    }

    switch (command) {
        case Command::Fixtures:
            need_output("paths.out", c.paths.out);
            if (c.fixture_count < 2 * static_cast<std::size_t>(std::max(c.k, 1)))
                errors.push_back("fixtures.count: need at least 2*k nodules");
            if (c.cnn_width < 1) errors.push_back("fixtures.cnn_width: must be >= 1");
            break;
        case Command::Ingest:
            need_dir("paths.cohort", c.paths.cohort);
            need_output("paths.out", c.paths.out);
            if (!(c.preprocess.target_spacing_mm > 0.0)) errors.push_back("preprocess.target_spacing_mm: must be > 0");
            if (!(c.preprocess.hu_floor < c.preprocess.hu_ceiling))
                errors.push_back("preprocess.hu_floor: must be below preprocess.hu_ceiling");
            if (!(c.preprocess.consensus_level > 0.0 && c.preprocess.consensus_level <= 1.0))
                errors.push_back("preprocess.consensus_level: must lie in (0, 1]");
            break;
        case Command::Extract:
            need_dir("paths.records", c.paths.records);
            need_output("paths.radiomics", c.paths.radiomics);
            if (!(c.radiomics.bin_width > 0.0)) errors.push_back("radiomics.bin_width: must be > 0");
            if (c.radiomics.glcm_distance < 1) errors.push_back("radiomics.glcm_distance: must be >= 1");
            if (c.radiomics.zone_connectivity != 6 && c.radiomics.zone_connectivity != 18 && c.radiomics.zone_connectivity != 26)
                errors.push_back("radiomics.connectivity: must be 6, 18 or 26");
            break;
        case Command::Fuse:
        case Command::Evaluate:
            if (ablation) {
                if (ablation->radiomics) need_file("paths.radiomics", c.paths.radiomics);
                if (ablation->biomarkers) need_file("paths.biomarkers", c.paths.biomarkers);
                if (ablation->cnn) need_file("paths.cnn", c.paths.cnn);
            }
            if (command == Command::Fuse) {
                need_output("paths.fused", c.paths.fused);
            } else {
                need_file("paths.labels", c.paths.labels);
                need_output("paths.out", c.paths.out);
            }
            break;
        case Command::Matrix:
            need_file("paths.radiomics", c.paths.radiomics);
            need_file("paths.biomarkers", c.paths.biomarkers);
            need_file("paths.cnn", c.paths.cnn);
            need_file("paths.labels", c.paths.labels);
            need_output("paths.out", c.paths.out);
            break;
    }
    return errors;
}

void validate(const ExperimentConfig& config, Command command) {
    const auto errors = validation_errors(config, command);
    if (!errors.empty()) throw_field_errors("invalid configuration for '" + std::string(to_string(command)) + "'", errors);
}

}  // namespace conrad::cli
