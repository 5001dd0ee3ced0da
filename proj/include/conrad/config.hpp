#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "conrad/ingest.hpp"
#include "conrad/radiomics.hpp"

namespace conrad::cli {

enum class Command { Fixtures, Ingest, Extract, Fuse, Evaluate, Matrix };

std::string_view to_string(Command c) noexcept;

struct Paths {
    std::filesystem::path cohort;      // annotation files (ingest input)
    std::filesystem::path records;     // ingest output directory (extract input)
    std::filesystem::path out;         // output directory
    std::filesystem::path radiomics;   // radiomics CSV
    std::filesystem::path biomarkers;  // predicted biomarkers CSV
    std::filesystem::path cnn;         // pooled CNN features CSV
    std::filesystem::path labels;      // nodule_id,label CSV
    std::filesystem::path fused;       // fused feature CSV (fuse output)
};

struct ExperimentConfig {
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    Paths paths;

    std::string features = "bio+rad";
    std::string classifier = "logreg-lasso";
    int k = 5;
    bool stratified = true;
    bool nested = false;
    std::vector<double> grid;   // C (svm) or lambda (lasso); empty = default grid
    std::vector<double> gamma;  // rbf kernel widths; empty = {0.1, 1, 10} / n_features
    int n_trees = 200;

    radiomics::Settings radiomics;
    ingest::PreprocessSettings preprocess;

    std::size_t fixture_count = 200;
    std::size_t cnn_width = 2048;
};

enum class FieldType { Integer, Real, Boolean, Text, Path, RealList };

struct FieldSpec {
    std::string_view key;   // dotted TOML key
    std::string_view flag;  // long flag name without dashes
    FieldType type;
    std::string_view help;
};

/// Every configurable field. The TOML loader and the flag layer share it.
const std::vector<FieldSpec>& config_fields();

/// Parses TOML text. Relative paths resolve against `base_dir`. Every bad or
/// unknown field is reported in a single Config error, one line per field.
ExperimentConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir,
                              std::string_view source_name = "config");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies a flag value given as text; relative paths stay relative to the
/// working directory. Throws a Config error naming the field.
void set_field(ExperimentConfig& config, std::string_view key, std::string_view text);

/// Flag or file value, then the CONRAD_SEED environment variable, then 0.
std::uint64_t resolve_seed(const ExperimentConfig& config);

/// Problems with the fields `command` uses, one entry per field.
std::vector<std::string> validation_errors(const ExperimentConfig& config, Command command);

/// Throws a Config error listing every validation problem.
void validate(const ExperimentConfig& config, Command command);

}  // namespace conrad::cli
