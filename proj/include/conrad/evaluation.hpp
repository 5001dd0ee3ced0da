#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "conrad/learners.hpp"

namespace conrad::evaluation {

enum class Source { Radiomic, Biomarker, Cnn };

std::string_view to_string(Source s) noexcept;

/// Rows keyed by unique nodule ids; every column carries a source tag.
class FeatureTable {
public:
    FeatureTable() = default;
    FeatureTable(std::vector<std::string> ids, std::vector<std::string> columns, std::vector<Source> sources,
                 std::vector<double> values);

    [[nodiscard]] std::size_t rows() const noexcept { return ids_.size(); }
    [[nodiscard]] std::size_t cols() const noexcept { return columns_.size(); }
    [[nodiscard]] const std::vector<std::string>& ids() const noexcept { return ids_; }
    [[nodiscard]] const std::vector<std::string>& columns() const noexcept { return columns_; }
    [[nodiscard]] const std::vector<Source>& sources() const noexcept { return sources_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double at(std::size_t row, std::size_t col) const noexcept { return values_[row * cols() + col]; }

    [[nodiscard]] learners::DesignMatrix design() const;

private:
    std::vector<std::string> ids_;
    std::vector<std::string> columns_;
    std::vector<Source> sources_;
    std::vector<double> values_;
};

/// CSV with a `nodule_id` first column and one column per feature. Columns
/// named in `ignore` (such as a fold tag) are skipped.
FeatureTable read_feature_csv(const std::filesystem::path& path, Source source,
                              std::span<const std::string> ignore = {});
std::string feature_csv_text(const FeatureTable& t);

/// `nodule_id,label` CSV.
std::map<std::string, int> read_labels_csv(const std::filesystem::path& path);
learners::Labels align_labels(const FeatureTable& t, const std::map<std::string, int>& labels);

struct Ablation {
    std::string_view name;
    bool cnn;
    bool biomarkers;
    bool radiomics;
};

inline constexpr std::array<Ablation, 7> kAblations = {{
    {"biomarkers", false, true, false},
    {"radiomics", false, false, true},
    {"bio+rad", false, true, true},
    {"cnn", true, false, false},
    {"cnn+rad", true, false, true},
    {"cnn+bio", true, true, false},
    {"all", true, true, true},
}};

/// Accepts the names above plus the aliases bio, rad and conrad.
const Ablation& parse_ablation(std::string_view name);

inline constexpr std::string_view kDiameterColumn = "diameter";

/// Inner join on nodule_id (rows sorted by id) of the sources the ablation
/// needs. The biomarker diameter is dropped when radiomics are present.
FeatureTable fuse(std::span<const FeatureTable> sources, const Ablation& ablation);

struct FoldPlan {
    int k = 5;
    std::uint64_t seed = 0;
    bool stratified = true;
    std::vector<std::string> ids;
    std::vector<int> fold;  // parallel to ids

    [[nodiscard]] int fold_of(std::string_view id) const;
};

/// Fold index of each table row.
std::vector<int> row_folds(const FeatureTable& table, const FoldPlan& plan);

FoldPlan make_folds(std::span<const std::string> ids, std::span<const int> labels, int k, std::uint64_t seed,
                    bool stratified = true);
std::string fold_plan_json(const FoldPlan& plan);
FoldPlan fold_plan_from_json(std::string_view text);

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

Confusion confusion(std::span<const int> truth, std::span<const int> predicted);
std::optional<double> recall(const Confusion& c);
std::optional<double> precision(const Confusion& c);
double accuracy(const Confusion& c);

struct RocPoint {
    double threshold;
    double fpr;
    double tpr;
};

/// One point per distinct score (descending) between the +inf and -inf
/// endpoints; a sample is positive when score >= threshold.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);
/// Trapezoidal area; empty when either class is absent.
std::optional<double> auc(std::span<const double> scores, std::span<const int> labels);
double roc_area(std::span<const RocPoint> curve);

inline constexpr double kRocGridStep = 0.01;
std::vector<double> roc_grid();
/// Highest TPR reached at or below each grid FPR, linearly interpolated
/// between curve points.
std::vector<double> interpolate_tpr(std::span<const RocPoint> curve, std::span<const double> grid);

struct ModelSpec {
    learners::ClassifierKind kind = learners::ClassifierKind::Logreg;
    learners::Hyperparameters hyper;
};

struct FoldResult {
    int fold = 0;
    std::size_t n_train = 0, n_test = 0;
    Confusion counts;
    std::optional<double> recall, precision, auc;
    double accuracy = 0.0;
    std::vector<RocPoint> roc;
    learners::Hyperparameters hyper;
    std::vector<std::string> flags;
};

struct MeanMetrics {
    std::optional<double> recall, precision, accuracy, auc;
    std::size_t recall_folds = 0, precision_folds = 0, auc_folds = 0;
};

struct CvResult {
    std::vector<FoldResult> folds;
    MeanMetrics mean;
    std::vector<double> roc_fpr;
    std::vector<double> roc_tpr_mean;
};

/// Train-side state of each fold, kept for inspection.
struct FoldArtifacts {
    std::vector<learners::TrainedModel> models;
};

/// Chooses hyperparameters from a fold's training rows. Without one,
/// ModelSpec::hyper is used for every fold.
using FoldHyperSelector =
    std::function<learners::Hyperparameters(const learners::DesignMatrix& train, std::span<const int> labels, int fold)>;

CvResult cross_validate(const FeatureTable& table, std::span<const int> labels, const ModelSpec& spec, const FoldPlan& plan,
                        int jobs = 1, FoldArtifacts* artifacts = nullptr, const FoldHyperSelector& selector = {});

struct GridPoint {
    learners::Hyperparameters hyper;
    double mean_accuracy = 0.0;
};

struct GridResult {
    std::vector<GridPoint> points;  // ordered from strongest to weakest regularization
    learners::Hyperparameters best;
};

/// Grid ordered from strongest to weakest regularization: larger lambda,
/// smaller C, smaller gamma first.
std::vector<learners::Hyperparameters> default_grid(learners::ClassifierKind kind, std::size_t n_features,
                                                    const learners::Hyperparameters& base);

/// Mean CV accuracy per point; ties go to the earliest (most regularized) point.
GridResult grid_select(const learners::DesignMatrix& x, std::span<const int> labels, learners::ClassifierKind kind,
                       std::span<const learners::Hyperparameters> grid, std::span<const int> folds, int k, int jobs = 1);

struct Census {
    std::vector<std::string> selected;
    std::size_t total_columns = 0;
    double percentage = 0.0;
    std::map<std::string, std::size_t> by_source;
};

Census lasso_census(const learners::TrainedModel& model, const FeatureTable& table);

struct EvalOptions {
    int k = 5;
    std::uint64_t seed = 0;
    bool stratified = true;
    bool nested = false;
    std::optional<std::vector<learners::Hyperparameters>> grid;
    learners::Hyperparameters base;
    int jobs = 1;
};

struct EvalReport {
    std::string classifier;
    std::string feature_set;
    std::size_t n_samples = 0;
    std::size_t n_features = 0;
    EvalOptions options;
    std::optional<GridResult> grid;
    learners::Hyperparameters selected;
    CvResult cv;
    std::optional<Census> census;
};

/// Grid selection on the whole table (or per outer fold when nested),
/// cross-validation, and the census of a full-data Lasso fit.
EvalReport evaluate(const FeatureTable& table, std::span<const int> labels, learners::ClassifierKind kind,
                    std::string_view feature_set, const EvalOptions& options, FoldArtifacts* artifacts = nullptr);

inline constexpr int kReportSchemaVersion = 1;

std::string report_json(const EvalReport& r);
std::string metrics_csv_header();
std::string metrics_csv_row(const EvalReport& r);
std::string roc_csv(const EvalReport& r);

/// Problems found checking a report document (ours or an external producer's)
/// against the report schema; empty when it conforms.
std::vector<std::string> report_schema_errors(std::string_view json_text);

}  // namespace conrad::evaluation
