#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace conrad::learners {

/// Dense row-major sample matrix with unique column names and finite values.
class DesignMatrix {
public:
    DesignMatrix() = default;
    DesignMatrix(std::vector<std::string> names, std::size_t rows, std::vector<double> values);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return names_.size(); }
    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept { return {values_.data() + i * cols(), cols()}; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols() + j]; }

    [[nodiscard]] DesignMatrix select_rows(std::span<const std::size_t> indices) const;
    [[nodiscard]] DesignMatrix select_columns(std::span<const std::string> names) const;

private:
    std::vector<std::string> names_;
    std::size_t rows_ = 0;
    std::vector<double> values_;
};

/// Labels are 0 (benign) or 1 (malignant).
using Labels = std::vector<int>;

void check_binary_labels(std::span<const int> y, std::size_t n, bool require_both);

/// Per-column z-normalization fitted on training rows. Zero-variance
/// columns map to 0.
struct Standardizer {
    std::vector<std::string> names;
    std::vector<double> mean;
    std::vector<double> stddev;

    static Standardizer fit(const DesignMatrix& x);
    [[nodiscard]] DesignMatrix apply(const DesignMatrix& x) const;
};

enum class Penalty { None, L1, Hinge };

struct LinearModel {
    std::vector<double> weights;
    double intercept = 0.0;
    Penalty penalty = Penalty::None;
    double strength = 0.0;  // lambda for L1, C for hinge
    int iterations = 0;

    [[nodiscard]] double decision(std::span<const double> x) const noexcept;
};

struct LogisticOptions {
    double l1_lambda = 0.0;
    int max_iterations = 1000;
    double gradient_tolerance = 1e-8;  // unpenalized fits
    double change_tolerance = 1e-8;    // L1 fits
    int max_coordinate_sweeps = 100000;
};

/// lambda_max = ||X^T (y - ybar)||_inf / n; every L1 fit at or above it is the null model.
double lasso_lambda_max(const DesignMatrix& x, std::span<const int> y);

/// Minimizes mean logistic loss + lambda * ||w||_1 with an unpenalized intercept.
LinearModel logistic_fit(const DesignMatrix& x, std::span<const int> y, const LogisticOptions& options = {});

/// Gradient of the mean logistic loss at (w, b); the last entry is the intercept.
std::vector<double> logistic_gradient(const DesignMatrix& x, std::span<const int> y, const LinearModel& m);

double logistic_probability(double decision) noexcept;

enum class KernelKind { Linear, Rbf };

struct Kernel {
    KernelKind kind = KernelKind::Linear;
    double gamma = 1.0;

    [[nodiscard]] double operator()(std::span<const double> a, std::span<const double> b) const noexcept;
};

struct SvmOptions {
    double tolerance = 1e-7;
    long max_iterations = 10'000'000;
};

struct KernelModel {
    std::vector<std::vector<double>> support_vectors;
    std::vector<std::size_t> support_indices;  // rows of the training matrix
    std::vector<double> dual_coef;             // alpha_i * y_i
    double intercept = 0.0;
    Kernel kernel;
    double c = 1.0;
    long iterations = 0;

    [[nodiscard]] double decision(std::span<const double> x) const noexcept;
    /// Primal weights; only defined for the linear kernel.
    [[nodiscard]] LinearModel to_linear() const;
};

/// Soft-margin dual solved by SMO with maximal-violating-pair working sets.
/// Labels 0/1 map to -1/+1.
KernelModel svm_fit(const DesignMatrix& x, std::span<const int> y, double c, Kernel kernel, const SvmOptions& options = {});

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double p_positive = 0.0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // root at 0

    [[nodiscard]] double predict(std::span<const double> x) const noexcept;
};

struct ForestOptions {
    int n_trees = 200;
    std::uint64_t seed = 0;
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    std::uint64_t seed = 0;

    [[nodiscard]] double probability(std::span<const double> x) const noexcept;
};

/// Bootstrap CART ensemble with Gini splits and floor(sqrt(d)) candidate
/// features per node, sampled by a column-name keyed hash.
ForestModel forest_fit(const DesignMatrix& x, std::span<const int> y, const ForestOptions& options = {});

enum class ClassifierKind { SvmLinear, SvmRbf, Logreg, LogregLasso, RandomForest };

inline constexpr std::array<std::string_view, 5> kClassifierNames = {"svm-linear", "svm-rbf", "logreg", "logreg-lasso",
                                                                     "random-forest"};

std::string_view to_string(ClassifierKind k) noexcept;
ClassifierKind parse_classifier(std::string_view name);

struct Hyperparameters {
    double c = 1.0;
    double gamma = 0.0;  // rbf; 0 means 1/d
    double lambda = 0.0;
    int n_trees = 200;
    std::uint64_t seed = 0;
};

using ModelPayload = std::variant<LinearModel, KernelModel, ForestModel>;

/// A fitted classifier bundled with its feature order and standardization.
struct TrainedModel {
    ClassifierKind kind = ClassifierKind::Logreg;
    Hyperparameters hyper;
    std::vector<std::string> feature_names;
    Standardizer standardizer;
    ModelPayload payload;

    /// Decision values for SVMs, probabilities otherwise.
    [[nodiscard]] std::vector<double> scores(const DesignMatrix& x) const;
    [[nodiscard]] std::vector<int> labels(const DesignMatrix& x) const;
    [[nodiscard]] double threshold() const noexcept;
};

/// Standardizes on `x`, fits the requested classifier, and bundles both.
TrainedModel train(ClassifierKind kind, const DesignMatrix& x, std::span<const int> y, const Hyperparameters& hyper);

/// Linear model on raw features equivalent to standardize-then-score.
LinearModel fold_standardization(const LinearModel& m, const Standardizer& s);

inline constexpr int kModelSchemaVersion = 1;

/// Versioned JSON document holding kind, hyperparameters, feature names,
/// normalization and the fitted parameters.
std::string model_to_json(const TrainedModel& m);
TrainedModel model_from_json(std::string_view text);

}  // namespace conrad::learners
