#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "conrad/error.hpp"
#include "conrad/learners.hpp"

namespace conrad::learners {

DesignMatrix::DesignMatrix(std::vector<std::string> names, std::size_t rows, std::vector<double> values)
    : names_(std::move(names)), rows_(rows), values_(std::move(values)) {
    if (values_.size() != rows_ * names_.size()) {
        throw Error(ErrorKind::InvalidInput, "design matrix holds " + std::to_string(values_.size()) + " values for " +
                                                 std::to_string(rows_) + " x " + std::to_string(names_.size()));
    }
    std::unordered_set<std::string> seen;
    for (const auto& n : names_) {
        if (!seen.insert(n).second) throw Error(ErrorKind::InvalidInput, "duplicate column name '" + n + "'");
    }
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!std::isfinite(values_[k])) {
            throw Error(ErrorKind::InvalidInput, "non-finite value in row " + std::to_string(k / std::max<std::size_t>(1, cols())) +
                                                     ", column '" + names_[k % cols()] + "'");
        }
    }
}

DesignMatrix DesignMatrix::select_rows(std::span<const std::size_t> indices) const {
    std::vector<double> out;
    out.reserve(indices.size() * cols());
    for (std::size_t i : indices) {
        if (i >= rows_) throw Error(ErrorKind::OutOfBounds, "row " + std::to_string(i) + " out of range");
        const auto r = row(i);
        out.insert(out.end(), r.begin(), r.end());
    }
    return DesignMatrix(names_, indices.size(), std::move(out));
}

DesignMatrix DesignMatrix::select_columns(std::span<const std::string> wanted) const {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < names_.size(); ++j) index.emplace(names_[j], j);
    std::vector<std::size_t> cols_idx;
    for (const auto& w : wanted) {
        auto it = index.find(w);
        if (it == index.end()) throw Error(ErrorKind::Contract, "missing column '" + w + "'");
        cols_idx.push_back(it->second);
    }
    std::vector<double> out;
    out.reserve(rows_ * cols_idx.size());
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j : cols_idx) out.push_back((*this)(i, j));
    return DesignMatrix(std::vector<std::string>(wanted.begin(), wanted.end()), rows_, std::move(out));
}

void check_binary_labels(std::span<const int> y, std::size_t n, bool require_both) {
    if (y.size() != n) {
        throw Error(ErrorKind::InvalidInput, std::to_string(y.size()) + " labels for " + std::to_string(n) + " rows");
    }
    bool neg = false, pos = false;
    for (int v : y) {
        if (v != 0 && v != 1) throw Error(ErrorKind::InvalidInput, "labels must be 0 or 1, got " + std::to_string(v));
        (v == 1 ? pos : neg) = true;
    }
    if (require_both && !(neg && pos)) throw Error(ErrorKind::InvalidInput, "training labels contain a single class");
}

Standardizer Standardizer::fit(const DesignMatrix& x) {
    if (x.rows() == 0) throw Error(ErrorKind::InvalidInput, "cannot standardize an empty matrix");
    Standardizer s;
    s.names = x.names();
    s.mean.assign(x.cols(), 0.0);
    s.stddev.assign(x.cols(), 0.0);
    const double n = static_cast<double>(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) s.mean[j] += x(i, j);
    for (auto& m : s.mean) m /= n;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) s.stddev[j] += (x(i, j) - s.mean[j]) * (x(i, j) - s.mean[j]);
    for (auto& v : s.stddev) v = std::sqrt(v / n);
    return s;
}

DesignMatrix Standardizer::apply(const DesignMatrix& x) const {
    if (x.names() != names) {
        for (std::size_t j = 0; j < std::max(x.cols(), names.size()); ++j) {
            const std::string got = j < x.cols() ? x.names()[j] : "<none>";
            const std::string want = j < names.size() ? names[j] : "<none>";
            if (got != want) {
                throw Error(ErrorKind::Contract,
                            "column " + std::to_string(j) + " is '" + got + "', expected '" + want + "'");
            }
        }
    }
    std::vector<double> out(x.values().begin(), x.values().end());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            double& v = out[i * x.cols() + j];
            v = stddev[j] > 0.0 ? (v - mean[j]) / stddev[j] : 0.0;
        }
    }
    return DesignMatrix(names, x.rows(), std::move(out));
}

double LinearModel::decision(std::span<const double> x) const noexcept {
    double s = intercept;
    for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * x[j];
    return s;
}

LinearModel fold_standardization(const LinearModel& m, const Standardizer& s) {
    LinearModel out = m;
    for (std::size_t j = 0; j < m.weights.size(); ++j) {
        if (s.stddev[j] > 0.0) {
            out.weights[j] = m.weights[j] / s.stddev[j];
            out.intercept -= out.weights[j] * s.mean[j];
        } else {
            out.weights[j] = 0.0;
        }
    }
    return out;
}

std::string_view to_string(ClassifierKind k) noexcept { return kClassifierNames[static_cast<std::size_t>(k)]; }

ClassifierKind parse_classifier(std::string_view name) {
    for (std::size_t k = 0; k < kClassifierNames.size(); ++k)
        if (kClassifierNames[k] == name) return static_cast<ClassifierKind>(k);
    std::string valid;
    for (auto n : kClassifierNames) valid += (valid.empty() ? "" : ", ") + std::string(n);
    throw Error(ErrorKind::Config, "unknown classifier '" + std::string(name) + "'; valid names: " + valid);
}

TrainedModel train(ClassifierKind kind, const DesignMatrix& x, std::span<const int> y, const Hyperparameters& hyper) {
    TrainedModel m;
    m.kind = kind;
    m.hyper = hyper;
    m.feature_names = x.names();
    m.standardizer = Standardizer::fit(x);
    const DesignMatrix z = m.standardizer.apply(x);
    switch (kind) {
        case ClassifierKind::SvmLinear:
            m.payload = svm_fit(z, y, hyper.c, Kernel{KernelKind::Linear, 0.0});
            break;
        case ClassifierKind::SvmRbf:
            if (!(m.hyper.gamma > 0.0)) m.hyper.gamma = 1.0 / static_cast<double>(std::max<std::size_t>(1, z.cols()));
            m.payload = svm_fit(z, y, hyper.c, Kernel{KernelKind::Rbf, m.hyper.gamma});
            break;
        case ClassifierKind::Logreg:
            m.hyper.lambda = 0.0;
            m.payload = logistic_fit(z, y);
            break;
        case ClassifierKind::LogregLasso: {
            LogisticOptions opt;
            opt.l1_lambda = hyper.lambda;
            m.payload = logistic_fit(z, y, opt);
            break;
        }
        case ClassifierKind::RandomForest:
            m.payload = forest_fit(z, y, ForestOptions{hyper.n_trees, hyper.seed});
            break;
    }
    return m;
}

double TrainedModel::threshold() const noexcept {
    return (kind == ClassifierKind::SvmLinear || kind == ClassifierKind::SvmRbf) ? 0.0 : 0.5;
}

std::vector<double> TrainedModel::scores(const DesignMatrix& x) const {
    const DesignMatrix z = standardizer.apply(x);
    std::vector<double> out(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const auto r = z.row(i);
        out[i] = std::visit(
            [&](const auto& model) -> double {
                using T = std::decay_t<decltype(model)>;
                if constexpr (std::is_same_v<T, LinearModel>) return logistic_probability(model.decision(r));
                else if constexpr (std::is_same_v<T, KernelModel>) return model.decision(r);
                else return model.probability(r);
            },
            payload);
    }
    return out;
}

std::vector<int> TrainedModel::labels(const DesignMatrix& x) const {
    const auto s = scores(x);
    std::vector<int> out(s.size());
    const double t = threshold();
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] >= t ? 1 : 0;
    return out;
}

}  // namespace conrad::learners
