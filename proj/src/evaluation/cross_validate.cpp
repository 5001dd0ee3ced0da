#include <algorithm>
#include <unordered_map>

#include "conrad/error.hpp"
#include "conrad/evaluation.hpp"
#include "conrad/parallel.hpp"

namespace conrad::evaluation {

namespace {

using learners::ClassifierKind;
using learners::DesignMatrix;
using learners::Hyperparameters;

struct Split {
    std::vector<std::size_t> train, test;
};

Split split_rows(std::span<const int> folds, int f) {
    Split s;
    for (std::size_t i = 0; i < folds.size(); ++i) (folds[i] == f ? s.test : s.train).push_back(i);
    return s;
}

std::vector<int> gather(std::span<const int> y, std::span<const std::size_t> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (std::size_t i : rows) out.push_back(y[i]);
    return out;
}

struct FoldRun {
    FoldResult result;
    learners::TrainedModel model;
};

FoldRun run_fold(const DesignMatrix& x, std::span<const int> y, ClassifierKind kind, const Hyperparameters& hyper,
                 std::span<const int> folds, int f) {
    const Split s = split_rows(folds, f);
    if (s.test.empty()) throw Error(ErrorKind::InvalidInput, "fold " + std::to_string(f) + " has no rows");
    const DesignMatrix train_x = x.select_rows(s.train);
    const auto train_y = gather(y, s.train);
    const DesignMatrix test_x = x.select_rows(s.test);
    const auto test_y = gather(y, s.test);

    FoldRun run;
    run.model = learners::train(kind, train_x, train_y, hyper);
    const auto scores = run.model.scores(test_x);
    std::vector<int> predicted(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) predicted[i] = scores[i] >= run.model.threshold() ? 1 : 0;

    FoldResult& r = run.result;
    r.fold = f;
    r.n_train = s.train.size();
    r.n_test = s.test.size();
    r.counts = confusion(test_y, predicted);
    r.recall = recall(r.counts);
    r.precision = precision(r.counts);
    r.accuracy = accuracy(r.counts);
    r.roc = roc_curve(scores, test_y);
    if (!r.roc.empty()) r.auc = roc_area(r.roc);
    r.hyper = run.model.hyper;
    if (!r.recall) r.flags.emplace_back("recall undefined: no positive sample in the test fold");
    if (!r.precision) r.flags.emplace_back("precision undefined: no positive prediction in the test fold");
    if (!r.auc) r.flags.emplace_back("auc undefined: the test fold holds a single class");
    return run;
}

template <class Get>
std::optional<double> mean_of(const std::vector<FoldResult>& folds, Get get, std::size_t& used) {
    double s = 0.0;
    used = 0;
    for (const auto& f : folds) {
        if (const std::optional<double> v = get(f)) {
            s += *v;
            ++used;
        }
    }
    if (used == 0) return std::nullopt;
    return s / static_cast<double>(used);
}

}  // namespace

CvResult cross_validate(const FeatureTable& table, std::span<const int> labels, const ModelSpec& spec, const FoldPlan& plan,
                        int jobs, FoldArtifacts* artifacts, const FoldHyperSelector& selector) {
    learners::check_binary_labels(labels, table.rows(), false);
    const DesignMatrix x = table.design();
    const auto folds = row_folds(table, plan);

    std::vector<FoldRun> runs(static_cast<std::size_t>(plan.k));
    parallel_for(runs.size(), jobs, [&](std::size_t f) {
        Hyperparameters hyper = spec.hyper;
        if (selector) {
            const Split s = split_rows(folds, static_cast<int>(f));
            hyper = selector(x.select_rows(s.train), gather(labels, s.train), static_cast<int>(f));
        }
        runs[f] = run_fold(x, labels, spec.kind, hyper, folds, static_cast<int>(f));
    });

    CvResult out;
    for (auto& r : runs) out.folds.push_back(std::move(r.result));
    if (artifacts) {
        artifacts->models.clear();
        for (auto& r : runs) artifacts->models.push_back(std::move(r.model));
    }
    std::size_t acc_used = 0;
    out.mean.recall = mean_of(out.folds, [](const FoldResult& f) { return f.recall; }, out.mean.recall_folds);
    out.mean.precision = mean_of(out.folds, [](const FoldResult& f) { return f.precision; }, out.mean.precision_folds);
    out.mean.accuracy = mean_of(out.folds, [](const FoldResult& f) { return std::optional<double>(f.accuracy); }, acc_used);
    out.mean.auc = mean_of(out.folds, [](const FoldResult& f) { return f.auc; }, out.mean.auc_folds);

    out.roc_fpr = roc_grid();
    out.roc_tpr_mean.assign(out.roc_fpr.size(), 0.0);
    std::size_t curves = 0;
    for (const auto& f : out.folds) {
        if (f.roc.empty()) continue;
        const auto t = interpolate_tpr(f.roc, out.roc_fpr);
        for (std::size_t g = 0; g < t.size(); ++g) out.roc_tpr_mean[g] += t[g];
        ++curves;
    }
    if (curves > 0)
        for (auto& v : out.roc_tpr_mean) v /= static_cast<double>(curves);
    return out;
}

std::vector<Hyperparameters> default_grid(ClassifierKind kind, std::size_t n_features, const Hyperparameters& base) {
    std::vector<Hyperparameters> grid;
    auto with = [&](auto&& edit) {
        Hyperparameters h = base;
        edit(h);
        grid.push_back(h);
    };
    switch (kind) {
        case ClassifierKind::LogregLasso:
            for (double l : {0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001}) with([&](Hyperparameters& h) { h.lambda = l; });
            break;
        case ClassifierKind::SvmLinear:
            for (double c : {0.001, 0.01, 0.1, 1.0, 10.0, 100.0}) with([&](Hyperparameters& h) { h.c = c; });
            break;
        case ClassifierKind::SvmRbf: {
            const double d = static_cast<double>(std::max<std::size_t>(1, n_features));
            for (double c : {0.1, 1.0, 10.0, 100.0})
                for (double g : {0.1, 1.0, 10.0})
                    with([&](Hyperparameters& h) {
                        h.c = c;
                        h.gamma = g / d;
                    });
            break;
        }
        case ClassifierKind::Logreg:
        case ClassifierKind::RandomForest:
            grid.push_back(base);
            break;
    }
    return grid;
}

GridResult grid_select(const DesignMatrix& x, std::span<const int> labels, ClassifierKind kind,
                       std::span<const Hyperparameters> grid, std::span<const int> folds, int k, int jobs) {
    if (grid.empty()) throw Error(ErrorKind::Config, "hyperparameter grid is empty");
    if (folds.size() != x.rows()) throw Error(ErrorKind::Contract, "fold vector does not match the rows");
    const std::size_t kk = static_cast<std::size_t>(k);
    std::vector<double> acc(grid.size() * kk, 0.0);
    parallel_for(acc.size(), jobs, [&](std::size_t t) {
        acc[t] = run_fold(x, labels, kind, grid[t / kk], folds, static_cast<int>(t % kk)).result.accuracy;
    });

    GridResult r;
    std::size_t best = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double s = 0.0;
        for (std::size_t f = 0; f < kk; ++f) s += acc[g * kk + f];
        r.points.push_back({grid[g], s / static_cast<double>(kk)});
        if (r.points[g].mean_accuracy > r.points[best].mean_accuracy) best = g;
    }
    r.best = grid[best];
    return r;
}

Census lasso_census(const learners::TrainedModel& model, const FeatureTable& table) {
    if (model.kind != ClassifierKind::LogregLasso) {
        throw Error(ErrorKind::Contract, "a selection census needs an L1 logistic model, got " + std::string(to_string(model.kind)));
    }
    const auto& lm = std::get<learners::LinearModel>(model.payload);
    std::unordered_map<std::string, Source> tag;
    for (std::size_t j = 0; j < table.cols(); ++j) tag.emplace(table.columns()[j], table.sources()[j]);

    Census c;
    c.total_columns = model.feature_names.size();
    for (auto s : {Source::Biomarker, Source::Radiomic, Source::Cnn}) {
        for (const auto& n : model.feature_names) {
            auto it = tag.find(n);
            if (it != tag.end() && it->second == s) {
                c.by_source.emplace(std::string(to_string(s)), 0);
                break;
            }
        }
    }
    for (std::size_t j = 0; j < lm.weights.size(); ++j) {
        if (lm.weights[j] == 0.0) continue;
        const auto& name = model.feature_names[j];
        c.selected.push_back(name);
        auto it = tag.find(name);
        if (it == tag.end()) throw Error(ErrorKind::Contract, "model column '" + name + "' is not in the table");
        ++c.by_source[std::string(to_string(it->second))];
    }
    c.percentage = c.total_columns > 0 ? 100.0 * static_cast<double>(c.selected.size()) / static_cast<double>(c.total_columns) : 0.0;
    return c;
}

EvalReport evaluate(const FeatureTable& table, std::span<const int> labels, ClassifierKind kind, std::string_view feature_set,
                    const EvalOptions& options, FoldArtifacts* artifacts) {
    learners::check_binary_labels(labels, table.rows(), true);
    EvalReport report;
    report.classifier = std::string(to_string(kind));
    report.feature_set = std::string(feature_set);
    report.n_samples = table.rows();
    report.n_features = table.cols();
    report.options = options;

    Hyperparameters base = options.base;
    base.seed = options.seed;
    std::vector<Hyperparameters> grid = options.grid ? *options.grid : default_grid(kind, table.cols(), base);
    for (auto& h : grid) h.seed = options.seed;

    const FoldPlan plan = make_folds(table.ids(), labels, options.k, options.seed, options.stratified);
    const auto folds = row_folds(table, plan);
    const DesignMatrix x = table.design();

    if (grid.size() > 1) {
        report.grid = grid_select(x, labels, kind, grid, folds, options.k, options.jobs);
        report.selected = report.grid->best;
    } else {
        report.selected = grid.front();
    }

    FoldHyperSelector selector;
    if (options.nested && grid.size() > 1) {
        selector = [&](const DesignMatrix& train_x, std::span<const int> train_y, int f) {
            std::vector<std::string> inner_ids;
            for (std::size_t i = 0; i < folds.size(); ++i)
                if (folds[i] != f) inner_ids.push_back(table.ids()[i]);
            const FoldPlan inner = make_folds(inner_ids, train_y, options.k, options.seed, options.stratified);
            std::unordered_map<std::string_view, int> lookup;
            for (std::size_t i = 0; i < inner.ids.size(); ++i) lookup.emplace(inner.ids[i], inner.fold[i]);
            std::vector<int> inner_folds;
            for (const auto& id : inner_ids) inner_folds.push_back(lookup.at(id));
            return grid_select(train_x, train_y, kind, grid, inner_folds, options.k, 1).best;
        };
    }
    report.cv = cross_validate(table, labels, ModelSpec{kind, report.selected}, plan, options.jobs, artifacts, selector);

    if (kind == ClassifierKind::LogregLasso) {
        const auto full = learners::train(kind, x, labels, report.selected);
        report.census = lasso_census(full, table);
    }
    return report;
}

}  // namespace conrad::evaluation
