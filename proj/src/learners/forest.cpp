#include <algorithm>
#include <cmath>
#include <numeric>

#include "conrad/error.hpp"
#include "conrad/learners.hpp"
#include "conrad/random.hpp"

namespace conrad::learners {

namespace {

struct Split {
    bool valid = false;
    double impurity = 0.0;  // weighted child impurity, lower is better
    std::size_t rank = 0;   // column position in name order
    int feature = -1;
    double threshold = 0.0;
};

bool better(const Split& a, const Split& b) {
    if (!b.valid) return a.valid;
    if (!a.valid) return false;
    if (a.impurity != b.impurity) return a.impurity < b.impurity;
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.threshold < b.threshold;
}

double weighted_gini(double c0, double c1) {
    const double n = c0 + c1;
    return n > 0.0 ? n - (c0 * c0 + c1 * c1) / n : 0.0;
}

class TreeBuilder {
public:
    TreeBuilder(const DesignMatrix& x, std::span<const int> y, std::span<const std::uint64_t> name_hash,
                std::span<const std::size_t> name_rank, std::uint64_t tree_key)
        : x_(x), y_(y), name_hash_(name_hash), name_rank_(name_rank), tree_key_(tree_key) {
        mtry_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(x.cols())))));
    }

    DecisionTree build(std::vector<std::size_t> samples) {
        grow(std::move(samples));
        return std::move(tree_);
    }

private:
    int grow(std::vector<std::size_t> samples) {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        double c1 = 0.0;
        for (std::size_t s : samples) c1 += y_[s];
        const double c0 = static_cast<double>(samples.size()) - c1;
        tree_.nodes[static_cast<std::size_t>(id)].p_positive = c1 / static_cast<double>(samples.size());
        if (c0 == 0.0 || c1 == 0.0) return id;

        const Split best = find_split(samples, static_cast<std::uint64_t>(id), c0, c1);
        if (!best.valid) return id;

        std::vector<std::size_t> left, right;
        for (std::size_t s : samples) (x_(s, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right).push_back(s);
        samples.clear();
        samples.shrink_to_fit();

        tree_.nodes[static_cast<std::size_t>(id)].feature = best.feature;
        tree_.nodes[static_cast<std::size_t>(id)].threshold = best.threshold;
        const int l = grow(std::move(left));
        const int r = grow(std::move(right));
        tree_.nodes[static_cast<std::size_t>(id)].left = l;
        tree_.nodes[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    // Candidate features in name-keyed priority order; the first mtry are
    // searched, and the search continues only while no valid split exists.
    Split find_split(const std::vector<std::size_t>& samples, std::uint64_t node, double c0, double c1) {
        const std::size_t d = x_.cols();
        const std::uint64_t node_key = splitmix64(tree_key_ ^ splitmix64(node));
        std::vector<std::pair<std::uint64_t, std::size_t>> order(d);
        for (std::size_t j = 0; j < d; ++j) order[j] = {splitmix64(name_hash_[j] ^ node_key), name_rank_[j]};
        std::vector<std::size_t> cols(d);
        std::iota(cols.begin(), cols.end(), 0);
        std::sort(cols.begin(), cols.end(), [&](std::size_t a, std::size_t b) { return order[a] < order[b]; });

        Split best;
        std::vector<std::pair<double, int>> vals(samples.size());
        for (std::size_t k = 0; k < d; ++k) {
            if (k >= mtry_ && best.valid) break;
            const std::size_t j = cols[k];
            for (std::size_t s = 0; s < samples.size(); ++s) vals[s] = {x_(samples[s], j), y_[samples[s]]};
            std::sort(vals.begin(), vals.end());
            double l0 = 0.0, l1 = 0.0;
            for (std::size_t s = 0; s + 1 < vals.size(); ++s) {
                (vals[s].second == 1 ? l1 : l0) += 1.0;
                if (vals[s].first == vals[s + 1].first) continue;
                Split cand;
                cand.valid = true;
                cand.impurity = weighted_gini(l0, l1) + weighted_gini(c0 - l0, c1 - l1);
                cand.rank = name_rank_[j];
                cand.feature = static_cast<int>(j);
                const double a = vals[s].first, b = vals[s + 1].first;
                cand.threshold = a + (b - a) / 2.0;
                if (!(cand.threshold < b)) cand.threshold = a;
                if (better(cand, best)) best = cand;
            }
        }
        return best;
    }

    const DesignMatrix& x_;
    std::span<const int> y_;
    std::span<const std::uint64_t> name_hash_;
    std::span<const std::size_t> name_rank_;
    std::uint64_t tree_key_;
    std::size_t mtry_;
    DecisionTree tree_;
};

}  // namespace

double DecisionTree::predict(std::span<const double> x) const noexcept {
    std::size_t k = 0;
    while (nodes[k].feature >= 0) {
        k = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[k].feature)] <= nodes[k].threshold ? nodes[k].left
                                                                                                           : nodes[k].right);
    }
    return nodes[k].p_positive;
}

double ForestModel::probability(std::span<const double> x) const noexcept {
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x);
    return trees.empty() ? 0.0 : s / static_cast<double>(trees.size());
}

ForestModel forest_fit(const DesignMatrix& x, std::span<const int> y, const ForestOptions& options) {
    check_binary_labels(y, x.rows(), false);
    if (x.rows() == 0) throw Error(ErrorKind::InvalidInput, "cannot fit a forest on zero rows");
    if (options.n_trees < 1) throw Error(ErrorKind::Config, "a forest needs at least one tree");

    const std::size_t d = x.cols();
    std::vector<std::uint64_t> name_hash(d);
    for (std::size_t j = 0; j < d; ++j) name_hash[j] = fnv1a(x.names()[j]);
    std::vector<std::size_t> by_name(d);
    std::iota(by_name.begin(), by_name.end(), 0);
    std::sort(by_name.begin(), by_name.end(), [&](std::size_t a, std::size_t b) { return x.names()[a] < x.names()[b]; });
    std::vector<std::size_t> name_rank(d);
    for (std::size_t r = 0; r < d; ++r) name_rank[by_name[r]] = r;

    ForestModel m;
    m.seed = options.seed;
    m.trees.reserve(static_cast<std::size_t>(options.n_trees));
    for (int t = 0; t < options.n_trees; ++t) {
        const std::uint64_t tree_seed = options.seed + static_cast<std::uint64_t>(t);
        Rng rng(tree_seed);
        std::vector<std::size_t> samples(x.rows());
        for (auto& s : samples) s = rng.index(x.rows());
        std::sort(samples.begin(), samples.end());
        TreeBuilder builder(x, y, name_hash, name_rank, splitmix64(tree_seed ^ 0x5bd1e995ULL));
        m.trees.push_back(builder.build(std::move(samples)));
    }
    return m;
}

}  // namespace conrad::learners
