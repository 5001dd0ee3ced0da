#include <algorithm>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "conrad/error.hpp"
#include "conrad/evaluation.hpp"
#include "conrad/random.hpp"

namespace conrad::evaluation {

int FoldPlan::fold_of(std::string_view id) const {
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == id) return fold[i];
    throw Error(ErrorKind::Contract, "nodule '" + std::string(id) + "' is not in the fold plan");
}

std::vector<int> row_folds(const FeatureTable& table, const FoldPlan& plan) {
    std::unordered_map<std::string_view, int> lookup;
    for (std::size_t i = 0; i < plan.ids.size(); ++i) lookup.emplace(plan.ids[i], plan.fold[i]);
    std::vector<int> out;
    out.reserve(table.rows());
    for (const auto& id : table.ids()) {
        auto it = lookup.find(id);
        if (it == lookup.end()) throw Error(ErrorKind::Contract, "nodule '" + id + "' is not in the fold plan");
        out.push_back(it->second);
    }
    return out;
}

// Each class is shuffled and dealt round-robin; the deal continues across
// classes so fold sizes also differ by at most one.
FoldPlan make_folds(std::span<const std::string> ids, std::span<const int> labels, int k, std::uint64_t seed, bool stratified) {
    if (k < 2) throw Error(ErrorKind::Config, "k must be at least 2");
    if (labels.size() != ids.size()) throw Error(ErrorKind::InvalidInput, "ids and labels differ in length");
    if (ids.size() < static_cast<std::size_t>(k)) {
        throw Error(ErrorKind::InvalidInput, std::to_string(ids.size()) + " samples cannot fill " + std::to_string(k) + " folds");
    }

    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });

    std::vector<std::vector<std::size_t>> groups;
    if (stratified) {
        for (int cls : {0, 1}) {
            std::vector<std::size_t> g;
            for (std::size_t i : order)
                if (labels[i] == cls) g.push_back(i);
            if (!g.empty() && g.size() < static_cast<std::size_t>(k)) {
                throw Error(ErrorKind::InvalidInput, "class " + std::to_string(cls) + " has " + std::to_string(g.size()) +
                                                         " members, fewer than k = " + std::to_string(k));
            }
            groups.push_back(std::move(g));
        }
    } else {
        groups.push_back(order);
    }

    Rng rng(seed);
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.stratified = stratified;
    std::vector<int> assign(ids.size(), 0);
    std::size_t dealt = 0;
    for (auto& g : groups) {
        rng.shuffle(std::span<std::size_t>(g));
        for (std::size_t i : g) assign[i] = static_cast<int>(dealt++ % static_cast<std::size_t>(k));
    }
    for (std::size_t i : order) {
        plan.ids.push_back(ids[i]);
        plan.fold.push_back(assign[i]);
    }
    return plan;
}

std::string fold_plan_json(const FoldPlan& plan) {
    nlohmann::json assignment = nlohmann::json::array();
    for (std::size_t i = 0; i < plan.ids.size(); ++i) assignment.push_back({{"nodule_id", plan.ids[i]}, {"fold", plan.fold[i]}});
    nlohmann::json doc = {{"schema_version", 1},
                          {"k", plan.k},
                          {"seed", plan.seed},
                          {"stratified", plan.stratified},
                          {"assignment", assignment}};
    return doc.dump(2) + "\n";
}

FoldPlan fold_plan_from_json(std::string_view text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        FoldPlan plan;
        plan.k = doc.at("k").get<int>();
        plan.seed = doc.at("seed").get<std::uint64_t>();
        plan.stratified = doc.at("stratified").get<bool>();
        for (const auto& a : doc.at("assignment")) {
            plan.ids.push_back(a.at("nodule_id").get<std::string>());
            const int f = a.at("fold").get<int>();
            if (f < 0 || f >= plan.k) throw Error(ErrorKind::InvalidInput, "fold index " + std::to_string(f) + " out of range");
            plan.fold.push_back(f);
        }
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("malformed fold plan: ") + e.what());
    }
}

}  // namespace conrad::evaluation
