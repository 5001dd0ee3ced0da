#include <string>

#include <json.hpp>

#include "conrad/error.hpp"
#include "conrad/learners.hpp"

namespace conrad::learners {

namespace {

using nlohmann::json;

std::string_view penalty_name(Penalty p) {
    switch (p) {
        case Penalty::L1: return "l1";
        case Penalty::Hinge: return "hinge";
        case Penalty::None: break;
    }
    return "none";
}

Penalty parse_penalty(const std::string& s) {
    if (s == "none") return Penalty::None;
    if (s == "l1") return Penalty::L1;
    if (s == "hinge") return Penalty::Hinge;
    throw Error(ErrorKind::InvalidInput, "unknown penalty '" + s + "'");
}

json linear_json(const LinearModel& m) {
    return {{"weights", m.weights},
            {"intercept", m.intercept},
            {"penalty", penalty_name(m.penalty)},
            {"strength", m.strength},
            {"iterations", m.iterations}};
}

json kernel_json(const KernelModel& m) {
    return {{"kernel", m.kernel.kind == KernelKind::Rbf ? "rbf" : "linear"},
            {"gamma", m.kernel.gamma},
            {"C", m.c},
            {"intercept", m.intercept},
            {"support_vectors", m.support_vectors},
            {"support_indices", m.support_indices},
            {"dual_coef", m.dual_coef},
            {"iterations", m.iterations}};
}

json forest_json(const ForestModel& m) {
    json trees = json::array();
    for (const auto& t : m.trees) {
        json nodes = json::array();
        for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.p_positive});
        trees.push_back(std::move(nodes));
    }
    return {{"seed", m.seed}, {"node_layout", {"feature", "threshold", "left", "right", "p_positive"}}, {"trees", trees}};
}

template <class T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorKind::InvalidInput, std::string("model document lacks '") + key + "'");
    return j.at(key).get<T>();
}

}  // namespace

std::string model_to_json(const TrainedModel& m) {
    json doc;
    doc["schema_version"] = kModelSchemaVersion;
    doc["kind"] = to_string(m.kind);
    doc["hyperparameters"] = {{"C", m.hyper.c},
                              {"gamma", m.hyper.gamma},
                              {"lambda", m.hyper.lambda},
                              {"n_trees", m.hyper.n_trees},
                              {"seed", m.hyper.seed}};
    doc["feature_names"] = m.feature_names;
    doc["normalization"] = {{"mean", m.standardizer.mean}, {"stddev", m.standardizer.stddev}};
    doc["model"] = std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LinearModel>) return linear_json(p);
            else if constexpr (std::is_same_v<T, KernelModel>) return kernel_json(p);
            else return forest_json(p);
        },
        m.payload);
    return doc.dump(2);
}

TrainedModel model_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("model document is not JSON: ") + e.what());
    }
    try {
        const int version = field<int>(doc, "schema_version");
        if (version != kModelSchemaVersion) {
            throw Error(ErrorKind::InvalidInput, "unsupported model schema_version " + std::to_string(version));
        }
        TrainedModel m;
        m.kind = parse_classifier(field<std::string>(doc, "kind"));
        const json& h = doc.at("hyperparameters");
        m.hyper.c = field<double>(h, "C");
        m.hyper.gamma = field<double>(h, "gamma");
        m.hyper.lambda = field<double>(h, "lambda");
        m.hyper.n_trees = field<int>(h, "n_trees");
        m.hyper.seed = field<std::uint64_t>(h, "seed");
        m.feature_names = field<std::vector<std::string>>(doc, "feature_names");
        m.standardizer.names = m.feature_names;
        m.standardizer.mean = field<std::vector<double>>(doc.at("normalization"), "mean");
        m.standardizer.stddev = field<std::vector<double>>(doc.at("normalization"), "stddev");
        if (m.standardizer.mean.size() != m.feature_names.size() || m.standardizer.stddev.size() != m.feature_names.size()) {
            throw Error(ErrorKind::InvalidInput, "normalization length does not match feature_names");
        }

        const json& p = doc.at("model");
        switch (m.kind) {
            case ClassifierKind::Logreg:
            case ClassifierKind::LogregLasso: {
                LinearModel lm;
                lm.weights = field<std::vector<double>>(p, "weights");
                lm.intercept = field<double>(p, "intercept");
                lm.penalty = parse_penalty(field<std::string>(p, "penalty"));
                lm.strength = field<double>(p, "strength");
                lm.iterations = field<int>(p, "iterations");
                m.payload = std::move(lm);
                break;
            }
            case ClassifierKind::SvmLinear:
            case ClassifierKind::SvmRbf: {
                KernelModel km;
                km.kernel.kind = field<std::string>(p, "kernel") == "rbf" ? KernelKind::Rbf : KernelKind::Linear;
                km.kernel.gamma = field<double>(p, "gamma");
                km.c = field<double>(p, "C");
                km.intercept = field<double>(p, "intercept");
                km.support_vectors = field<std::vector<std::vector<double>>>(p, "support_vectors");
                km.support_indices = field<std::vector<std::size_t>>(p, "support_indices");
                km.dual_coef = field<std::vector<double>>(p, "dual_coef");
                km.iterations = field<long>(p, "iterations");
                m.payload = std::move(km);
                break;
            }
            case ClassifierKind::RandomForest: {
                ForestModel fm;
                fm.seed = field<std::uint64_t>(p, "seed");
                for (const auto& t : p.at("trees")) {
                    DecisionTree tree;
                    for (const auto& n : t) {
                        tree.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                                              n.at(4).get<double>()});
                    }
                    fm.trees.push_back(std::move(tree));
                }
                m.payload = std::move(fm);
                break;
            }
        }
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("malformed model document: ") + e.what());
    }
}

}  // namespace conrad::learners
