#include <cmath>

#include <json.hpp>

#include "conrad/csv.hpp"
#include "conrad/evaluation.hpp"

namespace conrad::evaluation {

namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json threshold_json(double t) {
    if (std::isinf(t)) return t > 0 ? "+inf" : "-inf";
    return t;
}

json hyper_json(const learners::Hyperparameters& h) {
    return {{"C", h.c}, {"gamma", h.gamma}, {"lambda", h.lambda}, {"n_trees", h.n_trees}, {"seed", h.seed}};
}

std::string cell(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }

}  // namespace

std::string report_json(const EvalReport& r) {
    json doc;
    doc["schema_version"] = kReportSchemaVersion;
    doc["classifier"] = r.classifier;
    doc["feature_set"] = r.feature_set;
    doc["n_samples"] = r.n_samples;
    doc["n_features"] = r.n_features;
    doc["seed"] = r.options.seed;
    doc["k"] = r.options.k;
    doc["stratified"] = r.options.stratified;
    doc["nested"] = r.options.nested;
    doc["selected_hyperparameters"] = hyper_json(r.selected);

    if (r.grid) {
        json points = json::array();
        for (const auto& p : r.grid->points) points.push_back({{"hyperparameters", hyper_json(p.hyper)}, {"mean_accuracy", p.mean_accuracy}});
        doc["grid"] = points;
    } else {
        doc["grid"] = nullptr;
    }

    json folds = json::array();
    for (const auto& f : r.cv.folds) {
        json roc = json::array();
        for (const auto& p : f.roc) roc.push_back({threshold_json(p.threshold), p.fpr, p.tpr});
        folds.push_back({{"fold", f.fold},
                         {"n_train", f.n_train},
                         {"n_test", f.n_test},
                         {"confusion", {{"tp", f.counts.tp}, {"fp", f.counts.fp}, {"tn", f.counts.tn}, {"fn", f.counts.fn}}},
                         {"recall", optional_number(f.recall)},
                         {"precision", optional_number(f.precision)},
                         {"accuracy", f.accuracy},
                         {"auc", optional_number(f.auc)},
                         {"hyperparameters", hyper_json(f.hyper)},
                         {"flags", f.flags},
                         {"roc_layout", {"threshold", "fpr", "tpr"}},
                         {"roc", roc}});
    }
    doc["folds"] = folds;
    doc["mean"] = {{"recall", optional_number(r.cv.mean.recall)},
                   {"precision", optional_number(r.cv.mean.precision)},
                   {"accuracy", optional_number(r.cv.mean.accuracy)},
                   {"auc", optional_number(r.cv.mean.auc)},
                   {"recall_folds", r.cv.mean.recall_folds},
                   {"precision_folds", r.cv.mean.precision_folds},
                   {"auc_folds", r.cv.mean.auc_folds}};
    doc["roc_mean"] = {{"fpr", r.cv.roc_fpr}, {"tpr", r.cv.roc_tpr_mean}};
    if (r.census) {
        doc["census"] = {{"selected", r.census->selected},
                         {"count", r.census->selected.size()},
                         {"total_columns", r.census->total_columns},
                         {"percentage", r.census->percentage},
                         {"by_source", r.census->by_source}};
    } else {
        doc["census"] = nullptr;
    }
    return doc.dump(2) + "\n";
}

std::string metrics_csv_header() { return "classifier,feature_set,recall,precision,accuracy,auc,n_selected,seed\n"; }

std::string metrics_csv_row(const EvalReport& r) {
    std::string row = r.classifier + "," + r.feature_set + "," + cell(r.cv.mean.recall) + "," + cell(r.cv.mean.precision) + "," +
                      cell(r.cv.mean.accuracy) + "," + cell(r.cv.mean.auc) + ",";
    if (r.census) row += std::to_string(r.census->selected.size());
    row += "," + std::to_string(r.options.seed) + "\n";
    return row;
}

std::string roc_csv(const EvalReport& r) {
    std::string out = "fpr,tpr_mean";
    for (const auto& f : r.cv.folds) out += ",tpr_fold" + std::to_string(f.fold);
    out += "\n";
    std::vector<std::vector<double>> per_fold;
    for (const auto& f : r.cv.folds) per_fold.push_back(f.roc.empty() ? std::vector<double>{} : interpolate_tpr(f.roc, r.cv.roc_fpr));
    for (std::size_t g = 0; g < r.cv.roc_fpr.size(); ++g) {
        out += csv::format_double(r.cv.roc_fpr[g]) + "," + csv::format_double(r.cv.roc_tpr_mean[g]);
        for (const auto& t : per_fold) out += "," + (t.empty() ? std::string() : csv::format_double(t[g]));
        out += "\n";
    }
    return out;
}

namespace {

class SchemaCheck {
public:
    explicit SchemaCheck(std::vector<std::string>& errors) : errors_(errors) {}

    const json* field(const json& obj, const std::string& path, const char* key) {
        if (!obj.is_object() || !obj.contains(key)) {
            fail(path + key, "missing");
            return nullptr;
        }
        return &obj.at(key);
    }

    bool is(const json* v, const std::string& path, bool ok, const char* what) {
        if (v && !ok) fail(path, std::string("expected ") + what);
        return v && ok;
    }

    void unit_or_null(const json& obj, const std::string& path, const char* key) {
        const json* v = field(obj, path, key);
        if (!v || v->is_null()) return;
        if (is(v, path + key, v->is_number(), "a number or null")) unit_value(v->get<double>(), path + key);
    }

    void unit_value(double x, const std::string& path) {
        if (!(x >= 0.0 && x <= 1.0)) fail(path, "outside [0, 1]");
    }

    void count(const json& obj, const std::string& path, const char* key) {
        const json* v = field(obj, path, key);
        is(v, path + key, v && v->is_number_unsigned(), "a non-negative integer");
    }

    void hyper(const json& obj, const std::string& path, const char* key) {
        const json* v = field(obj, path, key);
        if (!is(v, path + key, v && v->is_object(), "an object")) return;
        for (const auto& [k, x] : v->items())
            if (!x.is_number()) fail(path + key + "." + k, "expected a number");
    }

    void fail(const std::string& path, const std::string& msg) { errors_.push_back(path + ": " + msg); }

private:
    std::vector<std::string>& errors_;
};

void check_roc(SchemaCheck& s, const json& roc, const std::string& path) {
    double last_fpr = 0.0, last_tpr = 0.0;
    for (std::size_t i = 0; i < roc.size(); ++i) {
        const std::string at = path + "[" + std::to_string(i) + "]";
        const json& p = roc[i];
        if (!p.is_array() || p.size() != 3) {
            s.fail(at, "expected [threshold, fpr, tpr]");
            continue;
        }
        const bool threshold_ok = p[0].is_number() || (p[0].is_string() && (p[0] == "+inf" || p[0] == "-inf"));
        if (!threshold_ok) s.fail(at, "threshold must be a number, \"+inf\" or \"-inf\"");
        if (!p[1].is_number() || !p[2].is_number()) {
            s.fail(at, "fpr and tpr must be numbers");
            continue;
        }
        const double fpr = p[1].get<double>(), tpr = p[2].get<double>();
        s.unit_value(fpr, at);
        s.unit_value(tpr, at);
        if (i > 0 && (fpr < last_fpr || tpr < last_tpr)) s.fail(at, "fpr and tpr must be non-decreasing");
        last_fpr = fpr;
        last_tpr = tpr;
    }
}

}  // namespace

std::vector<std::string> report_schema_errors(std::string_view json_text) {
    std::vector<std::string> errors;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        return {std::string("not valid JSON: ") + e.what()};
    }
    if (!doc.is_object()) return {"document: expected an object"};
    SchemaCheck s(errors);

    if (const json* v = s.field(doc, "", "schema_version"); v && *v != kReportSchemaVersion)
        s.fail("schema_version", "expected " + std::to_string(kReportSchemaVersion));
    for (const char* key : {"classifier", "feature_set"}) {
        const json* v = s.field(doc, "", key);
        s.is(v, key, v && v->is_string() && !v->get<std::string>().empty(), "a non-empty string");
    }
    for (const char* key : {"n_samples", "n_features", "seed", "k"}) s.count(doc, "", key);
    for (const char* key : {"stratified", "nested"}) {
        const json* v = s.field(doc, "", key);
        s.is(v, key, v && v->is_boolean(), "a boolean");
    }
    s.hyper(doc, "", "selected_hyperparameters");
    if (const json* g = s.field(doc, "", "grid"); g && !g->is_null() && !g->is_array()) s.fail("grid", "expected an array or null");

    if (const json* folds = s.field(doc, "", "folds"); s.is(folds, "folds", folds && folds->is_array(), "an array")) {
        for (std::size_t i = 0; i < folds->size(); ++i) {
            const json& f = (*folds)[i];
            const std::string at = "folds[" + std::to_string(i) + "].";
            for (const char* key : {"fold", "n_train", "n_test"}) s.count(f, at, key);
            if (const json* c = s.field(f, at, "confusion"); s.is(c, at + "confusion", c && c->is_object(), "an object"))
                for (const char* key : {"tp", "fp", "tn", "fn"}) s.count(*c, at + "confusion.", key);
            for (const char* key : {"recall", "precision", "auc"}) s.unit_or_null(f, at, key);
            if (const json* a = s.field(f, at, "accuracy"); s.is(a, at + "accuracy", a && a->is_number(), "a number"))
                s.unit_value(a->get<double>(), at + "accuracy");
            s.hyper(f, at, "hyperparameters");
            if (const json* fl = s.field(f, at, "flags"); s.is(fl, at + "flags", fl && fl->is_array(), "an array"))
                for (const auto& x : *fl)
                    if (!x.is_string()) s.fail(at + "flags", "entries must be strings");
            if (const json* r = s.field(f, at, "roc"); s.is(r, at + "roc", r && r->is_array(), "an array")) check_roc(s, *r, at + "roc");
        }
    }
    if (const json* m = s.field(doc, "", "mean"); s.is(m, "mean", m && m->is_object(), "an object"))
        for (const char* key : {"recall", "precision", "accuracy", "auc"}) s.unit_or_null(*m, "mean.", key);
    if (const json* r = s.field(doc, "", "roc_mean"); s.is(r, "roc_mean", r && r->is_object(), "an object")) {
        const json* fpr = s.field(*r, "roc_mean.", "fpr");
        const json* tpr = s.field(*r, "roc_mean.", "tpr");
        if (fpr && tpr && (!fpr->is_array() || !tpr->is_array() || fpr->size() != tpr->size()))
            s.fail("roc_mean", "fpr and tpr must be arrays of equal length");
    }
    if (const json* c = s.field(doc, "", "census"); c && !c->is_null()) {
        if (s.is(c, "census", c->is_object(), "an object or null")) {
            const json* sel = s.field(*c, "census.", "selected");
            s.count(*c, "census.", "count");
            s.count(*c, "census.", "total_columns");
            if (sel && sel->is_array() && c->contains("count") && c->at("count").is_number() && c->at("count") != sel->size())
                s.fail("census.count", "does not match the selected list");
            const json* pct = s.field(*c, "census.", "percentage");
            if (s.is(pct, "census.percentage", pct && pct->is_number(), "a number")) {
                const double p = pct->get<double>();
                if (!(p >= 0.0 && p <= 100.0)) s.fail("census.percentage", "outside [0, 100]");
            }
            const json* bs = s.field(*c, "census.", "by_source");
            s.is(bs, "census.by_source", bs && bs->is_object(), "an object");
        }
    }
    return errors;
}

}  // namespace conrad::evaluation
