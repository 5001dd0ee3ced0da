#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_set>

#include "conrad/atomic_file.hpp"
#include "conrad/error.hpp"
#include "conrad/evaluation.hpp"
#include "conrad/csv.hpp"

namespace conrad::evaluation {

std::string_view to_string(Source s) noexcept {
    switch (s) {
        case Source::Radiomic: return "radiomic";
        case Source::Biomarker: return "biomarker";
        case Source::Cnn: return "cnn";
    }
    return "unknown";
}

FeatureTable::FeatureTable(std::vector<std::string> ids, std::vector<std::string> columns, std::vector<Source> sources,
                           std::vector<double> values)
    : ids_(std::move(ids)), columns_(std::move(columns)), sources_(std::move(sources)), values_(std::move(values)) {
    if (sources_.size() != columns_.size()) throw Error(ErrorKind::Contract, "every column needs a source tag");
    if (values_.size() != ids_.size() * columns_.size()) throw Error(ErrorKind::Contract, "feature table size mismatch");
    std::unordered_set<std::string> seen;
    for (const auto& id : ids_)
        if (!seen.insert(id).second) throw Error(ErrorKind::InvalidInput, "duplicate nodule id '" + id + "'");
    seen.clear();
    for (const auto& c : columns_)
        if (!seen.insert(c).second) throw Error(ErrorKind::Contract, "duplicate column '" + c + "'");
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!std::isfinite(values_[k])) {
            throw Error(ErrorKind::InvalidInput,
                        "non-finite value for '" + ids_[k / cols()] + "', column '" + columns_[k % cols()] + "'");
        }
    }
}

learners::DesignMatrix FeatureTable::design() const { return learners::DesignMatrix(columns_, rows(), values_); }

FeatureTable read_feature_csv(const std::filesystem::path& path, Source source, std::span<const std::string> ignore) {
    const auto rows = csv::parse(read_file(path), path.string());
    if (rows.empty()) throw Error(ErrorKind::InvalidInput, path.string() + ": missing header");
    const auto& header = rows.front();
    if (header.empty() || header.front() != "nodule_id") {
        throw Error(ErrorKind::InvalidInput, path.string() + ": first column must be nodule_id");
    }
    std::vector<std::size_t> keep;
    std::vector<std::string> columns;
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (std::find(ignore.begin(), ignore.end(), header[j]) != ignore.end()) continue;
        keep.push_back(j);
        columns.push_back(header[j]);
    }
    std::vector<std::string> ids;
    std::vector<double> values;
    values.reserve((rows.size() - 1) * keep.size());
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != header.size()) {
            throw Error(ErrorKind::InvalidInput, path.string() + ": line " + std::to_string(i + 1) + " has " +
                                                     std::to_string(r.size()) + " fields, expected " +
                                                     std::to_string(header.size()));
        }
        ids.push_back(r.front());
        for (std::size_t j : keep) values.push_back(csv::parse_double(r[j], path.string(), i + 1));
    }
    std::vector<Source> sources(columns.size(), source);
    return FeatureTable(std::move(ids), std::move(columns), std::move(sources), std::move(values));
}

std::string feature_csv_text(const FeatureTable& t) {
    std::string out = "nodule_id";
    for (const auto& c : t.columns()) out += "," + c;
    out += "\n";
    for (std::size_t i = 0; i < t.rows(); ++i) {
        out += t.ids()[i];
        for (std::size_t j = 0; j < t.cols(); ++j) {
            out += ",";
            out += csv::format_double(t.at(i, j));
        }
        out += "\n";
    }
    return out;
}

std::map<std::string, int> read_labels_csv(const std::filesystem::path& path) {
    const auto rows = csv::parse(read_file(path), path.string());
    if (rows.empty() || rows.front().size() != 2 || rows.front()[0] != "nodule_id" || rows.front()[1] != "label") {
        throw Error(ErrorKind::InvalidInput, path.string() + ": header must be nodule_id,label");
    }
    std::map<std::string, int> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 2 || (r[1] != "0" && r[1] != "1")) {
            throw Error(ErrorKind::InvalidInput, path.string() + ": line " + std::to_string(i + 1) + " needs id and 0/1 label");
        }
        if (!out.emplace(r[0], r[1] == "1" ? 1 : 0).second) {
            throw Error(ErrorKind::InvalidInput, path.string() + ": duplicate id '" + r[0] + "'");
        }
    }
    return out;
}

learners::Labels align_labels(const FeatureTable& t, const std::map<std::string, int>& labels) {
    learners::Labels y;
    y.reserve(t.rows());
    for (const auto& id : t.ids()) {
        auto it = labels.find(id);
        if (it == labels.end()) throw Error(ErrorKind::InvalidInput, "no label for nodule '" + id + "'");
        y.push_back(it->second);
    }
    return y;
}

}  // namespace conrad::evaluation
