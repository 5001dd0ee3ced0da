#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <sys/wait.h>

#include <json.hpp>

#include "conrad/config.hpp"
#include "conrad/csv.hpp"
#include "conrad/radiomics.hpp"
#include "error_kind.hpp"
#include "temp_dir.hpp"

namespace fs = std::filesystem;
using conrad::ErrorKind;
using testing_support::TempDir;
using testing_support::thrown_kind;
using testing_support::thrown_message;

namespace {

struct Outcome {
    int code = -1;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string quoted(const std::string& s) { return "'" + s + "'"; }

/// Runs the CLI with `args`; `env` is prepended as NAME=value assignments.
Outcome conrad_run(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const fs::path err = fs::temp_directory_path() / ("conrad-cli-err-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    const std::string cmd = "env -u CONRAD_SEED " + env + " " + quoted(CONRAD_EXE) + " " + args + " >/dev/null 2>" + quoted(err.string());
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.err = slurp(err);
    fs::remove(err);
    return o;
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

std::size_t temp_leftovers(const fs::path& root) {
    std::size_t n = 0;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.path().filename().string().find(".tmp.") != std::string::npos) ++n;
    return n;
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) { return conrad::csv::parse(slurp(p), p.string()); }

/// A 20-nodule phantom cohort taken through fixtures, ingest and extract once
/// per process.
struct Pipeline {
    TempDir dir{"conrad-cli"};
    fs::path fx, ing, rad;
    std::string sources;

    Pipeline() {
        fx = dir / "fx";
        ing = dir / "ing";
        rad = dir / "rad.csv";
        REQUIRE(conrad_run("fixtures --out " + quoted(fx) + " --count 20 --cnn-width 16 --seed 11").code == 0);
        REQUIRE(conrad_run("ingest --cohort " + quoted(fx / "cohort") + " --out " + quoted(ing) + " --seed 11").code == 0);
        REQUIRE(conrad_run("extract --records " + quoted(ing) + " --radiomics " + quoted(rad)).code == 0);
        sources = " --radiomics " + quoted(rad) + " --biomarkers " + quoted(fx / "predicted_biomarkers.csv") + " --cnn " +
                  quoted(fx / "cnn_features.csv") + " --labels " + quoted(ing / "labels.csv") + " --seed 11";
    }
};

Pipeline& pipeline() {
    static Pipeline p;
    return p;
}

}  // namespace

TEST_SUITE("config") {
    TEST_CASE("TOML fields map onto the configuration and paths resolve against the file") {
        const auto c = conrad::cli::parse_config(R"(
seed = 9
jobs = 2
[paths]
cohort = "data/cohort"
out = "/abs/out"
[experiment]
features = "cnn+rad"
classifier = "svm-rbf"
grid = [0.1, 1.0]
stratified = false
[radiomics]
bin_width = 10.0
connectivity = 6
[fixtures]
cnn_width = 512
)",
                                                 "/base");
        CHECK(c.seed == 9u);
        CHECK(c.jobs == 2);
        CHECK(c.paths.cohort == fs::path("/base/data/cohort"));
        CHECK(c.paths.out == fs::path("/abs/out"));
        CHECK(c.features == "cnn+rad");
        CHECK(c.classifier == "svm-rbf");
        CHECK(c.grid == std::vector<double>{0.1, 1.0});
        CHECK_FALSE(c.stratified);
        CHECK(c.radiomics.bin_width == 10.0);
        CHECK(c.radiomics.zone_connectivity == 6);
        CHECK(c.cnn_width == 512);
    }

    TEST_CASE("every bad field is named in one error") {
        const auto msg = thrown_message([] {
            conrad::cli::parse_config("jobs = \"many\"\nbogus = 1\n[radiomics]\nbin_width = -3\n", "/");
        });
        CHECK(msg.find("jobs") != std::string::npos);
        CHECK(msg.find("bogus") != std::string::npos);
        CHECK(thrown_kind([] { conrad::cli::parse_config("x = [", "/"); }) == ErrorKind::Config);
    }

    TEST_CASE("validation names unknown feature sets and classifiers") {
        conrad::cli::ExperimentConfig c;
        c.features = "everything";
        c.classifier = "boosting";
        c.radiomics.bin_width = -3;
        const auto errors = conrad::cli::validation_errors(c, conrad::cli::Command::Evaluate);
        std::string all;
        for (const auto& e : errors) all += e + "\n";
        CHECK(all.find("experiment.features") != std::string::npos);
        CHECK(all.find("experiment.classifier") != std::string::npos);
        CHECK(all.find("svm-rbf") != std::string::npos);
        const auto extract = conrad::cli::validation_errors(c, conrad::cli::Command::Extract);
        CHECK(std::any_of(extract.begin(), extract.end(), [](const std::string& e) { return e.find("radiomics.bin_width") != std::string::npos; }));
    }

    TEST_CASE("seed precedence: explicit value, then CONRAD_SEED, then 0") {
        conrad::cli::ExperimentConfig c;
        ::unsetenv("CONRAD_SEED");
        CHECK(conrad::cli::resolve_seed(c) == 0u);
        ::setenv("CONRAD_SEED", "77", 1);
        CHECK(conrad::cli::resolve_seed(c) == 77u);
        c.seed = 5;
        CHECK(conrad::cli::resolve_seed(c) == 5u);
        ::unsetenv("CONRAD_SEED");
    }

    TEST_CASE("flags override the file") {
        auto c = conrad::cli::parse_config("[experiment]\nclassifier = \"logreg\"\n", "/");
        conrad::cli::set_field(c, "experiment.classifier", "random-forest");
        CHECK(c.classifier == "random-forest");
        CHECK(thrown_kind([&] { conrad::cli::set_field(c, "experiment.k", "five"); }) == ErrorKind::Config);
    }
}

TEST_SUITE("command line") {
    TEST_CASE("usage errors exit 1") {
        CHECK(conrad_run("").code == 1);
        CHECK(conrad_run("frobnicate").code == 1);
        CHECK(conrad_run("--help").code == 0);
    }

    TEST_CASE("fixtures are reproducible and the environment seed is a fallback") {
        TempDir d;
        REQUIRE(conrad_run("fixtures --out " + quoted(d / "a") + " --count 12 --cnn-width 8 --seed 4").code == 0);
        REQUIRE(conrad_run("fixtures --out " + quoted(d / "b") + " --count 12 --cnn-width 8", "CONRAD_SEED=4").code == 0);
        REQUIRE(conrad_run("fixtures --out " + quoted(d / "c") + " --count 12 --cnn-width 8 --seed 5", "CONRAD_SEED=4").code == 0);
        const auto a = tree_bytes(d / "a");
        CHECK(a == tree_bytes(d / "b"));
        CHECK(a != tree_bytes(d / "c"));
        CHECK(temp_leftovers(d.path()) == 0);
    }

    TEST_CASE("ingest summary counts and byte-identical reruns") {
        auto& p = pipeline();
        const auto summary = nlohmann::json::parse(slurp(p.ing / "summary.json"));
        CHECK(summary.at("n_total").get<int>() == 20);
        CHECK(summary.at("n_benign").get<int>() + summary.at("n_malignant").get<int>() == 20);
        TempDir again;
        REQUIRE(conrad_run("ingest --cohort " + quoted(p.fx / "cohort") + " --out " + quoted(again / "ing") + " --seed 11").code == 0);
        CHECK(tree_bytes(p.ing) == tree_bytes(again / "ing"));
    }

    TEST_CASE("ingest on a missing directory exits 1 with a message") {
        TempDir d;
        const auto o = conrad_run("ingest --cohort " + quoted(d / "nowhere") + " --out " + quoted(d / "out"));
        CHECK(o.code == 1);
        CHECK(o.err.find("nowhere") != std::string::npos);
    }

    TEST_CASE("a malformed record gives exit 2 and a failure manifest") {
        auto& p = pipeline();
        TempDir d;
        fs::copy(p.fx / "cohort", d / "cohort", fs::copy_options::recursive);
        const auto victim = d / "cohort" / "PH-0003.annotation.json";
        REQUIRE(fs::exists(victim));
        std::ofstream(victim, std::ios::trunc) << "{ not json";
        const auto o = conrad_run("ingest --cohort " + quoted(d / "cohort") + " --out " + quoted(d / "ing"));
        CHECK(o.code == 2);
        const auto failures = nlohmann::json::parse(slurp(d / "ing" / "failures.json"));
        REQUIRE(failures.size() == 1);
        CHECK(failures.dump().find("PH-0003") != std::string::npos);
        CHECK(csv_rows(d / "ing" / "labels.csv").size() == 20);  // header + 19
    }

    TEST_CASE("extract writes one row per record with the registry header") {
        auto& p = pipeline();
        const auto rows = csv_rows(p.rad);
        REQUIRE(rows.size() == 21);
        REQUIRE(rows[0].size() == 108);
        CHECK(rows[0][0] == "nodule_id");
        const auto& names = conrad::radiomics::feature_names();
        for (std::size_t j = 0; j < names.size(); ++j) CHECK(rows[0][j + 1] == names[j]);
        for (const auto& r : rows) CHECK(r.size() == 108);
    }

    TEST_CASE("an empty cohort gives a header-only CSV") {
        TempDir d;
        fs::create_directories(d / "empty");
        REQUIRE(conrad_run("ingest --cohort " + quoted(d / "empty") + " --out " + quoted(d / "ing")).code == 0);
        REQUIRE(conrad_run("extract --records " + quoted(d / "ing") + " --radiomics " + quoted(d / "rad.csv")).code == 0);
        const auto rows = csv_rows(d / "rad.csv");
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].size() == 108);
    }

    TEST_CASE("unknown classifier exits 1 and lists the valid names") {
        auto& p = pipeline();
        TempDir d;
        const auto o = conrad_run("evaluate --classifier boosting --features bio+rad --out " + quoted(d / "ev") + p.sources);
        CHECK(o.code == 1);
        for (auto name : {"svm-linear", "svm-rbf", "logreg", "logreg-lasso", "random-forest"}) CHECK(o.err.find(name) != std::string::npos);
        CHECK_FALSE(fs::exists(d / "ev" / "report.json"));
    }

    TEST_CASE("evaluate on biomarkers with the Lasso keeps at most 8 names") {
        auto& p = pipeline();
        TempDir d;
        REQUIRE(conrad_run("evaluate --classifier logreg-lasso --features biomarkers --out " + quoted(d / "ev") + p.sources).code == 0);
        const auto report = nlohmann::json::parse(slurp(d / "ev" / "report.json"));
        CHECK(report.at("census").at("selected").size() <= 8);
        CHECK(report.at("seed").get<int>() == 11);
        for (auto f : {"metrics.csv", "roc.csv", "folds.json"}) CHECK(fs::exists(d / "ev" / f));
    }

    TEST_CASE("fuse writes the joined table and its source map") {
        auto& p = pipeline();
        TempDir d;
        REQUIRE(conrad_run("fuse --features bio+rad --fused " + quoted(d / "f.csv") + p.sources).code == 0);
        const auto rows = csv_rows(d / "f.csv");
        CHECK(rows.size() == 21);
        CHECK(rows[0].size() == 115);
        CHECK(fs::exists(d / "f.csv.sources.json"));
    }

    TEST_CASE("matrix: 35 rows, resumable, consistent with single runs, partial failures exit 2") {
        auto& p = pipeline();
        TempDir d;
        const auto mx = d / "mx";
        REQUIRE(conrad_run("matrix --out " + quoted(mx) + p.sources + " --n-trees 25").code == 0);
        const auto rows = csv_rows(mx / "matrix.csv");
        REQUIRE(rows.size() == 36);
        const auto first = slurp(mx / "matrix.csv");

        const auto again = conrad_run("matrix --out " + quoted(mx) + p.sources + " --n-trees 25");
        CHECK(again.code == 0);
        CHECK(again.err.find("reused") != std::string::npos);
        CHECK(again.err.find("done in") == std::string::npos);
        CHECK(slurp(mx / "matrix.csv") == first);

        REQUIRE(conrad_run("evaluate --classifier svm-rbf --features bio+rad --n-trees 25 --out " + quoted(d / "single") + p.sources).code == 0);
        const auto single = csv_rows(d / "single" / "metrics.csv");
        REQUIRE(single.size() == 2);
        bool found = false;
        for (const auto& r : rows)
            if (r[0] == "svm-rbf" && r[1] == "bio+rad") {
                CHECK(r == single[1]);
                found = true;
            }
        CHECK(found);

        const auto broken = d / "mx2";
        fs::create_directories(broken / "runs");
        std::ofstream(broken / "runs" / "logreg__cnn") << "in the way";
        const auto partial = conrad_run("matrix --out " + quoted(broken) + p.sources + " --n-trees 25");
        CHECK(partial.code == 2);
        CHECK(csv_rows(broken / "matrix.csv").size() == 35);
        const auto failures = nlohmann::json::parse(slurp(broken / "matrix_failures.json"));
        REQUIRE(failures.size() == 1);
        CHECK(failures[0].at("classifier") == "logreg");
        CHECK(failures[0].at("feature_set") == "cnn");
        CHECK(temp_leftovers(d.path()) == 0);
    }
}
