#include <doctest.h>

#include <algorithm>

#include <json.hpp>

#include "conrad/atomic_file.hpp"
#include "conrad/ingest.hpp"
#include "conrad/volume_io.hpp"
#include "error_kind.hpp"
#include "generators.hpp"
#include "temp_dir.hpp"

using namespace conrad;
using namespace conrad::ingest;
using testing_support::TempDir;
using testing_support::thrown_kind;
using volume::Dims;
using volume::SegMask;

namespace {

AnnotatorEntry entry(const std::string& id, int rating, const SegMask& mask, double fill = 3.0) {
    AnnotatorEntry e;
    e.annotator_id = id;
    e.malignancy_rating = rating;
    e.biomarkers.fill(fill);
    e.mask = mask;
    return e;
}

SegMask block(Dims d, int x0, int x1) {
    SegMask m(d);
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = x0; x < x1; ++x) m.set(x, y, z, true);
    return m;
}

// Writes one nodule (volume, one mask per rating, annotation JSON) into `dir`.
void write_nodule(const std::filesystem::path& dir, const std::string& id, const std::vector<int>& ratings) {
    const Dims d{12, 12, 6};
    volume::write_volume(dir / (id + ".cvol.json"), volume::ScalarVolume(d, {0.8, 0.8, 2.0}, -800.0));
    nlohmann::json anns = nlohmann::json::array();
    for (std::size_t k = 0; k < ratings.size(); ++k) {
        const std::string mask = id + "_r" + std::to_string(k) + ".cmask.json";
        SegMask m(d);
        for (int z = 2; z < 4; ++z)
            for (int y = 4; y < 8; ++y)
                for (int x = 4; x < 8; ++x) m.set(x, y, z, true);
        volume::write_mask(dir / mask, m, {0.8, 0.8, 2.0});
        nlohmann::json bm;
        for (auto name : kBiomarkerNames) bm[std::string(name)] = 2.0 + static_cast<double>(k);
        anns.push_back({{"annotator_id", "r" + std::to_string(k)}, {"malignancy", ratings[k]}, {"biomarkers", bm}, {"mask", mask}});
    }
    const nlohmann::json j = {{"nodule_id", id}, {"volume", id + ".cvol.json"}, {"annotations", anns}};
    write_file_atomic(dir / (id + std::string(kAnnotationSuffix)), j.dump(2));
}

}  // namespace

TEST_SUITE("consensus_mask") {
    const Dims d{4, 1, 1};

    TEST_CASE("two of four annotators is a majority at level 0.5") {
        const std::vector<AnnotatorEntry> e = {entry("a", 4, block(d, 0, 1)), entry("b", 4, block(d, 0, 2)),
                                               entry("c", 4, block(d, 2, 4)), entry("d", 4, block(d, 3, 4))};
        const auto m = consensus_mask(e, 0.5);
        CHECK(m.at(0, 0, 0));   // 2 of 4
        CHECK_FALSE(m.at(1, 0, 0));  // 1 of 4
        CHECK_FALSE(m.at(2, 0, 0));  // 1 of 4
        CHECK(m.at(3, 0, 0));   // 2 of 4
    }

    TEST_CASE("a single annotator is reproduced exactly") {
        Rng rng(1);
        const auto mask = gen::random_mask(rng, {5, 4, 3}, 0.4);
        const std::vector<AnnotatorEntry> e = {entry("a", 2, mask)};
        CHECK(consensus_mask(e) == mask);
    }

    TEST_CASE("property: consensus lies between intersection and union") {
        Rng rng(17);
        for (int c = 0; c < 60; ++c) {
            CAPTURE(c);
            const Dims dd{gen::uniform_int(rng, 1, 6), gen::uniform_int(rng, 1, 6), gen::uniform_int(rng, 1, 6)};
            std::vector<AnnotatorEntry> e;
            const int k = gen::uniform_int(rng, 1, 4);
            for (int a = 0; a < k; ++a) e.push_back(entry("r" + std::to_string(a), 1, gen::random_mask(rng, dd, rng.uniform())));
            const auto m = consensus_mask(e, 0.5);
            for (std::size_t i = 0; i < dd.count(); ++i) {
                const bool all = std::all_of(e.begin(), e.end(), [&](const auto& x) { return x.mask[i]; });
                const bool any = std::any_of(e.begin(), e.end(), [&](const auto& x) { return x.mask[i]; });
                if (all) CHECK(m[i]);
                if (!any) CHECK_FALSE(m[i]);
            }
        }
    }

    TEST_CASE("mismatched dims and empty lists are invalid input") {
        std::vector<AnnotatorEntry> e = {entry("a", 1, SegMask({2, 2, 2})), entry("b", 1, SegMask({2, 2, 3}))};
        CHECK(thrown_kind([&] { consensus_mask(e); }) == ErrorKind::InvalidInput);
        CHECK(thrown_kind([] { consensus_mask(std::vector<AnnotatorEntry>{}); }) == ErrorKind::InvalidInput);
    }
}

TEST_SUITE("aggregate_malignancy") {
    TEST_CASE("median rule") {
        const std::vector<int> a{5, 4, 4, 3}, b{3, 3}, c{2, 1};
        CHECK(aggregate_malignancy(a).outcome == Malignancy::Malignant);
        CHECK(aggregate_malignancy(a).median == 4.0);
        CHECK(aggregate_malignancy(b).outcome == Malignancy::Discard);
        CHECK(aggregate_malignancy(c).outcome == Malignancy::Benign);
        CHECK(aggregate_malignancy(c).median == 1.5);
    }

    TEST_CASE("even counts use the mean of the central pair") {
        const std::vector<int> r{2, 4};  // median 3
        CHECK(aggregate_malignancy(r).outcome == Malignancy::Discard);
        const std::vector<int> s{1, 3, 4, 5};  // median 3.5
        CHECK(aggregate_malignancy(s).outcome == Malignancy::Malignant);
    }

    TEST_CASE("property: the vote ignores rating order") {
        Rng rng(23);
        for (int c = 0; c < 200; ++c) {
            std::vector<int> r(static_cast<std::size_t>(gen::uniform_int(rng, 1, 4)));
            for (auto& x : r) x = gen::uniform_int(rng, 1, 5);
            const auto base = aggregate_malignancy(r);
            std::vector<int> shuffled = r;
            rng.shuffle(std::span<int>(shuffled));
            const auto again = aggregate_malignancy(shuffled);
            CHECK(base.outcome == again.outcome);
            CHECK(base.median == again.median);
        }
    }

    TEST_CASE("ratings outside 1-5 or counts outside 1-4 are invalid input") {
        CHECK(thrown_kind([] { aggregate_malignancy(std::vector<int>{0}); }) == ErrorKind::InvalidInput);
        CHECK(thrown_kind([] { aggregate_malignancy(std::vector<int>{6, 3}); }) == ErrorKind::InvalidInput);
        CHECK(thrown_kind([] { aggregate_malignancy(std::vector<int>{}); }) == ErrorKind::InvalidInput);
        CHECK(thrown_kind([] { aggregate_malignancy(std::vector<int>{1, 2, 3, 4, 5}); }) == ErrorKind::InvalidInput);
    }
}

TEST_SUITE("average_biomarkers") {
    const SegMask m({1, 1, 1});

    TEST_CASE("single annotator is the identity") {
        auto e = entry("a", 2, m);
        for (std::size_t k = 0; k < kBiomarkerCount; ++k) e.biomarkers[k] = 1.5 * static_cast<double>(k);
        const auto avg = average_biomarkers(std::vector<AnnotatorEntry>{e});
        CHECK(avg == e.biomarkers);
    }

    TEST_CASE("per-biomarker arithmetic mean") {
        std::vector<AnnotatorEntry> e = {entry("a", 2, m), entry("b", 2, m), entry("c", 2, m)};
        e[0].biomarkers[0] = 3;
        e[1].biomarkers[0] = 5;
        e[2].biomarkers[0] = 4;
        e[0].biomarkers[7] = 10.0;
        e[1].biomarkers[7] = 12.0;
        e[2].biomarkers[7] = 11.0;
        const auto avg = average_biomarkers(e);
        CHECK(avg[0] == doctest::Approx(4.0));
        CHECK(avg[7] == doctest::Approx(11.0));
        std::vector<AnnotatorEntry> two = {entry("a", 2, m), entry("b", 2, m)};
        two[0].biomarkers[0] = 3;
        two[1].biomarkers[0] = 5;
        CHECK(average_biomarkers(two)[0] == 4.0);
    }

    TEST_CASE("a missing biomarker is invalid input") {
        auto e = entry("a", 2, m);
        e.biomarkers[3] = std::nan("");
        CHECK(thrown_kind([&] { average_biomarkers(std::vector<AnnotatorEntry>{e}); }) == ErrorKind::InvalidInput);
        CHECK(thrown_kind([] { average_biomarkers(std::vector<AnnotatorEntry>{}); }) == ErrorKind::InvalidInput);
    }
}

TEST_SUITE("build_cohort") {
    TEST_CASE("three nodules with one median-3 nodule") {
        TempDir dir;
        write_nodule(dir.path(), "N1", {4, 5});
        write_nodule(dir.path(), "N2", {3, 3});
        write_nodule(dir.path(), "N3", {1, 2, 2});
        const auto c = build_cohort(dir.path());
        CHECK(c.summary.n_total == 2);
        CHECK(c.summary.n_discarded == 1);
        CHECK(c.summary.n_malignant == 1);
        CHECK(c.summary.n_benign == 1);
        CHECK(c.summary.failures.empty());
        REQUIRE(c.records.size() == 2);
        CHECK(c.records[0].nodule_id == "N1");
        CHECK(c.records[0].label == 1);
        CHECK(c.records[0].malignancy_median == 4.5);
        CHECK(c.records[0].annotated_biomarkers[0] == doctest::Approx(2.5));
        CHECK(c.records[1].label == 0);
    }

    TEST_CASE("records are resampled, clamped and cropped around the ROI") {
        TempDir dir;
        write_nodule(dir.path(), "N1", {5});
        const auto c = build_cohort(dir.path());
        REQUIRE(c.records.size() == 1);
        const auto& r = c.records[0];
        CHECK(r.volume.spacing() == volume::Spacing{1.0, 1.0, 1.0});
        CHECK(r.volume.dims() == Dims{10, 10, 12});
        CHECK(r.consensus_mask.dims() == r.volume.dims());
        CHECK(r.views.axial.center == volume::mask_centroid(r.consensus_mask));
        for (double v : r.volume.voxels()) CHECK(v >= -1000.0);
    }

    TEST_CASE("an empty directory gives an empty cohort") {
        TempDir dir;
        const auto c = build_cohort(dir.path());
        CHECK(c.records.empty());
        CHECK(c.summary.n_total == 0);
        CHECK(c.summary.n_discarded == 0);
        CHECK(c.summary.failures.empty());
    }

    TEST_CASE("a malformed record is reported and the rest still processed") {
        TempDir dir;
        write_nodule(dir.path(), "N1", {4});
        write_nodule(dir.path(), "N2", {1});
        write_file_atomic(dir / "N3.annotation.json", "{ not json");
        const auto c = build_cohort(dir.path());
        CHECK(c.summary.n_total == 2);
        REQUIRE(c.summary.failures.size() == 1);
        CHECK(c.summary.failures[0].nodule_id == "N3");
        CHECK_FALSE(c.summary.failures[0].message.empty());
    }

    TEST_CASE("a missing biomarker fails that record only") {
        TempDir dir;
        write_nodule(dir.path(), "N1", {4});
        auto j = nlohmann::json::parse(read_file(dir / "N1.annotation.json"));
        j["annotations"][0]["biomarkers"].erase("margin");
        write_file_atomic(dir / "N1.annotation.json", j.dump());
        CHECK(thrown_kind([&] { read_annotation(dir / "N1.annotation.json"); }) == ErrorKind::InvalidInput);
        const auto c = build_cohort(dir.path());
        CHECK(c.summary.failures.size() == 1);
    }

    TEST_CASE("more than four annotations make a nodule inadmissible") {
        TempDir dir;
        write_nodule(dir.path(), "N1", {4, 4, 4, 4, 4});
        write_nodule(dir.path(), "N2", {4, 4, 4, 4});
        const auto c = build_cohort(dir.path());
        CHECK(c.summary.n_inadmissible == 1);
        CHECK(c.summary.n_total == 1);
        CHECK(c.summary.failures.empty());
    }

    TEST_CASE("output does not depend on the worker count") {
        TempDir dir;
        for (int i = 0; i < 6; ++i) write_nodule(dir.path(), "N" + std::to_string(i), {1 + i % 5, 1 + (i * 3) % 5});
        const auto a = build_cohort(dir.path(), {}, 1);
        const auto b = build_cohort(dir.path(), {}, 3);
        REQUIRE(a.records.size() == b.records.size());
        for (std::size_t i = 0; i < a.records.size(); ++i) {
            CHECK(a.records[i].nodule_id == b.records[i].nodule_id);
            CHECK(a.records[i].consensus_mask == b.records[i].consensus_mask);
            CHECK(std::equal(a.records[i].volume.voxels().begin(), a.records[i].volume.voxels().end(),
                             b.records[i].volume.voxels().begin()));
        }
        CHECK(a.summary.n_discarded == b.summary.n_discarded);
    }

    TEST_CASE("a missing directory is an i/o error") {
        CHECK(thrown_kind([] { build_cohort("/nonexistent/conrad/cohort"); }) == ErrorKind::Io);
    }
}
