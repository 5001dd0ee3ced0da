#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "conrad/atomic_file.hpp"
#include "conrad/volume.hpp"
#include "conrad/volume_io.hpp"
#include "error_kind.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace conrad;
using namespace conrad::volume;
using testing_support::thrown_kind;

TEST_SUITE("volume types") {
    TEST_CASE("voxel count must equal the dims product") {
        CHECK(thrown_kind([] { ScalarVolume({2, 2, 2}, {}, std::vector<double>(7, 0.0)); }) == ErrorKind::InvalidInput);
        CHECK_FALSE(thrown_kind([] { ScalarVolume({2, 2, 2}, {}, std::vector<double>(8, 0.0)); }));
    }

    TEST_CASE("spacing must be positive and voxels finite") {
        CHECK(thrown_kind([] { ScalarVolume({1, 1, 1}, {0.0, 1.0, 1.0}, 0.0); }) == ErrorKind::InvalidInput);
        CHECK(thrown_kind([] { ScalarVolume({1, 1, 1}, {1.0, -1.0, 1.0}, 0.0); }) == ErrorKind::InvalidInput);
        CHECK(thrown_kind([] { ScalarVolume({1, 1, 2}, {}, std::vector<double>{0.0, std::nan("")}); }) ==
              ErrorKind::InvalidInput);
        CHECK(thrown_kind([] { ScalarVolume({0, 1, 1}, {}, 0.0); }) == ErrorKind::InvalidInput);
    }

    TEST_CASE("linear order is x-fastest") {
        const Dims d{3, 4, 5};
        CHECK(d.index(1, 0, 0) == 1);
        CHECK(d.index(0, 1, 0) == 3);
        CHECK(d.index(0, 0, 1) == 12);
    }

    TEST_CASE("mask bits must be 0 or 1") {
        CHECK(thrown_kind([] { SegMask({1, 1, 2}, std::vector<std::uint8_t>{0, 2}); }) == ErrorKind::InvalidInput);
        SegMask m({2, 2, 1});
        CHECK(m.empty_roi());
        m.set(1, 1, 0, true);
        CHECK(m.count() == 1);
    }

    TEST_CASE("mask centroid rounds the centre of mass") {
        SegMask m({5, 5, 5});
        m.set(1, 2, 3, true);
        m.set(3, 2, 3, true);
        CHECK(mask_centroid(m) == VoxelCoord{2, 2, 3});
        CHECK(thrown_kind([] { mask_centroid(SegMask({2, 2, 2})); }) == ErrorKind::InvalidInput);
    }
}

TEST_SUITE("resample_isotropic") {
    TEST_CASE("two-sample line at 2 mm sampled at 1 mm is linear at the midpoint") {
        const ScalarVolume v({2, 1, 1}, {2.0, 1.0, 1.0}, std::vector<double>{0.0, 10.0});
        const ScalarVolume r = resample_isotropic(v, 1.0);
        REQUIRE(r.dims() == Dims{4, 1, 1});
        CHECK(r.spacing() == Spacing{1.0, 1.0, 1.0});
        CHECK(r.at(0, 0, 0) == 0.0);
        CHECK(r.at(1, 0, 0) == doctest::Approx(5.0).epsilon(1e-15));
        CHECK(r.at(2, 0, 0) == 10.0);
        CHECK(r.at(3, 0, 0) == 10.0);  // beyond the last centre: nearest boundary value
    }

    TEST_CASE("constant volumes stay constant at any spacing") {
        Rng rng(11);
        for (int c = 0; c < 30; ++c) {
            CAPTURE(c);
            const Dims d{gen::uniform_int(rng, 1, 7), gen::uniform_int(rng, 1, 7), gen::uniform_int(rng, 1, 7)};
            const Spacing s{rng.uniform(0.3, 3.0), rng.uniform(0.3, 3.0), rng.uniform(0.3, 3.0)};
            const double value = rng.uniform(-1000, 400);
            const auto r = resample_isotropic(ScalarVolume(d, s, value), rng.uniform(0.4, 2.0));
            for (double x : r.voxels()) CHECK(x == doctest::Approx(value).epsilon(1e-14));
        }
    }

    TEST_CASE("4x4x4 at 2 mm resampled to 1 mm matches the tent-weight oracle") {
        Rng rng(3);
        const auto v = gen::random_volume(rng, {4, 4, 4}, {2, 2, 2});
        const auto r = resample_isotropic(v, 1.0);
        REQUIRE(r.dims() == Dims{8, 8, 8});
        double worst = 0.0;
        for (int z = 0; z < 8; ++z)
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    worst = std::max(worst, std::abs(r.at(x, y, z) - oracle::tent_sample(v, x * 0.5, y * 0.5, z * 0.5)));
        CHECK(worst <= 1e-9);
    }

    TEST_CASE("property: every output voxel matches the oracle on random grids") {
        Rng rng(99);
        for (int c = 0; c < 25; ++c) {
            CAPTURE(c);
            const Dims d{gen::uniform_int(rng, 1, 6), gen::uniform_int(rng, 1, 6), gen::uniform_int(rng, 1, 6)};
            const Spacing s{rng.uniform(0.5, 2.5), rng.uniform(0.5, 2.5), rng.uniform(0.5, 3.0)};
            const double t = rng.uniform(0.5, 1.5);
            const auto v = gen::random_volume(rng, d, s);
            const auto r = resample_isotropic(v, t);
            CHECK(r.dims().nx == std::max(1, static_cast<int>(std::ceil(d.nx * s.x / t - 1e-9))));
            CHECK(r.dims().nz == std::max(1, static_cast<int>(std::ceil(d.nz * s.z / t - 1e-9))));
            double worst = 0.0;
            for (int z = 0; z < r.dims().nz; ++z)
                for (int y = 0; y < r.dims().ny; ++y)
                    for (int x = 0; x < r.dims().nx; ++x) {
                        const double ref = oracle::tent_sample(v, x * t / s.x, y * t / s.y, z * t / s.z);
                        worst = std::max(worst, std::abs(r.at(x, y, z) - ref));
                    }
            CHECK(worst <= 1e-9);
        }
    }

    TEST_CASE("isotropic volume at its own spacing is reproduced bitwise") {
        Rng rng(5);
        const auto v = gen::random_volume(rng, {5, 6, 7}, {0.7, 0.7, 0.7});
        const auto r = resample_isotropic(v, 0.7);
        REQUIRE(r.dims() == v.dims());
        for (std::size_t i = 0; i < v.voxels().size(); ++i) CHECK(r[i] == v[i]);
    }

    TEST_CASE("bad target spacing is rejected") {
        const ScalarVolume v({2, 2, 2}, {}, 0.0);
        CHECK(thrown_kind([&] { resample_isotropic(v, 0.0); }) == ErrorKind::InvalidInput);
        CHECK(thrown_kind([&] { resample_isotropic(v, -1.0); }) == ErrorKind::InvalidInput);
    }

    TEST_CASE("mask resampling thresholds the interpolated field at 0.5") {
        SegMask m({2, 1, 1});
        m.set(0, 0, 0, true);
        const SegMask r = resample_mask(m, {2.0, 1.0, 1.0}, 1.0);
        REQUIRE(r.dims() == Dims{4, 1, 1});
        CHECK(r.at(0, 0, 0));
        CHECK(r.at(1, 0, 0));  // field 0.5 is kept
        CHECK_FALSE(r.at(2, 0, 0));
        CHECK_FALSE(r.at(3, 0, 0));
    }
}

TEST_SUITE("clamp_hu") {
    TEST_CASE("values are clamped to the window") {
        const ScalarVolume v({3, 1, 1}, {}, std::vector<double>{-2000, 1000, 100});
        const auto c = clamp_hu(v);
        CHECK(c[0] == -1000);
        CHECK(c[1] == 400);
        CHECK(c[2] == 100);
    }

    TEST_CASE("clamping is idempotent") {
        Rng rng(8);
        for (int k = 0; k < 10; ++k) {
            const auto v = gen::random_volume(rng, {4, 3, 2}, {}, -3000, 3000);
            const auto once = clamp_hu(v);
            const auto twice = clamp_hu(once);
            for (std::size_t i = 0; i < once.voxels().size(); ++i) CHECK(once[i] == twice[i]);
        }
    }

    TEST_CASE("lo >= hi is a configuration error") {
        const ScalarVolume v({1, 1, 1}, {}, 0.0);
        CHECK(thrown_kind([&] { clamp_hu(v, 10, 10); }) == ErrorKind::Config);
        CHECK(thrown_kind([&] { clamp_hu(v, 10, -10); }) == ErrorKind::Config);
    }
}

TEST_SUITE("extract_views") {
    TEST_CASE("centre of a constant 64^3 volume gives constant crops") {
        const ScalarVolume v({64, 64, 64}, {}, 42.0);
        const auto views = extract_views(v, {32, 32, 32});
        for (const ViewCrop* c : {&views.axial, &views.coronal, &views.sagittal})
            for (double p : c->pixels) CHECK(p == 42.0);
        CHECK(views.axial.plane == Plane::Axial);
        CHECK(views.coronal.plane == Plane::Coronal);
        CHECK(views.sagittal.plane == Plane::Sagittal);
    }

    TEST_CASE("corner centre fills the out-of-bounds half with -1000") {
        const ScalarVolume v({40, 40, 40}, {}, 7.0);
        const auto views = extract_views(v, {0, 0, 0});
        for (const ViewCrop* c : {&views.axial, &views.coronal, &views.sagittal})
            for (int vv = 0; vv < kCropSize; ++vv)
                for (int u = 0; u < kCropSize; ++u) CHECK(c->at(u, vv) == ((u < 16 || vv < 16) ? -1000.0 : 7.0));
    }

    TEST_CASE("a single bright voxel lands at pixel (16, 16) in each plane") {
        std::vector<double> vox(20 * 21 * 22, 0.0);
        const Dims d{20, 21, 22};
        vox[d.index(9, 10, 11)] = 500.0;
        const ScalarVolume v(d, {}, vox);
        const auto views = extract_views(v, {9, 10, 11});
        for (const ViewCrop* c : {&views.axial, &views.coronal, &views.sagittal}) {
            int best_u = -1, best_v = -1;
            double best = -1e9;
            for (int vv = 0; vv < kCropSize; ++vv)
                for (int u = 0; u < kCropSize; ++u)
                    if (c->at(u, vv) > best) {
                        best = c->at(u, vv);
                        best_u = u;
                        best_v = vv;
                    }
            CHECK(best_u == 16);
            CHECK(best_v == 16);
        }
    }

    TEST_CASE("crop window spans centre-16 through centre+15") {
        Rng rng(2);
        const auto v = gen::random_volume(rng, {50, 50, 50}, {});
        const VoxelCoord c{25, 24, 23};
        const auto views = extract_views(v, c);
        CHECK(views.axial.at(0, 0) == v.at(9, 8, 23));
        CHECK(views.axial.at(31, 31) == v.at(40, 39, 23));
        CHECK(views.coronal.at(31, 0) == v.at(40, 24, 7));
        CHECK(views.sagittal.at(0, 31) == v.at(25, 8, 38));
    }

    TEST_CASE("centre outside the volume is out of bounds") {
        const ScalarVolume v({4, 4, 4}, {}, 0.0);
        CHECK(thrown_kind([&] { extract_views(v, {4, 0, 0}); }) == ErrorKind::OutOfBounds);
        CHECK(thrown_kind([&] { extract_views(v, {0, -1, 0}); }) == ErrorKind::OutOfBounds);
    }

    TEST_CASE("repeated extraction is identical") {
        Rng rng(4);
        const auto v = gen::random_volume(rng, {20, 20, 20}, {});
        const auto a = extract_views(v, {3, 10, 17});
        const auto b = extract_views(v, {3, 10, 17});
        CHECK(a.axial.pixels == b.axial.pixels);
        CHECK(a.coronal.pixels == b.coronal.pixels);
        CHECK(a.sagittal.pixels == b.sagittal.pixels);
    }
}

TEST_SUITE("z-normalization") {
    TEST_CASE("fit [1,2,3] uses the population convention") {
        const std::vector<double> x{1, 2, 3};
        const auto p = znorm_fit(x);
        CHECK(p.mean == doctest::Approx(2.0));
        CHECK(p.stddev == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));
        const auto z = znorm_apply(x, p);
        CHECK(z[0] == doctest::Approx(-1.224744871391589));
        CHECK(z[1] == doctest::Approx(0.0));
        CHECK(z[2] == doctest::Approx(1.224744871391589));
    }

    TEST_CASE("a constant column maps to zeros") {
        const std::vector<double> x(5, 3.5);
        const auto p = znorm_fit(x);
        CHECK(p.stddev == 0.0);
        for (double z : znorm_apply(x, p)) CHECK(z == 0.0);
    }

    TEST_CASE("property: normalized data has mean 0 and stddev 1") {
        Rng rng(21);
        for (int c = 0; c < 50; ++c) {
            std::vector<double> x(2 + rng.index(40));
            for (auto& v : x) v = rng.uniform(-50, 50) * rng.uniform(0.1, 10);
            const auto z = znorm_apply(x, znorm_fit(x));
            const auto q = znorm_fit(z);
            CHECK(std::abs(q.mean) <= 1e-12);
            CHECK(std::abs(q.stddev - 1.0) <= 1e-12);
        }
    }

    TEST_CASE("empty input is rejected") {
        CHECK(thrown_kind([] { znorm_fit(std::vector<double>{}); }) == ErrorKind::InvalidInput);
    }
}

TEST_SUITE("volume files") {
    using testing_support::TempDir;

    TEST_CASE("volume pair round-trips integer HU values") {
        TempDir dir;
        Rng rng(6);
        std::vector<double> vox(4 * 3 * 2);
        for (auto& v : vox) v = std::round(rng.uniform(-1024, 3000));
        const ScalarVolume v({4, 3, 2}, {0.7, 0.8, 1.25}, vox);
        const auto header = dir / "a.cvol.json";
        write_volume(header, v, -1024.0);
        CHECK(std::filesystem::file_size(raw_path_for(header)) == 24 * 2);
        const auto back = read_volume(header);
        CHECK(back.dims() == v.dims());
        CHECK(back.spacing() == v.spacing());
        for (std::size_t i = 0; i < vox.size(); ++i) CHECK(back[i] == vox[i]);

        const auto j = nlohmann::json::parse(read_file(header));
        CHECK(j.at("dtype") == "i16le");
        CHECK(j.at("offset_hu") == -1024.0);
        CHECK(j.at("dims") == nlohmann::json::array({4, 3, 2}));
    }

    TEST_CASE("payload is little-endian int16 relative to offset_hu") {
        TempDir dir;
        const ScalarVolume v({2, 1, 1}, {}, std::vector<double>{-1000, 1});
        write_volume(dir / "b.cvol.json", v, -1024.0);
        const std::string raw = read_file(dir / "b.cvol.raw");
        REQUIRE(raw.size() == 4);
        CHECK(static_cast<unsigned char>(raw[0]) == 24);
        CHECK(static_cast<unsigned char>(raw[1]) == 0);
        CHECK(static_cast<unsigned char>(raw[2]) == 0x01);
        CHECK(static_cast<unsigned char>(raw[3]) == 0x04);
    }

    TEST_CASE("values outside int16 storage are rejected") {
        TempDir dir;
        const ScalarVolume v({1, 1, 1}, {}, 40000.0);
        CHECK(thrown_kind([&] { write_volume(dir / "c.cvol.json", v); }) == ErrorKind::InvalidInput);
    }

    TEST_CASE("mask pair round-trips") {
        TempDir dir;
        Rng rng(7);
        const auto m = gen::random_mask(rng, {5, 4, 3}, 0.5);
        write_mask(dir / "m.cmask.json", m, {1.0, 2.0, 3.0});
        const auto back = read_mask(dir / "m.cmask.json");
        CHECK(back.mask == m);
        CHECK(back.spacing == Spacing{1.0, 2.0, 3.0});
    }

    TEST_CASE("malformed pairs are invalid input") {
        TempDir dir;
        const ScalarVolume v({2, 2, 2}, {}, 0.0);
        write_volume(dir / "d.cvol.json", v);

        SUBCASE("truncated payload") {
            write_file_atomic(dir / "d.cvol.raw", std::string(3, '\0'));
            CHECK(thrown_kind([&] { read_volume(dir / "d.cvol.json"); }) == ErrorKind::InvalidInput);
        }
        SUBCASE("missing field") {
            auto j = nlohmann::json::parse(read_file(dir / "d.cvol.json"));
            j.erase("spacing_mm");
            write_file_atomic(dir / "d.cvol.json", j.dump());
            CHECK(thrown_kind([&] { read_volume(dir / "d.cvol.json"); }) == ErrorKind::InvalidInput);
        }
        SUBCASE("wrong dtype") {
            auto j = nlohmann::json::parse(read_file(dir / "d.cvol.json"));
            j["dtype"] = "u8";
            write_file_atomic(dir / "d.cvol.json", j.dump());
            CHECK(thrown_kind([&] { read_volume(dir / "d.cvol.json"); }) == ErrorKind::InvalidInput);
        }
        SUBCASE("mask payload with a 2") {
            write_mask(dir / "e.cmask.json", SegMask({2, 1, 1}), {});
            write_file_atomic(dir / "e.cmask.raw", std::string("\x01\x02", 2));
            CHECK(thrown_kind([&] { read_mask(dir / "e.cmask.json"); }) == ErrorKind::InvalidInput);
        }
    }

    TEST_CASE("atomic writes leave no temporary files behind") {
        TempDir dir;
        write_file_atomic(dir / "x.txt", "one");
        write_file_atomic(dir / "x.txt", "two");
        CHECK(read_file(dir / "x.txt") == "two");
        std::size_t entries = 0;
        for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++entries;
        CHECK(entries == 1);
    }
}
