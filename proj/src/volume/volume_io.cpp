#include "conrad/volume_io.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <json.hpp>

#include "conrad/atomic_file.hpp"
#include "conrad/error.hpp"

namespace conrad::volume {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json parse_header(const fs::path& header) {
    try {
        return json::parse(read_file(header));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidInput, header.string() + ": malformed header: " + e.what());
    }
}

template <typename T>
T require(const json& j, const char* key, const fs::path& where) {
    if (!j.contains(key)) throw Error(ErrorKind::InvalidInput, where.string() + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorKind::InvalidInput, where.string() + ": field '" + key + "' has the wrong type");
    }
}

struct Header {
    Dims dims;
    Spacing spacing;
    std::string dtype;
    double offset_hu = 0.0;
};

Header read_header(const fs::path& path, bool offset_required) {
    const json j = parse_header(path);
    Header h;
    auto dims = require<std::vector<int>>(j, "dims", path);
    auto spacing = require<std::vector<double>>(j, "spacing_mm", path);
    if (dims.size() != 3 || spacing.size() != 3) {
        throw Error(ErrorKind::InvalidInput, path.string() + ": dims and spacing_mm need three entries");
    }
    h.dims = {dims[0], dims[1], dims[2]};
    h.spacing = {spacing[0], spacing[1], spacing[2]};
    h.dtype = require<std::string>(j, "dtype", path);
    if (offset_required || j.contains("offset_hu")) h.offset_hu = require<double>(j, "offset_hu", path);
    if (h.dims.nx <= 0 || h.dims.ny <= 0 || h.dims.nz <= 0) {
        throw Error(ErrorKind::InvalidInput, path.string() + ": dims must be positive");
    }
    return h;
}

std::string read_payload(const fs::path& header, std::size_t expected_bytes) {
    const auto raw = raw_path_for(header);
    std::string bytes = read_file(raw);
    if (bytes.size() != expected_bytes) {
        throw Error(ErrorKind::InvalidInput, raw.string() + ": expected " + std::to_string(expected_bytes) +
                                                 " bytes, found " + std::to_string(bytes.size()));
    }
    return bytes;
}

std::string header_text(const Dims& d, const Spacing& s, std::string_view dtype, double offset_hu) {
    json j;
    j["dims"] = {d.nx, d.ny, d.nz};
    j["spacing_mm"] = {s.x, s.y, s.z};
    j["dtype"] = dtype;
    j["offset_hu"] = offset_hu;
    return j.dump(2) + "\n";
}

}  // namespace

fs::path raw_path_for(const fs::path& header) {
    const std::string s = header.string();
    if (ends_with(s, kVolumeHeaderSuffix)) {
        return fs::path(s.substr(0, s.size() - kVolumeHeaderSuffix.size()) + std::string(kVolumeRawSuffix));
    }
    if (ends_with(s, kMaskHeaderSuffix)) {
        return fs::path(s.substr(0, s.size() - kMaskHeaderSuffix.size()) + std::string(kMaskRawSuffix));
    }
    throw Error(ErrorKind::InvalidInput, s + ": header must end in .cvol.json or .cmask.json");
}

ScalarVolume read_volume(const fs::path& header) {
    const Header h = read_header(header, true);
    if (h.dtype != "i16le") throw Error(ErrorKind::InvalidInput, header.string() + ": volume dtype must be i16le");
    const std::size_t n = h.dims.count();
    const std::string bytes = read_payload(header, n * 2);
    std::vector<double> voxels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto lo = static_cast<std::uint8_t>(bytes[2 * i]);
        const auto hi = static_cast<std::uint8_t>(bytes[2 * i + 1]);
        const auto raw = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
        voxels[i] = static_cast<double>(raw) + h.offset_hu;
    }
    return ScalarVolume(h.dims, h.spacing, std::move(voxels));
}

void write_volume(const fs::path& header, const ScalarVolume& v, double offset_hu) {
    const auto vox = v.voxels();
    std::string bytes(vox.size() * 2, '\0');
    for (std::size_t i = 0; i < vox.size(); ++i) {
        const double r = std::nearbyint(vox[i] - offset_hu);
        if (r < std::numeric_limits<std::int16_t>::min() || r > std::numeric_limits<std::int16_t>::max()) {
            throw Error(ErrorKind::InvalidInput, "voxel value " + std::to_string(vox[i]) + " does not fit i16 storage");
        }
        const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(r));
        bytes[2 * i] = static_cast<char>(u & 0xFF);
        bytes[2 * i + 1] = static_cast<char>(u >> 8);
    }
    write_file_atomic(raw_path_for(header), bytes);
    write_file_atomic(header, header_text(v.dims(), v.spacing(), "i16le", offset_hu));
}

MaskFile read_mask(const fs::path& header) {
    const Header h = read_header(header, false);
    if (h.dtype != "u8") throw Error(ErrorKind::InvalidInput, header.string() + ": mask dtype must be u8");
    const std::string bytes = read_payload(header, h.dims.count());
    std::vector<std::uint8_t> bits(bytes.begin(), bytes.end());
    for (auto b : bits) {
        if (b > 1) throw Error(ErrorKind::InvalidInput, header.string() + ": mask payload must contain only 0 and 1");
    }
    if (!(h.spacing.x > 0 && h.spacing.y > 0 && h.spacing.z > 0)) {
        throw Error(ErrorKind::InvalidInput, header.string() + ": spacing must be positive");
    }
    return {SegMask(h.dims, std::move(bits)), h.spacing};
}

void write_mask(const fs::path& header, const SegMask& m, const Spacing& spacing) {
    const auto bits = m.bits();
    write_file_atomic(raw_path_for(header), std::as_bytes(bits));
    write_file_atomic(header, header_text(m.dims(), spacing, "u8", 0.0));
}

}  // namespace conrad::volume
