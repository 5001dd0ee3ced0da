#pragma once

#include <filesystem>

#include "conrad/volume.hpp"

namespace conrad::volume {

// On-disk pairs: `<stem>.cvol.json` + `<stem>.cvol.raw` for volumes and
// `<stem>.cmask.json` + `<stem>.cmask.raw` for masks. Headers carry
// {dims, spacing_mm, dtype, offset_hu}; volume payloads are little-endian int16
// with hu = raw + offset_hu, mask payloads are one byte per voxel in {0, 1}.
// Both use x-fastest order.

inline constexpr std::string_view kVolumeHeaderSuffix = ".cvol.json";
inline constexpr std::string_view kVolumeRawSuffix = ".cvol.raw";
inline constexpr std::string_view kMaskHeaderSuffix = ".cmask.json";
inline constexpr std::string_view kMaskRawSuffix = ".cmask.raw";

/// Reads a volume given the path of its JSON header; the raw payload is
/// resolved next to it by swapping the suffix.
ScalarVolume read_volume(const std::filesystem::path& header);

/// Writes the pair. HU values are rounded to the nearest integer relative to
/// offset_hu; values outside the int16 range are an error.
void write_volume(const std::filesystem::path& header, const ScalarVolume& v, double offset_hu = 0.0);

struct MaskFile {
    SegMask mask;
    Spacing spacing;
};

MaskFile read_mask(const std::filesystem::path& header);
void write_mask(const std::filesystem::path& header, const SegMask& m, const Spacing& spacing);

/// Companion raw path for a header path (`x.cvol.json` -> `x.cvol.raw`).
std::filesystem::path raw_path_for(const std::filesystem::path& header);

}  // namespace conrad::volume
