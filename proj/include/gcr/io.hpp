#pragma once

#include <filesystem>
#include <string>

#include "gcr/correspondence.hpp"
#include "gcr/fusion.hpp"
#include "gcr/geometry.hpp"
#include "gcr/metrics.hpp"
#include "gcr/synth.hpp"

namespace gcr::io {

/// .dmap / .dfield: one-line JSON header {"width","height","dim"} followed
/// by row-major little-endian 64-bit floats. Depth maps store invalid
/// pixels as NaN; descriptor fields store all descriptors then the
/// confidence plane.
void save_depth_map(const DepthMap& m, const std::filesystem::path& path);
DepthMap load_depth_map(const std::filesystem::path& path);
void save_descriptor_field(const DescriptorField& f,
                           const std::filesystem::path& path);
DescriptorField load_descriptor_field(const std::filesystem::path& path);

/// {"R": [[...]], "t": [...]}, row-major, 17 significant digits.
std::string pose_to_json(const Pose& p);
Pose pose_from_json(const std::string& text);
void save_pose(const Pose& p, const std::filesystem::path& path);
Pose load_pose(const std::filesystem::path& path);

std::string scene_to_json(const Scene& s);
Scene scene_from_json(const std::string& text);
void save_scene(const Scene& s, const std::filesystem::path& path);
Scene load_scene(const std::filesystem::path& path);

/// Fusion parameters: JSON manifest (config + per-tensor name/shape/offset
/// table) next to a .bin blob of concatenated little-endian doubles
/// (column-major within each tensor).
void save_fusion_params(const FusionParams& p,
                        const std::filesystem::path& json_path);
FusionParams load_fusion_params(const std::filesystem::path& json_path);

/// 16-bit binary PGM (maxval 65535, big-endian samples); invalid pixels
/// are written as 0.
void write_pgm16(const ErrorMap& map, const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace gcr::io
