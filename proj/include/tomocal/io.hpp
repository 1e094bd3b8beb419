#pragma once

/// @file
/// File formats: rig and view-list JSON, projection CSV, experiment
/// configuration JSON, and the helpers the command-line tool uses for
/// run manifests. All lengths are in cm and all angles in rad, in files
/// as everywhere else; floats are written with up to 17 significant
/// digits so values round-trip exactly.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tomocal/fanbeam_sim.hpp"
#include "tomocal/geometry.hpp"
#include "tomocal/harness.hpp"
#include "tomocal/parallel_sim.hpp"

namespace tomocal::io {

inline constexpr const char* kToolkitVersion = "0.1.0";

using json = nlohmann::json;

/// Reads and parses a JSON file; parse or read failures raise IoError.
json read_json_file(const std::filesystem::path& path);

void write_json_file(const std::filesystem::path& path, const json& value);

std::string read_text_file(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& text);

// ===================================================================== rigs

/// A rig file: {"geometry": "parallel"|"fanbeam", ...}. Parallel rigs list
/// h_markers and v_markers as [x, y] pairs; fan-beam rigs carry the scalar
/// fields D, C_a, p_a, C_b, p_b, L, k1, k2, k3.
struct RigFile {
    Geometry geometry = Geometry::Parallel;
    ParallelRig parallel;
    FanBeamRig fanbeam;
};

RigFile rig_from_json(const json& value);
json rig_to_json(const RigFile& rig);
RigFile load_rig(const std::filesystem::path& path);

// ==================================================================== views

std::vector<ParallelView> parallel_views_from_json(const json& value);
std::vector<FanBeamView> fanbeam_views_from_json(const json& value);
json views_to_json(std::span<const ParallelView> views);
json views_to_json(std::span<const FanBeamView> views);

// ========================================================== projection CSV

/// CSV layout: header `view_index,group,marker_index,position` with an
/// additional `weight` column for fan-beam data; one row per marker;
/// LF line endings. Loaders accept rows in any order and sort them by
/// (view, group, marker index); they do not require complete groups, the
/// calibrators validate completeness where it matters.
void save_parallel_projections(const std::filesystem::path& path,
                               std::span<const ParallelDetections> views);
std::vector<ParallelDetections> load_parallel_projections(const std::filesystem::path& path);

/// Fan-beam CSV written by the simulator always carries weights; the
/// loader also accepts the four-column layout and leaves weights empty.
void save_fanbeam_projections(const std::filesystem::path& path,
                              std::span<const FanBeamDetections> views);
std::vector<FanBeamDetections> load_fanbeam_projections(const std::filesystem::path& path);

// ======================================================= experiment config

ExperimentConfig experiment_config_from_json(const json& value);
json experiment_config_to_json(const ExperimentConfig& config);

// ================================================================ manifest

/// Up to 17 significant digits; the shortest representation that parses
/// back to the same double.
std::string format_double(double x);

/// FNV-1a 64-bit hash of the canonical dump (object keys sorted), as 16
/// hex digits. Stable under key reordering of the input object.
std::string config_hash_hex(const json& value);

std::string iso8601_utc_now();

}  // namespace tomocal::io
