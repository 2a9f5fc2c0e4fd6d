#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "convexflow/flow.hpp"
#include "convexflow/solver.hpp"

namespace convexflow {

using Json = nlohmann::ordered_json;

// %.17g: enough digits for an exact double round trip.
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);
// FNV-1a of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

Json grid_to_json(const Grid& g);
Grid grid_from_json(const Json& j);
Json dirs_to_json(const DirectionSet& d);
DirectionSet dirs_from_json(const Json& j);

// Columns i[,j],x[,y],value.
std::string field_csv(const ScalarField& u);
ScalarField parse_field_csv(const std::string& text, const Grid& grid);

// snapshot_000.csv ... plus snapshots.json. Returns the files written, relative to dir.
std::vector<std::string> write_snapshots(const std::filesystem::path& dir, const Snapshots& snaps,
                                         const std::string& config_hash);
Snapshots read_snapshots(const std::filesystem::path& dir);

// Columns t,x[,y],u0,env,grad.
std::string trajectory_csv(const Trajectory& traj);
Json trajectory_summary(const Trajectory& traj, double env_min);

// Header row then one row per index; every column must have the same length.
std::string columns_csv(const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns);

// Log-scale error-vs-time plot of a two-column CSV (t,error) living next to the script.
std::string gnuplot_error_script(const std::string& csv_name, const std::string& png_name, const std::string& title);

}  // namespace convexflow
