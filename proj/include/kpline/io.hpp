#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "kpline/grid.hpp"
#include "kpline/kp2.hpp"

namespace kpline {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Filesystem failures: unreadable inputs, unwritable outputs, corrupt files.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void ensure_directory(const fs::path& dir);
// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const fs::path& path, const std::string& bytes);
std::string read_file(const fs::path& path);

void write_json(const fs::path& path, const json& value);
json read_json(const fs::path& path);

// Snapshot sidecar. Lengths and time are in output units.
struct SnapshotMeta {
  int nx = 0, ny = 0;
  double lx = 0, ly = 0, t = 0, frame_speed = 0;
  std::string field_name;
  std::string run_id;
};
json to_json(const SnapshotMeta& meta);
SnapshotMeta snapshot_meta_from_json(const json& j);

// `<stem>.f64` holds nx * ny little-endian doubles with element (i, j) at
// i * ny + j; `<stem>.json` holds the sidecar. `value_scale` multiplies every
// sample on the way out.
void write_snapshot(const fs::path& stem, const RealField2D& field, const SnapshotMeta& meta, double value_scale = 1.0);
struct Snapshot {
  SnapshotMeta meta;
  Eigen::ArrayXXd values;  // nx x ny, column-major like RealField2D
};
Snapshot read_snapshot(const fs::path& stem);

// Exact binary image of one or more evolution states sharing a step counter.
void write_checkpoint(const fs::path& path, const std::vector<const EvolutionState*>& states);
std::vector<EvolutionState> read_checkpoint(const fs::path& path, const Grid2D& grid);

// Text columns with a header line, numbers printed with 17 significant digits.
void write_columns_csv(const fs::path& path, const std::vector<std::string>& header,
                       const std::vector<Eigen::ArrayXd>& columns);
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<double> column(const std::string& name) const;
};
CsvTable read_csv(const fs::path& path);

std::string format_number(double v);

}  // namespace kpline
