#include "kpline/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace kpline {

static_assert(std::endian::native == std::endian::little, "snapshot files assume a little-endian host");

namespace {

constexpr char kCheckpointMagic[8] = {'K', 'P', 'L', 'C', 'K', 'P', 'T', '1'};

template <class T>
void put(std::string& out, const T& v) {
  const char* p = reinterpret_cast<const char*>(&v);
  out.append(p, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("checkpoint truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_json(const fs::path& path, const json& value) { write_file_atomic(path, value.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

json to_json(const SnapshotMeta& m) {
  return {{"nx", m.nx}, {"ny", m.ny}, {"lx", m.lx}, {"ly", m.ly}, {"t", m.t}, {"frame_speed", m.frame_speed},
          {"field_name", m.field_name}, {"run_id", m.run_id}};
}

SnapshotMeta snapshot_meta_from_json(const json& j) {
  try {
    SnapshotMeta m;
    m.nx = j.at("nx").get<int>();
    m.ny = j.at("ny").get<int>();
    m.lx = j.at("lx").get<double>();
    m.ly = j.at("ly").get<double>();
    m.t = j.at("t").get<double>();
    m.frame_speed = j.at("frame_speed").get<double>();
    m.field_name = j.at("field_name").get<std::string>();
    m.run_id = j.at("run_id").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw IoError(std::string("snapshot sidecar: ") + e.what());
  }
}

void write_snapshot(const fs::path& stem, const RealField2D& field, const SnapshotMeta& meta, double value_scale) {
  const int nx = field.grid.nx(), ny = field.grid.ny();
  if (meta.nx != nx || meta.ny != ny) throw IoError("snapshot sidecar shape does not match the field");
  std::string bytes(static_cast<std::size_t>(nx) * ny * sizeof(double), '\0');
  auto* out = reinterpret_cast<double*>(bytes.data());
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) out[static_cast<std::size_t>(i) * ny + j] = value_scale * field.values(i, j);
  write_file_atomic(stem.string() + ".f64", bytes);
  write_json(stem.string() + ".json", to_json(meta));
}

Snapshot read_snapshot(const fs::path& stem) {
  Snapshot s;
  s.meta = snapshot_meta_from_json(read_json(stem.string() + ".json"));
  const std::string bytes = read_file(stem.string() + ".f64");
  const std::size_t expected = static_cast<std::size_t>(s.meta.nx) * s.meta.ny * sizeof(double);
  if (bytes.size() != expected) throw IoError("snapshot " + stem.string() + ".f64 has the wrong size");
  s.values.resize(s.meta.nx, s.meta.ny);
  const auto* in = reinterpret_cast<const double*>(bytes.data());
  for (int i = 0; i < s.meta.nx; ++i)
    for (int j = 0; j < s.meta.ny; ++j) s.values(i, j) = in[static_cast<std::size_t>(i) * s.meta.ny + j];
  return s;
}

void write_checkpoint(const fs::path& path, const std::vector<const EvolutionState*>& states) {
  if (states.empty()) throw IoError("checkpoint needs at least one state");
  std::string bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  const Grid2D& g = states.front()->spectrum.grid;
  put(bytes, static_cast<std::int32_t>(g.nx()));
  put(bytes, static_cast<std::int32_t>(g.ny()));
  put(bytes, g.lx());
  put(bytes, g.ly());
  put(bytes, static_cast<std::int64_t>(states.front()->step));
  put(bytes, static_cast<std::int32_t>(states.size()));
  for (const EvolutionState* s : states) {
    if (!s->spectrum.grid.same_shape(g) || s->step != states.front()->step)
      throw IoError("checkpoint states must share grid and step");
    const auto* p = reinterpret_cast<const char*>(s->spectrum.coeffs.data());
    bytes.append(p, s->spectrum.coeffs.size() * sizeof(cplx));
  }
  write_file_atomic(path, bytes);
}

std::vector<EvolutionState> read_checkpoint(const fs::path& path, const Grid2D& grid) {
  const std::string bytes = read_file(path);
  if (bytes.size() < sizeof kCheckpointMagic || std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic))
    throw IoError("not a checkpoint file: " + path.string());
  std::size_t pos = sizeof kCheckpointMagic;
  const int nx = take<std::int32_t>(bytes, pos), ny = take<std::int32_t>(bytes, pos);
  const double lx = take<double>(bytes, pos), ly = take<double>(bytes, pos);
  const long step = static_cast<long>(take<std::int64_t>(bytes, pos));
  const int count = take<std::int32_t>(bytes, pos);
  if (nx != grid.nx() || ny != grid.ny() || lx != grid.lx() || ly != grid.ly())
    throw IoError("checkpoint grid does not match the configuration");
  std::vector<EvolutionState> out;
  const std::size_t block = static_cast<std::size_t>(grid.nxh()) * ny * sizeof(cplx);
  for (int k = 0; k < count; ++k) {
    if (pos + block > bytes.size()) throw IoError("checkpoint truncated");
    EvolutionState s{Spectrum2D(grid), step};
    std::memcpy(s.spectrum.coeffs.data(), bytes.data() + pos, block);
    pos += block;
    out.push_back(std::move(s));
  }
  return out;
}

std::string format_number(double v) {
  // Shortest text that parses back to the same double.
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_columns_csv(const fs::path& path, const std::vector<std::string>& header,
                       const std::vector<Eigen::ArrayXd>& columns) {
  if (header.size() != columns.size()) throw IoError("CSV header and column count differ");
  std::string text;
  for (std::size_t k = 0; k < header.size(); ++k) text += (k ? "," : "") + header[k];
  text += '\n';
  const Eigen::Index n = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != n) throw IoError("CSV columns differ in length");
  for (Eigen::Index r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < columns.size(); ++k) text += (k ? "," : "") + format_number(columns[k](r));
    text += '\n';
  }
  write_file_atomic(path, text);
}

std::vector<double> CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] != name) continue;
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r.at(k));
    return out;
  }
  throw IoError("CSV has no column " + name);
}

CsvTable read_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV " + path.string());
  table.header = split_commas(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split_commas(line)) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("non-numeric CSV cell '" + cell + "' in " + path.string());
      }
    }
    if (row.size() != table.header.size()) throw IoError("ragged CSV row in " + path.string());
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace kpline
