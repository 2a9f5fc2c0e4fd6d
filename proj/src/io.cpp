#include "convexflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "convexflow/error.hpp"

namespace convexflow {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_checksum(const fs::path& path) { return hex64(fnv1a64(read_text(path))); }

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json grid_to_json(const Grid& g) {
  Json j;
  j["dim"] = g.dim();
  j["lower"] = Json::array();
  j["upper"] = Json::array();
  j["n"] = Json::array();
  for (int a = 0; a < g.dim(); ++a) {
    j["lower"].push_back(g.lower(a));
    j["upper"].push_back(g.upper(a));
    j["n"].push_back(g.n(a));
  }
  j["h"] = g.h();
  return j;
}

Grid grid_from_json(const Json& j) {
  const int dim = j.at("dim").get<int>();
  std::array<double, 2> lo{0, 0}, hi{0, 0};
  std::array<int, 2> n{1, 1};
  for (int a = 0; a < dim; ++a) {
    lo[a] = j.at("lower").at(a).get<double>();
    hi[a] = j.at("upper").at(a).get<double>();
    n[a] = j.at("n").at(a).get<int>();
  }
  return Grid(dim, lo, hi, n);
}

Json dirs_to_json(const DirectionSet& d) {
  Json j;
  j["dim"] = d.dim();
  j["offsets"] = Json::array();
  for (const auto& dir : d) j["offsets"].push_back({dir.p[0], dir.p[1]});
  return j;
}

DirectionSet dirs_from_json(const Json& j) {
  std::vector<Offset> offsets;
  for (const auto& o : j.at("offsets")) offsets.push_back({o.at(0).get<int>(), o.at(1).get<int>()});
  return DirectionSet(j.at("dim").get<int>(), offsets);
}

std::string field_csv(const ScalarField& u) {
  const Grid& g = u.grid();
  std::string out = g.dim() == 1 ? "i,x,value\n" : "i,j,x,y,value\n";
  for (Eigen::Index f = 0; f < g.size(); ++f) {
    const NodeIndex k = g.unflat(f);
    const Point p = g.point(k);
    if (g.dim() == 1)
      out += std::to_string(k[0]) + ',' + format_double(p(0)) + ',' + format_double(u[f]) + '\n';
    else
      out += std::to_string(k[0]) + ',' + std::to_string(k[1]) + ',' + format_double(p(0)) + ',' +
             format_double(p(1)) + ',' + format_double(u[f]) + '\n';
  }
  return out;
}

ScalarField parse_field_csv(const std::string& text, const Grid& g) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  Eigen::VectorXd v = Eigen::VectorXd::Constant(g.size(), std::nan(""));
  long rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    const std::size_t want = g.dim() == 1 ? 3 : 5;
    if (cells.size() != want) throw PreconditionError("snapshot CSV: malformed row '" + line + "'");
    NodeIndex k{std::stoi(cells[0]), g.dim() == 1 ? 0 : std::stoi(cells[1])};
    if (k[0] < 0 || k[0] >= g.n(0) || k[1] < 0 || k[1] >= g.n(1))
      throw PreconditionError("snapshot CSV: node index out of range");
    v(g.flat(k)) = std::strtod(cells.back().c_str(), nullptr);
    ++rows;
  }
  if (rows != g.size()) throw PreconditionError("snapshot CSV: expected " + std::to_string(g.size()) + " rows");
  return ScalarField(g, std::move(v));
}

namespace {

std::string snapshot_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%03zu.csv", k);
  return buf;
}

}  // namespace

std::vector<std::string> write_snapshots(const fs::path& dir, const Snapshots& snaps, const std::string& config_hash) {
  std::vector<std::string> files;
  Json manifest;
  manifest["grid"] = grid_to_json(snaps.grid());
  manifest["dirs"] = dirs_to_json(snaps.dirs);
  manifest["dt"] = snaps.dt_used;
  manifest["steps"] = snaps.steps;
  manifest["steady_state_reached"] = snaps.steady_state_reached;
  manifest["config_hash"] = config_hash;
  manifest["times"] = snaps.times;
  manifest["files"] = Json::array();
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const std::string name = snapshot_name(k);
    write_text(dir / name, field_csv(snaps.fields[k]));
    manifest["files"].push_back(name);
    files.push_back(name);
  }
  write_text(dir / "snapshots.json", manifest.dump(2) + "\n");
  files.push_back("snapshots.json");
  return files;
}

Snapshots read_snapshots(const fs::path& dir) {
  const Json m = Json::parse(read_text(dir / "snapshots.json"));
  const Grid g = grid_from_json(m.at("grid"));
  Snapshots s;
  s.dirs = dirs_from_json(m.at("dirs"));
  s.dt_used = m.at("dt").get<double>();
  s.steps = m.at("steps").get<long>();
  s.steady_state_reached = m.at("steady_state_reached").get<bool>();
  s.times = m.at("times").get<std::vector<double>>();
  for (const auto& f : m.at("files")) s.fields.push_back(parse_field_csv(read_text(dir / f.get<std::string>()), g));
  if (s.fields.size() != s.times.size()) throw PreconditionError("snapshot manifest: times and files disagree");
  return s;
}

std::string trajectory_csv(const Trajectory& tr) {
  const int dim = tr.points.empty() ? 1 : int(tr.points.front().size());
  std::string out = dim == 1 ? "t,x,u0,env,grad\n" : "t,x,y,u0,env,grad\n";
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    out += format_double(tr.times[k]);
    for (int a = 0; a < dim; ++a) out += ',' + format_double(tr.points[k](a));
    out += ',' + format_double(tr.values_u0[k]) + ',' + format_double(tr.values_env[k]) + ',' +
           format_double(tr.grad_norm[k]) + '\n';
  }
  return out;
}

Json trajectory_summary(const Trajectory& tr, double env_min) {
  Json j;
  const Point& x = tr.final_point();
  j["x0"] = std::vector<double>(tr.points.front().data(), tr.points.front().data() + tr.points.front().size());
  j["final_point"] = std::vector<double>(x.data(), x.data() + x.size());
  j["final_time"] = tr.times.back();
  j["final_env_gap"] = tr.values_env.back() - env_min;
  j["termination"] = to_string(tr.terminated_reason);
  j["steps"] = tr.times.size() - 1;
  return j;
}

std::string columns_csv(const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw PreconditionError("columns_csv: names and columns differ in count");
  std::string out;
  for (std::size_t c = 0; c < names.size(); ++c) out += (c ? "," : "") + names[c];
  out += '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& col : columns)
    if (col.size() != rows) throw PreconditionError("columns_csv: ragged columns");
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + format_double(columns[c][r]);
    out += '\n';
  }
  return out;
}

std::string gnuplot_error_script(const std::string& csv_name, const std::string& png_name, const std::string& title) {
  std::ostringstream s;
  s << "set datafile separator ','\n"
    << "set terminal pngcairo size 800,500\n"
    << "set output '" << png_name << "'\n"
    << "set logscale y\n"
    << "set xlabel 't'\n"
    << "set ylabel 'error'\n"
    << "set title '" << title << "'\n"
    << "plot '" << csv_name << "' using 1:2 skip 1 with linespoints title 'error'\n";
  return s.str();
}

}  // namespace convexflow
