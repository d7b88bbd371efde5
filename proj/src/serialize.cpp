#include "hdsim/serialize.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hdsim/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hdsim {

namespace {

const char* kCsvHeader = "# hdsim ";

void write_bytes_atomic(const std::string& path, const char* data,
                        size_t size) {
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(data, static_cast<std::streamsize>(size));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

void write_json_atomic(const std::string& path, const json& j) {
  std::string s = j.dump(2);
  s.push_back('\n');
  write_bytes_atomic(path, s.data(), s.size());
}

std::string csv_preamble() {
  return std::string(kCsvHeader) + kVersion + "\n";
}

json grid_header_json(const PhaseSpaceGrid& g) {
  json j;
  j["version"] = kVersion;
  j["kind"] = "phase-space-grid";
  j["q_min"] = g.q_min;
  j["q_max"] = g.q_max;
  j["p_min"] = g.p_min;
  j["p_max"] = g.p_max;
  j["nq"] = g.nq;
  j["np"] = g.np;
  return j;
}

PhaseSpaceGrid grid_from_header_json(const json& j) {
  PhaseSpaceGrid g;
  g.q_min = j.at("q_min").get<double>();
  g.q_max = j.at("q_max").get<double>();
  g.p_min = j.at("p_min").get<double>();
  g.p_max = j.at("p_max").get<double>();
  g.nq = j.at("nq").get<int>();
  g.np = j.at("np").get<int>();
  if (g.nq < 1 || g.np < 1) throw Error("grid header has empty shape");
  g.allocate();
  return g;
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
  write_bytes_atomic(path, content.data(), content.size());
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_count_distribution_csv(const std::string& path,
                                  const CountDistribution& d) {
  std::string s = csv_preamble();
  s += "n,probability\n";
  for (size_t n = 0; n < d.probs.size(); ++n)
    s += std::to_string(n) + "," + format_double(d.probs[n]) + "\n";
  s += "# tail_mass," + format_double(d.tail_mass) + "\n";
  write_text_atomic(path, s);
}

void write_count_distribution_json(const std::string& path,
                                   const CountDistribution& d) {
  json j;
  j["version"] = kVersion;
  j["probabilities"] = d.probs;
  j["tail_mass"] = d.tail_mass;
  write_json_atomic(path, j);
}

void write_count_events_csv(
    const std::string& path,
    const std::vector<std::vector<int>>& shots_by_row) {
  std::string s = csv_preamble();
  s += "shot,detector,count\n";
  for (size_t shot = 0; shot < shots_by_row.size(); ++shot)
    for (size_t det = 0; det < shots_by_row[shot].size(); ++det)
      s += std::to_string(shot) + "," + std::to_string(det) + "," +
           std::to_string(shots_by_row[shot][det]) + "\n";
  write_text_atomic(path, s);
}

void write_scaled_difference_csv(const std::string& path,
                                 const ScaledDifferenceDistribution& d) {
  std::string s = csv_preamble();
  s += "outcome,probability\n";
  for (const auto& a : d.atoms)
    s += format_double(a.outcome) + "," + format_double(a.probability) + "\n";
  s += "# tail_mass," + format_double(d.tail_mass) + "\n";
  write_text_atomic(path, s);
}

void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRow>& rows) {
  std::string s = csv_preamble();
  s += "r,sup_error\n";
  for (const auto& r : rows)
    s += format_double(r.r) + "," + format_double(r.sup_error) + "\n";
  write_text_atomic(path, s);
}

void write_convergence_json(const std::string& path,
                            const std::vector<ConvergenceRow>& rows,
                            const std::vector<double>& t_grid,
                            const std::vector<std::vector<double>>& per_t) {
  json j;
  j["version"] = kVersion;
  j["t_grid"] = t_grid;
  json jrows = json::array();
  for (size_t i = 0; i < rows.size(); ++i) {
    json r;
    r["r"] = rows[i].r;
    r["sup_error"] = rows[i].sup_error;
    if (i < per_t.size()) r["errors"] = per_t[i];
    jrows.push_back(r);
  }
  j["rows"] = jrows;
  write_json_atomic(path, j);
}

void write_grid_csv(const std::string& path, const PhaseSpaceGrid& g) {
  std::string s = csv_preamble();
  s += "# grid," + format_double(g.q_min) + "," + format_double(g.q_max) +
       "," + format_double(g.p_min) + "," + format_double(g.p_max) + "," +
       std::to_string(g.nq) + "," + std::to_string(g.np) + "\n";
  s += "q,p,value\n";
  for (int i = 0; i < g.nq; ++i)
    for (int j = 0; j < g.np; ++j)
      s += format_double(g.q(i)) + "," + format_double(g.p(j)) + "," +
           format_double(g.values(i, j)) + "\n";
  write_text_atomic(path, s);
}

PhaseSpaceGrid read_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  PhaseSpaceGrid g;
  bool have_header = false;
  std::string line;
  long long row = 0;
  while (std::getline(in, line)) {
    if (line.rfind("# grid,", 0) == 0) {
      std::istringstream ss(line.substr(7));
      char comma;
      ss >> g.q_min >> comma >> g.q_max >> comma >> g.p_min >> comma >>
          g.p_max >> comma >> g.nq >> comma >> g.np;
      if (!ss) throw Error("malformed grid header in " + path);
      g.allocate();
      have_header = true;
      continue;
    }
    if (line.empty() || line[0] == '#' || line.rfind("q,", 0) == 0) continue;
    if (!have_header) throw Error("grid CSV lacks the layout header line");
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw Error("malformed grid row in " + path);
    const double v = std::stod(line.substr(c2 + 1));
    const long long i = row / g.np, j = row % g.np;
    if (i >= g.nq) throw Error("too many grid rows in " + path);
    g.values(static_cast<int>(i), static_cast<int>(j)) = v;
    ++row;
  }
  if (!have_header || row != static_cast<long long>(g.nq) * g.np)
    throw Error("grid CSV row count does not match its header");
  return g;
}

void write_grid_binary(const std::string& json_path,
                       const std::string& payload_path,
                       const PhaseSpaceGrid& g) {
  json j = grid_header_json(g);
  j["dtype"] = "float64";
  j["byte_order"] = "little-endian";
  j["layout"] = "row-major";
  j["payload"] = fs::path(payload_path).filename().string();
  write_bytes_atomic(payload_path,
                     reinterpret_cast<const char*>(g.values.data()),
                     sizeof(double) * static_cast<size_t>(g.nq) * g.np);
  write_json_atomic(json_path, j);
}

PhaseSpaceGrid read_grid_binary(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw Error("cannot open " + json_path);
  json j;
  in >> j;
  PhaseSpaceGrid g = grid_from_header_json(j);
  fs::path payload = j.at("payload").get<std::string>();
  if (payload.is_relative())
    payload = fs::path(json_path).parent_path() / payload;
  std::ifstream pin(payload, std::ios::binary);
  if (!pin) throw Error("cannot open payload " + payload.string());
  const size_t bytes = sizeof(double) * static_cast<size_t>(g.nq) * g.np;
  pin.read(reinterpret_cast<char*>(g.values.data()),
           static_cast<std::streamsize>(bytes));
  if (pin.gcount() != static_cast<std::streamsize>(bytes))
    throw Error("payload size does not match the grid header");
  return g;
}

void write_grid_gnuplot(const std::string& path, const PhaseSpaceGrid& g) {
  std::string s = csv_preamble();
  for (int i = 0; i < g.nq; ++i) {
    if (i > 0) s += "\n";
    for (int j = 0; j < g.np; ++j)
      s += format_double(g.q(i)) + " " + format_double(g.p(j)) + " " +
           format_double(g.values(i, j)) + "\n";
  }
  write_text_atomic(path, s);
}

void write_joint_counts_csv(const std::string& path,
                            const JointCountDistribution& d) {
  std::string s = csv_preamble();
  s += "k,l,m,n,probability\n";
  for (const auto& [key, p] : d.atoms)
    s += std::to_string(key[0]) + "," + std::to_string(key[1]) + "," +
         std::to_string(key[2]) + "," + std::to_string(key[3]) + "," +
         format_double(p) + "\n";
  s += "# tail_mass," + format_double(d.tail_mass) + "\n";
  write_text_atomic(path, s);
}

void write_density_json(const std::string& path,
                        const FockDensityMatrix& rho) {
  json j;
  j["version"] = kVersion;
  j["cutoff"] = rho.budget.cutoff;
  j["tail_tol"] = rho.budget.tail_tol;
  json rows = json::array();
  for (int m = 0; m < rho.dim(); ++m) {
    json row = json::array();
    for (int n = 0; n < rho.dim(); ++n)
      row.push_back({rho.m(m, n).real(), rho.m(m, n).imag()});
    rows.push_back(row);
  }
  j["entries"] = rows;
  write_json_atomic(path, j);
}

FockDensityMatrix read_density_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  json j;
  in >> j;
  FockDensityMatrix rho;
  rho.budget.cutoff = j.at("cutoff").get<int>();
  rho.budget.tail_tol = j.at("tail_tol").get<double>();
  rho.budget.validate();
  const int d = rho.budget.dim();
  const auto& rows = j.at("entries");
  if (static_cast<int>(rows.size()) != d)
    throw Error("density row count does not match the cutoff");
  rho.m = CMat::Zero(d, d);
  for (int m = 0; m < d; ++m) {
    const auto& row = rows.at(m);
    if (static_cast<int>(row.size()) != d)
      throw Error("density column count does not match the cutoff");
    for (int n = 0; n < d; ++n)
      rho.m(m, n) = cxd(row.at(n).at(0).get<double>(),
                        row.at(n).at(1).get<double>());
  }
  return rho;
}

}  // namespace hdsim
