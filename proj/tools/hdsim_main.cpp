// Command-line driver for the hdsim library.
//
// Subcommands:
//   povm        POVM element diagonals + completeness report
//   homodyne    exact scaled-difference distribution, characteristic
//               function table, optional sampling
//   converge    finite-LO -> limit characteristic-function convergence table
//   eightport   joint double-homodyne distribution, limit density grid,
//               marginal KS comparison
//   genop       kernel-weighted convolution of a generating operator
//   deconvolve  forward smearing / Fourier deconvolution of a density grid
//   reconstruct density-matrix recovery from a deconvolved density grid
//
// Every subcommand accepts --config FILE (a single JSON object). Explicit
// command-line flags override config values; unknown config keys are
// rejected. Outputs are deterministic for a fixed seed and configuration.
//
// Exit codes: 0 success, 1 usage error, 2 invariant violation,
// 3 truncation/resolution failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hdsim/detector.hpp"
#include "hdsim/eightport.hpp"
#include "hdsim/fock.hpp"
#include "hdsim/homodyne.hpp"
#include "hdsim/serialize.hpp"
#include "hdsim/tomography.hpp"
#include "hdsim/types.hpp"
#include "hdsim/version.hpp"

namespace {

using hdsim::cxd;
using hdsim::DomainError;
using nlohmann::json;

std::string csv_preamble() {
  return std::string("# hdsim ") + hdsim::kVersion + "\n";
}

// ---------------------------------------------------------------------------
// JSON config binding: every flag doubles as a config key. Explicit flags win
// over config values; keys without a registered flag are rejected.
// ---------------------------------------------------------------------------

class ConfigBinder {
 public:
  explicit ConfigBinder(CLI::App* app) : app_(app) {}

  template <typename T>
  void bind(const std::string& key, const std::string& flag, T* target) {
    setters_[key] = [this, flag, target](const json& v) {
      if (app_->count(flag) > 0) return;  // explicit flag wins
      try {
        *target = v.get<T>();
      } catch (const json::exception&) {
        throw DomainError("config: key '" + flag.substr(2) +
                          "' has the wrong JSON type");
      }
      provided_.insert(flag);
    };
  }

  void apply_file(const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw DomainError("config: cannot open '" + path + "'");
    json cfg;
    try {
      in >> cfg;
    } catch (const json::parse_error& e) {
      throw DomainError("config: invalid JSON in '" + path + "': " + e.what());
    }
    if (!cfg.is_object())
      throw DomainError("config: top-level value must be a JSON object");
    for (const auto& [key, value] : cfg.items()) {
      auto it = setters_.find(key);
      if (it == setters_.end())
        throw DomainError("config: unknown key '" + key + "'");
      it->second(value);
    }
  }

  // True when the value came from an explicit flag or a config key.
  bool provided(const std::string& flag) const {
    return app_->count(flag) > 0 || provided_.count(flag) > 0;
  }

 private:
  CLI::App* app_;
  std::map<std::string, std::function<void(const json&)>> setters_;
  std::set<std::string> provided_;
};

// ---------------------------------------------------------------------------
// State expressions
// ---------------------------------------------------------------------------
//
// Accepted forms (whitespace-insensitive):
//   vacuum                   ground state
//   coherent(re[,im])        coherent state with complex amplitude
//   cat(re[,im])             even superposition of +/- the amplitude
//   fock(n)                  number state (density/vector contexts only)

struct StateExpr {
  std::string name;
  std::vector<double> args;
};

double parse_number(const std::string& s) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw DomainError("state: cannot parse number '" + s + "'");
  }
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
    ++pos;
  if (pos != s.size())
    throw DomainError("state: trailing characters in number '" + s + "'");
  return v;
}

StateExpr parse_state_expr(const std::string& raw) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  StateExpr e;
  const auto open = s.find('(');
  if (open == std::string::npos) {
    e.name = s;
    return e;
  }
  if (s.empty() || s.back() != ')')
    throw DomainError("state: expected ')' at end of '" + raw + "'");
  e.name = s.substr(0, open);
  std::string inner = s.substr(open + 1, s.size() - open - 2);
  std::stringstream ss(inner);
  std::string piece;
  while (std::getline(ss, piece, ','))
    e.args.push_back(parse_number(piece));
  if (!inner.empty() && inner.back() == ',')
    throw DomainError("state: trailing ',' in '" + raw + "'");
  return e;
}

cxd expr_amplitude(const StateExpr& e) {
  if (e.args.empty() || e.args.size() > 2)
    throw DomainError("state: '" + e.name +
                      "' takes one or two numeric arguments");
  return {e.args[0], e.args.size() == 2 ? e.args[1] : 0.0};
}

// Superposition-of-coherent-states contexts (homodyne/converge/eightport).
hdsim::CoherentSuperposition parse_superposition(const std::string& raw) {
  const StateExpr e = parse_state_expr(raw);
  if (e.name == "vacuum") {
    if (!e.args.empty()) throw DomainError("state: vacuum takes no arguments");
    return hdsim::CoherentSuperposition::single(cxd(0.0, 0.0));
  }
  if (e.name == "coherent")
    return hdsim::CoherentSuperposition::single(expr_amplitude(e));
  if (e.name == "cat") {
    const cxd a = expr_amplitude(e);
    return hdsim::cat_superposition(a, -a, cxd(1.0, 0.0), cxd(1.0, 0.0));
  }
  throw DomainError(
      "state: '" + e.name +
      "' is not a coherent superposition (use vacuum/coherent/cat)");
}

// Density-matrix contexts (eightport limit grid, genop, reconstruct).
hdsim::FockDensityMatrix parse_density(const std::string& raw,
                                       const hdsim::TruncationBudget& budget) {
  const StateExpr e = parse_state_expr(raw);
  if (e.name == "fock") {
    if (e.args.size() != 1)
      throw DomainError("state: fock takes one integer argument");
    const double n = e.args[0];
    if (n < 0 || n != std::floor(n))
      throw DomainError("state: fock argument must be a nonnegative integer");
    return hdsim::fock_density(static_cast<int>(n), budget);
  }
  if (e.name == "vacuum") return hdsim::vacuum_density(budget);
  if (e.name == "coherent")
    return hdsim::coherent_density(expr_amplitude(e), budget);
  if (e.name == "cat")
    return hdsim::superposition_density(parse_superposition(raw), budget);
  throw DomainError("state: unknown state '" + e.name + "'");
}

// Pure-state vector for fidelity targets.
hdsim::CVec parse_state_vector(const std::string& raw,
                               const hdsim::TruncationBudget& budget) {
  const StateExpr e = parse_state_expr(raw);
  const int dim = budget.dim();
  if (e.name == "fock") {
    if (e.args.size() != 1 || e.args[0] < 0 ||
        e.args[0] != std::floor(e.args[0]))
      throw DomainError("state: fock takes one nonnegative integer argument");
    const int n = static_cast<int>(e.args[0]);
    if (n >= dim)
      throw DomainError("state: fock level exceeds the cutoff");
    hdsim::CVec v = hdsim::CVec::Zero(dim);
    v(n) = 1.0;
    return v;
  }
  if (e.name == "vacuum") {
    hdsim::CVec v = hdsim::CVec::Zero(dim);
    v(0) = 1.0;
    return v;
  }
  if (e.name == "coherent")
    return hdsim::coherent_fock_coefficients_unchecked(expr_amplitude(e), dim)
        .c;
  if (e.name == "cat") {
    const cxd a = expr_amplitude(e);
    hdsim::CVec v =
        hdsim::coherent_fock_coefficients_unchecked(a, dim).c +
        hdsim::coherent_fock_coefficients_unchecked(-a, dim).c;
    v /= v.norm();
    return v;
  }
  throw DomainError("state: unknown state '" + e.name + "'");
}

// ---------------------------------------------------------------------------
// Small shared emitters
// ---------------------------------------------------------------------------

void write_json_atomic(const std::string& path, const json& j) {
  hdsim::write_text_atomic(path, j.dump(2) + "\n");
}

json validation_json(const hdsim::ValidationReport& r) {
  return json{{"hermiticity_defect", r.hermiticity_defect},
              {"min_eigenvalue", r.min_eigenvalue},
              {"trace_defect", r.trace_defect},
              {"pass", r.pass}};
}

void write_grid_output(const hdsim::PhaseSpaceGrid& g, const std::string& path,
                       bool binary, bool plot_data) {
  if (binary)
    hdsim::write_grid_binary(path, path + ".payload", g);
  else if (plot_data)
    hdsim::write_grid_gnuplot(path, g);
  else
    hdsim::write_grid_csv(path, g);
}

hdsim::PhaseSpaceGrid read_grid_input(const std::string& path, bool binary) {
  return binary ? hdsim::read_grid_binary(path) : hdsim::read_grid_csv(path);
}

// Marginal CDF of a grid along one axis, as step data at cell centers.
struct MarginalCdf {
  std::vector<double> points;  // cell centers, ascending
  std::vector<double> cdf;     // cumulative mass up to each center
};

MarginalCdf grid_marginal_cdf(const hdsim::PhaseSpaceGrid& g, bool along_q) {
  MarginalCdf m;
  const int n = along_q ? g.nq : g.np;
  const double cell = along_q ? g.dq() : g.dp();
  const double other = along_q ? g.dp() : g.dq();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double rowmass = 0.0;
    const int k = along_q ? g.np : g.nq;
    for (int j = 0; j < k; ++j)
      rowmass += along_q ? g.values(i, j) : g.values(j, i);
    acc += rowmass * cell * other;
    m.points.push_back((along_q ? g.q_min : g.p_min) + (i + 0.5) * cell);
    m.cdf.push_back(acc);
  }
  return m;
}

double interp_cdf(const MarginalCdf& m, double x) {
  if (m.points.empty()) return 0.0;
  if (x <= m.points.front()) return 0.0;
  if (x >= m.points.back()) return m.cdf.back();
  auto it = std::lower_bound(m.points.begin(), m.points.end(), x);
  const size_t hi = static_cast<size_t>(it - m.points.begin());
  const size_t lo = hi - 1;
  const double t = (x - m.points[lo]) / (m.points[hi] - m.points[lo]);
  return m.cdf[lo] + t * (m.cdf[hi] - m.cdf[lo]);
}

// Kolmogorov-Smirnov distance between a discrete marginal (atoms summed over
// the other axis) and a continuous marginal CDF from the limit grid.
double marginal_ks(const std::vector<std::pair<double, double>>& atoms,
                   const MarginalCdf& ref) {
  std::map<double, double> merged;
  for (const auto& [x, p] : atoms) merged[x] += p;
  double acc = 0.0, ks = 0.0;
  for (const auto& [x, p] : merged) {
    const double f = interp_cdf(ref, x);
    ks = std::max(ks, std::abs(acc - f));  // left limit
    acc += p;
    ks = std::max(ks, std::abs(acc - f));  // right limit
  }
  return ks;
}

// ---------------------------------------------------------------------------
// povm
// ---------------------------------------------------------------------------

struct PovmOpts {
  double eps = 0.0;
  int n_max = 16;
  int cutoff = 64;
  double tail_tol = 1e-10;
  std::string out = "povm.csv";
  std::string report = "povm_report.json";
  std::string config;
};

void run_povm(const PovmOpts& o) {
  const hdsim::Efficiency e{o.eps};
  e.validate();
  const hdsim::TruncationBudget budget{o.cutoff, o.tail_tol};
  budget.validate();
  if (o.n_max < 0) throw DomainError("--n-max must be >= 0");

  std::string s = csv_preamble() + "n,m,value\n";
  for (int n = 0; n <= o.n_max; ++n) {
    const hdsim::RVec d = hdsim::povm_element_diagonal(e, n, budget);
    for (int m = 0; m < d.size(); ++m)
      s += std::to_string(n) + "," + std::to_string(m) + "," +
           hdsim::format_double(d(m)) + "\n";
  }
  hdsim::write_text_atomic(o.out, s);

  const double defect = hdsim::povm_completeness_defect(e, budget);
  json rep{{"version", hdsim::kVersion},
           {"eps", o.eps},
           {"n_max", o.n_max},
           {"cutoff", o.cutoff},
           {"completeness_defect", defect}};
  write_json_atomic(o.report, rep);
}

// ---------------------------------------------------------------------------
// homodyne
// ---------------------------------------------------------------------------

struct HomodyneOpts {
  std::string state = "vacuum";
  double r = 0.0;
  double theta = 0.0;
  double eps1 = 1.0, eps2 = 1.0;
  double tail_tol = 1e-9;
  double t_min = -5.0, t_max = 5.0;
  int t_points = 101;
  int shots = 0;
  std::int64_t seed = -1;
  std::string out = "homodyne_distribution.csv";
  std::string char_out = "homodyne_charfn.csv";
  std::string samples_out = "homodyne_samples.csv";
  std::string config;
  bool seed_given = false;
};

void run_homodyne(const HomodyneOpts& o) {
  const auto signal = parse_superposition(o.state);
  const hdsim::LocalOscillator lo{o.r, o.theta};
  lo.validate();
  const hdsim::Efficiency e1{o.eps1}, e2{o.eps2};
  const hdsim::TruncationBudget budget{0, o.tail_tol};

  const auto dist = hdsim::finite_z_distribution(signal, lo, e1, e2, budget);
  hdsim::write_scaled_difference_csv(o.out, dist);

  if (o.t_points < 1) throw DomainError("--t-points must be >= 1");
  std::string s = csv_preamble() + "t,re,im,limit_re,limit_im\n";
  for (int i = 0; i < o.t_points; ++i) {
    const double t =
        o.t_points == 1
            ? o.t_min
            : o.t_min + (o.t_max - o.t_min) * i / (o.t_points - 1);
    const cxd fz = hdsim::finite_z_char_fn(signal, lo, e1, e2, t);
    const cxd lim = hdsim::limit_char_fn(signal, o.theta, e1, e2, t);
    s += hdsim::format_double(t) + "," + hdsim::format_double(fz.real()) +
         "," + hdsim::format_double(fz.imag()) + "," +
         hdsim::format_double(lim.real()) + "," +
         hdsim::format_double(lim.imag()) + "\n";
  }
  hdsim::write_text_atomic(o.char_out, s);

  if (o.shots > 0) {
    if (!o.seed_given || o.seed < 0)
      throw DomainError("--seed is required when sampling (--shots > 0)");
    const auto xs = hdsim::sample_finite_z(
        dist, o.shots, static_cast<std::uint64_t>(o.seed));
    std::string ss = csv_preamble() + "index,outcome\n";
    for (size_t i = 0; i < xs.size(); ++i)
      ss += std::to_string(i) + "," + hdsim::format_double(xs[i]) + "\n";
    hdsim::write_text_atomic(o.samples_out, ss);
  }
}

// ---------------------------------------------------------------------------
// converge
// ---------------------------------------------------------------------------

struct ConvergeOpts {
  std::string state = "coherent(0.5)";
  double theta = 0.0;
  double eps1 = 1.0, eps2 = 1.0;
  std::vector<double> r_list = {25.0, 50.0, 100.0, 200.0};
  double t_min = -5.0, t_max = 5.0;
  int t_points = 101;
  double gate_slack = 1.6;
  std::string out = "convergence.csv";
  std::string json_out;
  std::string config;
};

void run_converge(const ConvergeOpts& o) {
  const auto signal = parse_superposition(o.state);
  const hdsim::Efficiency e1{o.eps1}, e2{o.eps2};
  e1.validate();
  e2.validate();
  if (o.t_points < 1) throw DomainError("--t-points must be >= 1");
  if (o.r_list.empty()) throw DomainError("--r-list must not be empty");

  hdsim::ConvergenceSchedule sched;
  sched.amplitudes = o.r_list;
  for (int i = 0; i < o.t_points; ++i)
    sched.t_grid.push_back(
        o.t_points == 1
            ? o.t_min
            : o.t_min + (o.t_max - o.t_min) * i / (o.t_points - 1));
  sched.validate();

  const auto rows =
      hdsim::convergence_report(signal, o.theta, e1, e2, sched);
  hdsim::write_convergence_csv(o.out, rows);

  if (!o.json_out.empty()) {
    std::vector<std::vector<double>> per_t;
    for (const double r : sched.amplitudes) {
      const hdsim::LocalOscillator lo{r, o.theta};
      std::vector<double> errs;
      for (const double t : sched.t_grid)
        errs.push_back(std::abs(
            hdsim::finite_z_char_fn(signal, lo, e1, e2, t) -
            hdsim::limit_char_fn(signal, o.theta, e1, e2, t)));
      per_t.push_back(std::move(errs));
    }
    hdsim::write_convergence_json(o.json_out, rows, sched.t_grid, per_t);
  }

  // Decrease gate: between consecutive amplitudes the sup error must shrink
  // at least proportionally to 1/r, up to a slack factor. Errors already at
  // the double-precision floor are exempt.
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto&prev = rows[i - 1];
    const auto& cur = rows[i];
    if (prev.sup_error < 1e-10) continue;
    const double allowed =
        prev.sup_error * (prev.r / cur.r) * o.gate_slack;
    if (cur.sup_error > allowed)
      throw hdsim::ValidationError(
          "convergence gate: sup error " +
          std::to_string(cur.sup_error) + " at r=" + std::to_string(cur.r) +
          " exceeds allowed " + std::to_string(allowed));
  }
}

// ---------------------------------------------------------------------------
// eightport
// ---------------------------------------------------------------------------

struct EightportOpts {
  std::string rho = "vacuum";
  std::string field = "vacuum";
  double eps1 = 1.0, eps2 = 1.0, eps3 = 1.0, eps4 = 1.0;
  double r = 3.0;
  double theta = 0.0;
  double phase = M_PI / 2;
  int cutoff = 40;
  double tail_tol = 1e-9;
  double q_min = -8.0, q_max = 8.0, p_min = -8.0, p_max = 8.0;
  int nq = 128, np = 128;
  std::string joint_out = "eightport_joint.csv";
  std::string grid_out = "eightport_limit.csv";
  std::string ks_out = "eightport_ks.json";
  std::string counts_out;
  bool binary = false;
  bool plot_data = false;
  std::string config;
};

void run_eightport(const EightportOpts& o) {
  const auto rho = parse_superposition(o.rho);
  const auto field = parse_superposition(o.field);
  hdsim::EightPortConfig cfg;
  cfg.eps1 = hdsim::Efficiency{o.eps1};
  cfg.eps2 = hdsim::Efficiency{o.eps2};
  cfg.eps3 = hdsim::Efficiency{o.eps3};
  cfg.eps4 = hdsim::Efficiency{o.eps4};
  cfg.phase_shift = o.phase;
  cfg.lo = hdsim::LocalOscillator{o.r, o.theta};
  cfg.validate();
  const hdsim::TruncationBudget lattice_budget{0, o.tail_tol};

  const auto joint =
      hdsim::joint_finite_distribution(rho, field, cfg, lattice_budget);
  std::string s = csv_preamble() + "x,y,probability\n";
  for (const auto& a : joint.atoms)
    s += hdsim::format_double(a.x) + "," + hdsim::format_double(a.y) + "," +
         hdsim::format_double(a.probability) + "\n";
  s += "# tail_mass," + hdsim::format_double(joint.tail_mass) + "\n";
  hdsim::write_text_atomic(o.joint_out, s);

  if (!o.counts_out.empty()) {
    const auto counts =
        hdsim::joint_count_distribution(rho, field, cfg, lattice_budget);
    hdsim::write_joint_counts_csv(o.counts_out, counts);
  }

  const hdsim::TruncationBudget state_budget{o.cutoff, 1e-10};
  const auto rho_d = parse_density(o.rho, state_budget);
  const auto field_d = parse_density(o.field, state_budget);
  const auto kernel = hdsim::SmearKernel2D::from_efficiencies(
      cfg.eps1, cfg.eps2, cfg.eps3, cfg.eps4);
  auto grid = hdsim::PhaseSpaceGrid::make(o.q_min, o.q_max, o.p_min, o.p_max,
                                          o.nq, o.np);
  grid = hdsim::limit_density(rho_d, field_d, kernel, grid);
  write_grid_output(grid, o.grid_out, o.binary, o.plot_data);

  // Marginal KS distances between the finite-LO joint distribution and the
  // limit density grid (finite -> limit as the LO amplitude grows).
  std::vector<std::pair<double, double>> xm, ym;
  for (const auto& a : joint.atoms) {
    xm.emplace_back(a.x, a.probability);
    ym.emplace_back(a.y, a.probability);
  }
  const double ks_x = marginal_ks(xm, grid_marginal_cdf(grid, true));
  const double ks_y = marginal_ks(ym, grid_marginal_cdf(grid, false));
  json rep{{"version", hdsim::kVersion},
           {"r", o.r},
           {"ks_x", ks_x},
           {"ks_y", ks_y},
           {"joint_atoms", joint.atoms.size()},
           {"joint_tail_mass", joint.tail_mass}};
  write_json_atomic(o.ks_out, rep);
}

// ---------------------------------------------------------------------------
// genop
// ---------------------------------------------------------------------------

struct GenopOpts {
  std::string field = "vacuum";
  std::string in;
  double eps1 = 1.0, eps2 = 1.0, eps3 = 1.0, eps4 = 1.0;
  int cutoff = 40;
  double tail_tol = 1e-10;
  int nodes = 41;
  bool conjugate = false;
  std::string out = "genop_density.json";
  std::string report = "genop_report.json";
  std::string config;
};

void run_genop(const GenopOpts& o) {
  const hdsim::TruncationBudget budget{o.cutoff, o.tail_tol};
  budget.validate();
  hdsim::FockDensityMatrix T = o.in.empty()
                                   ? parse_density(o.field, budget)
                                   : hdsim::read_density_json(o.in);
  if (o.conjugate) T = hdsim::conjugate_generating_operator(T);
  const auto kernel = hdsim::SmearKernel2D::from_efficiencies(
      hdsim::Efficiency{o.eps1}, hdsim::Efficiency{o.eps2},
      hdsim::Efficiency{o.eps3}, hdsim::Efficiency{o.eps4});
  if (o.nodes < 1) throw DomainError("--nodes must be >= 1");

  const auto out =
      hdsim::generating_operator_convolution(T, kernel, budget, o.nodes);
  hdsim::write_density_json(o.out, out);

  const auto purity = hdsim::purity_extremality_check(out);
  json rep{{"version", hdsim::kVersion},
           {"trace", out.trace_real()},
           {"mean_photon_number", hdsim::mean_photon_number(out)},
           {"is_pure", purity.is_pure},
           {"largest_eigenvalue", purity.largest_eigenvalue},
           {"validation", validation_json(hdsim::validate_density(out))}};
  write_json_atomic(o.report, rep);
}

// ---------------------------------------------------------------------------
// deconvolve
// ---------------------------------------------------------------------------

struct DeconvolveOpts {
  std::string in;
  bool in_binary = false;
  double eps1 = 1.0, eps2 = 1.0, eps3 = 1.0, eps4 = 1.0;
  std::string mode = "threshold";
  double threshold = 1e-6;
  double lambda = 0.0;
  double noise_level = 0.0;
  std::string direction = "inverse";
  std::string out = "deconvolved.csv";
  std::string report = "deconvolve_report.json";
  bool binary = false;
  bool plot_data = false;
  std::string config;
};

void run_deconvolve(const DeconvolveOpts& o) {
  const auto g = read_grid_input(o.in, o.in_binary);
  const auto kernel = hdsim::SmearKernel2D::from_efficiencies(
      hdsim::Efficiency{o.eps1}, hdsim::Efficiency{o.eps2},
      hdsim::Efficiency{o.eps3}, hdsim::Efficiency{o.eps4});

  if (o.direction == "forward") {
    const auto h = hdsim::forward_smear(g, kernel);
    write_grid_output(h, o.out, o.binary, o.plot_data);
    json rep{{"version", hdsim::kVersion},
             {"direction", "forward"},
             {"kernel_variance_x", kernel.variance_x()},
             {"kernel_variance_y", kernel.variance_y()},
             {"mass_in", g.mass()},
             {"mass_out", h.mass()}};
    write_json_atomic(o.report, rep);
    return;
  }
  if (o.direction != "inverse")
    throw DomainError("--direction must be 'inverse' or 'forward'");

  hdsim::DeconvolutionPolicy policy;
  if (o.mode == "exact")
    policy.mode = hdsim::DeconvMode::ExactDivision;
  else if (o.mode == "threshold")
    policy.mode = hdsim::DeconvMode::Thresholded;
  else if (o.mode == "tikhonov")
    policy.mode = hdsim::DeconvMode::Tikhonov;
  else
    throw DomainError("--mode must be exact, threshold, or tikhonov");
  policy.threshold = o.threshold;
  policy.lambda = o.lambda;
  policy.noise_level = o.noise_level;

  hdsim::DeconvolutionReport drep;
  const auto d = hdsim::deconvolve(g, kernel, policy, &drep);
  write_grid_output(d, o.out, o.binary, o.plot_data);
  json rep{{"version", hdsim::kVersion},
           {"direction", "inverse"},
           {"mode", o.mode},
           {"multiplier_max", drep.multiplier_max},
           {"multiplier_min_used", drep.multiplier_min_used},
           {"cells_total", drep.cells_total},
           {"cells_inverted", drep.cells_inverted},
           {"condition_number", drep.condition_number},
           {"noise_amplification_warning", drep.noise_amplification_warning},
           {"lambda_used", drep.lambda_used},
           {"mass_in", g.mass()},
           {"mass_out", d.mass()}};
  write_json_atomic(o.report, rep);
}

// ---------------------------------------------------------------------------
// reconstruct
// ---------------------------------------------------------------------------

struct ReconstructOpts {
  std::string in;
  bool in_binary = false;
  std::string genop = "vacuum";
  std::string genop_in;
  int cutoff = 16;
  double tail_tol = 1e-10;
  double divisor_threshold = 1e-8;
  std::string truth;
  std::string out = "reconstructed_density.json";
  std::string report = "reconstruct_report.json";
  std::string config;
};

void run_reconstruct(const ReconstructOpts& o) {
  const auto g = read_grid_input(o.in, o.in_binary);
  const hdsim::TruncationBudget budget{o.cutoff, o.tail_tol};
  budget.validate();
  const hdsim::FockDensityMatrix T =
      o.genop_in.empty() ? parse_density(o.genop, budget)
                         : hdsim::read_density_json(o.genop_in);

  auto rep = hdsim::reconstruct_state(g, T, budget, o.divisor_threshold);
  if (!o.truth.empty())
    rep.fidelity = hdsim::fidelity_pure(
        parse_state_vector(o.truth, rep.rho.budget), rep.rho);
  hdsim::write_density_json(o.out, rep.rho);

  json jr{{"version", hdsim::kVersion},
          {"projection_residual", rep.projection_residual},
          {"trace_before_projection", rep.trace_before_projection},
          {"cells_used", rep.cells_used},
          {"divisor_min_used", rep.divisor_min_used},
          {"fidelity", rep.fidelity},
          {"mean_photon_number", hdsim::mean_photon_number(rep.rho)},
          {"validation", validation_json(hdsim::validate_density(rep.rho))}};
  write_json_atomic(o.report, jr);
}

// ---------------------------------------------------------------------------
// wiring
// ---------------------------------------------------------------------------

struct Pending {
  std::function<void()> body;
};

void add_config_flag(CLI::App* sub, std::string* target) {
  sub->add_option("--config", *target,
                  "JSON config file; explicit flags override its keys");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("hdsim ") + hdsim::kVersion +
               " -- homodyne detection simulator"};
  app.require_subcommand(1);
  Pending pending;

  // ---- povm ----
  auto po = std::make_shared<PovmOpts>();
  CLI::App* povm = app.add_subcommand(
      "povm", "POVM element diagonals and completeness defect");
  auto pb = std::make_shared<ConfigBinder>(povm);
  povm->add_option("--eps", po->eps, "detector efficiency in (0,1]");
  pb->bind("eps", "--eps", &po->eps);
  povm->add_option("--n-max", po->n_max, "largest POVM element index");
  pb->bind("n_max", "--n-max", &po->n_max);
  povm->add_option("--cutoff", po->cutoff, "Fock-space cutoff");
  pb->bind("cutoff", "--cutoff", &po->cutoff);
  povm->add_option("--tail-tol", po->tail_tol, "truncation tail tolerance");
  pb->bind("tail_tol", "--tail-tol", &po->tail_tol);
  povm->add_option("--out", po->out, "diagonals CSV path");
  pb->bind("out", "--out", &po->out);
  povm->add_option("--report", po->report, "completeness report JSON path");
  pb->bind("report", "--report", &po->report);
  add_config_flag(povm, &po->config);
  povm->callback([po, pb, &pending] {
    pb->apply_file(po->config);
    if (!pb->provided("--eps"))
      throw DomainError("povm: --eps is required");
    pending.body = [po] { run_povm(*po); };
  });

  // ---- homodyne ----
  auto ho = std::make_shared<HomodyneOpts>();
  CLI::App* hod = app.add_subcommand(
      "homodyne",
      "exact scaled-difference distribution and characteristic function");
  auto hb = std::make_shared<ConfigBinder>(hod);
  hod->add_option("--state", ho->state, "signal state expression");
  hb->bind("state", "--state", &ho->state);
  hod->add_option("--r", ho->r, "local oscillator amplitude (> 0)");
  hb->bind("r", "--r", &ho->r);
  hod->add_option("--theta", ho->theta, "local oscillator phase");
  hb->bind("theta", "--theta", &ho->theta);
  hod->add_option("--eps1", ho->eps1, "detector 1 efficiency");
  hb->bind("eps1", "--eps1", &ho->eps1);
  hod->add_option("--eps2", ho->eps2, "detector 2 efficiency");
  hb->bind("eps2", "--eps2", &ho->eps2);
  hod->add_option("--tail-tol", ho->tail_tol, "lattice tail tolerance");
  hb->bind("tail_tol", "--tail-tol", &ho->tail_tol);
  hod->add_option("--t-min", ho->t_min, "characteristic-function grid start");
  hb->bind("t_min", "--t-min", &ho->t_min);
  hod->add_option("--t-max", ho->t_max, "characteristic-function grid end");
  hb->bind("t_max", "--t-max", &ho->t_max);
  hod->add_option("--t-points", ho->t_points, "grid point count");
  hb->bind("t_points", "--t-points", &ho->t_points);
  hod->add_option("--shots", ho->shots, "number of samples to draw");
  hb->bind("shots", "--shots", &ho->shots);
  hod->add_option("--seed", ho->seed, "RNG seed (required when sampling)");
  hb->bind("seed", "--seed", &ho->seed);
  hod->add_option("--out", ho->out, "distribution CSV path");
  hb->bind("out", "--out", &ho->out);
  hod->add_option("--char-out", ho->char_out,
                  "characteristic-function CSV path");
  hb->bind("char_out", "--char-out", &ho->char_out);
  hod->add_option("--samples-out", ho->samples_out, "samples CSV path");
  hb->bind("samples_out", "--samples-out", &ho->samples_out);
  add_config_flag(hod, &ho->config);
  hod->callback([ho, hb, &pending] {
    hb->apply_file(ho->config);
    if (!hb->provided("--r"))
      throw DomainError("homodyne: --r is required");
    ho->seed_given = hb->provided("--seed");
    pending.body = [ho] { run_homodyne(*ho); };
  });

  // ---- converge ----
  auto co = std::make_shared<ConvergeOpts>();
  CLI::App* conv = app.add_subcommand(
      "converge", "finite-LO to limit characteristic-function convergence");
  auto cb = std::make_shared<ConfigBinder>(conv);
  conv->add_option("--state", co->state, "signal state expression");
  cb->bind("state", "--state", &co->state);
  conv->add_option("--theta", co->theta, "local oscillator phase");
  cb->bind("theta", "--theta", &co->theta);
  conv->add_option("--eps1", co->eps1, "detector 1 efficiency");
  cb->bind("eps1", "--eps1", &co->eps1);
  conv->add_option("--eps2", co->eps2, "detector 2 efficiency");
  cb->bind("eps2", "--eps2", &co->eps2);
  conv->add_option("--r-list", co->r_list, "increasing LO amplitudes")
      ->expected(-1);
  cb->bind("r_list", "--r-list", &co->r_list);
  conv->add_option("--t-min", co->t_min, "grid start");
  cb->bind("t_min", "--t-min", &co->t_min);
  conv->add_option("--t-max", co->t_max, "grid end");
  cb->bind("t_max", "--t-max", &co->t_max);
  conv->add_option("--t-points", co->t_points, "grid point count");
  cb->bind("t_points", "--t-points", &co->t_points);
  conv->add_option("--gate-slack", co->gate_slack,
                   "slack factor for the 1/r decrease gate");
  cb->bind("gate_slack", "--gate-slack", &co->gate_slack);
  conv->add_option("--out", co->out, "convergence table CSV path");
  cb->bind("out", "--out", &co->out);
  conv->add_option("--json", co->json_out, "detailed JSON report path");
  cb->bind("json", "--json", &co->json_out);
  add_config_flag(conv, &co->config);
  conv->callback([co, cb, &pending] {
    cb->apply_file(co->config);
    pending.body = [co] { run_converge(*co); };
  });

  // ---- eightport ----
  auto eo = std::make_shared<EightportOpts>();
  CLI::App* ep = app.add_subcommand(
      "eightport", "joint double-homodyne distribution and limit density");
  auto eb = std::make_shared<ConfigBinder>(ep);
  ep->add_option("--rho", eo->rho, "signal state expression");
  eb->bind("rho", "--rho", &eo->rho);
  ep->add_option("--field", eo->field, "second input state expression");
  eb->bind("field", "--field", &eo->field);
  ep->add_option("--eps1", eo->eps1, "detector 1 efficiency (x arm)");
  eb->bind("eps1", "--eps1", &eo->eps1);
  ep->add_option("--eps2", eo->eps2, "detector 2 efficiency (y arm)");
  eb->bind("eps2", "--eps2", &eo->eps2);
  ep->add_option("--eps3", eo->eps3, "detector 3 efficiency (x arm)");
  eb->bind("eps3", "--eps3", &eo->eps3);
  ep->add_option("--eps4", eo->eps4, "detector 4 efficiency (y arm)");
  eb->bind("eps4", "--eps4", &eo->eps4);
  ep->add_option("--r", eo->r, "local oscillator amplitude");
  eb->bind("r", "--r", &eo->r);
  ep->add_option("--theta", eo->theta, "local oscillator phase");
  eb->bind("theta", "--theta", &eo->theta);
  ep->add_option("--phase", eo->phase, "inter-arm phase shift");
  eb->bind("phase", "--phase", &eo->phase);
  ep->add_option("--cutoff", eo->cutoff, "state cutoff for the limit grid");
  eb->bind("cutoff", "--cutoff", &eo->cutoff);
  ep->add_option("--tail-tol", eo->tail_tol, "lattice tail tolerance");
  eb->bind("tail_tol", "--tail-tol", &eo->tail_tol);
  ep->add_option("--q-min", eo->q_min, "grid q start");
  eb->bind("q_min", "--q-min", &eo->q_min);
  ep->add_option("--q-max", eo->q_max, "grid q end");
  eb->bind("q_max", "--q-max", &eo->q_max);
  ep->add_option("--p-min", eo->p_min, "grid p start");
  eb->bind("p_min", "--p-min", &eo->p_min);
  ep->add_option("--p-max", eo->p_max, "grid p end");
  eb->bind("p_max", "--p-max", &eo->p_max);
  ep->add_option("--nq", eo->nq, "grid q samples");
  eb->bind("nq", "--nq", &eo->nq);
  ep->add_option("--np", eo->np, "grid p samples");
  eb->bind("np", "--np", &eo->np);
  ep->add_option("--joint-out", eo->joint_out, "joint distribution CSV path");
  eb->bind("joint_out", "--joint-out", &eo->joint_out);
  ep->add_option("--grid-out", eo->grid_out, "limit density grid path");
  eb->bind("grid_out", "--grid-out", &eo->grid_out);
  ep->add_option("--ks-out", eo->ks_out, "KS comparison report JSON path");
  eb->bind("ks_out", "--ks-out", &eo->ks_out);
  ep->add_option("--counts-out", eo->counts_out,
                 "optional count 4-tuple CSV path");
  eb->bind("counts_out", "--counts-out", &eo->counts_out);
  CLI::Option* ebin = ep->add_flag("--binary", eo->binary,
                                   "write the grid in binary form");
  eb->bind("binary", "--binary", &eo->binary);
  CLI::Option* eplot = ep->add_flag("--emit-plot-data", eo->plot_data,
                                    "write the grid in gnuplot layout");
  eb->bind("emit_plot_data", "--emit-plot-data", &eo->plot_data);
  ebin->excludes(eplot);
  add_config_flag(ep, &eo->config);
  ep->callback([eo, eb, &pending] {
    eb->apply_file(eo->config);
    if (eo->binary && eo->plot_data)
      throw DomainError("--binary and --emit-plot-data are exclusive");
    pending.body = [eo] { run_eightport(*eo); };
  });

  // ---- genop ----
  auto go = std::make_shared<GenopOpts>();
  CLI::App* gen = app.add_subcommand(
      "genop", "kernel-weighted convolution of a generating operator");
  auto gb = std::make_shared<ConfigBinder>(gen);
  gen->add_option("--field", go->field, "input state expression");
  gb->bind("field", "--field", &go->field);
  gen->add_option("--in", go->in, "input density JSON path (overrides --field)");
  gb->bind("in", "--in", &go->in);
  gen->add_option("--eps1", go->eps1, "detector 1 efficiency");
  gb->bind("eps1", "--eps1", &go->eps1);
  gen->add_option("--eps2", go->eps2, "detector 2 efficiency");
  gb->bind("eps2", "--eps2", &go->eps2);
  gen->add_option("--eps3", go->eps3, "detector 3 efficiency");
  gb->bind("eps3", "--eps3", &go->eps3);
  gen->add_option("--eps4", go->eps4, "detector 4 efficiency");
  gb->bind("eps4", "--eps4", &go->eps4);
  gen->add_option("--cutoff", go->cutoff, "Fock-space cutoff");
  gb->bind("cutoff", "--cutoff", &go->cutoff);
  gen->add_option("--tail-tol", go->tail_tol, "truncation tail tolerance");
  gb->bind("tail_tol", "--tail-tol", &go->tail_tol);
  gen->add_option("--nodes", go->nodes, "quadrature nodes per Gaussian axis");
  gb->bind("nodes", "--nodes", &go->nodes);
  gen->add_flag("--conjugate", go->conjugate,
                "apply the number-basis conjugation first");
  gb->bind("conjugate", "--conjugate", &go->conjugate);
  gen->add_option("--out", go->out, "output density JSON path");
  gb->bind("out", "--out", &go->out);
  gen->add_option("--report", go->report, "report JSON path");
  gb->bind("report", "--report", &go->report);
  add_config_flag(gen, &go->config);
  gen->callback([go, gb, &pending] {
    gb->apply_file(go->config);
    pending.body = [go] { run_genop(*go); };
  });

  // ---- deconvolve ----
  auto dopt = std::make_shared<DeconvolveOpts>();
  CLI::App* dec = app.add_subcommand(
      "deconvolve", "forward smearing / Fourier deconvolution of a grid");
  auto db = std::make_shared<ConfigBinder>(dec);
  dec->add_option("--in", dopt->in, "input grid path");
  db->bind("in", "--in", &dopt->in);
  dec->add_flag("--in-binary", dopt->in_binary, "input grid is binary");
  db->bind("in_binary", "--in-binary", &dopt->in_binary);
  dec->add_option("--eps1", dopt->eps1, "detector 1 efficiency");
  db->bind("eps1", "--eps1", &dopt->eps1);
  dec->add_option("--eps2", dopt->eps2, "detector 2 efficiency");
  db->bind("eps2", "--eps2", &dopt->eps2);
  dec->add_option("--eps3", dopt->eps3, "detector 3 efficiency");
  db->bind("eps3", "--eps3", &dopt->eps3);
  dec->add_option("--eps4", dopt->eps4, "detector 4 efficiency");
  db->bind("eps4", "--eps4", &dopt->eps4);
  dec->add_option("--mode", dopt->mode, "exact | threshold | tikhonov");
  db->bind("mode", "--mode", &dopt->mode);
  dec->add_option("--threshold", dopt->threshold,
                  "relative multiplier threshold");
  db->bind("threshold", "--threshold", &dopt->threshold);
  dec->add_option("--lambda", dopt->lambda, "Tikhonov weight (0 = auto)");
  db->bind("lambda", "--lambda", &dopt->lambda);
  dec->add_option("--noise-level", dopt->noise_level,
                  "noise level for the auto Tikhonov weight");
  db->bind("noise_level", "--noise-level", &dopt->noise_level);
  dec->add_option("--direction", dopt->direction, "inverse | forward");
  db->bind("direction", "--direction", &dopt->direction);
  dec->add_option("--out", dopt->out, "output grid path");
  db->bind("out", "--out", &dopt->out);
  dec->add_option("--report", dopt->report, "report JSON path");
  db->bind("report", "--report", &dopt->report);
  CLI::Option* dbin =
      dec->add_flag("--binary", dopt->binary, "write the grid in binary form");
  db->bind("binary", "--binary", &dopt->binary);
  CLI::Option* dplot = dec->add_flag("--emit-plot-data", dopt->plot_data,
                                     "write the grid in gnuplot layout");
  db->bind("emit_plot_data", "--emit-plot-data", &dopt->plot_data);
  dbin->excludes(dplot);
  add_config_flag(dec, &dopt->config);
  dec->callback([dopt, db, &pending] {
    db->apply_file(dopt->config);
    if (!db->provided("--in"))
      throw DomainError("deconvolve: --in is required");
    if (dopt->binary && dopt->plot_data)
      throw DomainError("--binary and --emit-plot-data are exclusive");
    pending.body = [dopt] { run_deconvolve(*dopt); };
  });

  // ---- reconstruct ----
  auto ro = std::make_shared<ReconstructOpts>();
  CLI::App* rec = app.add_subcommand(
      "reconstruct", "density-matrix recovery from a deconvolved grid");
  auto rb = std::make_shared<ConfigBinder>(rec);
  rec->add_option("--in", ro->in, "input grid path");
  rb->bind("in", "--in", &ro->in);
  rec->add_flag("--in-binary", ro->in_binary, "input grid is binary");
  rb->bind("in_binary", "--in-binary", &ro->in_binary);
  rec->add_option("--genop", ro->genop, "generating-operator state expression");
  rb->bind("genop", "--genop", &ro->genop);
  rec->add_option("--genop-in", ro->genop_in,
                  "generating-operator density JSON path (overrides --genop)");
  rb->bind("genop_in", "--genop-in", &ro->genop_in);
  rec->add_option("--cutoff", ro->cutoff, "reconstruction cutoff");
  rb->bind("cutoff", "--cutoff", &ro->cutoff);
  rec->add_option("--tail-tol", ro->tail_tol, "truncation tail tolerance");
  rb->bind("tail_tol", "--tail-tol", &ro->tail_tol);
  rec->add_option("--divisor-threshold", ro->divisor_threshold,
                  "frequency-cell divisor threshold");
  rb->bind("divisor_threshold", "--divisor-threshold",
           &ro->divisor_threshold);
  rec->add_option("--truth", ro->truth,
                  "pure state expression for a fidelity check");
  rb->bind("truth", "--truth", &ro->truth);
  rec->add_option("--out", ro->out, "output density JSON path");
  rb->bind("out", "--out", &ro->out);
  rec->add_option("--report", ro->report, "report JSON path");
  rb->bind("report", "--report", &ro->report);
  add_config_flag(rec, &ro->config);
  rec->callback([ro, rb, &pending] {
    rb->apply_file(ro->config);
    if (!rb->provided("--in"))
      throw DomainError("reconstruct: --in is required");
    pending.body = [ro] { run_reconstruct(*ro); };
  });

  try {
    app.parse(argc, argv);
    if (pending.body) pending.body();
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const hdsim::TruncationInsufficient& e) {
    std::fprintf(stderr, "error (truncation): %s\n", e.what());
    return 3;
  } catch (const hdsim::ResolutionError& e) {
    std::fprintf(stderr, "error (resolution): %s\n", e.what());
    return 3;
  } catch (const hdsim::DivisorThresholdError& e) {
    std::fprintf(stderr, "error (divisor support): %s\n", e.what());
    return 3;
  } catch (const hdsim::ValidationError& e) {
    std::fprintf(stderr, "error (invariant): %s\n", e.what());
    return 2;
  } catch (const hdsim::DomainError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const hdsim::KindError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const hdsim::UnsupportedState& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const hdsim::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
