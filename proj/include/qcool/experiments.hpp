#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "budget.hpp"
#include "config.hpp"
#include "cooling.hpp"
#include "estimators.hpp"
#include "exact.hpp"
#include "models.hpp"
#include "validate.hpp"

namespace qcool {

using json = nlohmann::ordered_json;

/// 12 significant digits.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline json jnum(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(fmt(v).c_str(), nullptr);
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw config_error("cannot write '" + p.string() + "'");
  out << content;
}

// ---------------------------------------------------------------- models

struct Model {
  PauliSum H;
  StateVector psi0;
  std::string family;
};

inline const std::set<std::string>& model_keys() {
  static const std::set<std::string> k = {"model.family", "model.n",     "model.J",     "model.zz_anisotropy", "model.h",
                                          "model.periodic", "model.file", "model.terms", "model.seed",          "model.initial"};
  return k;
}

inline Model build_model(const Config& cfg) {
  Model m{PauliSum(1), StateVector(), cfg.str("model.family", "heisenberg_xxz")};
  if (m.family == "heisenberg_xxz") {
    const auto n = cfg.integer("model.n", 8);
    if (n < 2 || n > max_qubits) throw config_error("model.n: must lie in [2, " + std::to_string(max_qubits) + "]");
    m.H = heisenberg(static_cast<int>(n), cfg.real("model.J", 1.0), cfg.real("model.zz_anisotropy", 2.0), cfg.real("model.h", 1.0), cfg.boolean("model.periodic", true));
  } else if (m.family == "pauli_file") {
    const int n = static_cast<int>(cfg.integer("model.n", 0));
    try {
      m.H = load_pauli_file(cfg.str("model.file"), n);
    } catch (const parse_error& e) {
      throw config_error("model.file: " + std::string(e.what()));
    }
  } else if (m.family == "random_pauli") {
    const auto n = cfg.integer("model.n");
    const auto terms = cfg.integer("model.terms");
    if (n < 1 || n > max_qubits) throw config_error("model.n: out of range");
    if (terms < 1) throw config_error("model.terms: must be >= 1");
    try {
      m.H = random_pauli_hamiltonian(static_cast<int>(n), static_cast<std::size_t>(terms), cfg.has("model.seed") ? cfg.u64("model.seed") : 1);
    } catch (const domain_error& e) {
      throw config_error("model.terms: " + std::string(e.what()));
    }
  } else {
    throw config_error("model.family: unknown family '" + m.family + "' (expected heisenberg_xxz|pauli_file|random_pauli)");
  }
  try {
    m.psi0 = basis_state(cfg.str("model.initial"), m.H.qubits());
  } catch (const domain_error& e) {
    throw config_error("model.initial: " + std::string(e.what()));
  }
  return m;
}

/// Eigenindex from "largest_overlap" or an integer.
inline Eigen::Index resolve_target(const EigenSystem& es, const std::string& spec, const std::string& field) {
  if (spec == "largest_overlap") return es.largest_overlap_index();
  try {
    std::size_t used = 0;
    const long long j = std::stoll(spec, &used);
    if (used != spec.size() || j < 0 || j >= es.dim()) throw config_error(field + ": eigen index out of range");
    return static_cast<Eigen::Index>(j);
  } catch (const std::logic_error&) {
    throw config_error(field + ": expected 'largest_overlap' or an eigen index, got '" + spec + "'");
  }
}

inline CoolingFunction cooling_from(const Config& cfg) {
  const CoolingFunction cf(parse_kind(cfg.str("cooling.kind", "gaussian")));
  if (!cf.realizable()) throw config_error("cooling.kind: rectangular is not a realizable cooling function");
  return cf;
}

inline std::size_t shots_from(const Config& cfg, const std::string& path, long long fallback) {
  const auto n = cfg.integer(path, fallback);
  if (n < 1) throw config_error(path + ": must be >= 1");
  return static_cast<std::size_t>(n);
}

/// Mode and seed. A seed is mandatory in shot mode.
struct RunControl {
  Mode mode;
  std::uint64_t seed;
};

inline RunControl run_control(const Config& cfg) {
  RunControl rc{parse_mode(cfg.str("cooling.mode", "expectation")), 1};
  if (cfg.has("cooling.seed"))
    rc.seed = cfg.u64("cooling.seed");
  else if (rc.mode == Mode::shot)
    throw config_error("cooling.seed: required in shot mode");
  return rc;
}

inline std::string eigen_csv(const EigenSystem& es) {
  std::string s = "index,E_original_frame,E_shifted,overlap\n";
  for (Eigen::Index i = 0; i < es.dim(); ++i)
    s += std::to_string(i) + "," + fmt(es.original_energies()[i]) + "," + fmt(es.energy(i)) + "," + fmt(es.overlap(i)) + "\n";
  return s;
}

// ---------------------------------------------------------------- spectrum

inline const std::set<std::string>& spectrum_keys() {
  static const std::set<std::string> k = [] {
    std::set<std::string> s = model_keys();
    for (const char* x : {"cooling.kind", "cooling.mode", "cooling.seed", "cooling.N_M", "cooling.tau", "cooling.tau_list", "cooling.x_m", "cooling.eps",
                          "cooling.gap", "scan.E_min", "scan.E_max", "scan.spacing", "scan.min_height", "scan.min_separation", "scan.oracle_pmin"})
      s.insert(x);
    return s;
  }();
  return k;
}

struct OracleMatch {
  Eigen::Index index;
  double energy;  // shifted
  double overlap;
  double nearest_peak;  // shifted, nan if no peaks
  double distance;
};

struct SpectrumRun {
  double tau = 0;
  double x_m = 0;
  SpectrumCurve curve;
  std::vector<Peak> peaks;
  std::vector<double> exact;  // untruncated exact_D on the grid
  double max_abs_error = 0;
  std::vector<OracleMatch> matches;
  std::size_t truncated = 0;
};

struct SpectrumReport {
  std::vector<SpectrumRun> runs;
  double shift = 0;
  double spacing = 0;
  double gap = 0;
};

/// D-hat scan per tau with oracle overlay. (tau, x_m) come from cooling.tau / cooling.tau_list and cooling.x_m, or from
/// cooling.eps: tau = g^{-1}(eps)/gap, x_m = sqrt(2) L(eps).
inline SpectrumReport run_spectrum(Config& cfg, const std::filesystem::path& out_dir) {
  cfg.reject_unknown(spectrum_keys());
  const Model model = build_model(cfg);
  const EigenSystem es = eigendecompose(model.H, model.psi0);
  const CoolingFunction cf = cooling_from(cfg);
  const RunControl rc = run_control(cfg);
  const std::size_t n_m = shots_from(cfg, "cooling.N_M", 100000);
  const Eigen::Index jt = es.largest_overlap_index();
  const double gap = cfg.real("cooling.gap", es.effective_gap(jt));
  if (!(gap > 0) || !std::isfinite(gap)) throw config_error("cooling.gap: must be positive (set it explicitly when the initial state is an eigenstate)");

  std::vector<double> taus;
  double x_m = 0;
  if (cfg.has("cooling.eps")) {
    const double eps = cfg.real("cooling.eps");
    if (!(eps > 0 && eps < 1)) throw config_error("cooling.eps: must lie in (0,1)");
    taus = {cf.g_inverse(eps) / gap};
    x_m = std::numbers::sqrt2 * cf.cutoff_L(eps);
    if (cfg.has("cooling.tau") || cfg.has("cooling.tau_list") || cfg.has("cooling.x_m")) throw config_error("cooling.eps: conflicts with explicit tau/x_m");
  } else {
    if (cfg.has("cooling.tau_list"))
      taus = cfg.reals("cooling.tau_list");
    else
      taus = {cfg.real("cooling.tau")};
    x_m = cfg.real("cooling.x_m");
  }
  for (double t : taus)
    if (!(t >= 0)) throw config_error("cooling.tau: must be >= 0");
  if (!(x_m > 0)) throw config_error("cooling.x_m: must be positive");

  const double pmin = cfg.real("scan.oracle_pmin", 0.01);
  double lo_e = std::numeric_limits<double>::infinity(), hi_e = -lo_e;
  for (Eigen::Index i = 0; i < es.dim(); ++i)
    if (es.overlap(i) > 1e-3) {
      lo_e = std::min(lo_e, es.energy(i));
      hi_e = std::max(hi_e, es.energy(i));
    }
  const double e_lo = cfg.has("scan.E_min") ? es.to_shifted(cfg.real("scan.E_min")) : lo_e - 2.0;
  const double e_hi = cfg.has("scan.E_max") ? es.to_shifted(cfg.real("scan.E_max")) : hi_e + 2.0;
  const double spacing = cfg.real("scan.spacing", gap / 10.0);
  if (!(spacing > 0)) throw config_error("scan.spacing: must be positive");
  if (!(e_hi > e_lo)) throw config_error("scan.E_max: must exceed scan.E_min");
  const double min_height = cfg.real("scan.min_height", 0.005);
  const double min_sep = cfg.real("scan.min_separation", spacing);
  const auto grid = energy_grid(e_lo, e_hi, spacing);

  cfg.set("resolved.gap", fmt(gap));
  cfg.set("resolved.x_m", fmt(x_m));
  std::string tl;
  for (double t : taus) tl += (tl.empty() ? "" : ",") + fmt(t);
  cfg.set("resolved.tau_list", tl);
  cfg.set("resolved.E_min_original", fmt(es.to_original(e_lo)));
  cfg.set("resolved.E_max_original", fmt(es.to_original(e_hi)));
  cfg.set("resolved.spacing", fmt(spacing));
  cfg.set("resolved.shift", fmt(es.shift()));
  cfg.set("resolved.mode", std::string(mode_name(rc.mode)));
  cfg.set("resolved.seed", std::to_string(rc.seed));

  SpectrumReport rep;
  rep.shift = es.shift();
  rep.spacing = spacing;
  rep.gap = gap;
  json sweep = json::array();
  for (std::size_t ti = 0; ti < taus.size(); ++ti) {
    SpectrumRun run;
    run.tau = taus[ti];
    run.x_m = x_m;
    run.curve = scan_energy(es, cf, run.tau, x_m, grid, n_m, rc.seed, rc.mode);
    run.truncated = run.curve.batch->truncated();
    run.peaks = find_peaks(run.curve, min_height, min_sep);
    run.exact.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      run.exact[i] = exact_D(es, cf, run.tau, grid[i]);
      run.max_abs_error = std::max(run.max_abs_error, std::abs(run.curve.d_values[i] - run.exact[i]));
    }
    for (Eigen::Index i = 0; i < es.dim(); ++i) {
      if (!(es.overlap(i) > pmin)) continue;
      OracleMatch m{i, es.energy(i), es.overlap(i), std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity()};
      for (const auto& p : run.peaks)
        if (std::abs(p.energy - m.energy) < m.distance) {
          m.distance = std::abs(p.energy - m.energy);
          m.nearest_peak = p.energy;
        }
      run.matches.push_back(m);
    }

    const std::filesystem::path dir = taus.size() > 1 ? out_dir / ("tau_" + std::to_string(ti)) : out_dir;
    const std::string head = cfg.echo() + "# tau = " + fmt(run.tau) + "\n";
    std::string csv = head + "E_original_frame,E_shifted,D_hat,mode\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      csv += fmt(es.to_original(grid[i])) + "," + fmt(grid[i]) + "," + fmt(run.curve.d_values[i]) + "," + std::string(mode_name(rc.mode)) + "\n";
    write_file(dir / "spectrum.csv", csv);
    std::string oc = head + "E_original_frame,E_shifted,D_exact,abs_error\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      oc += fmt(es.to_original(grid[i])) + "," + fmt(grid[i]) + "," + fmt(run.exact[i]) + "," + fmt(std::abs(run.curve.d_values[i] - run.exact[i])) + "\n";
    write_file(dir / "oracle.csv", oc);
    write_file(dir / "eigenvalues.csv", head + eigen_csv(es));

    json pk = json::array();
    for (const auto& p : run.peaks) pk.push_back({{"E_original_frame", jnum(es.to_original(p.energy))}, {"E_shifted", jnum(p.energy)}, {"D_hat", jnum(p.d_hat)}});
    json mt = json::array();
    for (const auto& m : run.matches)
      mt.push_back({{"index", m.index},
                    {"E_original_frame", jnum(es.to_original(m.energy))},
                    {"overlap", jnum(m.overlap)},
                    {"nearest_peak_original_frame", jnum(es.to_original(m.nearest_peak))},
                    {"distance", jnum(m.distance)}});
    json doc = {{"kind", kind_name(cf.kind())},
                {"mode", mode_name(rc.mode)},
                {"tau", jnum(run.tau)},
                {"x_m", jnum(x_m)},
                {"t_m", jnum(run.tau * x_m)},
                {"N_M", n_m},
                {"seed", rc.seed},
                {"truncated", run.truncated},
                {"shift", jnum(es.shift())},
                {"peaks", pk},
                {"max_abs_error", jnum(run.max_abs_error)},
                {"oracle_matches", mt},
                {"config", cfg.echo()}};
    write_file(dir / "peaks.json", doc.dump(2) + "\n");
    sweep.push_back({{"tau", jnum(run.tau)}, {"peak_count", run.peaks.size()}, {"max_abs_error", jnum(run.max_abs_error)}});
    rep.runs.push_back(std::move(run));
  }
  if (taus.size() > 1) write_file(out_dir / "sweep.json", json({{"runs", sweep}, {"config", cfg.echo()}}).dump(2) + "\n");
  return rep;
}

// ---------------------------------------------------------------- cooling scaling

inline const std::set<std::string>& cool_keys() {
  static const std::set<std::string> k = [] {
    std::set<std::string> s = model_keys();
    for (const char* x : {"cooling.kind", "cooling.mode", "cooling.seed", "cooling.N_M", "cool.target", "cool.eps_max", "cool.eps_min", "cool.points",
                          "cool.repetitions", "cool.floor"})
      s.insert(x);
    return s;
  }();
  return k;
}

struct ScalingRow {
  double eps, tau, x_m, t_m;
  double infidelity_estimated;  // mean over repetitions; nan if every repetition was degenerate
  double infidelity_std;
  std::size_t repetitions;
  std::size_t degenerate;
  double infidelity_oracle;
  double theoretical_bound;
};

struct ScalingReport {
  Eigen::Index target;
  double p_target;
  double gap;
  std::vector<ScalingRow> rows;
};

/// Per-point schedule for the infidelity sweep: tau = g^{-1}(sqrt(eps p/(2(1-p))))/gap, x_m = sqrt(2) L(eps p/4).
/// The first choice makes the untruncated bound (1-p)/p g(tau gap)^2 equal eps/2.
inline std::pair<double, double> scaling_schedule(const CoolingFunction& cf, double eps, double p, double gap) {
  const double a = std::sqrt(eps * p / (2.0 * (1.0 - p)));
  if (!(a > 0 && a <= 1)) throw config_error("cool.eps_max: schedule argument leaves (0,1]; lower eps_max");
  const double b = eps * p / 4.0;
  if (!(b > 0 && b < 1)) throw config_error("cool.eps_max: cutoff argument leaves (0,1); lower eps_max");
  return {cf.g_inverse(a) / gap, std::numbers::sqrt2 * cf.cutoff_L(b)};
}

inline ScalingReport run_cooling_scaling(Config& cfg, const std::filesystem::path& out_dir) {
  cfg.reject_unknown(cool_keys());
  const Model model = build_model(cfg);
  const EigenSystem es = eigendecompose(model.H, model.psi0);
  const CoolingFunction cf = cooling_from(cfg);
  const RunControl rc = run_control(cfg);
  const std::size_t n_m = shots_from(cfg, "cooling.N_M", 100000);
  const Eigen::Index j = resolve_target(es, cfg.str("cool.target", "largest_overlap"), "cool.target");
  const double p = es.overlap(j);
  if (!(p > 0 && p < 1)) throw config_error("cool.target: target overlap must lie in (0,1)");
  const double gap = es.effective_gap(j);
  const double eps_max = cfg.real("cool.eps_max", 1.5), eps_min = cfg.real("cool.eps_min", 0.002);
  const auto points = cfg.integer("cool.points", 14);
  if (!(eps_max > eps_min && eps_min > 0)) throw config_error("cool.eps_min: need 0 < eps_min < eps_max");
  if (points < 2) throw config_error("cool.points: must be >= 2");
  const auto reps = cfg.integer("cool.repetitions", rc.mode == Mode::shot ? 10 : 1);
  if (reps < 1) throw config_error("cool.repetitions: must be >= 1");
  if (rc.mode == Mode::shot && reps < 10) throw config_error("cool.repetitions: shot mode needs >= 10 repetitions for error bars");

  cfg.set("resolved.target", std::to_string(j));
  cfg.set("resolved.p_target", fmt(p));
  cfg.set("resolved.gap", fmt(gap));
  cfg.set("resolved.E_target_original", fmt(es.original_energies()[j]));
  cfg.set("resolved.mode", std::string(mode_name(rc.mode)));
  cfg.set("resolved.seed", std::to_string(rc.seed));

  ScalingReport rep{j, p, gap, {}};
  const Observable proj = EigenProjector{static_cast<std::size_t>(j)};
  const double e = es.energy(j);
  for (long long k = 0; k < points; ++k) {
    const double eps = eps_max * std::pow(eps_min / eps_max, static_cast<double>(k) / static_cast<double>(points - 1));
    const auto [tau, x_m] = scaling_schedule(cf, eps, p, gap);
    ScalingRow row{eps, tau, x_m, tau * x_m, 0, 0, static_cast<std::size_t>(reps), 0, 0, 0};
    double s = 0, s2 = 0;
    std::size_t ok = 0;
    for (long long r = 0; r < reps; ++r) {
      const std::uint64_t seed = detail::mix64(rc.seed ^ detail::mix64(static_cast<std::uint64_t>(k) * 0x10001ULL + static_cast<std::uint64_t>(r)));
      try {
        const double v = 1.0 - estimate_observable(es, cf, tau, x_m, e, proj, n_m, seed, rc.mode).value;
        s += v;
        s2 += v * v;
        ++ok;
      } catch (const degenerate_estimate_error&) {
        ++row.degenerate;
      }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.infidelity_estimated = ok ? s / static_cast<double>(ok) : nan;
    row.infidelity_std = ok > 1 ? std::sqrt(std::max(0.0, (s2 - s * s / static_cast<double>(ok)) / static_cast<double>(ok - 1))) : (ok ? 0.0 : nan);
    row.infidelity_oracle = cooled_state(es, cf, tau, e).infidelity_to(j);
    const double g = cf.g(tau * gap);
    row.theoretical_bound = (1.0 - p) / p * g * g;
    rep.rows.push_back(row);
  }

  std::string csv = cfg.echo() + "tau,x_m,t_m,infidelity_estimated,infidelity_oracle,theoretical_bound,eps,infidelity_std,repetitions,degenerate\n";
  for (const auto& r : rep.rows)
    csv += fmt(r.tau) + "," + fmt(r.x_m) + "," + fmt(r.t_m) + "," + fmt(r.infidelity_estimated) + "," + fmt(r.infidelity_oracle) + "," + fmt(r.theoretical_bound) +
           "," + fmt(r.eps) + "," + fmt(r.infidelity_std) + "," + std::to_string(r.repetitions) + "," + std::to_string(r.degenerate) + "\n";
  write_file(out_dir / "scaling.csv", csv);
  write_file(out_dir / "eigenvalues.csv", cfg.echo() + eigen_csv(es));
  return rep;
}

// ---------------------------------------------------------------- observable

inline const std::set<std::string>& observable_keys() {
  static const std::set<std::string> k = [] {
    std::set<std::string> s = spectrum_keys();
    for (const char* x : {"observable.type", "observable.terms", "observable.file", "observable.projector", "observable.target", "observable.energy",
                          "observable.eps", "observable.K", "observable.loose"})
      s.insert(x);
    return s;
  }();
  return k;
}

/// type = pauli (terms "0.7 ZII; 0.3 IXI" or file) | magnetization (sum Z_i / n) | identity | projector (eigen index).
inline Observable observable_from(const Config& cfg, const EigenSystem& es, Eigen::Index target) {
  const int n = es.qubits();
  const std::string type = cfg.str("observable.type", "pauli");
  if (type == "identity") {
    PauliSum s(n);
    s.add(1.0, std::string(static_cast<std::size_t>(n), 'I'));
    return s;
  }
  if (type == "magnetization") {
    PauliSum s(n);
    for (int i = 0; i < n; ++i) {
      std::string w(static_cast<std::size_t>(n), 'I');
      w[static_cast<std::size_t>(i)] = 'Z';
      s.add(1.0 / n, w);
    }
    return s;
  }
  if (type == "projector") {
    const auto idx = cfg.has("observable.projector") ? resolve_target(es, cfg.str("observable.projector"), "observable.projector") : target;
    return EigenProjector{static_cast<std::size_t>(idx)};
  }
  if (type == "pauli") {
    try {
      if (cfg.has("observable.file")) return load_pauli_file(cfg.str("observable.file"), n);
      std::string text;
      for (const auto& t : Config::split(cfg.str("observable.terms"), ';')) text += t + "\n";
      return parse_pauli_sum(text, n);
    } catch (const parse_error& e) {
      throw config_error("observable.terms: " + std::string(e.what()));
    }
  }
  throw config_error("observable.type: unknown type '" + type + "' (expected pauli|magnetization|identity|projector)");
}

/// Runs Algorithm-style ground/eigenstate property estimation and writes observable.json and observable.csv.
/// Throws degenerate_estimate_error when D-hat falls below its floor.
inline json run_observable(Config& cfg, const std::filesystem::path& out_dir) {
  cfg.reject_unknown(observable_keys());
  const Model model = build_model(cfg);
  const EigenSystem es = eigendecompose(model.H, model.psi0);
  const CoolingFunction cf = cooling_from(cfg);
  const RunControl rc = run_control(cfg);
  const Eigen::Index j = resolve_target(es, cfg.str("observable.target", "largest_overlap"), "observable.target");
  const Observable obs = observable_from(cfg, es, j);
  const double o_norm = observable_one_norm(obs);
  const double p_j = es.overlap(j);
  const double gap = cfg.real("cooling.gap", es.effective_gap(j));

  // resources: explicit tau/x_m/N_M override the observable budget
  Budget b;
  bool budgeted = false;
  if (cfg.has("observable.eps")) {
    const double eps = cfg.real("observable.eps");
    try {
      b = budget_for_observable(cf, eps, p_j, gap, cfg.real("observable.K", 32.0), cfg.boolean("observable.loose", false));
    } catch (const domain_error& e) {
      throw config_error("observable.eps: " + std::string(e.what()));
    }
    budgeted = true;
  }
  const double tau = cfg.has("cooling.tau") ? cfg.real("cooling.tau") : (budgeted ? b.tau : cfg.real("cooling.tau"));
  const double x_m = cfg.has("cooling.x_m") ? cfg.real("cooling.x_m") : (budgeted ? b.x_m : cfg.real("cooling.x_m"));
  const std::size_t n_m = cfg.has("cooling.N_M") ? shots_from(cfg, "cooling.N_M", 1) : (budgeted ? static_cast<std::size_t>(b.shots()) : 100000);
  if (!(tau >= 0)) throw config_error("cooling.tau: must be >= 0");
  if (!(x_m > 0)) throw config_error("cooling.x_m: must be positive");

  // trial energy: exact eigenvalue, a prior scan, or a fixed value in the original frame
  const std::string espec = cfg.str("observable.energy", "exact");
  double e = es.energy(j);
  json scan_info = nullptr;
  if (espec == "scan") {
    const double spacing = cfg.real("scan.spacing", gap / 10.0);
    double lo_e = std::numeric_limits<double>::infinity(), hi_e = -lo_e;
    for (Eigen::Index i = 0; i < es.dim(); ++i)
      if (es.overlap(i) > 1e-3) {
        lo_e = std::min(lo_e, es.energy(i));
        hi_e = std::max(hi_e, es.energy(i));
      }
    const double e_lo = cfg.has("scan.E_min") ? es.to_shifted(cfg.real("scan.E_min")) : lo_e - 2.0;
    const double e_hi = cfg.has("scan.E_max") ? es.to_shifted(cfg.real("scan.E_max")) : hi_e + 2.0;
    const auto curve = scan_energy(es, cf, tau, x_m, energy_grid(e_lo, e_hi, spacing), n_m, rc.seed ^ 0x5ca7ULL, rc.mode);
    const auto peaks = find_peaks(curve, cfg.real("scan.min_height", 0.005), cfg.real("scan.min_separation", spacing));
    if (peaks.empty()) throw degenerate_estimate_error("energy scan found no peak above scan.min_height", 0, cfg.real("scan.min_height", 0.005));
    const auto best = std::max_element(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& c) { return a.d_hat < c.d_hat; });
    e = best->energy;
    scan_info = {{"peaks", peaks.size()}, {"E_hat_original_frame", jnum(es.to_original(e))}, {"kappa", jnum(std::abs(e - es.energy(j)))}};
  } else if (espec != "exact") {
    try {
      e = es.to_shifted(std::stod(espec));
    } catch (const std::logic_error&) {
      throw config_error("observable.energy: expected exact|scan|<energy>, got '" + espec + "'");
    }
  }

  cfg.set("resolved.target", std::to_string(j));
  cfg.set("resolved.tau", fmt(tau));
  cfg.set("resolved.x_m", fmt(x_m));
  cfg.set("resolved.N_M", std::to_string(n_m));
  cfg.set("resolved.E_original", fmt(es.to_original(e)));
  cfg.set("resolved.mode", std::string(mode_name(rc.mode)));
  cfg.set("resolved.seed", std::to_string(rc.seed));

  const auto est = estimate_observable(es, cf, tau, x_m, e, obs, n_m, rc.seed, rc.mode);
  const cvec uj = cvec::Unit(es.dim(), j);
  const double oracle = observable_sandwich(es, obs, uj, uj).real();
  const double err = std::abs(est.value - oracle);

  json doc = {{"kind", kind_name(cf.kind())},
              {"mode", mode_name(rc.mode)},
              {"target", j},
              {"E_original_frame", jnum(es.to_original(e))},
              {"E_target_original_frame", jnum(es.original_energies()[j])},
              {"p_j", jnum(p_j)},
              {"gap", jnum(gap)},
              {"O_hat", jnum(est.value)},
              {"D_hat", jnum(est.D.value)},
              {"N_hat", jnum(est.N.value)},
              {"stderr_D", jnum(est.D.standard_error)},
              {"stderr_N", jnum(est.N.standard_error)},
              {"O_one_norm", jnum(o_norm)},
              {"oracle", jnum(oracle)},
              {"abs_error", jnum(err)},
              {"tau", jnum(tau)},
              {"x_m", jnum(x_m)},
              {"t_m", jnum(tau * x_m)},
              {"N_M", n_m},
              {"seed", rc.seed},
              {"scan", scan_info}};
  if (budgeted) {
    doc["budget"] = {{"eps", jnum(b.eps)}, {"K", jnum(b.K)}, {"delta", jnum(b.delta)}, {"loose", b.loose}, {"tau", jnum(b.tau)}, {"x_m", jnum(b.x_m)},
                     {"N_M", jnum(b.N_M)}, {"error_bound", jnum(b.eps * (o_norm + 1.0))}, {"within_bound", err <= b.eps * (o_norm + 1.0)},
                     {"kappa_tolerance", jnum(kappa_tolerance(cf, b.eps, p_j, gap))}};
  }
  doc["config"] = cfg.echo();
  write_file(out_dir / "observable.json", doc.dump(2) + "\n");
  std::string csv = cfg.echo() + "tau,x_m,t_m,N_M,E,D_hat,N_hat,O_hat,stderr_D,stderr_N\n";
  csv += fmt(tau) + "," + fmt(x_m) + "," + fmt(tau * x_m) + "," + std::to_string(n_m) + "," + fmt(es.to_original(e)) + "," + fmt(est.D.value) + "," +
         fmt(est.N.value) + "," + fmt(est.value) + "," + fmt(est.D.standard_error) + "," + fmt(est.N.standard_error) + "\n";
  write_file(out_dir / "observable.csv", csv);
  return doc;
}

// ---------------------------------------------------------------- budget table

inline const std::set<std::string>& budget_keys() {
  static const std::set<std::string> k = {"budget.target", "budget.kinds", "budget.eps", "budget.kappa", "budget.p_j", "budget.gap", "budget.K", "budget.loose"};
  return k;
}

inline std::vector<Budget> run_budget(const Config& cfg, std::vector<Kind>& kinds) {
  cfg.reject_unknown(budget_keys());
  kinds.clear();
  if (cfg.has("budget.kinds")) {
    for (const auto& s : Config::split(cfg.str("budget.kinds"), ',')) kinds.push_back(parse_kind(s));
  } else {
    kinds.assign(realizable_kinds.begin(), realizable_kinds.end());
  }
  const std::string target = cfg.str("budget.target", "observable");
  const double K = cfg.real("budget.K", 32.0);
  const bool loose = cfg.boolean("budget.loose", false);
  std::vector<Budget> out;
  for (Kind k : kinds) {
    const CoolingFunction cf(k);
    if (!cf.realizable()) throw config_error("budget.kinds: rectangular is not a realizable cooling function");
    try {
      if (target == "observable")
        out.push_back(budget_for_observable(cf, cfg.real("budget.eps"), cfg.real("budget.p_j"), cfg.real("budget.gap"), K, loose));
      else if (target == "energy")
        out.push_back(budget_for_energy(cf, cfg.real("budget.kappa"), cfg.real("budget.p_j"), K, loose));
      else
        throw config_error("budget.target: expected observable|energy, got '" + target + "'");
    } catch (const domain_error& e) {
      throw config_error("budget: " + std::string(e.what()));
    }
  }
  return out;
}

inline json budget_json(const std::vector<Kind>& kinds, const std::vector<Budget>& rows) {
  json a = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& b = rows[i];
    a.push_back({{"kind", kind_name(kinds[i])},
                 {"target", b.target == Budget::Target::observable ? "observable" : "energy"},
                 {"tau", jnum(b.tau)},
                 {"x_m", jnum(b.x_m)},
                 {"t_m", jnum(b.t_m)},
                 {"N_M", jnum(b.N_M)},
                 {"delta", jnum(b.delta)},
                 {"loose", b.loose}});
  }
  return a;
}

inline std::string budget_table(const std::vector<Kind>& kinds, const std::vector<Budget>& rows) {
  std::ostringstream s;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %-10s %14s %14s %14s %16s %14s\n", "kind", "target", "tau", "x_m", "t_m", "N_M", "delta");
  s << line;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& b = rows[i];
    std::snprintf(line, sizeof line, "%-12s %-10s %14.6g %14.6g %14.6g %16.8g %14.6g\n", std::string(kind_name(kinds[i])).c_str(),
                  b.target == Budget::Target::observable ? "observable" : "energy", b.tau, b.x_m, b.t_m, b.N_M, b.delta);
    s << line;
  }
  return s.str();
}

// ---------------------------------------------------------------- validate

inline json validate_json(const std::vector<KindReport>& reps, std::uint64_t seed, std::size_t draws) {
  json a = json::array();
  for (const auto& r : reps) {
    json k = {{"kind", kind_name(r.kind)}, {"realizable", r.realizable}};
    if (r.realizable) {
      json tails = json::array();
      for (const auto& [eps, t] : r.tails) tails.push_back({{"eps", eps}, {"tail_mass", jnum(t)}});
      k["closure_max_error"] = jnum(r.closure_max_error);
      k["f_norm"] = jnum(CoolingFunction(r.kind).f_norm());
      k["f_norm_quadrature"] = jnum(r.f_norm_quadrature);
      k["f_norm_error"] = jnum(r.f_norm_error);
      k["tails"] = tails;
      k["ks_x"] = jnum(r.ks_x);
      k["ks_y"] = jnum(r.ks_y);
      if (r.kind == Kind::triangle) k["rejection_acceptance"] = jnum(r.triangle_acceptance);
      k["closure_pass"] = r.closure_pass;
      k["norm_pass"] = r.norm_pass;
      k["tail_pass"] = r.tail_pass;
      k["ks_pass"] = r.ks_pass;
    } else {
      k["status"] = "non-realizable";
    }
    k["pass"] = r.pass();
    a.push_back(k);
  }
  return {{"seed", seed}, {"draws", draws}, {"kinds", a}};
}

inline std::string validate_table(const std::vector<KindReport>& reps) {
  std::ostringstream s;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %12s %12s %10s %10s %10s %s\n", "kind", "closure", "norm_err", "tail", "ks_x", "ks_y", "result");
  s << line;
  for (const auto& r : reps) {
    if (!r.realizable) {
      std::snprintf(line, sizeof line, "%-12s %12s %12s %10s %10s %10s %s\n", std::string(kind_name(r.kind)).c_str(), "-", "-", "-", "-", "-", "non-realizable");
    } else {
      std::snprintf(line, sizeof line, "%-12s %12.3g %12.3g %10s %10.4f %10.4f %s\n", std::string(kind_name(r.kind)).c_str(), r.closure_max_error, r.f_norm_error,
                    r.tail_pass ? "ok" : "FAIL", r.ks_x, r.ks_y, r.pass() ? "pass" : "FAIL");
    }
    s << line;
  }
  return s.str();
}

}  // namespace qcool
