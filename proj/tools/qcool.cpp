#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qcool/experiments.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string mode;
  bool json = false;
};

qcool::Config load(const Common& c) {
  qcool::Config cfg = c.config.empty() ? qcool::Config() : qcool::Config::load(c.config);
  if (c.seed) cfg.set("cooling.seed", std::to_string(*c.seed));
  if (!c.mode.empty()) {
    qcool::parse_mode(c.mode);
    cfg.set("cooling.mode", c.mode);
  }
  return cfg;
}

void add_common(CLI::App* sub, Common& c, bool needs_config) {
  auto* opt = sub->add_option("--config", c.config, "config file");
  if (needs_config) opt->required();
  sub->add_option("--seed", c.seed, "run seed (overrides cooling.seed)");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--mode", c.mode, "shot|expectation (overrides cooling.mode)");
  sub->add_flag("--json", c.json, "machine-readable stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcool: quantum algorithmic cooling simulator"};
  app.require_subcommand(1);
  Common c;

  auto* spectrum = app.add_subcommand("spectrum", "scan D(E) and locate eigenenergy peaks");
  add_common(spectrum, c, true);
  auto* cool = app.add_subcommand("cool", "infidelity versus total evolution time");
  add_common(cool, c, true);
  auto* observable = app.add_subcommand("observable", "estimate an eigenstate observable");
  add_common(observable, c, true);
  auto* budget = app.add_subcommand("budget", "resource budgets from target accuracy");
  add_common(budget, c, false);
  std::string b_target, b_kinds;
  std::optional<double> b_eps, b_kappa, b_p, b_gap, b_K;
  bool b_loose = false;
  budget->add_option("--target", b_target, "observable|energy");
  budget->add_option("--kinds", b_kinds, "comma-separated kinds");
  budget->add_option("--eps", b_eps, "observable accuracy");
  budget->add_option("--kappa", b_kappa, "energy accuracy");
  budget->add_option("--p-j", b_p, "overlap lower bound");
  budget->add_option("--gap", b_gap, "spectral gap");
  budget->add_option("-K", b_K, "confidence constant");
  budget->add_flag("--loose", b_loose, "main-text constants");
  auto* validate = app.add_subcommand("validate", "check duals, norms, tails and samplers");
  add_common(validate, c, false);
  std::size_t draws = 100000;
  validate->add_option("--draws", draws, "samples per KS test");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*spectrum) {
      qcool::Config cfg = load(c);
      const auto rep = qcool::run_spectrum(cfg, c.out);
      qcool::json s = qcool::json::array();
      for (const auto& r : rep.runs) {
        s.push_back({{"tau", qcool::jnum(r.tau)}, {"peaks", r.peaks.size()}, {"max_abs_error", qcool::jnum(r.max_abs_error)}});
        if (!c.json)
          std::printf("tau=%s x_m=%s peaks=%zu max|D_hat-D|=%s\n", qcool::fmt(r.tau).c_str(), qcool::fmt(r.x_m).c_str(), r.peaks.size(),
                      qcool::fmt(r.max_abs_error).c_str());
      }
      if (c.json) std::cout << s.dump(2) << "\n";
    } else if (*cool) {
      qcool::Config cfg = load(c);
      const auto rep = qcool::run_cooling_scaling(cfg, c.out);
      if (c.json) {
        qcool::json a = qcool::json::array();
        for (const auto& r : rep.rows)
          a.push_back({{"t_m", qcool::jnum(r.t_m)}, {"infidelity_estimated", qcool::jnum(r.infidelity_estimated)}, {"infidelity_oracle", qcool::jnum(r.infidelity_oracle)}});
        std::cout << a.dump(2) << "\n";
      } else {
        std::printf("%12s %16s %16s %16s\n", "t_m", "infid_est", "infid_oracle", "bound");
        for (const auto& r : rep.rows) std::printf("%12.6g %16.6g %16.6g %16.6g\n", r.t_m, r.infidelity_estimated, r.infidelity_oracle, r.theoretical_bound);
      }
    } else if (*observable) {
      qcool::Config cfg = load(c);
      const auto doc = qcool::run_observable(cfg, c.out);
      if (c.json)
        std::cout << doc.dump(2) << "\n";
      else
        std::printf("O_hat=%s oracle=%s abs_error=%s D_hat=%s N_hat=%s\n", qcool::fmt(doc["O_hat"].get<double>()).c_str(), qcool::fmt(doc["oracle"].get<double>()).c_str(),
                    qcool::fmt(doc["abs_error"].get<double>()).c_str(), qcool::fmt(doc["D_hat"].get<double>()).c_str(), qcool::fmt(doc["N_hat"].get<double>()).c_str());
    } else if (*budget) {
      qcool::Config cfg = c.config.empty() ? qcool::Config() : qcool::Config::load(c.config);
      if (!b_target.empty()) cfg.set("budget.target", b_target);
      if (!b_kinds.empty()) cfg.set("budget.kinds", b_kinds);
      if (b_eps) cfg.set("budget.eps", qcool::fmt(*b_eps));
      if (b_kappa) cfg.set("budget.kappa", qcool::fmt(*b_kappa));
      if (b_p) cfg.set("budget.p_j", qcool::fmt(*b_p));
      if (b_gap) cfg.set("budget.gap", qcool::fmt(*b_gap));
      if (b_K) cfg.set("budget.K", qcool::fmt(*b_K));
      if (b_loose) cfg.set("budget.loose", "true");
      std::vector<qcool::Kind> kinds;
      const auto rows = qcool::run_budget(cfg, kinds);
      const auto doc = qcool::budget_json(kinds, rows);
      std::cout << (c.json ? doc.dump(2) + "\n" : qcool::budget_table(kinds, rows));
      if (budget->count("--out")) qcool::write_file(std::filesystem::path(c.out) / "budget.json", qcool::json({{"rows", doc}, {"config", cfg.echo()}}).dump(2) + "\n");
    } else if (*validate) {
      const std::uint64_t seed = c.seed.value_or(1);
      const auto reps = qcool::validate_functions(seed, draws);
      const auto doc = qcool::validate_json(reps, seed, draws);
      std::cout << (c.json ? doc.dump(2) + "\n" : qcool::validate_table(reps));
      if (validate->count("--out")) qcool::write_file(std::filesystem::path(c.out) / "validate.json", doc.dump(2) + "\n");
      bool ok = true;
      for (const auto& r : reps) ok = ok && r.pass();
      return ok ? 0 : 1;
    }
  } catch (const qcool::degenerate_estimate_error& e) {
    std::fprintf(stderr, "degenerate estimate: %s\n", e.what());
    return 3;
  } catch (const qcool::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const qcool::parse_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const qcool::domain_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const qcool::non_realizable_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const qcool::dimension_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
