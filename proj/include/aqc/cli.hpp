#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aqc/experiments.hpp"
#include "json.hpp"

namespace aqc {

namespace cli_detail {

struct Settings {
  // global
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out = "results";
  std::string config;
  // ensemble
  int n = 8;
  int m = 48;
  std::size_t count = 20;
  std::string filter = "unique_solution";
  std::size_t max_attempts = 1'000'000;
  // hardness
  int m_min = 8, m_max = 80, step = 8;
  std::string solver = "gsat";
  std::uint64_t max_flips = 0;  // 0: 10 n
  std::uint64_t max_tries = 50;
  // spectra / fits
  double s_step = 0.1;
  int fit_degree = 7;
  double trim = 0.05;
  std::string fit_method = "max_likelihood";
  std::size_t bootstrap = 200;
  double bin_width = 0.1;
  double q_irr = 0.2;
  bool dump_spectra = false;
  // gapdist
  std::optional<double> gap_s;
  // scaling
  std::vector<int> n_list{6, 8, 10};
  double ratio = 6.0;
  // lz
  std::optional<double> delta_e, delta_m;
  double s_dot = 0.1;
  std::size_t level = 0;
  std::size_t slope_window = 5;
};

inline std::string json_scalar_to_arg(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

/// Arguments for every option named in `cfg` that the user did not pass.
/// Keys are long option names without the leading dashes; a section named
/// after the subcommand overrides top-level keys.
inline std::vector<std::string> config_arguments(const CLI::App& app, const CLI::App& sub,
                                                 const nlohmann::json& cfg) {
  if (!cfg.is_object()) throw CLI::ValidationError("--config", "config file must hold a JSON object");
  std::map<std::string, nlohmann::json> merged;
  for (auto it = cfg.begin(); it != cfg.end(); ++it)
    if (!it.value().is_object()) merged[it.key()] = it.value();
  if (cfg.contains(sub.get_name()) && cfg[sub.get_name()].is_object())
    for (auto it = cfg[sub.get_name()].begin(); it != cfg[sub.get_name()].end(); ++it)
      merged[it.key()] = it.value();

  std::vector<std::string> args;
  for (const auto& [key, value] : merged) {
    if (key == "config") continue;
    const CLI::Option* opt = nullptr;
    try {
      opt = sub.get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      try {
        opt = app.get_option("--" + key);
      } catch (const CLI::OptionNotFound&) {
        throw CLI::ValidationError("--config", "unknown key '" + key + "'");
      }
    }
    if (opt->count() > 0) continue;  // explicit flag wins
    if (opt->get_type_size() == 0) {
      if (value.is_boolean() && value.get<bool>()) args.push_back("--" + key);
      continue;
    }
    args.push_back("--" + key);
    if (value.is_array())
      for (const auto& v : value) args.push_back(json_scalar_to_arg(v));
    else
      args.push_back(json_scalar_to_arg(value));
  }
  return args;
}

inline ExperimentConfig experiment_config(const Settings& st) {
  ExperimentConfig c;
  c.ensemble.n = st.n;
  c.ensemble.m = st.m;
  c.ensemble.count = st.count;
  c.ensemble.filter = parse_filter(st.filter);
  c.ensemble.seed = st.seed;
  c.ensemble.max_attempts = st.max_attempts;
  c.s_grid = uniform_grid(st.s_step);
  c.unfold.fit_degree = st.fit_degree;
  c.unfold.trim_fraction = st.trim;
  if (st.fit_method == "max_likelihood")
    c.fit.method = BrodyFitMethod::max_likelihood;
  else if (st.fit_method == "histogram_lsq")
    c.fit.method = BrodyFitMethod::histogram_lsq;
  else
    throw ParameterError("unknown fit method '" + st.fit_method + "'");
  c.fit.bootstrap = st.bootstrap;
  c.fit.seed = substream_seed(st.seed, 0xb0075ULL);
  c.fit.bin_width = st.bin_width;
  c.bin_width = st.bin_width;
  c.q_irr = st.q_irr;
  c.threads = st.threads;
  return c;
}

inline std::string s_tag(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", s);
  return buf;
}

inline std::filesystem::path prepare_dir(const Settings& st, const std::string& name,
                                         const nlohmann::json& cfg) {
  auto dir = run_directory(st.out, name, cfg);
  std::filesystem::create_directories(dir);
  return dir;
}

inline int cmd_gen(const Settings& st, std::ostream& out) {
  const auto c = experiment_config(st);
  const auto ens = generate_ensemble(c.ensemble, st.threads);
  const nlohmann::json cfg = {{"ensemble", to_json(c.ensemble)}};
  const auto dir = prepare_dir(st, "gen", cfg);
  const auto manifest = write_ensemble(ens, dir);
  write_metadata(dir, "gen", cfg, manifest["acceptance"]);
  out << dir.string() << '\n';
  return 0;
}

inline int cmd_hardness(const Settings& st, std::ostream& out) {
  if (st.step < 1 || st.m_min < 1 || st.m_max < st.m_min)
    throw ParameterError("need 1 <= m-min <= m-max and step >= 1");
  HardnessSweepConfig h;
  h.n = st.n;
  for (int m = st.m_min; m <= st.m_max; m += st.step) h.m_list.push_back(m);
  h.instances_per_point = st.count;
  h.gsat = GsatParams::for_size(st.n, st.seed);
  if (st.max_flips) h.gsat.max_flips = st.max_flips;
  h.gsat.max_tries = st.max_tries;
  if (st.solver == "gsat")
    h.solver = SweepSolver::gsat;
  else if (st.solver == "dp")
    h.solver = SweepSolver::dp;
  else
    throw ParameterError("unknown solver '" + st.solver + "'");
  h.filter = parse_filter(st.filter);
  h.seed = st.seed;
  h.threads = st.threads;
  const nlohmann::json cfg = {{"n", h.n},
                              {"m_list", h.m_list},
                              {"instances_per_point", h.instances_per_point},
                              {"solver", st.solver},
                              {"max_flips", h.gsat.max_flips},
                              {"max_tries", h.gsat.max_tries},
                              {"filter", st.filter},
                              {"seed", st.seed}};
  const auto rows = hardness_sweep(h);
  const auto dir = prepare_dir(st, "hardness", cfg);
  write_text(dir / "hardness.csv", hardness_csv(rows));
  write_metadata(dir, "hardness", cfg);
  out << dir.string() << '\n';
  return 0;
}

inline int cmd_qcurve(const Settings& st, std::ostream& out) {
  const auto c = experiment_config(st);
  const auto ens = generate_ensemble(c.ensemble, st.threads);
  auto curve = run_q_of_s(c, ens.instances);
  curve.attempts = ens.attempts;
  nlohmann::json cfg = to_json(c);
  cfg["dump_spectra"] = st.dump_spectra;
  const auto dir = prepare_dir(st, "qcurve", cfg);
  write_text(dir / "qcurve.csv", qcurve_csv(curve));
  write_text(dir / "ground_gaps.csv", ground_gaps_csv(curve));
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& p : curve.points) {
    if (!p.fit_failed) {
      write_text(dir / ("hist_s" + s_tag(p.s) + ".csv"), histogram_csv(p.histogram));
      auto j = to_json(p.fit);
      j["s"] = p.s;
      fits.push_back(j);
    } else {
      fits.push_back({{"s", p.s}, {"fit_failed", true}});
    }
  }
  write_text(dir / "fits.json", fits.dump(2) + "\n");
  if (st.dump_spectra) {
    std::vector<Spectrum> all;
    for (std::size_t i = 0; i < ens.instances.size(); ++i) {
      const auto ih = InterpolatedHamiltonian::from_formula(ens.instances[i]);
      for (double s : c.s_grid) {
        auto sp = spectrum_at(ih, s);
        sp.instance_id = i;
        all.push_back(std::move(sp));
      }
    }
    write_text(dir / "spectra.csv", spectrum_csv(all));
  }
  write_metadata(dir, "qcurve", cfg,
                 {{"attempts", curve.attempts}, {"cell_errors", curve.cell_errors}});
  out << dir.string() << '\n';
  return 0;
}

inline int cmd_gapdist(const Settings& st, std::ostream& out) {
  const auto c = experiment_config(st);
  GapDistributionOptions go;
  go.fixed_s = st.gap_s;
  const auto d = run_gap_distribution(c, go);
  nlohmann::json cfg = to_json(c);
  cfg["s"] = st.gap_s ? nlohmann::json(*st.gap_s) : nlohmann::json("argmax_q");
  const auto dir = prepare_dir(st, "gapdist", cfg);
  std::ostringstream gaps;
  gaps << "instance_id,gap,normalized_gap\n";
  for (std::size_t i = 0; i < d.gaps.size(); ++i)
    gaps << i << ',' << fmt_double(d.gaps[i]) << ',' << fmt_double(d.normalized[i]) << '\n';
  write_text(dir / "gaps.csv", gaps.str());
  write_text(dir / "hist.csv", histogram_csv(d.histogram));
  auto fit = to_json(d.fit);
  fit["s"] = d.s;
  write_text(dir / "fit.json", fit.dump(2) + "\n");
  if (d.selection_curve) write_text(dir / "selection_qcurve.csv", qcurve_csv(*d.selection_curve));
  write_metadata(dir, "gapdist", cfg);
  out << dir.string() << '\n';
  return 0;
}

inline int cmd_scaling(const Settings& st, std::ostream& out) {
  const auto c = experiment_config(st);
  const auto rep = run_scaling_study(c, st.n_list, st.ratio);
  nlohmann::json cfg = to_json(c);
  cfg["n_list"] = st.n_list;
  cfg["ratio"] = st.ratio;
  const auto dir = prepare_dir(st, "scaling", cfg);
  for (const auto& p : rep.points)
    write_text(dir / ("qcurve_n" + std::to_string(p.n) + ".csv"), qcurve_csv(p.curve));
  write_text(dir / "scaling.json", to_json(rep).dump(2) + "\n");
  write_metadata(dir, "scaling", cfg);
  out << dir.string() << '\n';
  return 0;
}

inline int cmd_lz(const Settings& st, std::ostream& out) {
  if (st.delta_e || st.delta_m) {
    if (!st.delta_e || !st.delta_m)
      throw ParameterError("--delta-e and --delta-m must be given together");
    out << fmt_double(lz_probability(*st.delta_e, *st.delta_m, st.s_dot)) << '\n';
    return 0;
  }
  const auto c = experiment_config(st);
  const auto ens = generate_ensemble(c.ensemble, st.threads);
  CrossingOptions co;
  co.slope_window = st.slope_window;
  const auto rows =
      crossing_table(ens.instances, c.s_grid, st.level, st.s_dot, co, st.threads);
  nlohmann::json cfg = {{"ensemble", to_json(c.ensemble)},
                        {"s_grid", c.s_grid},
                        {"level", st.level},
                        {"s_dot", st.s_dot},
                        {"slope_window", st.slope_window}};
  const auto dir = prepare_dir(st, "lz", cfg);
  write_text(dir / "crossings.csv", crossing_csv(rows));
  write_metadata(dir, "lz", cfg);
  out << dir.string() << '\n';
  return 0;
}

}  // namespace cli_detail

/// Command-line entry point. Exit codes: 0 success, 1 usage error, 2 runtime failure.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  using namespace cli_detail;
  Settings st;
  CLI::App app{"Spectral statistics of adiabatic 3-SAT Hamiltonians", "aqclab"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", st.seed, "Master RNG seed");
  app.add_option("--threads", st.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", st.out, "Results root directory");
  app.add_option("--config", st.config, "JSON file with option overrides")->check(CLI::ExistingFile);

  auto ensemble_opts = [&](CLI::App* s) {
    s->add_option("--n", st.n, "Variables");
    s->add_option("--m", st.m, "Clauses");
    s->add_option("--count", st.count, "Instances");
    s->add_option("--filter", st.filter, "any | soluble | unique_solution");
    s->add_option("--max-attempts", st.max_attempts, "Rejection-sampling budget");
  };
  auto spectral_opts = [&](CLI::App* s) {
    s->add_option("--s-step", st.s_step, "Grid step in s");
    s->add_option("--fit-degree", st.fit_degree, "Unfolding polynomial degree");
    s->add_option("--trim", st.trim, "Fraction of levels dropped at each spectrum edge");
    s->add_option("--fit-method", st.fit_method, "max_likelihood | histogram_lsq");
    s->add_option("--bootstrap", st.bootstrap, "Bootstrap resamples for the q standard error");
    s->add_option("--bin-width", st.bin_width, "Histogram bin width");
    s->add_option("--q-irr", st.q_irr, "q threshold of the irregular region");
  };

  auto* gen = app.add_subcommand("gen", "Generate a filtered random 3-SAT ensemble");
  ensemble_opts(gen);

  auto* hard = app.add_subcommand("hardness", "Classical solver cost versus clause count");
  hard->add_option("--n", st.n, "Variables");
  hard->add_option("--m-min", st.m_min);
  hard->add_option("--m-max", st.m_max);
  hard->add_option("--step", st.step);
  hard->add_option("--count", st.count, "Instances per point");
  hard->add_option("--solver", st.solver, "gsat | dp");
  hard->add_option("--filter", st.filter, "any | soluble | unique_solution");
  hard->add_option("--max-flips", st.max_flips, "GSAT flips per try (default 10 n)");
  hard->add_option("--max-tries", st.max_tries, "GSAT tries");

  auto* qc = app.add_subcommand("qcurve", "Brody parameter q(s) of an ensemble");
  ensemble_opts(qc);
  spectral_opts(qc);
  qc->add_flag("--dump-spectra", st.dump_spectra, "Also write every spectrum to spectra.csv");

  auto* gd = app.add_subcommand("gapdist", "Distribution of E1 - E0 over an ensemble");
  ensemble_opts(gd);
  spectral_opts(gd);
  gd->add_option("--s", st.gap_s, "Evaluation point (default: argmax of q)");

  auto* sc = app.add_subcommand("scaling", "Growth of rho_min with problem size");
  ensemble_opts(sc);
  spectral_opts(sc);
  sc->add_option("--n-list", st.n_list, "Problem sizes")->expected(1, -1);
  sc->add_option("--ratio", st.ratio, "Clause/variable ratio");

  auto* lz = app.add_subcommand("lz", "Landau-Zener probabilities");
  ensemble_opts(lz);
  lz->add_option("--delta-e", st.delta_e, "Minimum gap of a single crossing");
  lz->add_option("--delta-m", st.delta_m, "Asymptotic slope difference");
  lz->add_option("--s-dot", st.s_dot, "Sweep rate ds/dt");
  lz->add_option("--s-step", st.s_step, "Grid step in s for crossing extraction");
  lz->add_option("--level", st.level, "Lower level index of the pair");
  lz->add_option("--slope-window", st.slope_window, "Grid points used for asymptotic slopes");

  // Defaults that differ per subcommand, applied where neither a flag nor the
  // config file set the option.
  const Settings defaults = st;
  auto settle_defaults = [&](const std::string& name) {
    if ((name == "gapdist" || name == "hardness") &&
        app.get_subcommand(name)->get_option("--count")->count() == 0)
      st.count = 1000;
    if (name == "hardness" && hard->get_option("--filter")->count() == 0) st.filter = "soluble";
    if (name == "lz" && lz->get_option("--s-step")->count() == 0) st.s_step = 0.01;
  };
  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (!st.config.empty()) {
      std::ifstream in(st.config);
      nlohmann::json cfg;
      try {
        cfg = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw CLI::ValidationError("--config", e.what());
      }
      const auto extra = config_arguments(app, *sub, cfg);
      if (!extra.empty()) {
        std::vector<std::string> full = args;
        full.insert(full.end(), extra.begin(), extra.end());
        app.clear();
        st = defaults;
        app.parse(std::vector<std::string>(full.rbegin(), full.rend()));
      }
    }
    settle_defaults(name);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "gen") return cmd_gen(st, out);
    if (name == "hardness") return cmd_hardness(st, out);
    if (name == "qcurve") return cmd_qcurve(st, out);
    if (name == "gapdist") return cmd_gapdist(st, out);
    if (name == "scaling") return cmd_scaling(st, out);
    return cmd_lz(st, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace aqc
