#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "spinbus/errors.hpp"
#include "spinbus/experiment.hpp"

namespace {

using namespace spinbus;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitEngine = 3;
constexpr int kExitValidation = 4;

struct CommonOptions {
  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  std::optional<std::string> engine;
  std::optional<std::string> metric;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool stretch = false;

  std::optional<std::string> model;
  std::optional<int> n;
  std::optional<double> j, gamma, delta, h;
  std::vector<std::string> inits;

  std::optional<std::string> gamma_range, h_range, delta_range;
  std::vector<int> n_values;
  std::optional<double> t_max, dt;

  std::optional<int> validate_n, validate_tuples;
  bool corrupt_phase = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->set_help_flag("--help", "print help");  // frees -h/--h for the field strength
  cmd->add_option("--config", o.config_path, "JSON experiment config file");
  cmd->add_option("--out", o.out_path, "output path (stdout when omitted)");
  cmd->add_option("--format", o.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--engine", o.engine, "auto|ff|ed");
  cmd->add_option("--metric", o.metric, "peak metric: oaf|concurrence");
  cmd->add_option("--seed", o.seed, "rng seed");
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_flag("--stretch", o.stretch, "allow long exact-diagonalisation runs (n > 14)");

  cmd->add_option("--model", o.model, "xy|xxz");
  cmd->add_option("--n", o.n, "channel length");
  cmd->add_option("--j", o.j, "exchange coupling");
  cmd->add_option("--gamma", o.gamma, "xy anisotropy");
  cmd->add_option("--delta", o.delta, "xxz anisotropy");
  cmd->add_option("--h", o.h, "uniform field");
  cmd->add_option("--init", o.inits,
                  "channel initialization(s): ferro_down|ferro_up|neel|singlets|ground")
      ->delimiter(',');

  cmd->add_option("--gamma-range", o.gamma_range, "start:stop:step");
  cmd->add_option("--h-range", o.h_range, "start:stop:step");
  cmd->add_option("--delta-range", o.delta_range, "start:stop:step");
  cmd->add_option("--n-values", o.n_values, "chain lengths, comma separated")->delimiter(',');
  cmd->add_option("--t-max", o.t_max, "scan window length");
  cmd->add_option("--dt", o.dt, "scan sampling step");
}

Range parse_range_arg(const std::string& text) {
  Range r;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &r.start, &r.stop, &r.step) != 3)
    throw ConfigError("range must be start:stop:step, got '" + text + "'");
  return r;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig assemble(ExperimentKind kind, const CommonOptions& o) {
  ExperimentConfig cfg;
  if (!o.config_path.empty())
    cfg = parse_experiment_config(read_file(o.config_path), kind);
  cfg.kind = kind;
  if (o.model) cfg.spec.model = model_kind_from_string(*o.model);
  if (o.n) cfg.spec.n = *o.n;
  if (o.j) cfg.spec.j = *o.j;
  if (o.gamma) cfg.spec.gamma = *o.gamma;
  if (o.delta) cfg.spec.delta = *o.delta;
  if (o.h) cfg.spec.h = *o.h;
  if (!o.inits.empty()) {
    cfg.inits.clear();
    for (const auto& s : o.inits) cfg.inits.push_back(init_kind_from_string(s));
  }
  if (o.gamma_range) cfg.gamma_range = parse_range_arg(*o.gamma_range);
  if (o.h_range) cfg.h_range = parse_range_arg(*o.h_range);
  if (o.delta_range) cfg.delta_range = parse_range_arg(*o.delta_range);
  if (!o.n_values.empty()) cfg.n_values = o.n_values;
  if (o.t_max) cfg.t_max = o.t_max;
  if (o.dt) cfg.dt = o.dt;
  if (o.engine) cfg.engine = engine_kind_from_string(*o.engine);
  if (o.metric) cfg.metric = peak_metric_from_string(*o.metric);
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.stretch) cfg.stretch = true;
  if (o.validate_n) cfg.validate_n = *o.validate_n;
  if (o.validate_tuples) cfg.validate_tuples = *o.validate_tuples;
  if (cfg.spec.n > kStretchThreshold && cfg.stretch &&
      (kind == ExperimentKind::delta_sweep || cfg.engine == EngineKind::exact_diag))
    std::cerr << "warning: exact diagonalisation at n = " << cfg.spec.n << " holds 2^"
              << (cfg.spec.n + 1) << " amplitudes; expect a long run\n";
  return cfg;
}

void write_output(const CommonOptions& o, const std::string& csv, const std::string& json) {
  const std::string& payload = o.format == "json" ? json : csv;
  if (o.out_path.empty() || o.out_path == "-") {
    std::cout << payload;
    return;
  }
  std::ofstream out(o.out_path, std::ios::binary);
  if (!out) throw EngineError("cannot write '" + o.out_path + "'");
  out << payload;
  if (o.format == "csv") {
    // JSON mirror with config echo and provenance alongside the CSV
    std::ofstream mirror(o.out_path + ".json", std::ios::binary);
    if (mirror) mirror << json;
  }
}

int dispatch(ExperimentKind kind, const CommonOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  ExperimentConfig cfg = assemble(kind, o);
  switch (kind) {
    case ExperimentKind::time_series: {
      TimeSeriesResult r = run_time_series(cfg);
      write_output(o, series_to_csv(r.points), series_to_json(cfg, r, elapsed()));
      std::cerr << "t* = " << r.summary.t_star << "  F(t*) = " << r.summary.f
                << "  C(t*) = " << r.summary.c
                << (r.summary.peak_found ? "" : "  [no qualifying peak; global max]") << "\n";
      return kExitOk;
    }
    case ExperimentKind::gamma_h_grid: {
      GridResult r = run_gamma_h_grid(cfg);
      write_output(o, rows_to_csv(r.rows), rows_to_json(cfg, r.rows, elapsed()));
      std::cerr << "grid argmax of u(t*): gamma = " << r.best_gamma << ", h = " << r.best_h
                << ", u = " << r.best_u << "\n";
      return kExitOk;
    }
    case ExperimentKind::delta_sweep: {
      auto rows = run_delta_sweep(cfg);
      write_output(o, rows_to_csv(rows), rows_to_json(cfg, rows, elapsed()));
      return kExitOk;
    }
    case ExperimentKind::n_scaling: {
      auto rows = run_n_scaling(cfg);
      write_output(o, rows_to_csv(rows), rows_to_json(cfg, rows, elapsed()));
      return kExitOk;
    }
    case ExperimentKind::asymptotics_check: {
      auto rows = run_asymptotics_check(cfg);
      std::string csv = asymptotics_to_csv(rows);
      write_output(o, csv, csv);
      return kExitOk;
    }
    case ExperimentKind::cross_validate: {
      CrossValidateReport r = run_cross_validate(cfg, o.corrupt_phase);
      std::cout << "cross-validation over " << r.tuples << " tuples at n = " << cfg.validate_n
                << ": max deviation " << r.max_deviation << " (tolerance " << r.tolerance
                << ")\n"
                << "worst case: " << r.worst_case << "\n"
                << (r.pass ? "PASS" : "FAIL") << "\n";
      return r.pass ? kExitOk : kExitValidation;
    }
  }
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spin-chain quantum channel simulator"};
  app.require_subcommand(1);

  struct Sub {
    ExperimentKind kind;
    CLI::App* cmd;
    CommonOptions opts;
  };
  std::vector<Sub> subs;
  subs.reserve(6);
  auto add = [&](ExperimentKind kind, const char* name, const char* desc) {
    subs.push_back({kind, app.add_subcommand(name, desc), {}});
    add_common(subs.back().cmd, subs.back().opts);
  };
  add(ExperimentKind::time_series, "time-series",
      "fidelity and concurrence versus time at one parameter point");
  add(ExperimentKind::gamma_h_grid, "grid", "sweep the xy anisotropy-field plane");
  add(ExperimentKind::delta_sweep, "delta-sweep", "sweep the xxz anisotropy");
  add(ExperimentKind::n_scaling, "scaling", "sweep the chain length");
  add(ExperimentKind::asymptotics_check, "asymptotics",
      "exact first peak against the large-n law for the isotropic chain");
  add(ExperimentKind::cross_validate, "validate",
      "compare the free-fermion and exact-diagonalisation engines");

  for (auto& sub : subs) {
    if (sub.kind == ExperimentKind::cross_validate) {
      sub.cmd->add_option("--validate-n", sub.opts.validate_n, "chain length (<= 8)");
      sub.cmd->add_option("--tuples", sub.opts.validate_tuples, "number of random tuples");
      sub.cmd->add_flag("--corrupt-phase", sub.opts.corrupt_phase,
                        "self-test hook: break the phase convention on purpose")
          ->group("");  // hidden
    }
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& sub : subs)
      if (sub.cmd->parsed()) return dispatch(sub.kind, sub.opts);
    std::cerr << "no subcommand given\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return kExitValidation;
  } catch (const EngineError& e) {
    std::cerr << "engine error: " << e.what() << "\n";
    return kExitEngine;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEngine;
  }
}
