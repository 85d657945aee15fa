#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinbus/model.hpp"

namespace spinbus {

enum class ExperimentKind {
  time_series,
  gamma_h_grid,
  delta_sweep,
  n_scaling,
  asymptotics_check,
  cross_validate,
};

enum class EngineKind { automatic, free_fermion, exact_diag };
enum class PeakMetric { oaf, concurrence };

struct Range {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;
  std::vector<double> values() const;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::time_series;
  ChainSpec spec;
  std::vector<InitKind> inits{InitKind::ferro_down};
  std::optional<Range> gamma_range;
  std::optional<Range> h_range;
  std::optional<Range> delta_range;
  std::vector<int> n_values;
  std::optional<double> t_max;
  std::optional<double> dt;
  EngineKind engine = EngineKind::automatic;
  PeakMetric metric = PeakMetric::oaf;
  std::uint64_t seed = 1;
  int threads = 1;
  bool stretch = false;
  int validate_tuples = 40;
  int validate_n = 6;
};

/// Reads the JSON experiment description; missing fields keep their defaults.
/// `kind` comes from the caller (the CLI subcommand) unless the file carries
/// an "experiment" entry and the caller passes nullopt.
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         std::optional<ExperimentKind> kind);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

/// One parameter point of an experiment. The optional entries are populated
/// on the free-fermion path only. peak_found is false when no peak cleared
/// the rise threshold; such rows carry the global sampled maximum instead.
struct ResultRow {
  std::string model;
  int n = 0;
  std::optional<double> gamma;
  std::optional<double> delta;
  double h = 0.0;
  std::string init;
  std::string engine;
  double t_star = 0.0;
  double f = 0.0;
  double c = 0.0;
  std::optional<double> u;
  std::optional<double> w;
  std::optional<double> a;
  std::string peak_metric;
  bool peak_found = true;
  double wall_seconds = 0.0;  ///< JSON mirror only; the CSV stays reproducible
};

/// Throws ValidationError when a row leaves the physical ranges
/// (F in [1/2 - 1e-9, 1 + 1e-9], C in [-1e-9, 1 + 1e-9], u, w in [0, 1]).
void validate_row(const ResultRow& row);

struct SeriesPoint {
  double t = 0.0;
  double f = 0.0;
  double c = 0.0;
  std::optional<double> u, w, a;
};

struct TimeSeriesResult {
  std::vector<SeriesPoint> points;
  ResultRow summary;
};

TimeSeriesResult run_time_series(const ExperimentConfig& cfg);

struct GridResult {
  std::vector<ResultRow> rows;
  double best_gamma = 0.0;  ///< argmax of u(t*) over the grid (first init)
  double best_h = 0.0;
  double best_u = 0.0;
};

GridResult run_gamma_h_grid(const ExperimentConfig& cfg);
std::vector<ResultRow> run_delta_sweep(const ExperimentConfig& cfg);
std::vector<ResultRow> run_n_scaling(const ExperimentConfig& cfg);

struct AsymptoticsRow {
  int n = 0;
  double two_jt_exact = 0.0;
  double u_exact = 0.0;
  double two_jt_asymp = 0.0;
  double u_asymp = 0.0;
  double rel_err_t = 0.0;
  double rel_err_u = 0.0;
};

std::vector<AsymptoticsRow> run_asymptotics_check(const ExperimentConfig& cfg);

struct CrossValidateReport {
  int tuples = 0;
  double max_deviation = 0.0;
  double tolerance = 1e-8;
  bool pass = false;
  std::string worst_case;
};

/// Compares the free-fermion and exact-diagonalisation engines on random
/// (gamma, h, t, init) tuples at the configured n <= 8, and the xxz chain at
/// delta = 0 against the isotropic free-fermion chain. `corrupt_phase` shifts
/// phi_u by pi on the free-fermion side; the self-test uses it to prove the
/// harness can fail.
CrossValidateReport run_cross_validate(const ExperimentConfig& cfg,
                                       bool corrupt_phase = false);

std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::string series_to_csv(const std::vector<SeriesPoint>& points);
std::string asymptotics_to_csv(const std::vector<AsymptoticsRow>& rows);

/// JSON mirror: config echo, provenance (engine, code version, seed, wall
/// time, threads) and the full row set.
std::string rows_to_json(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows,
                         double wall_seconds);
std::string series_to_json(const ExperimentConfig& cfg, const TimeSeriesResult& result,
                           double wall_seconds);

std::string to_string(ExperimentKind k);
std::string to_string(EngineKind e);
std::string to_string(PeakMetric m);
EngineKind engine_kind_from_string(const std::string& s);
PeakMetric peak_metric_from_string(const std::string& s);

inline constexpr const char* kVersion = "0.1.0";
/// Exact-diagonalisation runs above this channel length need the stretch flag.
inline constexpr int kStretchThreshold = 14;

}  // namespace spinbus
