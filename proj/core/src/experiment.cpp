#include "spinbus/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <thread>

#include <json.hpp>

#include "spinbus/exact_diag.hpp"
#include "spinbus/free_fermion.hpp"
#include "spinbus/metrics.hpp"
#include "spinbus/states.hpp"

namespace spinbus {

using cd = std::complex<double>;

std::vector<double> Range::values() const {
  if (step <= 0.0) throw ConfigError("range step must be positive");
  if (stop < start) throw ConfigError("range stop must be >= start");
  std::vector<double> out;
  const int count = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(start + i * step);
  return out;
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::time_series: return "time-series";
    case ExperimentKind::gamma_h_grid: return "grid";
    case ExperimentKind::delta_sweep: return "delta-sweep";
    case ExperimentKind::n_scaling: return "scaling";
    case ExperimentKind::asymptotics_check: return "asymptotics";
    case ExperimentKind::cross_validate: return "validate";
  }
  return "?";
}

std::string to_string(EngineKind e) {
  switch (e) {
    case EngineKind::automatic: return "auto";
    case EngineKind::free_fermion: return "ff";
    case EngineKind::exact_diag: return "ed";
  }
  return "?";
}

std::string to_string(PeakMetric m) {
  return m == PeakMetric::oaf ? "oaf" : "concurrence";
}

EngineKind engine_kind_from_string(const std::string& s) {
  if (s == "auto") return EngineKind::automatic;
  if (s == "ff") return EngineKind::free_fermion;
  if (s == "ed") return EngineKind::exact_diag;
  throw ConfigError("unknown engine '" + s + "' (expected auto|ff|ed)");
}

PeakMetric peak_metric_from_string(const std::string& s) {
  if (s == "oaf") return PeakMetric::oaf;
  if (s == "concurrence") return PeakMetric::concurrence;
  throw ConfigError("unknown metric '" + s + "' (expected oaf|concurrence)");
}

namespace {

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (ExperimentKind k :
       {ExperimentKind::time_series, ExperimentKind::gamma_h_grid, ExperimentKind::delta_sweep,
        ExperimentKind::n_scaling, ExperimentKind::asymptotics_check,
        ExperimentKind::cross_validate})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

Range parse_range(const nlohmann::json& j, const char* name) {
  if (!j.is_object() || !j.contains("start") || !j.contains("stop") || !j.contains("step"))
    throw ConfigError(std::string(name) + " range needs {start, stop, step}");
  return {j["start"].get<double>(), j["stop"].get<double>(), j["step"].get<double>()};
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         std::optional<ExperimentKind> kind) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("bad experiment config json: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    if (kind.has_value())
      cfg.kind = *kind;
    else if (j.contains("experiment"))
      cfg.kind = experiment_kind_from_string(j["experiment"].get<std::string>());
    else
      throw ConfigError("missing experiment kind");
    if (j.contains("model")) {
      ModelConfig mc = parse_model_config(j["model"].dump());
      cfg.spec = mc.spec;
      cfg.inits = {mc.init};
    }
    if (j.contains("inits")) {
      cfg.inits.clear();
      for (const auto& s : j["inits"]) cfg.inits.push_back(init_kind_from_string(s));
      if (cfg.inits.empty()) throw ConfigError("inits must not be empty");
    }
    if (j.contains("gamma")) cfg.gamma_range = parse_range(j["gamma"], "gamma");
    if (j.contains("h")) cfg.h_range = parse_range(j["h"], "h");
    if (j.contains("delta")) cfg.delta_range = parse_range(j["delta"], "delta");
    if (j.contains("n_values")) cfg.n_values = j["n_values"].get<std::vector<int>>();
    if (j.contains("t_max")) cfg.t_max = j["t_max"].get<double>();
    if (j.contains("dt")) cfg.dt = j["dt"].get<double>();
    if (j.contains("engine")) cfg.engine = engine_kind_from_string(j["engine"]);
    if (j.contains("metric")) cfg.metric = peak_metric_from_string(j["metric"]);
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    if (j.contains("stretch")) cfg.stretch = j["stretch"].get<bool>();
    if (j.contains("validate")) {
      const auto& v = j["validate"];
      if (v.contains("n")) cfg.validate_n = v["n"].get<int>();
      if (v.contains("tuples")) cfg.validate_tuples = v["tuples"].get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
  return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["experiment"] = to_string(cfg.kind);
  j["model"] = nlohmann::json::parse(model_config_to_json({cfg.spec, cfg.inits.front()}));
  nlohmann::json inits = nlohmann::json::array();
  for (InitKind k : cfg.inits) inits.push_back(to_string(k));
  j["inits"] = inits;
  auto put_range = [&](const char* name, const std::optional<Range>& r) {
    if (r) j[name] = {{"start", r->start}, {"stop", r->stop}, {"step", r->step}};
  };
  put_range("gamma", cfg.gamma_range);
  put_range("h", cfg.h_range);
  put_range("delta", cfg.delta_range);
  if (!cfg.n_values.empty()) j["n_values"] = cfg.n_values;
  if (cfg.t_max) j["t_max"] = *cfg.t_max;
  if (cfg.dt) j["dt"] = *cfg.dt;
  j["engine"] = to_string(cfg.engine);
  j["metric"] = to_string(cfg.metric);
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["stretch"] = cfg.stretch;
  j["validate"] = {{"n", cfg.validate_n}, {"tuples", cfg.validate_tuples}};
  return j.dump(2);
}

void validate_row(const ResultRow& row) {
  auto bad = [&](const std::string& what) {
    throw ValidationError("result row violates " + what + " (model " + row.model + ", n " +
                          std::to_string(row.n) + ", init " + row.init + ")");
  };
  if (!(row.f >= 0.5 - 1e-9 && row.f <= 1.0 + 1e-9)) bad("F in [1/2, 1]");
  if (!(row.c >= -1e-9 && row.c <= 1.0 + 1e-9)) bad("C in [0, 1]");
  if (row.u && !(*row.u >= -1e-12 && *row.u <= 1.0 + 1e-9)) bad("u in [0, 1]");
  if (row.w && !(*row.w >= -1e-12 && *row.w <= 1.0 + 1e-9)) bad("w in [0, 1]");
  if (!std::isfinite(row.t_star)) bad("finite t_star");
}

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void parallel_for(int tasks, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, tasks));
  if (threads == 1) {
    for (int i = 0; i < tasks; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < tasks;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

EngineKind resolve_engine(const ExperimentConfig& cfg, const ChainSpec& spec) {
  if (cfg.engine == EngineKind::automatic)
    return spec.model == ModelKind::xy ? EngineKind::free_fermion : EngineKind::exact_diag;
  if (cfg.engine == EngineKind::free_fermion && spec.model != ModelKind::xy)
    throw ConfigError("the free-fermion engine handles xy chains only");
  return cfg.engine;
}

void check_ed_scale(const ExperimentConfig& cfg, const ChainSpec& spec) {
  if (spec.n + 1 > kMaxEdSites)
    throw ConfigError("exact diagonalisation capped at n <= " +
                      std::to_string(kMaxEdSites - 1));
  if (spec.n > kStretchThreshold && !cfg.stretch)
    throw ConfigError("exact diagonalisation beyond n = " +
                      std::to_string(kStretchThreshold) +
                      " needs --stretch (expect a long run)");
}

TimeWindow window_for(const ExperimentConfig& cfg, const ChainSpec& spec) {
  TimeWindow w = default_time_window(spec.n, spec.j);
  if (cfg.t_max) w.t_max = *cfg.t_max;
  if (cfg.dt) w.dt = *cfg.dt;
  if (w.t_max <= 0 || w.dt <= 0) throw ConfigError("t_max and dt must be positive");
  return w;
}

std::vector<double> sample_times(const TimeWindow& w) {
  const int k = static_cast<int>(std::floor(w.t_max / w.dt));
  std::vector<double> ts(k + 1);
  for (int i = 0; i <= k; ++i) ts[i] = i * w.dt;
  return ts;
}

// Free-fermion evaluation context for one (gamma, h, n) point.
class FfPoint {
 public:
  FfPoint(const ChainSpec& spec, const std::vector<InitKind>& inits)
      : spec_(spec), diag_(diagonalize(build_quadratic(spec, /*with_probe=*/true))) {
    bool need_channel =
        std::find(inits.begin(), inits.end(), InitKind::ground_state) != inits.end();
    FermionDiag channel;
    if (need_channel) channel = diagonalize(build_quadratic(spec, /*with_probe=*/false));
    for (InitKind init : inits) {
      InitData data;
      data.corr = init == InitKind::ground_state
                      ? build_correlators(init, spec, channel)
                      : build_correlators(init, spec);
      data.parity = channel_parity(init, spec).p;
      inits_.push_back(std::move(data));
    }
  }

  // F depends on u, w only, so one O(M) evaluation serves every init
  double oaf_at(double t) const {
    const double u = std::abs(transfer_amplitude(diag_, t));
    const double w = std::abs(pair_amplitude(diag_, t));
    return 0.5 + std::abs(u * u - w * w) / 6.0 + std::max(u, w) / 3.0;
  }

  ChannelSnapshot snap(int init_index, double t) const {
    const InitData& d = inits_[init_index];
    return snapshot(diag_, d.corr, d.parity, t);
  }

  double concurrence_at(int init_index, double t) const {
    return concurrence_xy(snap(init_index, t));
  }

  const ChainSpec& spec() const { return spec_; }
  const FermionDiag& diag() const { return diag_; }

 private:
  struct InitData {
    CorrelatorSet corr;
    int parity = 0;
  };
  ChainSpec spec_;
  FermionDiag diag_;
  std::vector<InitData> inits_;
};

// Exact-diagonalisation context for one (spec, init) point, with a per-time
// Choi cache so peak search and read-outs share evolutions.
class EdPoint {
 public:
  EdPoint(const ChainSpec& spec, InitKind init) : series_(spec, init) {}

  const ChoiMatrix& choi(double t) {
    auto it = cache_.find(t);
    if (it == cache_.end()) it = cache_.emplace(t, series_.at(t)).first;
    return it->second;
  }

  double f(double t) { return oaf(choi(t)); }
  double c(double t) { return wootters_concurrence(pair_state(choi(t))); }

 private:
  ChannelChoiSeries series_;
  std::map<double, ChoiMatrix> cache_;
};

ResultRow base_row(const ChainSpec& spec, InitKind init, EngineKind engine,
                   PeakMetric metric) {
  ResultRow row;
  row.model = to_string(spec.model);
  row.n = spec.n;
  if (spec.model == ModelKind::xy) row.gamma = spec.gamma;
  if (spec.model == ModelKind::xxz) row.delta = spec.delta;
  row.h = spec.h;
  row.init = to_string(init);
  row.engine = to_string(engine);
  row.peak_metric = to_string(metric);
  return row;
}

ResultRow ff_point_row(const FfPoint& point, int init_index, InitKind init,
                       const ExperimentConfig& cfg, const TimeWindow& w) {
  Timer timer;
  std::function<double(double)> merit;
  if (cfg.metric == PeakMetric::oaf)
    merit = [&](double t) { return point.oaf_at(t); };
  else
    merit = [&](double t) { return point.concurrence_at(init_index, t); };
  PeakScan scan = scan_first_peak(merit, w);
  ChannelSnapshot s = point.snap(init_index, scan.peak.t_star);
  ResultRow row = base_row(point.spec(), init, EngineKind::free_fermion, cfg.metric);
  row.t_star = s.t;
  row.f = oaf_xy(s);
  row.c = concurrence_xy(s);
  row.u = s.u;
  row.w = s.w;
  row.a = s.a;
  row.peak_found = scan.found;
  row.wall_seconds = timer.seconds();
  validate_row(row);
  return row;
}

ResultRow ed_point_row(EdPoint& point, const ChainSpec& spec, InitKind init,
                       const ExperimentConfig& cfg, const TimeWindow& w) {
  Timer timer;
  std::function<double(double)> merit;
  if (cfg.metric == PeakMetric::oaf)
    merit = [&](double t) { return point.f(t); };
  else
    merit = [&](double t) { return point.c(t); };
  PeakScan scan = scan_first_peak(merit, w);
  ResultRow row = base_row(spec, init, EngineKind::exact_diag, cfg.metric);
  row.t_star = scan.peak.t_star;
  row.f = point.f(row.t_star);
  row.c = point.c(row.t_star);
  row.peak_found = scan.found;
  row.wall_seconds = timer.seconds();
  validate_row(row);
  return row;
}

}  // namespace

TimeSeriesResult run_time_series(const ExperimentConfig& cfg) {
  validate(cfg.spec);
  const EngineKind engine = resolve_engine(cfg, cfg.spec);
  const TimeWindow w = window_for(cfg, cfg.spec);
  const std::vector<double> ts = sample_times(w);
  const InitKind init = cfg.inits.front();

  TimeSeriesResult result;
  if (engine == EngineKind::free_fermion) {
    FfPoint point(cfg.spec, {init});
    for (double t : ts) {
      ChannelSnapshot s = point.snap(0, t);
      SeriesPoint p;
      p.t = t;
      p.f = oaf_xy(s);
      p.c = concurrence_xy(s);
      p.u = s.u;
      p.w = s.w;
      p.a = s.a;
      result.points.push_back(p);
    }
    result.summary = ff_point_row(point, 0, init, cfg, w);
  } else {
    check_ed_scale(cfg, cfg.spec);
    EdPoint point(cfg.spec, init);
    for (double t : ts) {
      SeriesPoint p;
      p.t = t;
      p.f = point.f(t);
      p.c = point.c(t);
      result.points.push_back(p);
    }
    result.summary = ed_point_row(point, cfg.spec, init, cfg, w);
  }
  return result;
}

GridResult run_gamma_h_grid(const ExperimentConfig& cfg) {
  validate(cfg.spec);
  if (cfg.spec.model != ModelKind::xy)
    throw ConfigError("the gamma-h grid runs on the xy model");
  if (resolve_engine(cfg, cfg.spec) != EngineKind::free_fermion)
    throw ConfigError("the gamma-h grid runs on the free-fermion engine");
  const std::vector<double> gammas =
      cfg.gamma_range ? cfg.gamma_range->values() : std::vector<double>{cfg.spec.gamma};
  const std::vector<double> hs =
      cfg.h_range ? cfg.h_range->values() : std::vector<double>{cfg.spec.h};
  const TimeWindow w = window_for(cfg, cfg.spec);
  const int n_inits = static_cast<int>(cfg.inits.size());
  const int n_points = static_cast<int>(gammas.size() * hs.size());

  std::vector<ResultRow> rows(n_points * n_inits);
  parallel_for(n_points, cfg.threads, [&](int idx) {
    const double gamma = gammas[idx / hs.size()];
    const double h = hs[idx % hs.size()];
    ChainSpec spec = cfg.spec;
    spec.gamma = gamma;
    spec.h = h;
    FfPoint point(spec, cfg.inits);
    for (int i = 0; i < n_inits; ++i)
      rows[idx * n_inits + i] = ff_point_row(point, i, cfg.inits[i], cfg, w);
  });

  GridResult result;
  result.rows = std::move(rows);
  for (int idx = 0; idx < n_points; ++idx) {
    const ResultRow& row = result.rows[idx * n_inits];
    if (row.u && *row.u > result.best_u) {
      result.best_u = *row.u;
      result.best_gamma = *row.gamma;
      result.best_h = row.h;
    }
  }
  return result;
}

std::vector<ResultRow> run_delta_sweep(const ExperimentConfig& cfg) {
  validate(cfg.spec);
  if (cfg.spec.model != ModelKind::xxz)
    throw ConfigError("the delta sweep runs on the xxz model");
  if (resolve_engine(cfg, cfg.spec) != EngineKind::exact_diag)
    throw ConfigError("the delta sweep runs on the exact-diagonalisation engine");
  check_ed_scale(cfg, cfg.spec);
  const std::vector<double> deltas =
      cfg.delta_range ? cfg.delta_range->values() : std::vector<double>{cfg.spec.delta};
  const TimeWindow w = window_for(cfg, cfg.spec);
  const int n_inits = static_cast<int>(cfg.inits.size());

  std::vector<ResultRow> rows(deltas.size() * n_inits);
  parallel_for(static_cast<int>(deltas.size()), cfg.threads, [&](int di) {
    ChainSpec spec = cfg.spec;
    spec.delta = deltas[di];
    for (int i = 0; i < n_inits; ++i) {
      EdPoint point(spec, cfg.inits[i]);
      rows[di * n_inits + i] = ed_point_row(point, spec, cfg.inits[i], cfg, w);
    }
  });
  return rows;
}

std::vector<ResultRow> run_n_scaling(const ExperimentConfig& cfg) {
  validate(cfg.spec);
  if (cfg.spec.model != ModelKind::xy)
    throw ConfigError("the scaling experiment runs on the xy model");
  if (resolve_engine(cfg, cfg.spec) != EngineKind::free_fermion)
    throw ConfigError("the scaling experiment runs on the free-fermion engine");
  if (cfg.n_values.empty()) throw ConfigError("scaling needs a nonempty n_values list");
  const int n_inits = static_cast<int>(cfg.inits.size());

  std::vector<ResultRow> rows(cfg.n_values.size() * n_inits);
  parallel_for(static_cast<int>(cfg.n_values.size()), cfg.threads, [&](int ni) {
    ChainSpec spec = cfg.spec;
    spec.n = cfg.n_values[ni];
    ExperimentConfig local = cfg;
    local.spec = spec;
    const TimeWindow w = window_for(local, spec);
    FfPoint point(spec, cfg.inits);
    for (int i = 0; i < n_inits; ++i)
      rows[ni * n_inits + i] = ff_point_row(point, i, cfg.inits[i], cfg, w);
  });
  return rows;
}

std::vector<AsymptoticsRow> run_asymptotics_check(const ExperimentConfig& cfg) {
  validate(cfg.spec);
  if (cfg.spec.model != ModelKind::xy || std::abs(cfg.spec.gamma) > 1e-12)
    throw ConfigError("the asymptotic law applies to the isotropic chain (gamma = 0)");
  if (cfg.n_values.empty()) throw ConfigError("asymptotics needs a nonempty n_values list");

  std::vector<AsymptoticsRow> rows(cfg.n_values.size());
  parallel_for(static_cast<int>(cfg.n_values.size()), cfg.threads, [&](int ni) {
    ChainSpec spec = cfg.spec;
    spec.n = cfg.n_values[ni];
    ExperimentConfig local = cfg;
    local.spec = spec;
    const TimeWindow w = window_for(local, spec);
    const FermionDiag diag = diagonalize(build_quadratic(spec, true));
    // t* of the transfer amplitude itself: the quantity the law describes
    Peak peak = arrival_time(
        [&](double t) { return std::abs(transfer_amplitude(diag, t)); }, w);
    const XxPeak asymp = xx_peak_estimate(spec.n, spec.j);
    AsymptoticsRow row;
    row.n = spec.n;
    row.two_jt_exact = 2.0 * spec.j * peak.t_star;
    row.u_exact = peak.value;
    row.two_jt_asymp = 2.0 * spec.j * asymp.t_star;
    row.u_asymp = asymp.u_star;
    row.rel_err_t = std::abs(row.two_jt_exact - row.two_jt_asymp) / row.two_jt_exact;
    row.rel_err_u = std::abs(row.u_exact - row.u_asymp) / row.u_exact;
    rows[ni] = row;
  });
  return rows;
}

namespace {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double unit_double(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

struct ChoiComparison {
  double deviation = 0.0;
  std::string what;
};

ChoiComparison compare_point(const ChainSpec& ff_spec, const ChainSpec& ed_spec,
                             InitKind init, double t, bool corrupt_phase) {
  const FermionDiag diag = diagonalize(build_quadratic(ff_spec, true));
  const CorrelatorSet corr = build_correlators(init, ff_spec);
  const int parity = channel_parity(init, ff_spec).p;
  ChannelSnapshot s = snapshot(diag, corr, parity, t);
  if (corrupt_phase)
    s.phi_u = std::remainder(s.phi_u + std::numbers::pi, 2.0 * std::numbers::pi);
  const ChoiMatrix ff = choi_xy(s);

  ChannelChoiSeries series(ed_spec, init);
  const ChoiMatrix ed = series.at(t);

  double dev = (ff.m - ed.m).cwiseAbs().maxCoeff();
  dev = std::max(dev, std::abs(oaf_xy(s) - oaf(ed)));
  dev = std::max(dev,
                 std::abs(concurrence_xy(s) - wootters_concurrence(pair_state(ed))));
  const double u_ed = std::abs(ed.m(0, 3));
  const double w_ed = std::abs(ed.m(1, 2));
  dev = std::max(dev, std::abs(s.u - u_ed));
  dev = std::max(dev, std::abs(s.w - w_ed));
  dev = std::max(dev, std::abs(s.a - (ed.m(0, 0).real() - u_ed * u_ed)));

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%s gamma=%.3f delta=%.3f h=%.3f t=%.3f init=%s dev=%.3e",
                to_string(ed_spec.model).c_str(), ff_spec.gamma, ed_spec.delta, ff_spec.h, t,
                to_string(init).c_str(), dev);
  return {dev, buf};
}

}  // namespace

CrossValidateReport run_cross_validate(const ExperimentConfig& cfg, bool corrupt_phase) {
  const int n = cfg.validate_n;
  if (n < 2 || n > 8)
    throw ConfigError("cross validation runs at 2 <= n <= 8 (dense oracle scale)");
  const int tuples = cfg.validate_tuples;
  if (tuples < 1) throw ConfigError("cross validation needs at least one tuple");
  constexpr InitKind all_inits[] = {InitKind::ferro_down, InitKind::ferro_up, InitKind::neel,
                                    InitKind::singlet_series, InitKind::ground_state};

  CrossValidateReport report;
  report.tuples = tuples;
  const double t_cap = default_time_window(n, cfg.spec.j).t_max;

  std::mutex mtx;
  parallel_for(tuples, cfg.threads, [&](int i) {
    std::uint64_t s = mix64(cfg.seed ^ (0x51ED2701ULL + static_cast<std::uint64_t>(i)));
    ChainSpec ff_spec;
    ff_spec.model = ModelKind::xy;
    ff_spec.n = n;
    ff_spec.j = cfg.spec.j;
    ff_spec.gamma = unit_double(mix64(s));
    ff_spec.h = 0.2 + 1.8 * unit_double(mix64(s + 1));
    const double t = t_cap * unit_double(mix64(s + 2));
    InitKind init = all_inits[mix64(s + 3) % 5];
    if (init == InitKind::singlet_series && n % 2 != 0) init = InitKind::neel;
    ChoiComparison cmp = compare_point(ff_spec, ff_spec, init, t, corrupt_phase);
    std::lock_guard lock(mtx);
    if (cmp.deviation > report.max_deviation) {
      report.max_deviation = cmp.deviation;
      report.worst_case = cmp.what;
    }
  });

  // xxz at delta = 0 against the isotropic free-fermion chain
  const int xx_checks = std::max(3, tuples / 8);
  parallel_for(xx_checks, cfg.threads, [&](int i) {
    std::uint64_t s = mix64(cfg.seed ^ (0xA11CE5ULL + static_cast<std::uint64_t>(i)));
    ChainSpec ff_spec;
    ff_spec.model = ModelKind::xy;
    ff_spec.n = n;
    ff_spec.j = cfg.spec.j;
    ff_spec.gamma = 0.0;
    ff_spec.h = 0.2 + 1.8 * unit_double(mix64(s));
    ChainSpec ed_spec = ff_spec;
    ed_spec.model = ModelKind::xxz;
    ed_spec.delta = 0.0;
    ed_spec.gamma = 0.0;
    const double t = t_cap * unit_double(mix64(s + 1));
    InitKind init = all_inits[mix64(s + 2) % 5];
    if (init == InitKind::singlet_series && n % 2 != 0) init = InitKind::neel;
    // correlators and parity come from the xy view of the same chain
    ChoiComparison cmp = compare_point(ff_spec, ed_spec, init, t, corrupt_phase);
    std::lock_guard lock(mtx);
    if (cmp.deviation > report.max_deviation) {
      report.max_deviation = cmp.deviation;
      report.worst_case = cmp.what;
    }
  });

  report.pass = report.max_deviation < report.tolerance;
  return report;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

}  // namespace

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::string out = "model,n,gamma,delta,h,init,engine,t_star,F,C,u,w,A,peak_metric\n";
  for (const ResultRow& r : rows) {
    out += r.model + ',' + std::to_string(r.n) + ',' + fmt_opt(r.gamma) + ',' +
           fmt_opt(r.delta) + ',' + fmt(r.h) + ',' + r.init + ',' + r.engine + ',' +
           fmt(r.t_star) + ',' + fmt(r.f) + ',' + fmt(r.c) + ',' + fmt_opt(r.u) + ',' +
           fmt_opt(r.w) + ',' + fmt_opt(r.a) + ',' + r.peak_metric + '\n';
  }
  return out;
}

std::string series_to_csv(const std::vector<SeriesPoint>& points) {
  std::string out = "t,F,C,u,w,A\n";
  for (const SeriesPoint& p : points) {
    out += fmt(p.t) + ',' + fmt(p.f) + ',' + fmt(p.c) + ',' + fmt_opt(p.u) + ',' +
           fmt_opt(p.w) + ',' + fmt_opt(p.a) + '\n';
  }
  return out;
}

std::string asymptotics_to_csv(const std::vector<AsymptoticsRow>& rows) {
  std::string out = "n,two_jt_exact,u_exact,two_jt_asymp,u_asymp,rel_err_t,rel_err_u\n";
  for (const AsymptoticsRow& r : rows) {
    out += std::to_string(r.n) + ',' + fmt(r.two_jt_exact) + ',' + fmt(r.u_exact) + ',' +
           fmt(r.two_jt_asymp) + ',' + fmt(r.u_asymp) + ',' + fmt(r.rel_err_t) + ',' +
           fmt(r.rel_err_u) + '\n';
  }
  return out;
}

namespace {

nlohmann::json row_to_json(const ResultRow& r) {
  nlohmann::json j;
  j["model"] = r.model;
  j["n"] = r.n;
  if (r.gamma) j["gamma"] = *r.gamma;
  if (r.delta) j["delta"] = *r.delta;
  j["h"] = r.h;
  j["init"] = r.init;
  j["engine"] = r.engine;
  j["t_star"] = r.t_star;
  j["F"] = r.f;
  j["C"] = r.c;
  if (r.u) j["u"] = *r.u;
  if (r.w) j["w"] = *r.w;
  if (r.a) j["A"] = *r.a;
  j["peak_metric"] = r.peak_metric;
  j["peak_found"] = r.peak_found;
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

nlohmann::json provenance(const ExperimentConfig& cfg, double wall_seconds) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["engine"] = to_string(cfg.engine);
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["wall_seconds"] = wall_seconds;
  return j;
}

}  // namespace

std::string rows_to_json(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows,
                         double wall_seconds) {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(experiment_config_to_json(cfg));
  j["provenance"] = provenance(cfg, wall_seconds);
  nlohmann::json arr = nlohmann::json::array();
  for (const ResultRow& r : rows) arr.push_back(row_to_json(r));
  j["rows"] = arr;
  return j.dump(2);
}

std::string series_to_json(const ExperimentConfig& cfg, const TimeSeriesResult& result,
                           double wall_seconds) {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(experiment_config_to_json(cfg));
  j["provenance"] = provenance(cfg, wall_seconds);
  j["summary"] = row_to_json(result.summary);
  nlohmann::json arr = nlohmann::json::array();
  for (const SeriesPoint& p : result.points) {
    nlohmann::json pj;
    pj["t"] = p.t;
    pj["F"] = p.f;
    pj["C"] = p.c;
    if (p.u) pj["u"] = *p.u;
    if (p.w) pj["w"] = *p.w;
    if (p.a) pj["A"] = *p.a;
    arr.push_back(pj);
  }
  j["points"] = arr;
  return j.dump(2);
}

}  // namespace spinbus
