#include "spinbus/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace spinbus {

using cd = std::complex<double>;

namespace pauli {

Eigen::Matrix2cd x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

Eigen::Matrix2cd y() {
  Eigen::Matrix2cd m;
  m << 0, cd(0, -1), cd(0, 1), 0;
  return m;
}

Eigen::Matrix2cd z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

Eigen::Matrix2cd id() { return Eigen::Matrix2cd::Identity(); }

Eigen::Matrix2cd sigma(int n) {
  switch (n) {
    case 1: return x();
    case 2: return y();
    case 3: return z();
  }
  throw EngineError("pauli index out of range");
}

Eigen::Matrix4cd kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd k;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return k;
}

}  // namespace pauli

ChoiCheck check_choi(const ChoiMatrix& c) {
  ChoiCheck r;
  r.hermiticity = (c.m - c.m.adjoint()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(0.5 * (c.m + c.m.adjoint()));
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  r.trace_deviation = std::abs(c.m.trace() - cd(2.0, 0.0));
  // partial trace over the output (second) index must give the identity
  Eigen::Matrix2cd tin;
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) tin(k, l) = c.m(2 * k, 2 * l) + c.m(2 * k + 1, 2 * l + 1);
  r.tp_deviation = (tin - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
  return r;
}

void require_valid_choi(const ChoiMatrix& c, double tol) {
  ChoiCheck r = check_choi(c);
  if (!r.ok(tol))
    throw EngineError("Choi matrix fails CPTP checks: herm " + std::to_string(r.hermiticity) +
                      ", min eig " + std::to_string(r.min_eigenvalue) + ", trace dev " +
                      std::to_string(r.trace_deviation) + ", tp dev " +
                      std::to_string(r.tp_deviation));
}

Eigen::Matrix3d m_matrix(const ChoiMatrix& c) {
  Eigen::Matrix3d m;
  for (int row = 1; row <= 3; ++row) {
    for (int col = 1; col <= 3; ++col) {
      double sign = (col == 2) ? -1.0 : 1.0;
      cd tr = (c.m * pauli::kron2(pauli::sigma(col), pauli::sigma(row))).trace();
      m(row - 1, col - 1) = sign * tr.real();
    }
  }
  return m;
}

double oaf(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m);
  const auto& s = svd.singularValues();  // descending
  double det = m.determinant();
  double sign = det < -1e-14 ? -1.0 : 1.0;
  return 0.5 + (s(0) + s(1) + sign * s(2)) / 12.0;
}

double oaf(const ChoiMatrix& c) { return oaf(m_matrix(c)); }

Eigen::Matrix2cd apply_channel(const ChoiMatrix& c, const Eigen::Matrix2cd& rho) {
  Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out(i, j) += rho(k, l) * c.m(2 * k + i, 2 * l + j);
  return out;
}

double wootters_concurrence(const Eigen::Matrix4cd& rho) {
  Eigen::Matrix4cd yy = pauli::kron2(pauli::y(), pauli::y());
  Eigen::Matrix4cd prod = rho * yy * rho.conjugate() * yy;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(prod, /*computeEigenvectors=*/false);
  std::array<double, 4> lam{};
  for (int i = 0; i < 4; ++i) {
    double v = es.eigenvalues()(i).real();
    if (v < -1e-10)
      throw EngineError("concurrence: spectrum of rho rho~ is negative beyond tolerance (" +
                        std::to_string(v) + ")");
    lam[i] = std::sqrt(std::max(0.0, v));
  }
  std::sort(lam.begin(), lam.end(), std::greater<>());
  return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

double singlet_fraction(const Eigen::Matrix4cd& rho) {
  Eigen::Matrix3d t;
  for (int m = 1; m <= 3; ++m)
    for (int n = 1; n <= 3; ++n)
      t(m - 1, n - 1) = (rho * pauli::kron2(pauli::sigma(m), pauli::sigma(n))).trace().real();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(t);
  const auto& s = svd.singularValues();
  double sign = t.determinant() < -1e-14 ? -1.0 : 1.0;
  return 0.25 * (1.0 + s(0) + s(1) - sign * s(2));
}

namespace {

// splitmix64; the de-facto standard 64-bit mixer
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double to_unit(std::uint64_t bits) {
  // (0, 1); never exactly 0 so log() below is safe
  return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// Haar-random qubit state from two complex Gaussians keyed on (seed, index).
inline Eigen::Vector2cd haar_state(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = mix64(seed ^ (index * 0xD1B54A32D192ED03ULL));
  double u1 = to_unit(mix64(s));
  double u2 = to_unit(mix64(s + 1));
  double u3 = to_unit(mix64(s + 2));
  double u4 = to_unit(mix64(s + 3));
  double r1 = std::sqrt(-2.0 * std::log(u1));
  double r2 = std::sqrt(-2.0 * std::log(u3));
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Eigen::Vector2cd psi;
  psi(0) = cd(r1 * std::cos(two_pi * u2), r1 * std::sin(two_pi * u2));
  psi(1) = cd(r2 * std::cos(two_pi * u4), r2 * std::sin(two_pi * u4));
  psi /= psi.norm();
  return psi;
}

}  // namespace

MonteCarloEstimate haar_average_fidelity(const ChoiMatrix& c,
                                         const Eigen::Matrix2cd& rotation,
                                         std::size_t samples, std::uint64_t seed,
                                         int threads) {
  if (samples == 0) throw ConfigError("haar_average_fidelity needs samples > 0");
  const Eigen::Matrix2cd rdag = rotation.adjoint();

  // fixed chunk grid: partial sums are accumulated in chunk order, so the
  // result does not depend on the thread count
  constexpr std::size_t chunk = 8192;
  const std::size_t n_chunks = (samples + chunk - 1) / chunk;
  std::vector<double> sum(n_chunks, 0.0), sumsq(n_chunks, 0.0);

  auto run_chunk = [&](std::size_t ci) {
    std::size_t lo = ci * chunk, hi = std::min(samples, lo + chunk);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      Eigen::Vector2cd psi = haar_state(seed, i);
      Eigen::Matrix2cd rho = psi * psi.adjoint();
      Eigen::Matrix2cd out = apply_channel(c, rho);
      Eigen::Vector2cd chi = rdag * psi;  // <psi|R out R^dag|psi> = <chi|out|chi>
      double f = (chi.adjoint() * out * chi)(0, 0).real();
      s += f;
      s2 += f * f;
    }
    sum[ci] = s;
    sumsq[ci] = s2;
  };

  int nthreads = std::max(1, threads);
  if (nthreads == 1 || n_chunks == 1) {
    for (std::size_t ci = 0; ci < n_chunks; ++ci) run_chunk(ci);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&] {
        for (std::size_t ci; (ci = next.fetch_add(1)) < n_chunks;) run_chunk(ci);
      });
    for (auto& th : pool) th.join();
  }

  double s = 0.0, s2 = 0.0;
  for (std::size_t ci = 0; ci < n_chunks; ++ci) {
    s += sum[ci];
    s2 += sumsq[ci];
  }
  const double n = static_cast<double>(samples);
  double mean = s / n;
  double var = std::max(0.0, (s2 - n * mean * mean) / std::max(1.0, n - 1.0));
  return {mean, std::sqrt(var / n)};
}

double rotation_average_fidelity(const ChoiMatrix& c, const Eigen::Matrix2cd& rotation) {
  // compose the channel with rho -> R rho R^dag on the output slot
  Eigen::Matrix4cd conj = pauli::kron2(pauli::id(), rotation);
  ChoiMatrix corrected{conj * c.m * conj.adjoint()};
  return 0.5 + m_matrix(corrected).trace() / 12.0;
}

TimeWindow default_time_window(int n, double j) {
  if (j <= 0.0) throw ConfigError("time window needs j > 0");
  return {1.5 * (n + 1) / (2.0 * j), 0.1 / j, 1e-4 / j, 1e-3};
}

namespace {

// golden-section maximisation on [a, b]
Peak golden_max(const std::function<double(double)>& f, double a, double b, double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  double t = 0.5 * (a + b);
  return {t, f(t)};
}

}  // namespace

PeakScan scan_first_peak(const std::function<double(double)>& f, const TimeWindow& w) {
  if (w.dt <= 0.0 || w.t_max <= w.dt) throw ConfigError("bad time window");
  const int k = static_cast<int>(std::floor(w.t_max / w.dt));
  std::vector<double> ts(k + 1), fs(k + 1);
  for (int i = 0; i <= k; ++i) {
    ts[i] = i * w.dt;
    fs[i] = f(ts[i]);
  }
  const double floor_value = fs[0] + w.rise_threshold;

  PeakScan result;
  int imax = 0;
  for (int i = 1; i <= k; ++i)
    if (fs[i] > fs[imax]) imax = i;
  result.peak = {ts[imax], fs[imax]};

  for (int i = 1; i < k; ++i) {
    if (fs[i] >= fs[i - 1] && fs[i] >= fs[i + 1] && fs[i] > floor_value) {
      result.found = true;
      result.peak = golden_max(f, ts[i - 1], ts[i + 1], w.refine_tol);
      return result;
    }
  }
  return result;
}

Peak arrival_time(const std::function<double(double)>& f, const TimeWindow& w) {
  PeakScan scan = scan_first_peak(f, w);
  if (!scan.found)
    throw NoPeakError("no peak found on [0, " + std::to_string(w.t_max) +
                      "]; the series may be monotone (window too small?)");
  return scan.peak;
}

}  // namespace spinbus
