#include "spinbus/exact_diag.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

#include <Eigen/Eigenvalues>

#include "spinbus/states.hpp"

namespace spinbus {

using cd = std::complex<double>;

namespace {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

ManyBodyOperator build_hamiltonian(const ChainSpec& spec, bool with_probe) {
  validate(spec);
  const int m = total_sites(spec, with_probe);
  if (m > kMaxEdSites)
    throw EngineError("exact diagonalisation capped at " + std::to_string(kMaxEdSites) +
                      " sites, got " + std::to_string(m));
  ManyBodyOperator op;
  op.sites = m;
  op.coup = derived_couplings(spec);
  op.h = spec.h;
  const std::size_t dim = op.dim();
  op.diagonal.resize(static_cast<Eigen::Index>(dim));
  for (std::size_t b = 0; b < dim; ++b) {
    double e = 0.0;
    for (int s = 0; s < m; ++s) {
      double zs = 1.0 - 2.0 * ((b >> s) & 1u);
      e += op.h * zs;
      if (s + 1 < m) {
        double zn = 1.0 - 2.0 * ((b >> (s + 1)) & 1u);
        e += op.coup.jz * zs * zn;
      }
    }
    op.diagonal(static_cast<Eigen::Index>(b)) = e;
  }
  return op;
}

void ManyBodyOperator::apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  const std::size_t d = dim();
  const double flip = coup.jx + coup.jy;   // antiparallel neighbours
  const double pair = coup.jx - coup.jy;   // parallel neighbours
  out.resize(in.size());
  for (std::size_t b = 0; b < d; ++b) {
    cd acc = diagonal(static_cast<Eigen::Index>(b)) * in(static_cast<Eigen::Index>(b));
    for (int s = 0; s + 1 < sites; ++s) {
      const std::size_t mask = (std::size_t{0b11}) << s;
      const bool anti = (((b >> s) ^ (b >> (s + 1))) & 1u) != 0;
      const double amp = anti ? flip : pair;
      if (amp != 0.0) acc += amp * in(static_cast<Eigen::Index>(b ^ mask));
    }
    out(static_cast<Eigen::Index>(b)) = acc;
  }
}

Eigen::VectorXcd ManyBodyOperator::apply(const Eigen::VectorXcd& in) const {
  Eigen::VectorXcd out;
  apply(in, out);
  return out;
}

void ManyBodyOperator::apply_real(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
  const std::size_t d = dim();
  const double flip = coup.jx + coup.jy;
  const double pair = coup.jx - coup.jy;
  out.resize(in.size());
  for (std::size_t b = 0; b < d; ++b) {
    double acc = diagonal(static_cast<Eigen::Index>(b)) * in(static_cast<Eigen::Index>(b));
    for (int s = 0; s + 1 < sites; ++s) {
      const std::size_t mask = (std::size_t{0b11}) << s;
      const bool anti = (((b >> s) ^ (b >> (s + 1))) & 1u) != 0;
      const double amp = anti ? flip : pair;
      if (amp != 0.0) acc += amp * in(static_cast<Eigen::Index>(b ^ mask));
    }
    out(static_cast<Eigen::Index>(b)) = acc;
  }
}

Eigen::MatrixXd ManyBodyOperator::dense() const {
  if (dim() > kDenseEvolveDim)
    throw EngineError("dense Hamiltonian requested above the 2^12 cap");
  const std::size_t d = dim();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  const double flip = coup.jx + coup.jy;
  const double pair = coup.jx - coup.jy;
  for (std::size_t b = 0; b < d; ++b) {
    h(b, b) = diagonal(static_cast<Eigen::Index>(b));
    for (int s = 0; s + 1 < sites; ++s) {
      const std::size_t mask = (std::size_t{0b11}) << s;
      const bool anti = (((b >> s) ^ (b >> (s + 1))) & 1u) != 0;
      const double amp = anti ? flip : pair;
      if (amp != 0.0) h(b ^ mask, b) += amp;
    }
  }
  return h;
}

namespace {

struct LanczosResult {
  Eigen::VectorXd ritz_vector;
  double ritz_value = 0.0;
  double residual = 0.0;
};

// One restarted cycle of m Lanczos steps with full reorthogonalisation,
// optionally deflating against a converged vector.
LanczosResult lanczos_cycle(const ManyBodyOperator& op, const Eigen::VectorXd& start,
                            int steps, const Eigen::VectorXd* deflate) {
  const Eigen::Index d = start.size();
  std::vector<Eigen::VectorXd> basis;
  std::vector<double> alpha, beta;
  Eigen::VectorXd v = start;
  if (deflate) v -= deflate->dot(v) * (*deflate);
  v.normalize();
  basis.push_back(v);
  Eigen::VectorXd w(d);
  for (int j = 0; j < steps; ++j) {
    op.apply_real(basis[j], w);
    double a = basis[j].dot(w);
    alpha.push_back(a);
    w -= a * basis[j];
    if (j > 0) w -= beta[j - 1] * basis[j - 1];
    if (deflate) w -= deflate->dot(w) * (*deflate);
    for (const auto& u : basis) w -= u.dot(w) * u;  // full reorthogonalisation
    double b = w.norm();
    if (b < 1e-13 || j == steps - 1) {
      break;
    }
    beta.push_back(b);
    basis.push_back(w / b);
  }
  const int m = static_cast<int>(alpha.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    t(i, i) = alpha[i];
    if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  Eigen::VectorXd s = es.eigenvectors().col(0);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < m; ++i) y += s(i) * basis[i];
  y.normalize();
  op.apply_real(y, w);
  double theta = y.dot(w);
  LanczosResult r;
  r.ritz_vector = std::move(y);
  r.ritz_value = theta;
  r.residual = (w - theta * r.ritz_vector).norm();
  return r;
}

Eigen::VectorXd seeded_vector(Eigen::Index d, std::uint64_t seed) {
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    std::uint64_t bits = mix64(seed ^ static_cast<std::uint64_t>(i) * 0x9E3779B97F4A7C15ULL);
    v(i) = static_cast<double>(bits >> 11) * 0x1.0p-53 - 0.5;
  }
  v.normalize();
  return v;
}

double lowest_eigenvalue(const ManyBodyOperator& op, const Eigen::VectorXd& start,
                         const Eigen::VectorXd* deflate, Eigen::VectorXd* vec_out) {
  const double scale = std::max(1.0, op.diagonal.cwiseAbs().maxCoeff() +
                                         2.0 * (std::abs(op.coup.jx) + std::abs(op.coup.jy)) *
                                             op.sites);
  Eigen::VectorXd x = start;
  LanczosResult r;
  for (int cycle = 0; cycle < 200; ++cycle) {
    r = lanczos_cycle(op, x, 40, deflate);
    x = r.ritz_vector;
    if (r.residual < 1e-11 * scale) break;
  }
  if (r.residual > 1e-8 * scale)
    throw EngineError("Lanczos ground-state iteration did not converge (residual " +
                      std::to_string(r.residual) + ")");
  if (vec_out) *vec_out = r.ritz_vector;
  return r.ritz_value;
}

}  // namespace

GroundResult ground_state(const ManyBodyOperator& op, std::uint64_t seed) {
  const Eigen::Index d = static_cast<Eigen::Index>(op.dim());
  Eigen::VectorXd ground;
  double e0 = lowest_eigenvalue(op, seeded_vector(d, seed), nullptr, &ground);
  Eigen::VectorXd dummy;
  double e1 = lowest_eigenvalue(op, seeded_vector(d, seed + 1), &ground, &dummy);
  GroundResult r;
  r.state = ground.cast<cd>();
  r.energy = e0;
  r.gap = e1 - e0;
  r.degenerate = r.gap < 1e-9 * std::max(1.0, std::abs(e0));
  return r;
}

std::shared_ptr<const SpectralDecomposition> spectral_decomposition(const ManyBodyOperator& op) {
  auto spec = std::make_shared<SpectralDecomposition>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.dense());
  if (es.info() != Eigen::Success) throw EngineError("dense eigendecomposition failed");
  spec->vectors = es.eigenvectors();
  spec->values = es.eigenvalues();
  return spec;
}

namespace {

class DenseEvolver final : public Evolver {
 public:
  DenseEvolver(std::shared_ptr<const SpectralDecomposition> spec, Eigen::VectorXcd psi0)
      : spec_(std::move(spec)) {
    c0_re_ = spec_->vectors.transpose() * psi0.real();
    c0_im_ = spec_->vectors.transpose() * psi0.imag();
  }

  Eigen::VectorXcd at(double t) override {
    const Eigen::Index d = spec_->values.size();
    Eigen::VectorXd zr(d), zi(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double c = std::cos(spec_->values(i) * t), s = -std::sin(spec_->values(i) * t);
      zr(i) = c * c0_re_(i) - s * c0_im_(i);
      zi(i) = s * c0_re_(i) + c * c0_im_(i);
    }
    Eigen::VectorXd yr = spec_->vectors * zr;
    Eigen::VectorXd yi = spec_->vectors * zi;
    Eigen::VectorXcd out(d);
    out.real() = yr;
    out.imag() = yi;
    return out;
  }

 private:
  std::shared_ptr<const SpectralDecomposition> spec_;
  Eigen::VectorXd c0_re_, c0_im_;
};

// Lanczos exponential stepper. Each step builds a small Krylov space and
// advances by an adaptively split substep; the error estimate is the usual
// last-component bound.
class KrylovEvolver final : public Evolver {
 public:
  KrylovEvolver(const ManyBodyOperator& op, Eigen::VectorXcd psi0)
      : op_(op), psi0_(std::move(psi0)) {
    cache_limit_ = op_.dim() <= (std::size_t{1} << 16) ? 512 : 6;
    checkpoints_[0.0] = psi0_;
  }

  Eigen::VectorXcd at(double t) override {
    if (t < 0) throw EngineError("propagation time must be nonnegative");
    auto it = checkpoints_.upper_bound(t);
    // nearest checkpoint at or before t always exists (t = 0 is seeded)
    --it;
    Eigen::VectorXcd psi = it->second;
    double t0 = it->first;
    step(psi, t - t0);
    remember(t, psi);
    return psi;
  }

 private:
  static constexpr int kMaxKrylov = 40;
  static constexpr double kTol = 1e-10;

  void remember(double t, const Eigen::VectorXcd& psi) {
    if (checkpoints_.size() >= cache_limit_) {
      // drop the oldest non-zero checkpoint
      auto victim = checkpoints_.upper_bound(0.0);
      if (victim != checkpoints_.end()) checkpoints_.erase(victim);
    }
    checkpoints_[t] = psi;
  }

  void step(Eigen::VectorXcd& psi, double tau) const {
    double remaining = tau;
    while (remaining > 1e-14) {
      double sub = remaining;
      while (!try_substep(psi, sub)) sub *= 0.5;
      remaining -= sub;
    }
  }

  bool try_substep(Eigen::VectorXcd& psi, double tau) const {
    const double norm0 = psi.norm();
    if (norm0 == 0.0) return true;
    std::vector<Eigen::VectorXcd> basis;
    std::vector<double> alpha, beta;
    basis.push_back(psi / norm0);
    Eigen::VectorXcd w;
    bool exhausted = false;
    for (int j = 0; j < kMaxKrylov; ++j) {
      op_.apply(basis[j], w);
      double a = std::real(basis[j].dot(w));
      alpha.push_back(a);
      w -= a * basis[j];
      if (j > 0) w -= beta[j - 1] * basis[j - 1];
      for (const auto& u : basis) w -= u.dot(w) * u;
      double b = w.norm();
      if (b < 1e-12) {
        exhausted = true;  // invariant subspace: the result is exact
        break;
      }
      if (j + 1 < kMaxKrylov) {
        beta.push_back(b);
        basis.push_back(w / b);
      } else {
        beta.push_back(b);  // kept for the error estimate
      }
    }
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m && i < static_cast<int>(beta.size())) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    Eigen::VectorXcd phases(m);
    for (int i = 0; i < m; ++i)
      phases(i) = std::polar(1.0, -es.eigenvalues()(i) * tau);
    Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(m);
    e1(0) = 1.0;
    Eigen::VectorXcd small = es.eigenvectors() *
                             (phases.cwiseProduct(es.eigenvectors().transpose() * e1));
    if (!exhausted && m == kMaxKrylov) {
      const double err = std::abs(beta.back() * std::abs(small(m - 1))) * norm0;
      if (err > kTol * std::max(1.0, norm0)) return false;
    }
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
    for (int i = 0; i < m; ++i) out += small(i) * basis[i];
    psi = norm0 * out;
    return true;
  }

  ManyBodyOperator op_;
  Eigen::VectorXcd psi0_;
  std::size_t cache_limit_;
  mutable std::map<double, Eigen::VectorXcd> checkpoints_;
};

}  // namespace

std::unique_ptr<Evolver> make_evolver(std::shared_ptr<const SpectralDecomposition> spec,
                                      Eigen::VectorXcd psi0) {
  return std::make_unique<DenseEvolver>(std::move(spec), std::move(psi0));
}

std::unique_ptr<Evolver> make_evolver(const ManyBodyOperator& op, Eigen::VectorXcd psi0) {
  if (op.dim() <= kDenseEvolveDim)
    return std::make_unique<DenseEvolver>(spectral_decomposition(op), std::move(psi0));
  return std::make_unique<KrylovEvolver>(op, std::move(psi0));
}

Eigen::VectorXcd evolve(const Eigen::VectorXcd& psi, const ManyBodyOperator& op, double t) {
  const double n0 = psi.norm();
  if (std::abs(n0 - 1.0) > 1e-10) throw EngineError("evolve expects a normalised state");
  if (op.dim() <= kDenseEvolveDim) {
    return DenseEvolver(spectral_decomposition(op), psi).at(t);
  }
  KrylovEvolver ev(op, psi);
  Eigen::VectorXcd out = ev.at(t);
  if (std::abs(out.norm() - 1.0) > 1e-9)
    throw EngineError("evolution lost norm beyond tolerance");
  return out;
}

Eigen::Matrix2cd reduced_qubit(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                               int site) {
  if (a.size() != b.size()) throw EngineError("reduced_qubit: dimension mismatch");
  const std::size_t d = static_cast<std::size_t>(a.size());
  const std::size_t mask = std::size_t{1} << site;
  Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
  for (std::size_t idx = 0; idx < d; ++idx) {
    if (idx & mask) continue;  // enumerate the site-bit-0 representative
    const std::size_t idx1 = idx | mask;
    rho(0, 0) += a(idx) * std::conj(b(idx));
    rho(0, 1) += a(idx) * std::conj(b(idx1));
    rho(1, 0) += a(idx1) * std::conj(b(idx));
    rho(1, 1) += a(idx1) * std::conj(b(idx1));
  }
  return rho;
}

void ChannelChoiSeries::setup(const ChainSpec& spec, const Eigen::VectorXcd& channel_state) {
  n_ = spec.n;
  ManyBodyOperator op = build_hamiltonian(spec, /*with_probe=*/true);
  const std::size_t dim = op.dim();
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(dim);
  Eigen::VectorXcd psi1 = Eigen::VectorXcd::Zero(dim);
  for (std::size_t c = 0; c < (dim >> 1); ++c) {
    psi0(c << 1) = channel_state(c);        // probe bit 0: |0> at site 0
    psi1((c << 1) | 1u) = channel_state(c); // probe bit 1: |1> at site 0
  }
  if (op.dim() <= kDenseEvolveDim) {
    auto sd = spectral_decomposition(op);
    ev0_ = make_evolver(sd, std::move(psi0));
    ev1_ = make_evolver(sd, std::move(psi1));
  } else {
    ev0_ = make_evolver(op, std::move(psi0));
    ev1_ = make_evolver(op, std::move(psi1));
  }
}

ChannelChoiSeries::ChannelChoiSeries(const ChainSpec& spec, InitKind init) {
  setup(spec, build_state_vector(init, spec));
}

ChannelChoiSeries::ChannelChoiSeries(const ChainSpec& spec, Eigen::VectorXcd channel_state) {
  if (channel_state.size() != Eigen::Index(std::size_t{1} << spec.n))
    throw EngineError("channel state has wrong dimension");
  setup(spec, channel_state);
}

ChoiMatrix ChannelChoiSeries::at(double t) {
  Eigen::VectorXcd a = ev0_->at(t);
  Eigen::VectorXcd b = ev1_->at(t);
  Eigen::Matrix2cd e00 = reduced_qubit(a, a, n_);
  Eigen::Matrix2cd e11 = reduced_qubit(b, b, n_);
  Eigen::Matrix2cd e01 = reduced_qubit(a, b, n_);
  ChoiMatrix c;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      c.m(0 + i, 0 + j) = e00(i, j);
      c.m(2 + i, 2 + j) = e11(i, j);
      c.m(0 + i, 2 + j) = e01(i, j);
      c.m(2 + i, 0 + j) = std::conj(e01(j, i));
    }
  }
  require_valid_choi(c, 1e-9);
  return c;
}

ChoiMatrix channel_choi(const ChainSpec& spec, InitKind init, double t) {
  ChannelChoiSeries series(spec, init);
  return series.at(t);
}

Eigen::Matrix4cd pair_state(const ChoiMatrix& c) { return 0.5 * c.m; }

void write_state_dump(const std::string& path, const Eigen::VectorXcd& psi) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EngineError("cannot open '" + path + "' for writing");
  const std::uint64_t len = static_cast<std::uint64_t>(psi.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double re = psi(i).real(), im = psi(i).imag();
    out.write(reinterpret_cast<const char*>(&re), sizeof(re));
    out.write(reinterpret_cast<const char*>(&im), sizeof(im));
  }
}

Eigen::VectorXcd read_state_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EngineError("cannot open '" + path + "'");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  Eigen::VectorXcd psi(static_cast<Eigen::Index>(len));
  for (std::uint64_t i = 0; i < len; ++i) {
    double re = 0, im = 0;
    in.read(reinterpret_cast<char*>(&re), sizeof(re));
    in.read(reinterpret_cast<char*>(&im), sizeof(im));
    psi(static_cast<Eigen::Index>(i)) = cd(re, im);
  }
  if (!in) throw EngineError("truncated state dump '" + path + "'");
  return psi;
}

double hermiticity_residual(const ManyBodyOperator& op) {
  Eigen::MatrixXd h = op.dense();
  return (h - h.transpose()).cwiseAbs().maxCoeff();
}

Eigen::VectorXcd apply_total_sz(const ManyBodyOperator& op, const Eigen::VectorXcd& v) {
  const std::size_t d = op.dim();
  Eigen::VectorXcd out(v.size());
  for (std::size_t b = 0; b < d; ++b) {
    double sz = op.sites - 2.0 * std::popcount(b);
    out(static_cast<Eigen::Index>(b)) = sz * v(static_cast<Eigen::Index>(b));
  }
  return out;
}

Eigen::VectorXcd apply_parity(int sites, const Eigen::VectorXcd& v) {
  const std::size_t d = std::size_t{1} << sites;
  Eigen::VectorXcd out(v.size());
  for (std::size_t b = 0; b < d; ++b) {
    int ups = sites - std::popcount(b);
    out(static_cast<Eigen::Index>(b)) =
        (ups % 2 == 0 ? 1.0 : -1.0) * v(static_cast<Eigen::Index>(b));
  }
  return out;
}

double commutator_with_total_sz(const ManyBodyOperator& op) {
  Eigen::VectorXcd v = seeded_vector(static_cast<Eigen::Index>(op.dim()), 42).cast<cd>();
  Eigen::VectorXcd hv = op.apply(v);
  Eigen::VectorXcd lhs = apply_total_sz(op, hv);
  Eigen::VectorXcd rhs = op.apply(apply_total_sz(op, v));
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

double commutator_with_parity(const ManyBodyOperator& op) {
  Eigen::VectorXcd v = seeded_vector(static_cast<Eigen::Index>(op.dim()), 43).cast<cd>();
  Eigen::VectorXcd lhs = apply_parity(op.sites, op.apply(v));
  Eigen::VectorXcd rhs = op.apply(apply_parity(op.sites, v));
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

}  // namespace spinbus
