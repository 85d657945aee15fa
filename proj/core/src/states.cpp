#include "spinbus/states.hpp"

#include <bit>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "spinbus/exact_diag.hpp"

namespace spinbus {

using cd = std::complex<double>;

CorrelatorCheck check_correlators(const CorrelatorSet& c) {
  const int n = c.n();
  CorrelatorCheck r;
  r.hermiticity = (c.cdag - c.cdag.adjoint()).cwiseAbs().maxCoeff();
  r.exchange =
      (c.cexc - (Eigen::MatrixXcd::Identity(n, n) - c.cdag.conjugate())).cwiseAbs().maxCoeff();
  r.antisymmetry = (c.fdag + c.fdag.transpose()).cwiseAbs().maxCoeff();
  r.conjugation = (c.fann + c.fdag.conjugate()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (c.cdag + c.cdag.adjoint()));
  r.occupation_low = std::max(0.0, -es.eigenvalues().minCoeff());
  r.occupation_high = std::max(0.0, es.eigenvalues().maxCoeff() - 1.0);
  return r;
}

namespace {

Eigen::VectorXcd ground_vector(const ChainSpec& spec) {
  ManyBodyOperator op = build_hamiltonian(spec, /*with_probe=*/false);
  GroundResult g = ground_state(op);
  if (!g.degenerate) return g.state;
  if (spec.model == ModelKind::xy)
    throw EngineError("xy channel ground state is degenerate at these parameters; "
                      "the initialization is ill-defined");
  // xxz: split the manifold with a tiny uniform field and keep the highest
  // magnetisation member; [H, Sz_tot] = 0 makes the result an exact eigenstate
  ChainSpec tilted = spec;
  tilted.h -= 1e-8 * std::abs(spec.j);
  GroundResult sel = ground_state(build_hamiltonian(tilted, false));
  return sel.state;
}

int neel_pattern(int n) {
  // |0,1,0,1,...>: site 1 up (bit 0 clear), site 2 down (bit 1 set), ...
  int b = 0;
  for (int site = 2; site <= n; site += 2) b |= 1 << (site - 1);
  return b;
}

}  // namespace

Eigen::VectorXcd build_state_vector(InitKind init, const ChainSpec& spec) {
  validate(spec);
  const int n = spec.n;
  const std::size_t dim = std::size_t{1} << n;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
  switch (init) {
    case InitKind::ferro_down:
      psi(static_cast<Eigen::Index>(dim - 1)) = 1.0;  // all bits set = all spins down
      return psi;
    case InitKind::ferro_up:
      psi(0) = 1.0;
      return psi;
    case InitKind::neel:
      psi(neel_pattern(n)) = 1.0;
      return psi;
    case InitKind::singlet_series: {
      if (n % 2 != 0) throw ConfigError("singlet series initialization requires even n");
      const double amp = std::pow(0.5, n / 4.0);  // (1/sqrt2)^(n/2)
      for (std::size_t b = 0; b < dim; ++b) {
        double sign = 1.0;
        bool valid = true;
        for (int p = 0; p < n / 2; ++p) {
          const unsigned lo = (b >> (2 * p)) & 1u;
          const unsigned hi = (b >> (2 * p + 1)) & 1u;
          if (lo == hi) {
            valid = false;
            break;
          }
          if (lo == 1u) sign = -sign;  // |1,0> enters with the minus sign
        }
        if (valid) psi(static_cast<Eigen::Index>(b)) = sign * amp;
      }
      return psi;
    }
    case InitKind::ground_state:
      return ground_vector(spec);
  }
  throw ConfigError("unknown initialization");
}

ParityTag state_parity(const Eigen::VectorXcd& psi, int sites) {
  double expectation = 0.0;
  const std::size_t dim = std::size_t{1} << sites;
  for (std::size_t b = 0; b < dim; ++b) {
    const int ups = sites - std::popcount(b);
    const double sign = (ups % 2 == 0) ? 1.0 : -1.0;
    expectation += sign * std::norm(psi(static_cast<Eigen::Index>(b)));
  }
  if (std::abs(std::abs(expectation) - 1.0) > 1e-10)
    throw EngineError("state has indefinite parity: <prod(-sz)> = " +
                      std::to_string(expectation));
  return {expectation < 0 ? 1 : 0, true};
}

ParityTag channel_parity(InitKind init, const ChainSpec& spec) {
  validate(spec);
  const int n = spec.n;
  switch (init) {
    case InitKind::ferro_down:
      return {0, true};  // no fermions
    case InitKind::ferro_up:
      return {n & 1, true};
    case InitKind::neel:
      return {((n + 1) / 2) & 1, true};  // up spins on odd sites
    case InitKind::singlet_series:
      if (n % 2 != 0) throw ConfigError("singlet series initialization requires even n");
      return {(n / 2) & 1, true};
    case InitKind::ground_state:
      break;
  }
  if (spec.model == ModelKind::xy && n > 12) {
    const QuadraticForm form = build_quadratic(spec, /*with_probe=*/false);
    const FermionDiag d = diagonalize(form);
    const double det = d.alpha().determinant() * d.beta().determinant();
    if (std::abs(det) < 1e-12)
      throw EngineError("channel ground-state parity is indefinite (zero mode)");
    return {det < 0 ? 1 : 0, true};
  }
  return state_parity(build_state_vector(init, spec), n);
}

CorrelatorSet build_correlators(InitKind init, const ChainSpec& spec) {
  if (init == InitKind::ground_state) {
    const FermionDiag d = diagonalize(build_quadratic(spec, /*with_probe=*/false));
    return build_correlators(init, spec, d);
  }
  return build_correlators(init, spec, FermionDiag{});
}

CorrelatorSet build_correlators(InitKind init, const ChainSpec& spec,
                                const FermionDiag& channel_diag) {
  validate(spec);
  if (spec.model != ModelKind::xy)
    throw ConfigError("correlator sets exist on the free-fermion path only");
  const int n = spec.n;
  CorrelatorSet c;
  c.cdag = Eigen::MatrixXcd::Zero(n, n);
  c.fdag = Eigen::MatrixXcd::Zero(n, n);
  switch (init) {
    case InitKind::ferro_down:
      break;  // vacuum
    case InitKind::ferro_up:
      c.cdag = Eigen::MatrixXcd::Identity(n, n);
      break;
    case InitKind::neel:
      for (int site = 1; site <= n; site += 2) c.cdag(site - 1, site - 1) = 1.0;
      break;
    case InitKind::singlet_series: {
      if (n % 2 != 0) throw ConfigError("singlet series initialization requires even n");
      for (int p = 0; p < n / 2; ++p) {
        const int a = 2 * p, b = 2 * p + 1;
        c.cdag(a, a) = c.cdag(b, b) = 0.5;
        c.cdag(a, b) = c.cdag(b, a) = -0.5;
      }
      break;
    }
    case InitKind::ground_state: {
      if (channel_diag.sites() != n)
        throw EngineError("ground-state correlators need the channel-only mode set");
      c.cdag = (channel_diag.q.transpose() * channel_diag.q).cast<cd>();
      c.fdag = (channel_diag.q.transpose() * channel_diag.p).cast<cd>();
      break;
    }
  }
  c.cexc = Eigen::MatrixXcd::Identity(n, n) - c.cdag.conjugate();
  c.fann = -c.fdag.conjugate();
  return c;
}

}  // namespace spinbus
