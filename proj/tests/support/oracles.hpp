#pragma once

#include <complex>
#include <random>

#include <Eigen/Dense>

// Brute-force reference constructions shared by the test suites. Everything
// here is deliberately independent of the library's computation paths.
namespace oracles {

using cd = std::complex<double>;

/// Dense Jordan-Wigner annihilator c_j on an n-site register (site j on bit j,
/// bit 0 = spin up = occupied): string sign (-1)^{#occupied below j}, then
/// up -> down at site j.
inline Eigen::MatrixXcd jw_annihilator(int n, int j) {
  const int dim = 1 << n;
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(dim, dim);
  for (int b = 0; b < dim; ++b) {
    if ((b >> j) & 1) continue;  // already empty
    int occ_below = 0;
    for (int i = 0; i < j; ++i)
      if (((b >> i) & 1) == 0) ++occ_below;
    c(b | (1 << j), b) = (occ_below % 2 == 0) ? 1.0 : -1.0;
  }
  return c;
}

struct FermionCorrelators {
  Eigen::MatrixXcd cdag, cexc, fdag, fann;
};

/// All four quadratic correlator matrices of |psi> by explicit dense operator
/// products; n <= 10 or so.
inline FermionCorrelators correlators_from_state(const Eigen::VectorXcd& psi, int n) {
  std::vector<Eigen::MatrixXcd> c(n);
  for (int j = 0; j < n; ++j) c[j] = jw_annihilator(n, j);
  FermionCorrelators out;
  out.cdag.resize(n, n);
  out.cexc.resize(n, n);
  out.fdag.resize(n, n);
  out.fann.resize(n, n);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      out.cdag(j, l) = (psi.adjoint() * c[j].adjoint() * c[l] * psi)(0, 0);
      out.cexc(j, l) = (psi.adjoint() * c[j] * c[l].adjoint() * psi)(0, 0);
      out.fdag(j, l) = (psi.adjoint() * c[j].adjoint() * c[l].adjoint() * psi)(0, 0);
      out.fann(j, l) = (psi.adjoint() * c[j] * c[l] * psi)(0, 0);
    }
  }
  return out;
}

/// Ginibre-normalised random density matrix.
template <int Dim>
Eigen::Matrix<cd, Dim, Dim> random_density(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Matrix<cd, Dim, Dim> a;
  for (int i = 0; i < Dim; ++i)
    for (int j = 0; j < Dim; ++j) a(i, j) = cd(g(rng), g(rng));
  Eigen::Matrix<cd, Dim, Dim> rho = a * a.adjoint();
  rho /= rho.trace();
  return rho;
}

/// Haar-random 2x2 unitary by Gram-Schmidt of Gaussian columns.
inline Eigen::Matrix2cd random_unitary(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Vector2cd a(cd(g(rng), g(rng)), cd(g(rng), g(rng)));
  a.normalize();
  Eigen::Vector2cd b(cd(g(rng), g(rng)), cd(g(rng), g(rng)));
  b -= a.dot(b) * a;
  b.normalize();
  Eigen::Matrix2cd u;
  u.col(0) = a;
  u.col(1) = b;
  return u;
}

/// Largest overlap of rho with a maximally entangled two-qubit state, solved
/// exactly: |psi_me> = (I x R)|Phi+> is R-linear in the four real parameters
/// of R in SU(2), so the overlap is a quadratic form and the maximum is the
/// top eigenvalue.
inline double max_entangled_overlap(const Eigen::Matrix4cd& rho) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::Matrix<cd, 4, 4> basis;  // columns: d psi_me / d q_i
  basis.setZero();
  // psi_me = (a|00> + b|01> - b*|10> + a*|11>)/sqrt(2), q = (Re a, Im a, Re b, Im b)
  basis.col(0) << inv_sqrt2, 0, 0, inv_sqrt2;
  basis.col(1) << cd(0, inv_sqrt2), 0, 0, cd(0, -inv_sqrt2);
  basis.col(2) << 0, inv_sqrt2, -inv_sqrt2, 0;
  basis.col(3) << 0, cd(0, inv_sqrt2), cd(0, inv_sqrt2), 0;
  Eigen::Matrix4d g;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      g(i, j) = (basis.col(i).adjoint() * rho * basis.col(j))(0, 0).real();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(0.5 * (g + g.transpose()));
  return es.eigenvalues().maxCoeff();
}

}  // namespace oracles
