#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

#include "spinbus/correlators.hpp"
#include "spinbus/metrics.hpp"
#include "spinbus/model.hpp"

namespace spinbus {

/// Quadratic fermion Hamiltonian H = sum c^dag A c + (1/2)(c^dag B c^dag - c B c),
/// with A symmetric and B antisymmetric. Site indices follow the chain labels:
/// with the probe attached, row/column 0 is the probe and 1..n the channel.
/// A carries j on the hopping off-diagonals and 2h on the diagonal (the field
/// sz = 2 c^dag c - 1 contributes twice its spin value); B carries j*gamma.
struct QuadraticForm {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  int sites() const { return static_cast<int>(a.rows()); }
};

/// Builds the fermionised chain. Rejects xxz specs (quartic after the mapping).
QuadraticForm build_quadratic(const ChainSpec& spec, bool with_probe);

/// Mode decomposition d_k = sum_l P_kl c_l + Q_kl c_l^dag obtained from the
/// singular value decomposition A - B = alpha^T E beta, alpha = P + Q,
/// beta = P - Q. Energies are nonnegative and sorted descending; all physical
/// outputs are invariant under the residual sign/degeneracy gauge freedom.
struct FermionDiag {
  Eigen::VectorXd e;  ///< mode energies, descending, >= 0
  Eigen::MatrixXd p;  ///< row = mode, column = site
  Eigen::MatrixXd q;
  Eigen::MatrixXd alpha() const { return p + q; }
  Eigen::MatrixXd beta() const { return p - q; }
  int sites() const { return static_cast<int>(e.size()); }
};

FermionDiag diagonalize(const QuadraticForm& form);

struct FermionDiagCheck {
  double canonical = 0.0;       ///< max |PP^T + QQ^T - I|, |PQ^T + QP^T|
  double orthogonality = 0.0;   ///< max deviation of alpha, beta from orthogonal
  double reconstruction = 0.0;  ///< max |A - B - alpha^T E beta|
  bool ok(double tol) const {
    return canonical < tol && orthogonality < tol && reconstruction < tol;
  }
};

FermionDiagCheck check_diag(const QuadraticForm& form, const FermionDiag& d);

/// Heisenberg-picture propagators c_l(t) = sum_n U_ln(t) c_n + W_ln(t) c_n^dag:
/// U = P^T e^{-itE} P + Q^T e^{+itE} Q, W = P^T e^{-itE} Q + Q^T e^{+itE} P.
struct Propagator {
  double t = 0.0;
  Eigen::MatrixXcd u;
  Eigen::MatrixXcd w;
};

Propagator propagate(const FermionDiag& d, double t);

/// Row of U(t), W(t) for the last site only; all channel read-outs need just
/// this row, at O(M^2) instead of O(M^3).
struct PropagatorRow {
  double t = 0.0;
  Eigen::VectorXcd u;
  Eigen::VectorXcd w;
};

PropagatorRow propagate_last_row(const FermionDiag& d, double t);

/// U_{N0}(t) and W_{N0}(t) alone, O(M).
std::complex<double> transfer_amplitude(const FermionDiag& d, double t);
std::complex<double> pair_amplitude(const FermionDiag& d, double t);

/// The five channel parameters at one time. phi_u = arg U_{N0} + p*pi and
/// phi_w = -arg W_{N0} + (p+1)*pi, both wrapped to (-pi, pi]; p is the channel
/// parity. The interference term a is the only initial-state-dependent entry.
struct ChannelSnapshot {
  double t = 0.0;
  double u = 0.0;
  double w = 0.0;
  double phi_u = 0.0;
  double phi_w = 0.0;
  double a = 0.0;
  int parity = 0;
};

/// Contraction of the last-site propagator row with the channel correlators.
/// The imaginary residual must stay below 1e-8 (larger values signal a broken
/// correlator set) and is discarded after the check.
double interference_term(const PropagatorRow& row, const CorrelatorSet& corr);

ChannelSnapshot snapshot(const PropagatorRow& row, const CorrelatorSet& corr, int parity);
ChannelSnapshot snapshot(const FermionDiag& d, const CorrelatorSet& corr, int parity,
                         double t);

/// Affine Bloch-sphere map of the channel:
///   (nx', ny') from the u/w rotation-contraction pair,
///   nz' = nz (u^2 - w^2) + u^2 + w^2 + 2a - 1.
BlochVector bloch_map(const BlochVector& n, const ChannelSnapshot& s);

/// Choi matrix assembled from the snapshot (X-shaped: diagonal plus the
/// u and w coherences).
ChoiMatrix choi_xy(const ChannelSnapshot& s);

/// Closed form F = 1/2 + |u^2 - w^2|/6 + max(u, w)/3; independent of a.
double oaf_xy(const ChannelSnapshot& s);

/// Correction unitary that attains oaf_xy when applied to the received state
/// as rho -> R rho R^dag:  e^{-i phi_u sz / 2} for u > w,
/// e^{i pi sx / 2} e^{i phi_w sz / 2} for u < w. Ties take the u branch.
Eigen::Matrix2cd optimal_rotation_xy(const ChannelSnapshot& s);

/// max{0, C(u,w), C(w,u)} with C(x,y) = x - sqrt((y^2 + a)(1 - x^2 - a));
/// the Wootters concurrence of Choi/2 in closed form.
double concurrence_xy(const ChannelSnapshot& s);

/// Closed-form modes of the isotropic (gamma = 0) chain of m = n+1 sites:
///   E_k = 2 j cos(pi (k+1)/(n+2)) + 2h,
///   P_kl = sqrt(2/(n+2)) sin(pi (k+1)(l+1)/(n+2)),  Q = 0.
/// Energies may be negative here; this gauge and the SVD gauge give the same
/// propagators.
struct XxModes {
  Eigen::VectorXd e;
  Eigen::MatrixXd p;
};

XxModes xx_exact_modes(int n, double j, double h);

/// Bessel approximation of u(t) for the isotropic chain at h = 0:
/// |J_n(b) + 2 J_{n+2}(b) + J_{n+4}(b)|, b = 2jt.
double xx_asymptotic_u(int n, double j, double t);

/// Large-n first-peak estimate: u* = 2.700 n^{-1/3} - 4.804 / n at
/// 2j t* = n + 1.019 (n/2)^{1/3}.
struct XxPeak {
  double t_star = 0.0;
  double u_star = 0.0;
};

XxPeak xx_peak_estimate(int n, double j);

/// Debug export: {"t": ..., "u": [[[re, im], ...], ...], "w": ...}.
std::string propagator_to_json(const Propagator& prop);

}  // namespace spinbus
