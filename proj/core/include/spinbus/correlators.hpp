#pragma once

#include <Eigen/Dense>

namespace spinbus {

/// Quadratic expectation values of the channel state in the fermion picture,
/// indexed by channel site (site j maps to row/column j-1):
///   cdag(j,l) = <c_j^dag c_l>,  cexc(j,l) = <c_j c_l^dag>,
///   fdag(j,l) = <c_j^dag c_l^dag>,  fann(j,l) = <c_j c_l>.
/// The fermions follow c_l = prod_{m<l}(-sz_m) s^-_l with spin up occupied;
/// for channel-only states the string is anchored at site 1.
struct CorrelatorSet {
  Eigen::MatrixXcd cdag;
  Eigen::MatrixXcd cexc;
  Eigen::MatrixXcd fdag;
  Eigen::MatrixXcd fann;
  int n() const { return static_cast<int>(cdag.rows()); }
};

struct CorrelatorCheck {
  double hermiticity = 0.0;     ///< max |cdag - cdag^dag|
  double exchange = 0.0;        ///< max |cexc - (I - cdag*)|
  double antisymmetry = 0.0;    ///< max |fdag + fdag^T|
  double conjugation = 0.0;     ///< max |fann + fdag*|
  double occupation_low = 0.0;  ///< -min eigenvalue of cdag (0 when in range)
  double occupation_high = 0.0; ///< max eigenvalue of cdag minus 1 (0 when in range)
  bool ok(double tol) const {
    return hermiticity < tol && exchange < tol && antisymmetry < tol &&
           conjugation < tol && occupation_low < tol && occupation_high < tol;
  }
};

CorrelatorCheck check_correlators(const CorrelatorSet& c);

/// Parity of the channel state: eigenvalue (-1)^p of prod_k(-sz_k).
/// `definite` must hold before the state can drive the single-qubit channel.
struct ParityTag {
  int p = 0;
  bool definite = false;
};

}  // namespace spinbus
