#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "spinbus/errors.hpp"

namespace spinbus {

/// Choi matrix of a single-qubit channel E, in the |ki> basis: the first
/// (most significant) index k labels the input copy, the second the output,
/// so <ki|C|lj> = <i|E(|k><l|)|j>. Equivalently C = sum_{kl} |k><l| (x) E(|k><l|),
/// normalised to trace 2.
struct ChoiMatrix {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
};

struct ChoiCheck {
  double hermiticity = 0.0;  ///< max |C - C^dag|
  double min_eigenvalue = 0.0;
  double trace_deviation = 0.0;  ///< |tr C - 2|
  double tp_deviation = 0.0;     ///< max |tr_out C - I|
  bool ok(double tol) const {
    return hermiticity < tol && min_eigenvalue > -tol && trace_deviation < tol &&
           tp_deviation < tol;
  }
};

ChoiCheck check_choi(const ChoiMatrix& c);

/// Throws EngineError when the matrix is not CPTP within tol.
void require_valid_choi(const ChoiMatrix& c, double tol = 1e-9);

/// M_mn = tr[sigma_m E(sigma_n)] = (-1)^(n+1) tr[C sigma_n (x) sigma_m],
/// m, n = 1..3. Traceless inputs make the affine shift of the channel drop
/// out, so M captures the linear part only.
Eigen::Matrix3d m_matrix(const ChoiMatrix& c);

/// Optimal average fidelity from the M matrix:
/// F = 1/2 + (m1 + m2 + sign(det M) m3)/12 with singular values m1 >= m2 >= m3.
/// |det M| < 1e-14 is treated as sign +1 (m3 vanishes there anyway).
double oaf(const Eigen::Matrix3d& m);
double oaf(const ChoiMatrix& c);

/// Applies the channel encoded by the Choi matrix to a single-qubit state.
Eigen::Matrix2cd apply_channel(const ChoiMatrix& c, const Eigen::Matrix2cd& rho);

/// Wootters concurrence of a two-qubit density matrix. Eigenvalues of
/// rho (sy x sy) rho* (sy x sy) more negative than -1e-10 raise EngineError;
/// smaller excursions are clipped to zero.
double wootters_concurrence(const Eigen::Matrix4cd& rho);

/// Largest overlap of rho with a maximally entangled state:
/// (1 + t1 + t2 - sign(det T) t3)/4, T_mn = tr[rho sigma_m (x) sigma_n].
double singlet_fraction(const Eigen::Matrix4cd& rho);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte-Carlo estimate of the Bloch-sphere average of
/// <psi| R E(|psi><psi|) R^dag |psi>, i.e. the average fidelity after the
/// correction unitary R is applied to the received state. Sampling uses a
/// counter-based generator keyed on (seed, sample index), so the estimate is
/// bit-identical for any thread count or partitioning.
MonteCarloEstimate haar_average_fidelity(const ChoiMatrix& c,
                                         const Eigen::Matrix2cd& rotation,
                                         std::size_t samples, std::uint64_t seed,
                                         int threads = 1);

/// Exact value of the same average, via the M matrix of the corrected channel.
double rotation_average_fidelity(const ChoiMatrix& c, const Eigen::Matrix2cd& rotation);

struct TimeWindow {
  double t_max = 0.0;
  double dt = 0.0;
  double refine_tol = 0.0;      ///< absolute tolerance on t for the refinement
  double rise_threshold = 1e-3; ///< peak must exceed f(0) by this much
};

/// Scan window sized to the ballistic crossing time of an n-site channel:
/// t_max = 1.5 (n+1)/(2j), dt = 0.1/j, refine_tol = 1e-4/j.
TimeWindow default_time_window(int n, double j);

struct Peak {
  double t_star = 0.0;
  double value = 0.0;
};

struct PeakScan {
  bool found = false;
  Peak peak;        ///< first qualifying peak when found, else the global sampled max
};

/// Locates the first local maximum of f on [0, t_max] exceeding
/// f(0) + rise_threshold, refined by golden-section search on the bracketing
/// interval. When no sampled peak qualifies, `found` is false and `peak`
/// holds the global maximum of the sampled series.
PeakScan scan_first_peak(const std::function<double(double)>& f, const TimeWindow& w);

/// Like scan_first_peak but throws NoPeakError when nothing qualifies.
Peak arrival_time(const std::function<double(double)>& f, const TimeWindow& w);

namespace pauli {
Eigen::Matrix2cd x();
Eigen::Matrix2cd y();
Eigen::Matrix2cd z();
Eigen::Matrix2cd id();
/// Index 1..3 -> sigma_x, sigma_y, sigma_z.
Eigen::Matrix2cd sigma(int n);
/// Kronecker product; the first factor owns the most significant index.
Eigen::Matrix4cd kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b);
}  // namespace pauli

}  // namespace spinbus
