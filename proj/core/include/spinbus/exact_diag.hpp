#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "spinbus/metrics.hpp"
#include "spinbus/model.hpp"

namespace spinbus {

inline constexpr int kMaxEdSites = 24;

/// Full many-body Hamiltonian on m spins, applied matrix-free. Basis states
/// are bit strings with site s on bit s (little endian); bit 0 means spin up
/// (|0>, sz = +1), bit 1 spin down. With the probe attached the probe is
/// site 0 = bit 0. The matrix is real symmetric: sx sx + sy sy terms flip
/// antiparallel pairs with amplitude jx + jy and parallel pairs with jx - jy.
struct ManyBodyOperator {
  int sites = 0;
  Couplings coup;
  double h = 0.0;
  Eigen::VectorXd diagonal;  ///< jz and field part, length 2^sites

  std::size_t dim() const { return std::size_t{1} << sites; }
  void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& in) const;
  void apply_real(const Eigen::VectorXd& in, Eigen::VectorXd& out) const;
  /// Dense matrix; guarded to dim <= 4096.
  Eigen::MatrixXd dense() const;
};

ManyBodyOperator build_hamiltonian(const ChainSpec& spec, bool with_probe);

struct GroundResult {
  Eigen::VectorXcd state;
  double energy = 0.0;
  double gap = 0.0;  ///< estimate of E1 - E0
  bool degenerate = false;
};

/// Lowest eigenpair by restarted Lanczos with full reorthogonalisation inside
/// each cycle; deterministic under the seed. The gap is estimated with a
/// second, deflated run.
GroundResult ground_state(const ManyBodyOperator& op, std::uint64_t seed = 7);

/// Eigendecomposition shared between evolvers (dense path, dim <= 4096).
struct SpectralDecomposition {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
};
std::shared_ptr<const SpectralDecomposition> spectral_decomposition(const ManyBodyOperator& op);

/// Access to |psi(t)> = e^{-iHt} |psi(0)>. Dense evolvers evaluate any t
/// directly from the spectrum; Krylov evolvers step from the nearest cached
/// checkpoint with tolerance 1e-10.
class Evolver {
 public:
  virtual ~Evolver() = default;
  virtual Eigen::VectorXcd at(double t) = 0;
};

inline constexpr std::size_t kDenseEvolveDim = 4096;

std::unique_ptr<Evolver> make_evolver(const ManyBodyOperator& op, Eigen::VectorXcd psi0);
std::unique_ptr<Evolver> make_evolver(std::shared_ptr<const SpectralDecomposition> spec,
                                      Eigen::VectorXcd psi0);

Eigen::VectorXcd evolve(const Eigen::VectorXcd& psi, const ManyBodyOperator& op, double t);

/// tr_rest |a><b| restricted to one site: rho_ij = sum_rest a[(i,rest)] b*[(j,rest)].
Eigen::Matrix2cd reduced_qubit(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                               int site);

/// Channel Choi matrix from two pure-state evolutions |k>_0 (x) |psi_ch>,
/// k = 0, 1; cross terms give E(|0><1|). Reusable across a time series.
class ChannelChoiSeries {
 public:
  ChannelChoiSeries(const ChainSpec& spec, InitKind init);
  ChannelChoiSeries(const ChainSpec& spec, Eigen::VectorXcd channel_state);
  ChoiMatrix at(double t);
  int last_site() const { return n_; }

 private:
  void setup(const ChainSpec& spec, const Eigen::VectorXcd& channel_state);
  int n_ = 0;
  std::unique_ptr<Evolver> ev0_, ev1_;
};

ChoiMatrix channel_choi(const ChainSpec& spec, InitKind init, double t);

/// rho_{0'N} = Choi/2: the pair state produced by sending half of a Bell pair.
Eigen::Matrix4cd pair_state(const ChoiMatrix& c);

/// Debug dump: u64 little-endian length, then (re, im) float64 pairs.
void write_state_dump(const std::string& path, const Eigen::VectorXcd& psi);
Eigen::VectorXcd read_state_dump(const std::string& path);

/// Diagnostics used by the test suites.
double hermiticity_residual(const ManyBodyOperator& op);            // dense, small dims
double commutator_with_total_sz(const ManyBodyOperator& op);        // matrix-free probe
double commutator_with_parity(const ManyBodyOperator& op);          // matrix-free probe
Eigen::VectorXcd apply_total_sz(const ManyBodyOperator& op, const Eigen::VectorXcd& v);
Eigen::VectorXcd apply_parity(int sites, const Eigen::VectorXcd& v);

}  // namespace spinbus
