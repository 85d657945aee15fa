#pragma once

#include <Eigen/Dense>

#include "spinbus/correlators.hpp"
#include "spinbus/free_fermion.hpp"
#include "spinbus/model.hpp"

namespace spinbus {

/// Channel-only state vector on n sites (site j on bit j-1, bit 0 = spin up).
/// Ground states come from the exact-diagonalisation solver with a fixed seed;
/// an exactly degenerate xxz ground manifold is resolved deterministically in
/// favour of the highest total magnetisation. Degenerate xy ground states are
/// rejected (the parity would be indefinite).
Eigen::VectorXcd build_state_vector(InitKind init, const ChainSpec& spec);

/// Parity eigenvalue (-1)^p of prod_k(-sz_k) on the channel state. Product
/// and fixed-number states are counted directly; xy ground states at n > 12
/// use the gauge-invariant sign det(alpha) det(beta) = sign det(A - B) of the
/// channel-only quadratic form, and the expectation value otherwise.
ParityTag channel_parity(InitKind init, const ChainSpec& spec);

/// Quadratic correlators of the channel state. The ground-state entries come
/// from the channel-only mode decomposition: cdag = Q^T Q, cexc = P^T P,
/// fdag = Q^T P, fann = P^T Q. Only xy specs have a correlator representation.
CorrelatorSet build_correlators(InitKind init, const ChainSpec& spec);
CorrelatorSet build_correlators(InitKind init, const ChainSpec& spec,
                                const FermionDiag& channel_diag);

/// Parity of an explicit state vector: expectation of prod(-sz); throws
/// EngineError when |<P>| deviates from 1 beyond 1e-10 (indefinite parity).
ParityTag state_parity(const Eigen::VectorXcd& psi, int sites);

}  // namespace spinbus
