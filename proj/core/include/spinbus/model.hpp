#pragma once

#include <string>

#include "spinbus/errors.hpp"

namespace spinbus {

enum class ModelKind { xy, xxz };

enum class InitKind { ferro_down, ferro_up, neel, singlet_series, ground_state };

/// The three exchange integrals of the nearest-neighbour Hamiltonian
///   H = sum_l (jx sx_l sx_{l+1} + jy sy_l sy_{l+1} + jz sz_l sz_{l+1}) + h sum_l sz_l.
struct Couplings {
  double jx = 0.0;
  double jy = 0.0;
  double jz = 0.0;
};

/// Channel geometry and Hamiltonian parameters.
///
/// The channel occupies sites 1..n; the probe qubit, when attached, is site 0
/// and couples to site 1 with the same exchange integrals and field. All
/// energies are in units of j, times in units of 1/j (hbar = 1).
struct ChainSpec {
  ModelKind model = ModelKind::xy;
  int n = 2;           ///< number of channel spins, >= 2
  double j = 1.0;      ///< exchange coupling (energy scale)
  double gamma = 0.0;  ///< xy anisotropy; ignored for xxz
  double delta = 0.0;  ///< xxz anisotropy; ignored for xy
  double h = 0.0;      ///< uniform field along z
};

/// Throws ConfigError if the spec violates its invariants.
void validate(const ChainSpec& spec);

Couplings derived_couplings(const ChainSpec& spec);

/// n channel sites, plus one for the probe when attached.
int total_sites(const ChainSpec& spec, bool with_probe);

/// A point of (or inside) the Bloch sphere. |0> is spin up (sz = +1),
/// |1> is spin down.
struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double norm2() const { return x * x + y * y + z * z; }
};

/// Throws EngineError if the vector lies outside the Bloch ball
/// (norm^2 > 1 + 1e-9).
void validate(const BlochVector& v);

struct ModelConfig {
  ChainSpec spec;
  InitKind init = InitKind::ferro_down;
};

/// Parses {"model": "xy"|"xxz", "n": int, "j": float, "gamma": float?,
/// "delta": float?, "h": float, "init": ...}. Throws ConfigError.
ModelConfig parse_model_config(const std::string& json_text);

/// Inverse of parse_model_config; emits only the anisotropy field relevant to
/// the model so that parse(emit(x)) == x bit for bit.
std::string model_config_to_json(const ModelConfig& cfg);

std::string to_string(ModelKind m);
std::string to_string(InitKind k);
ModelKind model_kind_from_string(const std::string& s);
InitKind init_kind_from_string(const std::string& s);

}  // namespace spinbus
