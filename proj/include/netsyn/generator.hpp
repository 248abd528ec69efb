#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netsyn/synthesis.hpp"

namespace netsyn {

enum class GenerationTarget { Stable, Unstable, Stabilizable, Dissipative, Dissipativatable };

const char* to_string(GenerationTarget t);
GenerationTarget generation_target_from_string(const std::string& s);

struct GeneratorOptions {
  int subsystems = 5;
  Index dim = 3;          // states per subsystem; also inputs, outputs, disturbances
  double density = 0.4;   // probability of each ordered pair j -> i
  GenerationTarget target = GenerationTarget::Stable;
  std::uint64_t seed = 1;
  /// Supply rate of the dissipative targets; L2 gain 10 when absent.
  std::optional<QsrSpec> qsr;
  double coupling_scale = 1.0;  // standard deviation of coupling entries
  int max_attempts = 10;
  SynthesisOptions synthesis;
};

struct GeneratedSystem {
  NetworkedSystem system;
  std::optional<QsrSpec> qsr;
  /// Block-diagonal certificate of the certified targets (P_ii or M_ii).
  std::vector<MatrixXd> certificate;
  int attempts = 0;
  /// Unstable target: coupling scale at which stability is lost.
  double crossing_scale = 0.0;
};

/// Draws A_ii = G - (max Re lambda(G) + margin) I with margin uniform in
/// [0.5, 2] and Gaussian couplings on a random edge set, then certifies the
/// target: a synthesis run with every off-diagonal pair Designable (Stable,
/// Dissipative), a gain synthesis with couplings fixed (Stabilizable,
/// Dissipativatable), or scaling the couplings to 1.25 times the stability
/// crossing (Unstable). Redraws up to max_attempts times, then throws
/// GenerationError. Deterministic in the seed.
GeneratedSystem generate_system(const GeneratorOptions& opt);

}  // namespace netsyn
