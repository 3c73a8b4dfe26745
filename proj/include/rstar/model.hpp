#pragma once

// Shared parameter and result records for the narrow-resonance few-body solvers.
//
// Units: hbar = 1 and the atomic mass M = 1.  A momentum k is an inverse
// length, a single atom of wavenumber k carries kinetic energy k^2/2, and a
// bound state of binding wavenumber q has energy E = -q^2.  The length unit
// is left to the caller; R* = 1 is the natural choice.

#include <stdexcept>
#include <string>

namespace rstar {

enum class ErrorCode {
  NonFinite,
  NegativeRange,
  RStarRequired,
  EpsilonZero,
  PoleAtZero,
  NoBoundState,
  BadRange,
  NoSignChange,
  MaxIterations,
  ThresholdViolation,
  FewerLevelsFound,
  NotConverged,
  WindowTooNarrow,
};

const char* to_string(ErrorCode code);

/// Typed failure raised by every solver; `name()` is the stable identifier
/// printed by the command-line front end.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const char* name() const noexcept { return to_string(code_); }

 private:
  ErrorCode code_;
};

/// The interaction knobs: inverse scattering length, width parameter R* and
/// the Gaussian cutoff range of the inter-channel coupling.
struct ResonanceParams {
  double inv_a = 0.0;
  double r_star = 1.0;
  double epsilon = 0.0;

  bool operator==(const ResonanceParams&) const = default;
};

enum class SolverKind {
  TwoBody,      // closed forms, R* >= 0
  Regularized,  // finite-epsilon amplitude, needs epsilon > 0 and R* > 0
  ThreeBody,    // trimer solver, needs R* > 0
};

/// Returns `p` unchanged when it is admissible for `kind`, throws otherwise.
ResonanceParams validate_params(const ResonanceParams& p, SolverKind kind);

/// Two-body bound state in closed form.
struct DimerSolution {
  ResonanceParams params;
  double kappa = 0.0;
  double energy = 0.0;
  double n_mol = 0.0;
  double c4 = 0.0;
  double c6 = 0.0;

  bool operator==(const DimerSolution&) const = default;
};

struct TrimerLevel {
  int index = 0;
  double q = 0.0;
  double energy = 0.0;

  bool operator==(const TrimerLevel&) const = default;
};

}  // namespace rstar
