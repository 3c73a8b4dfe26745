#include "rstar/model.hpp"

#include <cmath>

namespace rstar {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NegativeRange: return "NegativeRange";
    case ErrorCode::RStarRequired: return "RStarRequired";
    case ErrorCode::EpsilonZero: return "EpsilonZero";
    case ErrorCode::PoleAtZero: return "PoleAtZero";
    case ErrorCode::NoBoundState: return "NoBoundState";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::ThresholdViolation: return "ThresholdViolation";
    case ErrorCode::FewerLevelsFound: return "FewerLevelsFound";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::WindowTooNarrow: return "WindowTooNarrow";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

ResonanceParams validate_params(const ResonanceParams& p, SolverKind kind) {
  if (!std::isfinite(p.inv_a) || !std::isfinite(p.r_star) || !std::isfinite(p.epsilon)) {
    throw Error(ErrorCode::NonFinite, "resonance parameters must be finite");
  }
  if (p.r_star < 0.0 || p.epsilon < 0.0) {
    throw Error(ErrorCode::NegativeRange, "r_star and epsilon must be >= 0");
  }
  switch (kind) {
    case SolverKind::TwoBody:
      break;
    case SolverKind::Regularized:
      if (p.epsilon == 0.0) {
        throw Error(ErrorCode::EpsilonZero, "regularized amplitude needs epsilon > 0");
      }
      if (p.r_star == 0.0) {
        throw Error(ErrorCode::RStarRequired, "regularized amplitude needs r_star > 0");
      }
      break;
    case SolverKind::ThreeBody:
      if (p.r_star == 0.0) {
        throw Error(ErrorCode::RStarRequired, "three-body solver needs r_star > 0");
      }
      break;
  }
  return p;
}

}  // namespace rstar
