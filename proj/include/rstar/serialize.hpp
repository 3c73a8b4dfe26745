#pragma once

// JSON forms of the parameter and result records.  Field names follow the
// struct members.  Doubles are written in shortest round-trip form, so a
// write/read cycle reproduces every value bit for bit.

#include <string>

#include <json.hpp>

#include "rstar/model.hpp"
#include "rstar/numerics.hpp"
#include "rstar/threebody.hpp"

namespace rstar {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ResonanceParams, inv_a, r_star, epsilon)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DimerSolution, params, kappa, energy, n_mol, c4, c6)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TrimerLevel, index, q, energy)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RadialGrid, nodes, weights, k_min, k_max)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(StmSolution, params, level, d_values, n_mol, n_open, k_mol,
                                   residual)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(MomentumDistribution, k_samples, k_weights, sample_range,
                                   values, c4_fit, c6_fit, fit_window, norm_integral,
                                   sum_rule_residual, c6_contact_spectator, c6_contact_pair_cm)

/// Serializes `j`, refusing NaN and infinities (NonFinite) instead of
/// emitting null.
std::string dump_finite(const nlohmann::json& j, int indent = -1);

/// "%.17g" rendering used for every CSV field.
std::string format_double(double x);

}  // namespace rstar
