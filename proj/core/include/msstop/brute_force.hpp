#pragma once

#include <cstdint>
#include <span>

#include "msstop/design.hpp"
#include "msstop/parameters.hpp"

namespace msstop {

/// Largest number of joint hidden paths brute_force_likelihood will enumerate.
inline constexpr double kMaxBruteForcePaths = 1e7;

/// Number of joint recruitment/survival/arrival/state/departure paths.
double hidden_path_count(const StudyDesign& design);

/// Probability of a capture history by summing over every hidden path of the
/// generative process (recruitment period, periods survived, arrival
/// occasion, state sequence, departure). Works from r, beta, s, phi, alpha,
/// Psi and p directly; no HMM matrices are involved. Throws DomainError when
/// the path space exceeds kMaxBruteForcePaths.
double brute_force_likelihood(std::span<const std::uint8_t> history, const ParameterSet& params,
                              const StudyDesign& design);

}  // namespace msstop
