#pragma once

#include <cstddef>
#include <vector>

#include "nbi/classification/training.hpp"

namespace nbi::experiments {

/// Below this many discordant pairs the exact binomial test is used,
/// otherwise the continuity-corrected chi-square approximation.
inline constexpr std::size_t kExactDiscordantLimit = 25;

struct SignificanceResult {
  std::size_t b = 0;  ///< a correct, b wrong
  std::size_t c = 0;  ///< a wrong, b correct
  double p_value = 1.0;
  bool exact = true;
  bool significant = false;
};

/// Two-sided exact binomial p: min(1, 2 * P[Bin(b + c, 1/2) <= min(b, c)]).
double mcnemar_exact_p(std::size_t b, std::size_t c);
/// Chi-square (1 dof) survival of (max(0, |b - c| - 1))^2 / (b + c), clamped to 1.
double mcnemar_chi_square_p(std::size_t b, std::size_t c);

SignificanceResult mcnemar_from_counts(std::size_t b, std::size_t c, double alpha = 0.05);

/// Pairs records by source_id. Throws ValidationError if the two lists do
/// not cover the same source ids exactly once each.
SignificanceResult mcnemar(const std::vector<classification::PredictionRecord>& a,
                           const std::vector<classification::PredictionRecord>& b, double alpha = 0.05);

}  // namespace nbi::experiments
