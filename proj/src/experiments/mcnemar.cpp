#include "nbi/experiments/mcnemar.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nbi/common/error.hpp"

namespace nbi::experiments {

double mcnemar_exact_p(std::size_t b, std::size_t c) {
  const std::size_t n = b + c;
  if (n == 0) return 1.0;
  const std::size_t k = std::min(b, c);
  // Binomial tail in log space; exact enough for any n used here.
  double tail = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    const double log_term = std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(i) + 1) -
                            std::lgamma(static_cast<double>(n - i) + 1) - static_cast<double>(n) * std::log(2.0);
    tail += std::exp(log_term);
  }
  return std::min(1.0, 2.0 * tail);
}

double mcnemar_chi_square_p(std::size_t b, std::size_t c) {
  const std::size_t n = b + c;
  if (n == 0) return 1.0;
  const double diff = std::max(0.0, std::fabs(static_cast<double>(b) - static_cast<double>(c)) - 1.0);
  const double statistic = diff * diff / static_cast<double>(n);
  return std::min(1.0, std::erfc(std::sqrt(statistic / 2.0)));
}

SignificanceResult mcnemar_from_counts(std::size_t b, std::size_t c, double alpha) {
  SignificanceResult r;
  r.b = b;
  r.c = c;
  r.exact = b + c < kExactDiscordantLimit;
  r.p_value = r.exact ? mcnemar_exact_p(b, c) : mcnemar_chi_square_p(b, c);
  r.significant = r.p_value < alpha;
  return r;
}

SignificanceResult mcnemar(const std::vector<classification::PredictionRecord>& a,
                           const std::vector<classification::PredictionRecord>& b, double alpha) {
  std::map<std::string, bool> a_correct;
  for (const auto& r : a)
    if (!a_correct.emplace(r.source_id, r.correct()).second)
      throw ValidationError("duplicate source_id '" + r.source_id + "' in first record set");
  if (a.size() != b.size()) throw ValidationError("record sets cover different numbers of patches");
  std::size_t nb = 0, nc = 0;
  std::map<std::string, bool> seen;
  for (const auto& r : b) {
    const auto it = a_correct.find(r.source_id);
    if (it == a_correct.end()) throw ValidationError("source_id '" + r.source_id + "' missing from first record set");
    if (!seen.emplace(r.source_id, true).second)
      throw ValidationError("duplicate source_id '" + r.source_id + "' in second record set");
    if (it->second && !r.correct()) ++nb;
    if (!it->second && r.correct()) ++nc;
  }
  return mcnemar_from_counts(nb, nc, alpha);
}

}  // namespace nbi::experiments
