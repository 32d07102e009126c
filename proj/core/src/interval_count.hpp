#pragma once

// Internal helper: number of n with pos + n*period inside an interval.
// A double prefilter decides the generic case without touching exact
// arithmetic; whenever a lattice value sits within the guard band of an
// endpoint, the supplied exact fallback decides instead. Every returned
// count is therefore decision-exact.

#include <cmath>
#include <cstdint>

namespace bcz::detail {

template <class ExactFn>
std::int64_t interval_hits(double pos_f, double period_f, double lo_f, double hi_f,
                           ExactFn&& exact_count) {
  constexpr double kBand = 1e-7;  // relative to the period
  double q_hi = (hi_f - pos_f) / period_f;
  double q_lo = (lo_f - pos_f) / period_f;
  double r_hi = q_hi - std::floor(q_hi);
  double r_lo = q_lo - std::floor(q_lo);
  if (r_hi > kBand && r_hi < 1.0 - kBand && r_lo > kBand && r_lo < 1.0 - kBand) {
    // Away from every boundary the closure convention cannot matter.
    auto c = static_cast<std::int64_t>(std::floor(q_hi)) -
             static_cast<std::int64_t>(std::floor(q_lo));
    return c > 0 ? c : 0;
  }
  return exact_count();
}

}  // namespace bcz::detail
