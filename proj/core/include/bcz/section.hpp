#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "bcz/heights.hpp"
#include "bcz/rng.hpp"

namespace bcz {

/// A point (s,t) of the section chart Omega_h:
/// 0 < s <= h <= 1 and 1 - alpha*s < t <= 1.
struct SectionPoint {
  SurfacePtr surface;
  QuadVal s, t, h;
  bool exact = true;
};

SectionPoint make_section_point(SurfacePtr surface, QuadVal s, QuadVal t, QuadVal h = QuadVal(1),
                                bool exact = true);
bool in_omega(const SurfacePtr& surface, const QuadVal& s, const QuadVal& t, const QuadVal& h);

/// Shared, monotonically growing height table for one lattice. ensure()
/// returns an immutable snapshot whose cutoff is at least min_cutoff;
/// growth publishes a new table, never mutates a published one.
class LatticeCache {
 public:
  explicit LatticeCache(SurfacePtr surface, bool with_witnesses = true);
  std::shared_ptr<const HeightTable> ensure(double min_cutoff);
  std::shared_ptr<const HeightTable> snapshot() const;
  const SurfacePtr& surface() const { return surface_; }

 private:
  SurfacePtr surface_;
  bool with_witnesses_;
  mutable std::mutex mutex_;
  std::shared_ptr<const HeightTable> table_;
};

struct ReturnRecord {
  SectionPoint start;
  QuadVal return_time;  // slope of the minimal-slope strip vector
  SectionPoint next;
  Vec2 witness;  // the Lambda vector realizing the return
};

/// Geometric return map of the unstable horocycle flow on Omega_h.
ReturnRecord return_map(const SectionPoint& p, LatticeCache& cache);

/// Closed form of the torus return map T(x,y) = (y, -x + floor((1+x)/y) y).
std::pair<Rational, Rational> bcz_classical(const Rational& x, const Rational& y);

/// Chart point of g*Gamma: s = length of the unique short horizontal of
/// g*Lambda, t reduced modulo the parabolic into (1 - alpha*s, 1].
SectionPoint normal_form(const Mat2& g, const SurfacePtr& surface, LatticeCache& cache);

/// The conjugation map at level a: chart point of diag(a, 1/a) * p, in Omega_a.
SectionPoint conjugate_section(const SectionPoint& p, const QuadVal& a);

struct OrbitTrace {
  std::vector<ReturnRecord> records;
  std::vector<QuadVal> cumulative_times;
  std::vector<double> cumulative_times_f;
};

OrbitTrace orbit(const SectionPoint& p, int n_steps, LatticeCache& cache);

struct ExcursionProfile {
  std::int64_t count = 0;   // visits to L \ L_h over the first N level-h returns
  bool flag = false;        // count == 1
  std::int64_t box_count = 0;  // lattice points with h < x <= 1, 0 < y < s_N x
  bool flag_box = false;
  QuadVal s_n;              // cumulative time of the N-th level-h return
};

ExcursionProfile excursion_profile(const SectionPoint& p, int n_returns, const QuadVal& h,
                                   LatticeCache& cache);

// ---- float lane (Monte-Carlo bulk work; exact lane is the oracle) ----

struct FloatPoint {
  double s, t;
};

struct FloatReturn {
  double s, t, r;
};

/// Double-precision return map with a guard band: returns nullopt whenever
/// a boundary predicate lands inside the band (caller resamples).
std::optional<FloatReturn> return_map_f(const HeightTable& table, double s, double t, double h,
                                        double band = 1e-12);

/// Uniform sampler on {(s,t) in Omega : s_lo <= s <= s_hi}; resamples
/// points within the guard band of any chart boundary.
class OmegaSampler {
 public:
  OmegaSampler(SurfacePtr surface, std::uint64_t seed, std::uint64_t stream, double s_lo = 0.0,
               double s_hi = 1.0, double band = 1e-12);
  FloatPoint next();

 private:
  SurfacePtr surface_;
  CounterRng rng_;
  double s_lo_, s_hi_, band_;
};

}  // namespace bcz
