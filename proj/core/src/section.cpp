#include "bcz/section.hpp"

#include <cmath>
#include <stdexcept>

#include "interval_count.hpp"

namespace bcz {

bool in_omega(const SurfacePtr& surface, const QuadVal& s, const QuadVal& t, const QuadVal& h) {
  if (s.sign() <= 0 || quad_cmp(s, h) > 0) return false;
  if (quad_cmp(h, QuadVal(1)) > 0) return false;
  QuadVal lower = QuadVal(1) - surface->alpha * s;
  return quad_cmp(t, lower) > 0 && quad_cmp(t, QuadVal(1)) <= 0;
}

SectionPoint make_section_point(SurfacePtr surface, QuadVal s, QuadVal t, QuadVal h, bool exact) {
  if (!in_omega(surface, s, t, h))
    throw DomainError("section point outside Omega_h: need 0 < s <= h <= 1 and 1 - alpha*s < t <= 1");
  return SectionPoint{std::move(surface), std::move(s), std::move(t), std::move(h), exact};
}

LatticeCache::LatticeCache(SurfacePtr surface, bool with_witnesses)
    : surface_(std::move(surface)), with_witnesses_(with_witnesses) {}

std::shared_ptr<const HeightTable> LatticeCache::ensure(double min_cutoff) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (table_ && table_->cutoff_f >= min_cutoff) return table_;
  }
  double target = 8.0;
  while (target < min_cutoff) target *= 2.0;
  auto built = std::make_shared<HeightTable>(
      heights_table_direct(surface_, QuadVal(static_cast<long long>(std::llround(target))),
                           /*with_reps=*/true, with_witnesses_));
  std::lock_guard<std::mutex> lock(mutex_);
  if (!table_ || table_->cutoff_f < built->cutoff_f) table_ = built;
  return table_;
}

std::shared_ptr<const HeightTable> LatticeCache::snapshot() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return table_;
}

std::pair<Rational, Rational> bcz_classical(const Rational& x, const Rational& y) {
  if (x.sign() <= 0 || x > 1 || y.sign() <= 0 || y > 1 || x + y <= 1)
    throw DomainError("bcz_classical: need 0 < x <= 1, 0 < y <= 1, x + y > 1");
  Rational k(floor_rat((1 + x) / y));
  return {y, -x + k * y};
}

namespace {

struct StripBest {
  bool found = false;
  QuadVal zeta;       // lattice height of the winning vector
  QuadVal x_landing;  // x-coordinate of p(v), equals the next s
  QuadVal lattice_x;  // x-coordinate of the winning Lambda vector
  const HeightRep* rep = nullptr;
  Int shift = 0;
};

// Scans heights for the minimal-slope vector of p_{s,t}Lambda in the strip
// (0, h] x (0, inf). Returns false when the table cutoff cannot certify
// optimality yet (caller grows the table).
bool scan_strip(const HeightTable& table, const QuadVal& s, const QuadVal& t, const QuadVal& h,
                StripBest& best) {
  const QuadVal& alpha = table.surface->alpha;
  for (const HeightEntry& e : table.entries) {
    if (best.found) {
      // Heights with zeta * x_landing >= h * zeta_best cannot beat the
      // current slope zeta_best / (s * x_landing_best).
      if (quad_cmp(e.zeta * best.x_landing, h * best.zeta) >= 0) return true;
    }
    QuadVal period = alpha * e.zeta * s;
    for (const HeightRep& rep : e.reps) {
      QuadVal pos = s * rep.x + t * e.zeta;
      Int n = floor_q((h - pos) / period);
      QuadVal landing = pos + QuadVal(Rational(n)) * period;
      if (landing.sign() <= 0) continue;
      if (!best.found) {
        best = StripBest{true, e.zeta, landing, rep.x + alpha * e.zeta * QuadVal(Rational(n)),
                         &rep, n};
        continue;
      }
      int cmp = quad_cmp(e.zeta * best.x_landing, best.zeta * landing);
      if (cmp < 0) {
        best = StripBest{true, e.zeta, landing, rep.x + alpha * e.zeta * QuadVal(Rational(n)),
                         &rep, n};
      } else if (cmp == 0) {
        throw std::logic_error("return_map: two strip vectors with equal slope (Lambda not visible?)");
      }
    }
  }
  if (!best.found) return false;
  // Certified only if every height that could beat the best is in the table.
  QuadVal needed = h * best.zeta / best.x_landing;
  return quad_cmp(table.cutoff, needed) >= 0;
}

}  // namespace

ReturnRecord return_map(const SectionPoint& p, LatticeCache& cache) {
  const SurfacePtr& surface = p.surface;
  const QuadVal& alpha = surface->alpha;
  double guess = 8.0;
  for (int growth = 0; growth <= 10; ++growth) {
    auto table = cache.ensure(guess);
    if (!table->with_witnesses)
      throw WindowError("return_map: cache must track witnesses");
    StripBest best;
    if (scan_strip(*table, p.s, p.t, p.h, best)) {
      QuadVal r = best.zeta / (p.s * best.x_landing);
      // gamma maps (1,0) to the winning vector; the reduced chart point of
      // u_r p_{s,t} Gamma reads off the first row of p_{s,t} * gamma.
      Mat2 gamma = best.rep->witness;
      if (!best.shift.is_zero())
        gamma = mat_mul(parabolic_mat(alpha * QuadVal(Rational(best.shift))), gamma);
      QuadVal s_next = best.x_landing;
      QuadVal t_raw = p.s * gamma.e12 + p.t * gamma.e22;
      QuadVal period = alpha * s_next;
      Int k = ceil_q((t_raw - QuadVal(1)) / period);
      QuadVal t_next = t_raw - QuadVal(Rational(k)) * period;
      SectionPoint next{surface, s_next, t_next, p.h, p.exact};
      if (!in_omega(surface, next.s, next.t, next.h))
        throw std::logic_error("return_map: next point left Omega_h");
      return ReturnRecord{p, r, std::move(next), Vec2{best.lattice_x, best.zeta}};
    }
    guess = std::max(guess * 2.0, table->cutoff_f * 2.0);
  }
  throw WindowError("return_map: window growth cap exceeded (10 doublings)");
}

SectionPoint normal_form(const Mat2& g, const SurfacePtr& surface, LatticeCache& cache) {
  if (mat_det(g) != QuadVal(1)) throw DomainError("normal_form: matrix must have determinant 1");
  const QuadVal& alpha = surface->alpha;

  QuadVal s_len;   // length of the unique positive horizontal of g*Lambda
  QuadVal t_raw;

  if (g.e21.is_zero()) {
    // g already fixes the horizontal direction; w = +-(1,0).
    int sgn = g.e11.sign();
    s_len = sgn < 0 ? -g.e11 : g.e11;
    t_raw = sgn < 0 ? -g.e12 : g.e12;
  } else {
    // w = x0 * g^{-1} (1,0) for the unknown horizontal length x0 <= 1, so
    // |w_y| <= |g21|. Scan table heights for the Lambda vector on that ray.
    Vec2 u{g.e22, -g.e21};  // first column of g^{-1}
    QuadVal bound = abs_q(g.e21);
    auto table = cache.ensure(to_double(bound) + 1.0);
    if (!table->with_witnesses) throw WindowError("normal_form: cache must track witnesses");
    const HeightRep* hit = nullptr;
    Int hit_shift = 0;
    for (const HeightEntry& e : table->entries) {
      if (quad_cmp(e.zeta, bound) > 0) break;
      // Vector of height zeta on the line R*u.
      QuadVal wx = u.x * e.zeta / u.y;
      QuadVal period = alpha * e.zeta;
      Int k = floor_q(wx / period);
      QuadVal reduced = wx - QuadVal(Rational(k)) * period;
      for (const HeightRep& rep : e.reps) {
        int cmp = quad_cmp(rep.x, reduced);
        if (cmp == 0) {
          hit = &rep;
          hit_shift = k;
          break;
        }
        if (cmp > 0) break;
      }
      if (hit != nullptr) break;
    }
    if (hit == nullptr)
      throw WindowError("normal_form: not horizontally short (at this window size)");
    Mat2 gamma = hit->witness;
    if (!hit_shift.is_zero())
      gamma = mat_mul(parabolic_mat(alpha * QuadVal(Rational(hit_shift))), gamma);
    // g*gamma maps (1,0) to the horizontal (x0, 0); flip sign to make x0 > 0.
    Mat2 m = mat_mul(g, gamma);
    if (!m.e21.is_zero()) throw std::logic_error("normal_form: reduction failed");
    int sgn = m.e11.sign();
    s_len = sgn < 0 ? -m.e11 : m.e11;
    t_raw = sgn < 0 ? -m.e12 : m.e12;
  }

  if (s_len.sign() <= 0 || quad_cmp(s_len, QuadVal(1)) > 0)
    throw WindowError("normal_form: not horizontally short (at this window size)");
  QuadVal period = alpha * s_len;
  Int k = ceil_q((t_raw - QuadVal(1)) / period);
  QuadVal t_red = t_raw - QuadVal(Rational(k)) * period;
  return make_section_point(surface, s_len, t_red, QuadVal(1), true);
}

SectionPoint conjugate_section(const SectionPoint& p, const QuadVal& a) {
  if (a.sign() <= 0 || quad_cmp(a, QuadVal(1)) > 0)
    throw DomainError("conjugate_section: need 0 < a <= 1");
  if (p.h != QuadVal(1)) throw DomainError("conjugate_section: input must lie in Omega (h = 1)");
  const QuadVal& alpha = p.surface->alpha;
  QuadVal s_new = a * p.s;
  QuadVal t_raw = a * p.t;
  QuadVal period = alpha * s_new;
  Int k = ceil_q((t_raw - QuadVal(1)) / period);
  QuadVal t_new = t_raw - QuadVal(Rational(k)) * period;
  return make_section_point(p.surface, s_new, t_new, a, p.exact);
}

OrbitTrace orbit(const SectionPoint& p, int n_steps, LatticeCache& cache) {
  if (n_steps < 1) throw DomainError("orbit: need at least one step");
  OrbitTrace trace;
  trace.records.reserve(n_steps);
  trace.cumulative_times.reserve(n_steps);
  SectionPoint cur = p;
  QuadVal acc(0);
  for (int i = 0; i < n_steps; ++i) {
    ReturnRecord rec = return_map(cur, cache);
    cur = rec.next;
    acc += rec.return_time;
    trace.cumulative_times.push_back(acc);
    trace.cumulative_times_f.push_back(to_double(acc));
    trace.records.push_back(std::move(rec));
  }
  return trace;
}

ExcursionProfile excursion_profile(const SectionPoint& p, int n_returns, const QuadVal& h,
                                   LatticeCache& cache) {
  if (n_returns < 1) throw DomainError("excursion_profile: need at least one return");
  if (quad_cmp(p.s, h) > 0) throw DomainError("excursion_profile: point not in Omega_h");
  ExcursionProfile prof;

  // Direct route: run the level-1 map, classifying each return by whether
  // it lands back in the level-h section.
  SectionPoint cur = make_section_point(p.surface, p.s, p.t, QuadVal(1), p.exact);
  QuadVal acc(0);
  int h_returns = 0;
  std::int64_t excursions = 0;
  while (h_returns < n_returns) {
    ReturnRecord rec = return_map(cur, cache);
    acc += rec.return_time;
    cur = rec.next;
    if (quad_cmp(cur.s, h) <= 0) {
      ++h_returns;
    } else {
      ++excursions;
    }
  }
  prof.count = excursions;
  prof.flag = (excursions == 1);
  prof.s_n = acc;

  // Box route: lattice points with h < x <= 1 and 0 < y < s_N * x.
  const QuadVal& alpha = p.surface->alpha;
  const double alpha_f = p.surface->alpha_f;
  QuadVal zeta_bound = p.s * prof.s_n;  // heights with y/s < s_N
  auto table = cache.ensure(to_double(zeta_bound) + 1.0);
  const double s_f = to_double(p.s), t_f = to_double(p.t);
  const double sn_f = to_double(prof.s_n), h_f = to_double(h);
  std::int64_t box = 0;
  for (const HeightEntry& e : table->entries) {
    if (quad_cmp(e.zeta, zeta_bound) >= 0) break;
    QuadVal lo = e.zeta / (p.s * prof.s_n);  // x > zeta/(s*s_N) makes y < s_N x
    if (quad_cmp(lo, h) < 0) lo = h;
    if (quad_cmp(lo, QuadVal(1)) >= 0) continue;
    double lo_f = std::max(h_f, e.zeta_f / (s_f * sn_f));
    double period_f = alpha_f * e.zeta_f * s_f;
    for (const HeightRep& rep : e.reps) {
      double pos_f = s_f * rep.x_f + t_f * e.zeta_f;
      box += detail::interval_hits(pos_f, period_f, lo_f, 1.0, [&] {
        QuadVal period = alpha * e.zeta * p.s;
        QuadVal pos = p.s * rep.x + p.t * e.zeta;
        // n with pos + n*period in (lo, 1]
        Int n_hi = floor_q((QuadVal(1) - pos) / period);
        Int n_lo = floor_q((lo - pos) / period);
        Int cnt = n_hi - n_lo;
        return cnt > 0 ? to_int64(cnt) : 0;
      });
    }
  }
  prof.box_count = box;
  prof.flag_box = (box == 1);
  return prof;
}

std::optional<FloatReturn> return_map_f(const HeightTable& table, double s, double t, double h,
                                        double band) {
  if (!table.with_reps) return std::nullopt;
  const double alpha = table.surface->alpha_f;
  bool found = false;
  double best_zeta = 0, best_x = 0, best_slope = 0;
  const HeightRep* best_rep = nullptr;
  double best_shift = 0;

  for (const HeightEntry& e : table.entries) {
    double zf = e.zeta_f;
    if (found && zf / (s * h) >= best_slope * (1.0 - 1e-9)) break;
    double period = alpha * zf * s;
    for (const HeightRep& rep : e.reps) {
      double pos = s * rep.x_f + t * zf;
      double n = std::floor((h - pos) / period);
      double landing = pos + n * period;
      if (landing <= band) {
        if (landing > -band && landing <= 0) return std::nullopt;  // grazing zero
        continue;
      }
      double slope = zf / (s * landing);
      if (!found || slope < best_slope * (1.0 - 1e-12)) {
        found = true;
        best_zeta = zf;
        best_x = landing;
        best_slope = slope;
        best_rep = &rep;
        best_shift = n;
      } else if (std::abs(slope - best_slope) <= best_slope * 1e-12) {
        return std::nullopt;  // slope tie inside the band
      }
    }
  }
  if (!found) return std::nullopt;
  if (table.cutoff_f < best_slope * s * h * (1.0 + 1e-9)) return std::nullopt;  // cutoff short
  if (!table.with_witnesses || best_rep == nullptr) return std::nullopt;

  // Shifted witness T^n * gamma: e12 picks up n*alpha*e22.
  double w_e12 = to_double(best_rep->witness.e12) + best_shift * alpha * to_double(best_rep->witness.e22);
  double w_e22 = to_double(best_rep->witness.e22);
  (void)best_zeta;
  double s_next = best_x;
  double t_raw = s * w_e12 + t * w_e22;
  double period = alpha * s_next;
  double k = std::ceil((t_raw - 1.0) / period);
  double t_next = t_raw - k * period;
  // Guard the half-open t-boundary.
  if (t_next > 1.0 + band || t_next <= 1.0 - period + band) {
    if (std::abs(t_next - 1.0) < band || std::abs(t_next - (1.0 - period)) < band)
      return std::nullopt;
    // One step of correction for rounding at the ceil boundary.
    if (t_next > 1.0) t_next -= period;
    if (t_next <= 1.0 - period) t_next += period;
  }
  if (std::abs(s_next - h) < band && s_next > h) return std::nullopt;
  return FloatReturn{s_next, t_next, best_slope};
}

OmegaSampler::OmegaSampler(SurfacePtr surface, std::uint64_t seed, std::uint64_t stream,
                           double s_lo, double s_hi, double band)
    : surface_(std::move(surface)),
      rng_(CounterRng::derive_stream(seed, stream)),
      s_lo_(s_lo),
      s_hi_(s_hi),
      band_(band) {}

FloatPoint OmegaSampler::next() {
  const double lo2 = s_lo_ * s_lo_, hi2 = s_hi_ * s_hi_;
  for (;;) {
    double u = rng_.next_double();
    double v = rng_.next_double();
    double s = std::sqrt(lo2 + u * (hi2 - lo2));
    if (s <= band_ || std::abs(s - s_lo_) < band_ || std::abs(s - s_hi_) < band_) continue;
    if (v < band_ || v > 1.0 - band_) continue;
    double t = 1.0 - surface_->alpha_f * s * v;
    return FloatPoint{s, t};
  }
}

}  // namespace bcz
