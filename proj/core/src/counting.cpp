#include "bcz/counting.hpp"

#include <algorithm>
#include <cmath>

#include "bcz/parallel.hpp"
#include "interval_count.hpp"

namespace bcz {

namespace {

// Count of n with value(n) = pos + n*period in the interval, exact.
std::int64_t lattice_hits_exact(const QuadVal& pos, const QuadVal& period, const QuadVal& lo,
                                const QuadVal& hi, IntervalForm form) {
  // kClosedOpen: [lo, hi); kOpenClosed: (lo, hi].
  if (form == IntervalForm::kClosedOpen) {
    Int n_hi = ceil_q((hi - pos) / period);   // first n with value >= hi
    Int n_lo = ceil_q((lo - pos) / period);   // first n with value >= lo
    Int c = n_hi - n_lo;
    return c > 0 ? to_int64(c) : 0;
  }
  Int n_hi = floor_q((hi - pos) / period);  // last n with value <= hi
  Int n_lo = floor_q((lo - pos) / period);  // last n with value <= lo
  Int c = n_hi - n_lo;
  return c > 0 ? to_int64(c) : 0;
}

}  // namespace

std::int64_t count_in_box(const SectionPoint& p, const BoxRegionExact& box, LatticeCache& cache,
                          IntervalForm form) {
  if (quad_cmp(box.b, box.a) <= 0 || box.c.sign() <= 0)
    throw DomainError("count_in_box: need b > a and c > 0");
  const QuadVal& alpha = p.surface->alpha;
  const double alpha_f = p.surface->alpha_f;
  QuadVal zeta_bound = box.c * p.s;  // heights with zeta/s < c
  auto table = cache.ensure(to_double(zeta_bound) + 1.0);
  const double s_f = to_double(p.s), t_f = to_double(p.t);
  const double a_f = to_double(box.a), b_f = to_double(box.b);
  std::int64_t total = 0;
  for (const HeightEntry& e : table->entries) {
    if (quad_cmp(e.zeta, zeta_bound) >= 0) break;
    double period_f = alpha_f * e.zeta_f * s_f;
    for (const HeightRep& rep : e.reps) {
      double pos_f = s_f * rep.x_f + t_f * e.zeta_f;
      total += detail::interval_hits(pos_f, period_f, a_f, b_f, [&] {
        QuadVal period = alpha * e.zeta * p.s;
        QuadVal pos = p.s * rep.x + p.t * e.zeta;
        return lattice_hits_exact(pos, period, box.a, box.b, form);
      });
    }
  }
  return total;
}

std::optional<std::int64_t> count_in_box_f(const HeightTable& table, double s, double t,
                                           const BoxRegion& box, double band, IntervalForm form) {
  const double alpha = table.surface->alpha_f;
  const double zeta_bound = box.c * s;
  if (table.cutoff_f < zeta_bound) return std::nullopt;
  std::int64_t total = 0;
  for (const HeightEntry& e : table.entries) {
    if (e.zeta_f >= zeta_bound) {
      if (e.zeta_f - zeta_bound < band) return std::nullopt;  // height grazing y = c
      break;
    }
    if (zeta_bound - e.zeta_f < band) return std::nullopt;
    double period = alpha * e.zeta_f * s;
    for (const HeightRep& rep : e.reps) {
      double pos = s * rep.x_f + t * e.zeta_f;
      double lo_n = (box.a - pos) / period;
      double hi_n = (box.b - pos) / period;
      double c0 = std::ceil(hi_n) - std::ceil(lo_n);  // [a,b) count
      if (form == IntervalForm::kOpenClosed) c0 = std::floor(hi_n) - std::floor(lo_n);
      // Band check: any lattice value too close to either wall is ambiguous.
      double fa = pos + std::round(lo_n) * period - box.a;
      double fb = pos + std::round(hi_n) * period - box.b;
      if (std::abs(fa) < band || std::abs(fb) < band) return std::nullopt;
      if (c0 > 0) total += static_cast<std::int64_t>(c0);
    }
  }
  return total;
}

CountingSetup make_counting_setup(const SurfacePtr& surface, double s0, const BoxRegion& box,
                                  const std::shared_ptr<const HeightTable>& table) {
  if (!(s0 > 0.0 && s0 < 1.0)) throw DomainError("counting setup: need s0 in (0,1)");
  if (!(box.b > box.a) || !(box.c > 0)) throw DomainError("counting setup: need b > a, c > 0");
  if (!table || table->surface != surface)
    throw DomainError("counting setup: table missing or built for another surface");
  if (table->cutoff_f < box.c)
    throw WindowError("counting setup: height table cutoff below c");
  if (table->empty()) return CountingSetup{surface, s0, box, table};
  double zeta1 = table->entries.front().zeta_f;
  double bound = zeta1 * surface->alpha_f * s0;
  if (!(box.b - box.a < bound))
    throw HypothesisError("hypothesis violated: b - a < zeta_1 * alpha * s0 (b - a = " +
                          std::to_string(box.b - box.a) + ", zeta_1 * alpha * s0 = " +
                          std::to_string(bound) + ")");
  return CountingSetup{surface, s0, box, table};
}

ExpectedCount exact_expected_count(const CountingSetup& setup) {
  const HeightTable& tab = *setup.table;
  const double alpha = setup.surface->alpha_f;
  const double c = setup.box.c;
  const double cs0 = c * setup.s0;
  ExpectedCount out;

  // k' = #heights <= c*s0, k'' = #heights <= c; J_R is open at R, so the
  // prefix sums S_m = sum_{i<=m} phi_i/zeta_i enter through these indices.
  std::size_t kp = 0, kpp = 0;
  while (kp < tab.size() && tab.entries[kp].zeta_f <= cs0) ++kp;
  while (kpp < tab.size() && tab.entries[kpp].zeta_f <= c) ++kpp;
  out.k_prime = kp;
  out.k_double_prime = kpp;

  auto S = [&](std::size_t m) { return m == 0 ? 0.0 : tab.cum_phi_over_zeta[m - 1]; };
  auto zeta = [&](std::size_t i) { return tab.entries[i - 1].zeta_f; };  // 1-based

  // Piece below the first height in (c*s0, c] (clamped when there is none).
  double v1 = (kpp > kp) ? zeta(kp + 1) : c;
  out.i1 = (v1 - cs0) / c * S(kp);

  // Middle pieces between consecutive heights.
  for (std::size_t l = kp + 1; l + 1 <= kpp; ++l) {
    out.i2 += (zeta(l + 1) - zeta(l)) / c * S(l);
  }

  // Piece above the last height <= c.
  out.i3 = (kpp > kp) ? (c - zeta(kpp)) / c * S(kpp) : 0.0;

  // Second route for i2, the reindexed form
  // (1/c) [ sum_{l<k''} (zeta_{k''}-zeta_l) phi_l/zeta_l
  //        - sum_{l<=k'} (zeta_{k'}-zeta_l) phi_l/zeta_l ].
  // It covers [zeta_{k'}, zeta_{k''}] where the displayed sum starts at
  // zeta_{k'+1}, so the two differ by the boundary strip
  // (zeta_{k'+1}-zeta_{k'})/c * S(k') whenever k' >= 1 and k'' > k'.
  // Both values are reported; total uses the displayed form, which the
  // direct integration below certifies.
  {
    double t1 = 0, t2 = 0;
    for (std::size_t l = 1; l + 1 <= kpp; ++l)
      t1 += (zeta(kpp) - zeta(l)) * static_cast<double>(tab.entries[l - 1].phi) / zeta(l);
    for (std::size_t l = 1; l + 1 <= kp; ++l)
      t2 += (zeta(kp) - zeta(l)) * static_cast<double>(tab.entries[l - 1].phi) / zeta(l);
    out.i2_telescoped = (t1 - t2) / c;
  }

  // Direct breakpoint integration of s -> sum_{heights < c s} phi/zeta
  // over [s0, 1]; exact for a step integrand.
  {
    double integral = 0.0;
    double prev = setup.s0;
    std::size_t idx = kp;  // heights strictly above c*s0 start here
    while (idx < tab.size() && tab.entries[idx].zeta_f <= c) {
      double brk = tab.entries[idx].zeta_f / c;
      if (brk > prev) {
        integral += (brk - prev) * S(idx);
        prev = brk;
      }
      ++idx;
    }
    integral += (1.0 - prev) * S(kpp);
    out.integral_direct = integral;
  }

  double sum = out.i1 + out.i2 + out.i3;
  double scale = 2.0 * (setup.box.b - setup.box.a) / alpha;
  out.total = scale * sum;
  out.lower_bound = scale * out.i2;

  double rel = std::abs(sum - out.integral_direct) / std::max(1e-30, std::abs(out.integral_direct));
  if (out.integral_direct != 0.0 && rel > 1e-9)
    throw std::logic_error("exact_expected_count: piecewise sum disagrees with direct integration");
  return out;
}

McEstimate mc_expected_count(const CountingSetup& setup, std::uint64_t n_samples,
                             std::uint64_t seed, int threads) {
  if (n_samples < 1000) throw DomainError("mc_expected_count: need at least 1e3 samples");
  if (threads <= 0) threads = default_threads();
  const double weight = 1.0 - setup.s0 * setup.s0;  // m(Omega^0)

  const std::uint64_t chunk = 65536;
  const std::uint64_t n_chunks = (n_samples + chunk - 1) / chunk;
  std::vector<double> sums(n_chunks, 0.0), sqs(n_chunks, 0.0);

  parallel_chunks(n_samples, chunk, threads, [&](std::uint64_t ci, std::uint64_t b, std::uint64_t e) {
    OmegaSampler sampler(setup.surface, seed, ci, setup.s0, 1.0);
    double acc = 0, acc2 = 0;
    for (std::uint64_t i = b; i < e; ++i) {
      for (;;) {
        FloatPoint pt = sampler.next();
        auto w = count_in_box_f(*setup.table, pt.s, pt.t, setup.box);
        if (!w) continue;  // guard band hit: resample
        double x = static_cast<double>(*w);
        acc += x;
        acc2 += x * x;
        break;
      }
    }
    sums[ci] = acc;
    sqs[ci] = acc2;
  });

  double total = 0, total2 = 0;
  for (std::uint64_t ci = 0; ci < n_chunks; ++ci) {
    total += sums[ci];
    total2 += sqs[ci];
  }
  const double n = static_cast<double>(n_samples);
  double mean = total / n;
  double var = std::max(0.0, total2 / n - mean * mean);
  McEstimate est;
  est.mean = mean * weight;
  est.stderr_of_mean = std::sqrt(var / n) * weight;
  est.n = n_samples;
  est.seed = seed;
  return est;
}

IntervalAverage periodic_interval_average(double alpha, double j, double s,
                                          const std::vector<double>& xs, double a, double b) {
  if (!(alpha > 0) || !(j >= 1) || !(s > 0))
    throw HypothesisError("periodic_interval_average: need alpha > 0, j >= 1, s > 0");
  if (!(b > a)) throw HypothesisError("periodic_interval_average: need b > a");
  if (!(b - a < alpha * j * s))
    throw HypothesisError("hypothesis violated: b - a < alpha * j * s");
  double prev = -std::numeric_limits<double>::infinity();
  for (double x : xs) {
    if (!(x >= 0) || !(x < alpha * j) || !(x > prev))
      throw HypothesisError("periodic_interval_average: need 0 <= x_1 < ... < x_k < alpha * j");
    prev = x;
  }

  IntervalAverage out;
  out.exact = static_cast<double>(xs.size()) / j * (b - a);

  // The t-integrand is a finite sum of indicator functions: each (i, n)
  // contributes t in [(a - s x_i)/j - alpha n s, (b - s x_i)/j - alpha n s).
  // Integrate by summing clipped interval lengths; no quadrature error.
  const double t_lo = 1.0 - alpha * s, t_hi = 1.0;
  double total = 0.0;
  for (double x : xs) {
    double base_lo = (a - s * x) / j;
    double base_hi = (b - s * x) / j;
    double step = alpha * s;
    // n with interval intersecting (t_lo, t_hi]
    long long n_min = static_cast<long long>(std::floor((base_lo - t_hi) / step)) - 1;
    long long n_max = static_cast<long long>(std::ceil((base_hi - t_lo) / step)) + 1;
    for (long long n = n_min; n <= n_max; ++n) {
      double lo = std::max(base_lo - step * static_cast<double>(n), t_lo);
      double hi = std::min(base_hi - step * static_cast<double>(n), t_hi);
      if (hi > lo) total += hi - lo;
    }
  }
  out.numeric = total;
  return out;
}

std::vector<std::pair<double, McEstimate>> second_moment_mc(const SurfacePtr& surface, double s0,
                                                            const std::vector<double>& betas,
                                                            double a_n, std::uint64_t n_samples,
                                                            std::uint64_t seed, LatticeCache& cache,
                                                            int threads) {
  if (!(a_n > 0 && a_n < 1)) throw DomainError("second_moment_mc: need 0 < a_n < 1");
  std::vector<std::pair<double, McEstimate>> out;
  if (threads <= 0) threads = default_threads();
  for (double beta : betas) {
    double c_n = beta / (1.0 - a_n);
    BoxRegion box{a_n, 1.0, c_n};
    auto table = cache.ensure(c_n + 1.0);
    const double weight = 1.0 - s0 * s0;
    const std::uint64_t chunk = 65536;
    const std::uint64_t n_chunks = (n_samples + chunk - 1) / chunk;
    std::vector<double> sums(n_chunks, 0.0), sqs(n_chunks, 0.0);
    parallel_chunks(n_samples, chunk, threads,
                    [&](std::uint64_t ci, std::uint64_t b, std::uint64_t e) {
                      OmegaSampler sampler(surface, seed, ci ^ (0x5bd1e995ULL + ci), s0, 1.0);
                      double acc = 0, acc2 = 0;
                      for (std::uint64_t i = b; i < e; ++i) {
                        for (;;) {
                          FloatPoint pt = sampler.next();
                          auto w = count_in_box_f(*table, pt.s, pt.t, box);
                          if (!w) continue;
                          double x = static_cast<double>(*w);
                          double y = x * x - x;  // W^2 - W, nonnegative
                          acc += y;
                          acc2 += y * y;
                          break;
                        }
                      }
                      sums[ci] = acc;
                      sqs[ci] = acc2;
                    });
    double total = 0, total2 = 0;
    for (std::uint64_t ci = 0; ci < n_chunks; ++ci) {
      total += sums[ci];
      total2 += sqs[ci];
    }
    const double n = static_cast<double>(n_samples);
    double mean = total / n;
    double var = std::max(0.0, total2 / n - mean * mean);
    McEstimate est;
    est.mean = mean * weight;
    est.stderr_of_mean = std::sqrt(var / n) * weight;
    est.n = n_samples;
    est.seed = seed;
    out.emplace_back(beta, est);
  }
  return out;
}

}  // namespace bcz
