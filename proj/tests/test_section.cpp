#include <doctest.h>

#include <cmath>

#include "bcz/section.hpp"
#include "bcz/weakmix.hpp"
#include "oracles.hpp"

using namespace bcz;

namespace {

// Random exact rational point of the torus chart (alpha = 1).
std::pair<Rational, Rational> random_torus_point(CounterRng& rng, long long den = 9973) {
  for (;;) {
    long long p = static_cast<long long>(rng.next_below(den)) + 1;  // s in (0,1]
    Rational s(p, den);
    // t in (1 - s, 1]
    long long q = static_cast<long long>(rng.next_below(p)) + 1;
    Rational t = Rational(1) - Rational(p - q, den);
    if (t > 1 - s && t <= 1) return {s, t};
  }
}

}  // namespace

TEST_CASE("closed-form map worked examples") {
  auto [x1, y1] = bcz_classical(Rational(1), Rational(1));
  CHECK(x1 == Rational(1));
  CHECK(y1 == Rational(1));
  auto [x2, y2] = bcz_classical(Rational(1, 2), Rational(1));
  CHECK(x2 == Rational(1));
  CHECK(y2 == Rational(1, 2));
  auto [x3, y3] = bcz_classical(Rational(3, 5), Rational(4, 5));
  CHECK(x3 == Rational(4, 5));
  CHECK(y3 == Rational(1));
  CHECK_THROWS_AS(bcz_classical(Rational(1, 3), Rational(1, 3)), DomainError);
  CHECK_THROWS_AS(bcz_classical(Rational(0), Rational(1)), DomainError);
}

TEST_CASE("geometric return map equals the closed form on random rational points") {
  auto torus = oracles::test_surface("torus");
  LatticeCache cache(torus);
  CounterRng rng(424242);
  for (int i = 0; i < 2000; ++i) {
    auto [x, y] = random_torus_point(rng);
    SectionPoint p = make_section_point(torus, QuadVal(x), QuadVal(y));
    ReturnRecord rec = return_map(p, cache);
    auto [nx, ny] = bcz_classical(x, y);
    CHECK(rec.next.s == QuadVal(nx));
    CHECK(rec.next.t == QuadVal(ny));
    // Return time of the torus map is 1/(x y).
    CHECK(rec.return_time == QuadVal(Rational(1) / (x * y)));
  }
}

TEST_CASE("next points satisfy the chart invariants exactly") {
  auto golden = oracles::test_surface("golden_l");
  LatticeCache cache(golden);
  CounterRng rng(5);
  OmegaSampler sampler(golden, 5, 0);
  for (int i = 0; i < 100; ++i) {
    FloatPoint f = sampler.next();
    SectionPoint p = make_section_point(golden, QuadVal(rational_of_double(f.s)),
                                        QuadVal(rational_of_double(f.t)));
    ReturnRecord rec = return_map(p, cache);
    CHECK(in_omega(golden, rec.next.s, rec.next.t, rec.next.h));
    CHECK(rec.return_time.sign() > 0);
    // The witness really is the vector that lands on the horizontal side.
    QuadVal landing = p.s * rec.witness.x + p.t * rec.witness.y;
    CHECK(landing == rec.next.s);
  }
}

TEST_CASE("fixed point of the torus map") {
  auto torus = oracles::test_surface("torus");
  LatticeCache cache(torus);
  SectionPoint p = make_section_point(torus, QuadVal(1), QuadVal(1));
  OrbitTrace trace = orbit(p, 5, cache);
  REQUIRE(trace.records.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(trace.records[i].next.s == QuadVal(1));
    CHECK(trace.records[i].next.t == QuadVal(1));
    CHECK(trace.cumulative_times[i] == QuadVal(static_cast<long long>(i + 1)));
  }
  CHECK_THROWS_AS(orbit(p, 0, cache), DomainError);
}

TEST_CASE("normal form") {
  auto torus = oracles::test_surface("torus");
  LatticeCache cache(torus);

  SectionPoint id_form = normal_form(mat_identity(), torus, cache);
  CHECK(id_form.s == QuadVal(1));
  CHECK(id_form.t == QuadVal(1));

  // Idempotence on p_{s,t} and invariance under the parabolic t-shift.
  QuadVal s(Rational(3, 5)), t(Rational(4, 5));
  SectionPoint back = normal_form(upper_mat(s, t), torus, cache);
  CHECK(back.s == s);
  CHECK(back.t == t);
  SectionPoint shifted = normal_form(upper_mat(s, t + torus->alpha * s), torus, cache);
  CHECK(shifted.s == s);
  CHECK(shifted.t == t);

  // Consistency with the return map: the normal form of u_r p_{s,t} is T(s,t).
  SectionPoint p = make_section_point(torus, s, t);
  ReturnRecord rec = return_map(p, cache);
  Mat2 moved = mat_mul(horocycle_mat(rec.return_time), upper_mat(s, t));
  SectionPoint nf = normal_form(moved, torus, cache);
  CHECK(nf.s == rec.next.s);
  CHECK(nf.t == rec.next.t);
}

TEST_CASE("normal form on the golden L agrees with the return map") {
  auto golden = oracles::test_surface("golden_l");
  LatticeCache cache(golden);
  OmegaSampler sampler(golden, 17, 0);
  for (int i = 0; i < 20; ++i) {
    FloatPoint f = sampler.next();
    QuadVal s(rational_of_double(f.s)), t(rational_of_double(f.t));
    SectionPoint p = make_section_point(golden, s, t);
    ReturnRecord rec = return_map(p, cache);
    Mat2 moved = mat_mul(horocycle_mat(rec.return_time), upper_mat(s, t));
    SectionPoint nf = normal_form(moved, golden, cache);
    CHECK(nf.s == rec.next.s);
    CHECK(nf.t == rec.next.t);
  }
}

TEST_CASE("conjugation: identity at a=1, exact intertwining, time scaling") {
  auto torus = oracles::test_surface("torus");
  LatticeCache cache(torus);
  CounterRng rng(31337);
  QuadVal a(Rational(9, 10));
  for (int i = 0; i < 200; ++i) {
    auto [x, y] = random_torus_point(rng, 997);
    SectionPoint p = make_section_point(torus, QuadVal(x), QuadVal(y));

    SectionPoint same = conjugate_section(p, QuadVal(1));
    CHECK(same.s == p.s);
    CHECK(same.t == p.t);

    SectionPoint lhs = conjugate_section(return_map(p, cache).next, a);
    ReturnRecord rec_a = return_map(conjugate_section(p, a), cache);
    CHECK(lhs.s == rec_a.next.s);
    CHECK(lhs.t == rec_a.next.t);
    CHECK(rec_a.return_time * a * a == return_map(p, cache).return_time);
  }
}

TEST_CASE("pushforward of the chart measure is preserved (chi-square)") {
  auto torus = oracles::test_surface("torus");
  LatticeCache cache(torus);
  auto table = cache.ensure(256.0);
  const int bins = 20;
  std::vector<double> counts(bins * bins, 0.0);
  OmegaSampler sampler(torus, 777, 0);
  const int n = 100000;
  int kept = 0;
  while (kept < n) {
    FloatPoint f = sampler.next();
    auto step = return_map_f(*table, f.s, f.t, 1.0);
    if (!step) continue;
    // Equal-measure binning: s-bins by s^2, t-bins uniform on (1-alpha s, 1].
    int bs = std::min(bins - 1, static_cast<int>(step->s * step->s * bins));
    double tfrac = (1.0 - step->t) / (torus->alpha_f * step->s);
    int bt = std::min(bins - 1, static_cast<int>(tfrac * bins));
    counts[bs * bins + bt] += 1.0;
    ++kept;
  }
  double expect = static_cast<double>(n) / (bins * bins);
  double stat = 0;
  for (double c : counts) stat += (c - expect) * (c - expect) / expect;
  double p_value = oracles::chi_square_pvalue(stat, bins * bins - 1);
  CHECK(p_value > 0.001);
}

TEST_CASE("excursion profile: degenerate level and the box equivalence") {
  auto torus = oracles::test_surface("torus");
  LatticeCache cache(torus);

  SectionPoint fixed = make_section_point(torus, QuadVal(1), QuadVal(1));
  ExcursionProfile degenerate = excursion_profile(fixed, 4, QuadVal(1), cache);
  CHECK(degenerate.count == 0);
  CHECK_FALSE(degenerate.flag);
  CHECK(degenerate.box_count == 0);
  CHECK_FALSE(degenerate.flag_box);

  QuadVal h(Rational(9, 10));
  OmegaSampler sampler(torus, 2024, 0, 0.05, to_double(h));
  int agree = 0, total = 0, flagged = 0;
  for (int i = 0; i < 300; ++i) {
    FloatPoint f = sampler.next();
    SectionPoint p = make_section_point(torus, QuadVal(rational_of_double(f.s)),
                                        QuadVal(rational_of_double(f.t)), h);
    ExcursionProfile prof = excursion_profile(p, 3, h, cache);
    ++total;
    if (prof.flag == prof.flag_box) ++agree;
    if (prof.flag) ++flagged;
    CHECK(prof.count == prof.box_count);
  }
  CHECK(agree == total);
  CHECK(flagged > 0);  // the single-excursion event actually occurs
}

TEST_CASE("long-run mean return time matches pi^2/3 on the torus") {
  auto torus = oracles::test_surface("torus");
  LatticeCache cache(torus);
  MeanReturnStats stats = mean_return_time(torus, 1.0, 10, 1000, 99, cache);
  const double target = M_PI * M_PI / 3.0;
  CHECK(std::abs(stats.mean - target) / target < 0.03);
  CHECK(stats.min > 0);
}

TEST_CASE("float return map tracks the exact one away from boundaries") {
  auto golden = oracles::test_surface("golden_l");
  LatticeCache cache(golden);
  auto table = cache.ensure(64.0);
  OmegaSampler sampler(golden, 51, 0);
  int checked = 0;
  for (int i = 0; i < 200 && checked < 100; ++i) {
    FloatPoint f = sampler.next();
    auto fast = return_map_f(*table, f.s, f.t, 1.0);
    if (!fast) continue;
    SectionPoint p = make_section_point(golden, QuadVal(rational_of_double(f.s)),
                                        QuadVal(rational_of_double(f.t)));
    ReturnRecord rec = return_map(p, cache);
    CHECK(std::abs(fast->s - to_double(rec.next.s)) < 1e-9);
    CHECK(std::abs(fast->t - to_double(rec.next.t)) < 1e-9);
    CHECK(std::abs(fast->r - to_double(rec.return_time)) < 1e-9);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("section point validation") {
  auto torus = oracles::test_surface("torus");
  CHECK_THROWS_AS(make_section_point(torus, QuadVal(0), QuadVal(1)), DomainError);
  CHECK_THROWS_AS(make_section_point(torus, QuadVal(Rational(1, 2)), QuadVal(Rational(1, 4))),
                  DomainError);
  CHECK_THROWS_AS(
      make_section_point(torus, QuadVal(Rational(3, 4)), QuadVal(1), QuadVal(Rational(1, 2))),
      DomainError);
}
