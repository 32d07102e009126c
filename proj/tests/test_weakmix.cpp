#include <doctest.h>

#include <cmath>

#include "bcz/weakmix.hpp"
#include "oracles.hpp"

using namespace bcz;

TEST_CASE("condition 1: section measure is a^2") {
  auto torus = oracles::test_surface("torus");
  Condition1Result half = check_condition1(torus, 0.5, 200000, 1);
  CHECK(half.claimed == doctest::Approx(0.25));
  CHECK(half.pass);
  Condition1Result nine = check_condition1(torus, 0.9, 200000, 2);
  CHECK(nine.claimed == doctest::Approx(0.81));
  CHECK(nine.pass);
  CHECK(std::abs(nine.empirical - 0.81) < 0.004);

  auto golden = oracles::test_surface("golden_l");
  CHECK(check_condition1(golden, 0.7, 200000, 3).pass);
}

TEST_CASE("condition 2: conjugacy holds exactly on the torus and the golden L") {
  auto torus = oracles::test_surface("torus");
  LatticeCache cache(torus);
  Condition2Result r = check_condition2(torus, 0.9, 150, 11, cache);
  CHECK(r.exact_zero);
  CHECK(r.time_scaling_exact);
  CHECK(r.max_defect_f < 1e-10);
  CHECK(r.pass);

  auto golden = oracles::test_surface("golden_l");
  LatticeCache gcache(golden);
  Condition2Result g = check_condition2(golden, 0.9, 40, 12, gcache);
  CHECK(g.pass);
}

TEST_CASE("condition 3: displacement decays and the triangle formula holds") {
  auto torus = oracles::test_surface("torus");
  LatticeCache cache(torus);
  Condition3Result r =
      check_condition3(torus, {0.9, 0.99, 0.999}, {0.05}, 20000, 21, cache);
  REQUIRE(r.slices.size() == 3);
  CHECK(r.slices[0].fraction_displaced[0] >= r.slices[1].fraction_displaced[0]);
  CHECK(r.slices[1].fraction_displaced[0] >= r.slices[2].fraction_displaced[0] - 0.002);
  CHECK(r.slices[2].fraction_displaced[0] < 0.01);
  for (const auto& s : r.slices) {
    CHECK(s.n_in_triangle > 0);
    CHECK(s.max_formula_error < 1e-10);
  }
  CHECK(r.pass);
}

TEST_CASE("condition 4: positive intersection measure with excursion equivalence") {
  auto torus = oracles::test_surface("torus");
  LatticeCache cache(torus);
  Condition4Result r = check_condition4(torus, 0.95, 0.4, 0.3, 3000, 31, cache);
  CHECK(r.n_n == 8);
  CHECK(r.lemma_agree == r.lemma_checked);
  CHECK(r.measure_intersection > 0);
  CHECK(r.ci_low > 0);
  CHECK(r.pass);
  // Calibrated window brackets the measured mean; the c_omega window is reported.
  CHECK(r.window_lo < r.mean_return_level_a * r.n_n);
  CHECK(r.window_hi > r.mean_return_level_a * r.n_n);
  CHECK(r.measure_d0 > 0.5 * (r.a * r.a - r.s0 * r.s0));
}

TEST_CASE("full criterion report runs and serializes") {
  auto torus = oracles::test_surface("torus");
  LatticeCache cache(torus);
  CriterionReport rep = run_criterion_report(torus, 0.95, 0.4, 0.3, 4000, 77, cache);
  CHECK(rep.cond1.pass);
  CHECK(rep.cond2.pass);
  CHECK(rep.cond4.lemma_agree == rep.cond4.lemma_checked);
  std::string js = criterion_report_json(rep);
  CHECK(js.find("\"condition4\"") != std::string::npos);
  CHECK(js.find("\"measure_intersection\"") != std::string::npos);
  std::ostringstream os;
  print_criterion_report(os, rep);
  CHECK(os.str().find("condition 4") != std::string::npos);
}

TEST_CASE("correlation diagnostic") {
  auto torus = oracles::test_surface("torus");
  LatticeCache cache(torus);
  CorrelationDiagnostic flat =
      correlation_diagnostic(torus, "const", 2000, {10, 100}, 5, cache);
  for (double v : flat.cesaro_abs_corr) CHECK(v == 0.0);

  CorrelationDiagnostic ind =
      correlation_diagnostic(torus, "ind_s", 20000, {100, 10000}, 5, cache);
  REQUIRE(ind.cesaro_abs_corr.size() == 2);
  CHECK(ind.cesaro_abs_corr[1] < ind.cesaro_abs_corr[0]);

  CorrelationDiagnostic again =
      correlation_diagnostic(torus, "ind_s", 20000, {100, 10000}, 5, cache);
  CHECK(again.cesaro_abs_corr == ind.cesaro_abs_corr);
  CHECK_THROWS_AS(correlation_diagnostic(torus, "nope", 2000, {10}, 5, cache), DomainError);
}
