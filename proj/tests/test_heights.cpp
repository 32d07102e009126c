#include <doctest.h>

#include <set>
#include <sstream>

#include "bcz/heights.hpp"
#include "bcz/rng.hpp"
#include "oracles.hpp"

using namespace bcz;

TEST_CASE("torus heights table reproduces the classical totient") {
  auto torus = oracles::test_surface("torus");
  HolonomyWindow w = enumerate_orbit(torus, QuadVal(10), QuadVal(10));
  HeightTable t = heights_table(w, QuadVal(10));
  REQUIRE(t.size() == 9);
  std::vector<std::int64_t> expect{1, 1, 2, 2, 4, 2, 6, 4, 6};
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.entries[i].zeta == QuadVal(static_cast<long long>(i + 1)));
    CHECK(t.entries[i].phi == expect[i]);
  }
}

TEST_CASE("cutoff below the first height gives an empty table") {
  auto torus = oracles::test_surface("torus");
  HolonomyWindow w = enumerate_orbit(torus, QuadVal(2), QuadVal(2));
  HeightTable t = heights_table(w, QuadVal(1));
  CHECK(t.empty());
  CHECK(estimate_c_omega(t) == 0.0);
  CHECK(weighted_height_sum(t) == 0.0);
  CHECK(!max_height_gap(t).has_value());
}

TEST_CASE("undersized windows are rejected") {
  auto torus = oracles::test_surface("torus");
  HolonomyWindow w = enumerate_orbit(torus, QuadVal(5), QuadVal(5));
  CHECK_THROWS_AS(heights_table(w, QuadVal(10)), WindowError);
}

TEST_CASE("torus totient identity up to 200") {
  auto torus = oracles::test_surface("torus");
  HeightTable t = heights_table_direct(torus, QuadVal(201), false, false);
  REQUIRE(t.size() == 200);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.entries[i].phi == oracles::classical_totient(static_cast<std::int64_t>(i + 1)));
  }
}

TEST_CASE("triangle count matches the gcd oracle (not the density asymptotic)") {
  auto torus = oracles::test_surface("torus");
  HeightTable t = heights_table_direct(torus, QuadVal(100), false, false);
  double total = t.cum_phi.back();
  CHECK(total == static_cast<double>(oracles::gcd_triangle_count(100)));
}

TEST_CASE("window-based and direct builders agree") {
  auto golden = oracles::test_surface("golden_l");
  HolonomyWindow w = enumerate_triangle(golden, QuadVal(50));
  HeightTable a = heights_table(w, QuadVal(50));
  HeightTable b = heights_table_direct(golden, QuadVal(50), true, false);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.entries[i].zeta == b.entries[i].zeta);
    CHECK(a.entries[i].phi == b.entries[i].phi);
    REQUIRE(a.entries[i].reps.size() == b.entries[i].reps.size());
    for (std::size_t k = 0; k < a.entries[i].reps.size(); ++k)
      CHECK(a.entries[i].reps[k].x == b.entries[i].reps[k].x);
  }
}

TEST_CASE("torus c_omega estimate approaches 3/pi^2") {
  auto torus = oracles::test_surface("torus");
  HeightTable t = heights_table_direct(torus, QuadVal(500), false, false);
  const double target = 3.0 / (M_PI * M_PI);
  double c = estimate_c_omega(t);
  CHECK(std::abs(c - target) / target < 0.02);
  double w = weighted_height_sum(t);
  CHECK(std::abs(w / c - 2.0) < 0.03);
}

TEST_CASE("max height gap: torus is 1, golden L non-increasing in R") {
  auto torus = oracles::test_surface("torus");
  HeightTable t = heights_table_direct(torus, QuadVal(50), false, false);
  CHECK(*max_height_gap(t) == QuadVal(1));

  auto golden = oracles::test_surface("golden_l");
  HeightTable g50 = heights_table_direct(golden, QuadVal(50), false, false);
  HeightTable g200 = heights_table_direct(golden, QuadVal(200), false, false);
  auto gap50 = max_height_gap(g50);
  auto gap200 = max_height_gap(g200);
  REQUIRE(gap50.has_value());
  REQUIRE(gap200.has_value());
  CHECK(quad_cmp(*gap200, *gap50) <= 0);
}

TEST_CASE("determinant classes: 2 phi(j) on heights, 2 at zero, 0 off the height set") {
  auto torus = oracles::test_surface("torus");
  HolonomyWindow w = enumerate_orbit(torus, QuadVal(45), QuadVal(45));
  CHECK(det_class_count(w, QuadVal(6)) == 4);  // 2 * phi(6)
  CHECK(det_class_count(w, QuadVal(0)) == 2);
  CHECK(det_class_count(w, QuadVal(Rational(1, 2))) == 0);

  for (const char* name : {"torus", "golden_l", "octagon"}) {
    auto s = oracles::test_surface(name);
    HeightTable t = heights_table_direct(s, QuadVal(40), false, false);
    HolonomyWindow win = enumerate_orbit(s, s->alpha * QuadVal(41), QuadVal(41));
    for (const auto& e : t.entries) {
      if (quad_cmp(e.zeta, QuadVal(40)) > 0) break;
      CHECK(det_class_count(win, e.zeta) == 2 * e.phi);
    }
  }
}

TEST_CASE("phi is invariant under the choice of fundamental x-interval") {
  CounterRng rng(99);
  for (const char* name : {"torus", "golden_l"}) {
    auto s = oracles::test_surface(name);
    HeightTable t = heights_table_direct(s, QuadVal(12), true, false);
    REQUIRE(!t.empty());
    // large enough rectangle to shift the counting interval around
    HolonomyWindow w = enumerate_orbit(s, s->alpha * QuadVal(40), QuadVal(13));
    for (std::size_t ei = 0; ei < std::min<std::size_t>(4, t.size()); ++ei) {
      const auto& e = t.entries[ei];
      QuadVal period = s->alpha * e.zeta;
      for (int trial = 0; trial < 5; ++trial) {
        QuadVal offset(rational_of_double(rng.next_range(-3.0, 3.0)));
        std::int64_t count = 0;
        for (const Vec2& v : w.vectors) {
          if (v.y != e.zeta) continue;
          if (quad_cmp(v.x, offset) >= 0 && quad_cmp(v.x, offset + period) < 0) ++count;
        }
        CHECK(count == e.phi);
      }
    }
  }
}

TEST_CASE("alpha is the minimal period of the height patterns") {
  // If a preset shipped alpha equal to k times the true parabolic parameter,
  // every x-pattern would be invariant under a shift of alpha*j/k. Refute
  // that for k = 2, 3 on the first heights.
  for (const char* name : {"torus", "golden_l", "octagon"}) {
    auto s = oracles::test_surface(name);
    HeightTable t = heights_table_direct(s, QuadVal(10), true, false);
    REQUIRE(!t.empty());
    for (int k : {2, 3}) {
      bool refuted = false;
      for (std::size_t ei = 0; ei < t.size() && !refuted; ++ei) {
        const auto& e = t.entries[ei];
        QuadVal period = s->alpha * e.zeta;
        QuadVal shift = period / QuadVal(k);
        std::set<std::string> xs;
        for (const auto& rep : e.reps) xs.insert(to_exact_string(rep.x));
        for (const auto& rep : e.reps) {
          QuadVal moved = rep.x + shift;
          if (quad_cmp(moved, period) >= 0) moved = moved - period;
          if (xs.count(to_exact_string(moved)) == 0) refuted = true;
        }
      }
      CHECK(refuted);
    }
  }
}

TEST_CASE("csv export carries exact encodings") {
  auto torus = oracles::test_surface("torus");
  HeightTable t = heights_table_direct(torus, QuadVal(5), false, false);
  std::ostringstream os;
  write_heights_csv(os, t, "# cmd=heights\n");
  std::string s = os.str();
  CHECK(s.find("zeta,zeta_exact,phi") != std::string::npos);
  CHECK(s.find("1,1,1") != std::string::npos);
  CHECK(s.find("4,4,2") != std::string::npos);
}
