#include "bcz/heights.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace bcz {

namespace {

void finalize(HeightTable& t) {
  std::sort(t.entries.begin(), t.entries.end(),
            [](const HeightEntry& a, const HeightEntry& b) { return quad_cmp(a.zeta, b.zeta) < 0; });
  for (auto& e : t.entries) {
    e.zeta_f = to_double(e.zeta);
    std::sort(e.reps.begin(), e.reps.end(),
              [](const HeightRep& a, const HeightRep& b) { return quad_cmp(a.x, b.x) < 0; });
    for (auto& r : e.reps) r.x_f = to_double(r.x);
  }
  t.cum_phi.resize(t.entries.size());
  t.cum_phi_over_zeta.resize(t.entries.size());
  double acc = 0.0, accw = 0.0;
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    acc += static_cast<double>(t.entries[i].phi);
    accw += static_cast<double>(t.entries[i].phi) / t.entries[i].zeta_f;
    t.cum_phi[i] = acc;
    t.cum_phi_over_zeta[i] = accw;
  }
}

struct ZetaKeyLess {
  bool operator()(const QuadVal& a, const QuadVal& b) const { return quad_cmp(a, b) < 0; }
};

}  // namespace

std::size_t HeightTable::count_below(double r) const {
  std::size_t lo = 0, hi = entries.size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (entries[mid].zeta_f < r)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

HeightTable heights_table(const HolonomyWindow& window, const QuadVal& R) {
  if (R.sign() <= 0) throw WindowError("heights_table: cutoff must be positive");
  const SurfacePtr& s = window.surface;
  if (quad_cmp(window.y_max, R) < 0)
    throw WindowError("heights_table: window y_max < R, triangle not covered");
  if (window.domain == WindowDomain::kRectangle &&
      quad_cmp(window.x_max, s->alpha * R) < 0)
    throw WindowError("heights_table: window x_max < alpha*R, triangle not covered");

  HeightTable t;
  t.surface = s;
  t.cutoff = R;
  t.cutoff_f = to_double(R);
  t.with_reps = true;
  t.with_witnesses = window.has_witnesses();

  std::map<QuadVal, std::size_t, ZetaKeyLess> index;
  for (std::size_t i = 0; i < window.vectors.size(); ++i) {
    const Vec2& v = window.vectors[i];
    if (v.y.sign() <= 0 || quad_cmp(v.y, R) >= 0) continue;
    if (v.x.sign() < 0 || quad_cmp(v.x, s->alpha * v.y) >= 0) continue;
    auto [it, inserted] = index.try_emplace(v.y, t.entries.size());
    if (inserted) {
      HeightEntry e;
      e.zeta = v.y;
      t.entries.push_back(std::move(e));
    }
    HeightEntry& e = t.entries[it->second];
    e.phi += 1;
    HeightRep rep;
    rep.x = v.x;
    if (t.with_witnesses) rep.witness = window.witnesses[i];
    e.reps.push_back(std::move(rep));
  }
  finalize(t);
  return t;
}

HeightTable heights_table_direct(const SurfacePtr& surface, const QuadVal& R, bool with_reps,
                                 bool with_witnesses, const EnumerateOptions& opts) {
  if (R.sign() <= 0) throw WindowError("heights_table: cutoff must be positive");
  HeightTable t;
  t.surface = surface;
  t.cutoff = R;
  t.cutoff_f = to_double(R);
  t.with_reps = with_reps || with_witnesses;
  t.with_witnesses = with_witnesses;

  EnumerateOptions o = opts;
  o.with_witnesses = with_witnesses;

  std::map<QuadVal, std::size_t, ZetaKeyLess> index;
  visit_orbit_classes(surface, R, o, [&](const Vec2& v, const Mat2* gamma) {
    if (v.y.sign() <= 0) return;
    auto [it, inserted] = index.try_emplace(v.y, t.entries.size());
    if (inserted) {
      HeightEntry e;
      e.zeta = v.y;
      t.entries.push_back(std::move(e));
    }
    HeightEntry& e = t.entries[it->second];
    e.phi += 1;
    if (t.with_reps) {
      HeightRep rep;
      rep.x = v.x;
      if (with_witnesses && gamma != nullptr) rep.witness = *gamma;
      e.reps.push_back(std::move(rep));
    }
  });
  finalize(t);
  return t;
}

double estimate_c_omega(const HeightTable& table) { return estimate_c_omega(table, table.cutoff_f); }

double estimate_c_omega(const HeightTable& table, double R) {
  if (R <= 0) throw WindowError("estimate_c_omega: R must be positive");
  if (R > table.cutoff_f * (1 + 1e-12))
    throw WindowError("estimate_c_omega: R exceeds table cutoff");
  std::size_t n = table.count_below(R);
  if (n == 0) return 0.0;
  return table.cum_phi[n - 1] / (R * R);
}

double weighted_height_sum(const HeightTable& table) {
  return weighted_height_sum(table, table.cutoff_f);
}

double weighted_height_sum(const HeightTable& table, double R) {
  if (R <= 0) throw WindowError("weighted_height_sum: R must be positive");
  if (R > table.cutoff_f * (1 + 1e-12))
    throw WindowError("weighted_height_sum: R exceeds table cutoff");
  std::size_t n = table.count_below(R);
  if (n == 0) return 0.0;
  return table.cum_phi_over_zeta[n - 1] / R;
}

std::optional<QuadVal> max_height_gap(const HeightTable& table) {
  if (table.entries.size() < 2) return std::nullopt;
  QuadVal best = table.entries[1].zeta - table.entries[0].zeta;
  for (std::size_t i = 2; i < table.entries.size(); ++i) {
    QuadVal gap = table.entries[i].zeta - table.entries[i - 1].zeta;
    if (quad_cmp(gap, best) > 0) best = gap;
  }
  return best;
}

std::int64_t det_class_count(const HolonomyWindow& window, const QuadVal& j) {
  if (j.sign() < 0) throw WindowError("det_class_count: j must be nonnegative");
  const SurfacePtr& s = window.surface;
  if (j.is_zero()) {
    // (e1, +-e1): requires the unit horizontal to be present.
    for (const Vec2& v : window.vectors)
      if (v.y.is_zero() && v.x == QuadVal(1)) return 2;
    throw WindowError("det_class_count: window does not contain (1,0)");
  }
  if (window.domain != WindowDomain::kRectangle)
    throw WindowError("det_class_count: rectangle window required");
  if (quad_cmp(window.y_max, j) <= 0)
    throw WindowError("det_class_count: window y_max <= j");
  QuadVal aj = s->alpha * j;
  if (quad_cmp(window.x_max, aj) < 0)
    throw WindowError("det_class_count: window x_max < alpha*j");
  // |det(e1, v)| = |v_y| = j. Count x in [0, alpha j) at height +j, and via
  // -Id the height -j classes appear as x in (-alpha j, 0] at height +j.
  // The window is sorted by (y, x); binary-search the height slice.
  auto lo = std::lower_bound(window.vectors.begin(), window.vectors.end(), j,
                             [](const Vec2& v, const QuadVal& h) { return quad_cmp(v.y, h) < 0; });
  std::int64_t count = 0;
  for (auto it = lo; it != window.vectors.end() && it->y == j; ++it) {
    if (it->x.sign() >= 0 && quad_cmp(it->x, aj) < 0) ++count;
    if (it->x.sign() <= 0 && quad_cmp(it->x, -aj) > 0) ++count;
  }
  return count;
}

void write_heights_csv(std::ostream& os, const HeightTable& table,
                       const std::string& config_echo) {
  if (!config_echo.empty()) os << config_echo;
  os << "zeta,zeta_exact,phi\n";
  for (const auto& e : table.entries) {
    os << e.zeta_f << "," << to_exact_string(e.zeta) << "," << e.phi << "\n";
  }
}

}  // namespace bcz
