#include "bcz/surface.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include "bcz/orbit.hpp"

namespace bcz {

namespace {

using nlohmann::json;

Rational rat_of(const json& j, const char* num_key, const char* den_key) {
  long long num = j.at(num_key).get<long long>();
  long long den = j.at(den_key).get<long long>();
  if (den <= 0) throw PresetError("preset: denominators must be positive");
  return Rational(num) / Rational(den);
}

QuadVal quad_of(const json& j, int d) {
  Rational a = rat_of(j, "a_num", "a_den");
  Rational b = rat_of(j, "b_num", "b_den");
  if (b.is_zero()) return QuadVal(a);
  return QuadVal(a, b, d);
}

Mat2 mat_of(const json& j, int d) {
  if (!j.is_array() || j.size() != 4) throw PresetError("preset: matrix needs 4 entries");
  return Mat2{quad_of(j[0], d), quad_of(j[1], d), quad_of(j[2], d), quad_of(j[3], d)};
}

Vec2 vec_of(const json& j, int d) {
  if (!j.is_array() || j.size() != 2) throw PresetError("preset: vector needs 2 entries");
  return Vec2{quad_of(j[0], d), quad_of(j[1], d)};
}

bool square_free(int d) {
  if (d < 0) return false;
  for (int p = 2; p * p <= d; ++p)
    if (d % (p * p) == 0) return false;
  return true;
}

std::string mat_key(const Mat2& m) {
  return to_exact_string(m.e11) + "|" + to_exact_string(m.e12) + "|" + to_exact_string(m.e21) +
         "|" + to_exact_string(m.e22);
}

void validate(const SurfaceModel& s) {
  if (s.name.empty()) throw PresetError("preset: missing name");
  if (!square_free(s.d)) throw PresetError("preset: d must be a square-free nonnegative integer");
  if (s.alpha.sign() <= 0) throw PresetError("preset: alpha must be positive");
  if (s.generators.empty()) throw PresetError("preset: no generators");
  for (const Mat2& g : s.generators) {
    if (mat_det(g) != QuadVal(1)) throw PresetError("preset: generator with determinant != 1");
  }
  if (s.reps.empty() || !(s.reps[0].x == QuadVal(1) && s.reps[0].y == QuadVal(0)))
    throw PresetError("preset: reps must start with (1,0)");
  if (!s.has_minus_id) throw PresetError("preset: models without -Id are not supported");

  if (!word_reachable(s.generators, s.parabolic(), 10))
    throw PresetError("preset: [[1,alpha],[0,1]] is not a short word in the generators");
  if (!word_reachable(s.generators, mat_neg(mat_identity()), 10))
    throw PresetError("preset: -Id is not a short word in the generators");
}

// Desk-scale check of the normalization: the shortest horizontal vector of
// Lambda is exactly (1,0).
void validate_horizontal(const SurfacePtr& s) {
  EnumerateOptions opts;
  opts.node_cap = 200000;
  HolonomyWindow w = enumerate_orbit(s, QuadVal(2), QuadVal(Rational(1, 4)), opts);
  bool unit_found = false;
  for (const Vec2& v : w.vectors) {
    if (!v.y.is_zero()) continue;
    int cmp = quad_cmp(v.x, QuadVal(1));
    if (cmp < 0) throw PresetError("preset: horizontal vector shorter than 1 found");
    if (cmp == 0) unit_found = true;
  }
  if (!unit_found) throw PresetError("preset: horizontal vector (1,0) not found in window");
}

}  // namespace

bool word_reachable(const std::vector<Mat2>& generators, const Mat2& target, int max_depth,
                    std::size_t state_cap) {
  std::unordered_set<std::string> seen;
  std::deque<std::pair<Mat2, int>> frontier;
  frontier.emplace_back(mat_identity(), 0);
  seen.insert(mat_key(mat_identity()));
  while (!frontier.empty()) {
    auto [m, depth] = frontier.front();
    frontier.pop_front();
    if (mat_eq(m, target)) return true;
    if (depth >= max_depth) continue;
    for (const Mat2& g : generators) {
      Mat2 next = mat_mul(g, m);
      if (seen.size() > state_cap)
        throw PresetError("word search exceeded its state cap");
      if (seen.insert(mat_key(next)).second) frontier.emplace_back(next, depth + 1);
    }
  }
  return false;
}

SurfacePtr load_surface_json_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw PresetError(std::string("preset: invalid JSON: ") + e.what());
  }
  auto s = std::make_shared<SurfaceModel>();
  try {
    s->name = j.at("name").get<std::string>();
    s->d = j.at("d").get<int>();
    s->alpha = quad_of(j.at("alpha"), s->d);
    for (const auto& g : j.at("generators")) s->generators.push_back(mat_of(g, s->d));
    for (const auto& r : j.at("reps")) s->reps.push_back(vec_of(r, s->d));
    s->has_minus_id = j.value("has_minus_id", true);
    s->citation = j.value("citation", std::string());
  } catch (const PresetError&) {
    throw;
  } catch (const std::exception& e) {
    throw PresetError(std::string("preset: missing or malformed field: ") + e.what());
  }
  // Close the generating set under inverses.
  std::vector<Mat2> gens = s->generators;
  for (const Mat2& g : gens) {
    Mat2 inv = mat_inverse(g);
    bool present = false;
    for (const Mat2& h : s->generators)
      if (mat_eq(h, inv)) {
        present = true;
        break;
      }
    if (!present) s->generators.push_back(inv);
  }
  s->alpha_f = to_double(s->alpha);
  validate(*s);
  SurfacePtr ptr = s;
  validate_horizontal(ptr);
  return ptr;
}

SurfacePtr load_surface(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PresetError("preset: cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_surface_json_text(text);
}

std::string resolve_preset_path(const std::string& name_or_path) {
  namespace fs = std::filesystem;
  if (fs::exists(name_or_path)) return name_or_path;
  std::vector<std::string> dirs;
  if (const char* env = std::getenv("BCZ_PRESET_DIR")) dirs.push_back(env);
  dirs.push_back("presets");
#ifdef BCZ_INSTALL_PRESET_DIR
  dirs.push_back(BCZ_INSTALL_PRESET_DIR);
#endif
  std::string base = name_or_path;
  // Allow bare names: torus, golden_l, octagon.
  for (const auto& dir : dirs) {
    fs::path p = fs::path(dir) / (base + ".json");
    if (fs::exists(p)) return p.string();
    p = fs::path(dir) / base;
    if (fs::exists(p)) return p.string();
  }
  throw PresetError("preset: cannot resolve '" + name_or_path + "'");
}

}  // namespace bcz
