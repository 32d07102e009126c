#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcz/exact.hpp"

namespace bcz {

struct PresetError : std::runtime_error {
  explicit PresetError(const std::string& w) : std::runtime_error(w) {}
};

/// A lattice Veech-group model: generators of Gamma, orbit representatives
/// v_i with Lambda = union of Gamma v_i, and the horizontal parabolic
/// parameter alpha ([[1,alpha],[0,1]] stabilizes (1,0)).
struct SurfaceModel {
  std::string name;
  int d = 0;                      // field tag of Q(sqrt(d)); 0 = rationals
  QuadVal alpha;                  // > 0
  std::vector<Mat2> generators;   // closed under inverses
  std::vector<Vec2> reps;         // reps[0] == (1,0)
  bool has_minus_id = true;
  std::string citation;

  double alpha_f = 1.0;           // cached double of alpha

  Mat2 parabolic() const { return parabolic_mat(alpha); }
};

using SurfacePtr = std::shared_ptr<const SurfaceModel>;

/// Parses and validates a preset file. Validation covers: exact unit
/// determinants, reps[0] == (1,0), alpha > 0 realized as a word in the
/// generators, -Id reachable, square-free d, and (desk scale) that the
/// shortest horizontal vector of Lambda is exactly (1,0).
SurfacePtr load_surface(const std::string& path);
SurfacePtr load_surface_json_text(const std::string& json_text);

/// Resolves a --surface argument: an existing path wins, otherwise the
/// name is looked up in BCZ_PRESET_DIR, ./presets, and the install share dir.
std::string resolve_preset_path(const std::string& name_or_path);

/// Word-search helper: true when target is a product of <= max_depth
/// generators (state space capped; throws PresetError past the cap).
bool word_reachable(const std::vector<Mat2>& generators, const Mat2& target, int max_depth,
                    std::size_t state_cap = 200000);

}  // namespace bcz
