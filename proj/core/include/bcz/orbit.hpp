#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcz/surface.hpp"

namespace bcz {

/// Orbit enumeration ran past its node budget.
struct BudgetError : std::runtime_error {
  std::uint64_t cap;
  explicit BudgetError(std::uint64_t cap_)
      : std::runtime_error("orbit enumeration exceeded node cap " + std::to_string(cap_)),
        cap(cap_) {}
};

struct WindowError : std::runtime_error {
  explicit WindowError(const std::string& w) : std::runtime_error(w) {}
};

struct EnumerateOptions {
  double dilation = 2.0;              // BFS prune bound relative to the target window
  std::uint64_t node_cap = 10000000;  // BFS states + emitted vectors
  bool with_witnesses = false;        // track gamma with gamma*(1,0) = v
  bool check_visibility = false;      // assert one vector per direction
};

enum class WindowDomain { kRectangle, kTriangle };

/// Finite cut of Lambda. Rectangle domain: 0 < y < y_max, |x| <= x_max,
/// plus horizontal vectors (x, 0) with 0 < x <= x_max. Triangle domain:
/// 0 < y < y_max, 0 <= x < alpha*y (one representative per parabolic class).
struct HolonomyWindow {
  SurfacePtr surface;
  QuadVal x_max, y_max;
  WindowDomain domain = WindowDomain::kRectangle;
  std::vector<Vec2> vectors;    // sorted by (y, x), exact order
  std::vector<Mat2> witnesses;  // parallel to vectors when tracked

  bool has_witnesses() const { return !witnesses.empty(); }
};

HolonomyWindow enumerate_orbit(const SurfacePtr& surface, const QuadVal& x_max,
                               const QuadVal& y_max, const EnumerateOptions& opts = {});

HolonomyWindow enumerate_triangle(const SurfacePtr& surface, const QuadVal& height_cutoff,
                                  const EnumerateOptions& opts = {});

/// Streaming visitor over parabolic-class representatives (x, y) with
/// y > 0, 0 <= x < alpha*y, y < height_cutoff, plus the horizontal class.
/// Witness (when requested) satisfies witness*(1,0) = (x, y).
void visit_orbit_classes(const SurfacePtr& surface, const QuadVal& height_cutoff,
                         const EnumerateOptions& opts,
                         const std::function<void(const Vec2&, const Mat2*)>& visit);

}  // namespace bcz
