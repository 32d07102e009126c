#include "bcz/orbit.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <deque>
#include <unordered_map>
#include <unordered_set>

namespace bcz {

namespace {

struct PackedKey {
  std::array<std::int64_t, 8> v{};
  bool operator==(const PackedKey& o) const { return v == o.v; }
};

struct PackedKeyHash {
  std::size_t operator()(const PackedKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::int64_t x : k.v) {
      h ^= static_cast<std::uint64_t>(x);
      h *= 0x100000001b3ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

void pack_coord(const QuadVal& q, std::int64_t* out) {
  out[0] = to_int64(Int(boost::multiprecision::numerator(q.ra())));
  out[1] = to_int64(Int(boost::multiprecision::denominator(q.ra())));
  out[2] = to_int64(Int(boost::multiprecision::numerator(q.rb())));
  out[3] = to_int64(Int(boost::multiprecision::denominator(q.rb())));
}

PackedKey pack_vec(const Vec2& v) {
  PackedKey k;
  pack_coord(v.x, k.v.data());
  pack_coord(v.y, k.v.data() + 4);
  return k;
}

// Exact BFS over canonical parabolic classes: fold by -Id, reduce x into
// [0, alpha*y). Generators act on every translate of a class inside the
// pruning rectangle (the translates themselves are self-loops of the class
// graph; the rest of the orbit hangs off them).
class GenericClassBfs {
 public:
  GenericClassBfs(const SurfacePtr& surface, double y_bound, double x_bound,
                  const EnumerateOptions& opts)
      : surface_(surface), y_bound_(y_bound), x_bound_(x_bound), opts_(opts) {}

  void run(const std::function<void(const Vec2&, const Mat2*)>& visit) {
    std::unordered_set<PackedKey, PackedKeyHash> seen;
    std::deque<std::pair<Vec2, Mat2>> frontier;
    std::uint64_t nodes = 0;
    const QuadVal& alpha = surface_->alpha;
    const QuadVal x_bound_q(rational_of_double(x_bound_));

    auto push = [&](const Vec2& raw, const Mat2* gamma_raw) {
      Vec2 vec = raw;
      int sign = 1;
      int sy = vec.y.sign();
      if (sy < 0 || (sy == 0 && vec.x.sign() < 0)) {
        vec = vec_neg(vec);
        sign = -1;
        sy = -sy;
      }
      Int shift = 0;
      if (sy > 0) {
        if (to_double(vec.y) > y_bound_) return;
        QuadVal period = alpha * vec.y;
        shift = floor_q(vec.x / period);
        if (!shift.is_zero()) vec.x = vec.x - QuadVal(Rational(shift)) * period;
      } else {
        if (to_double(vec.x) > x_bound_) return;
      }
      PackedKey key = pack_vec(vec);
      if (!seen.insert(key).second) return;
      if (++nodes > opts_.node_cap) throw BudgetError(opts_.node_cap);
      Mat2 gamma;
      if (opts_.with_witnesses && gamma_raw != nullptr) {
        gamma = *gamma_raw;
        if (sign < 0) gamma = mat_neg(gamma);
        if (!shift.is_zero())
          gamma = mat_mul(parabolic_mat(-(alpha * QuadVal(Rational(shift)))), gamma);
      }
      frontier.emplace_back(std::move(vec), std::move(gamma));
    };

    if (opts_.with_witnesses && surface_->reps.size() > 1)
      throw WindowError("witness tracking supports single-orbit models only");
    for (std::size_t i = 0; i < surface_->reps.size(); ++i) {
      if (opts_.with_witnesses && i == 0) {
        Mat2 id = mat_identity();
        push(surface_->reps[i], &id);
      } else {
        push(surface_->reps[i], nullptr);
      }
    }

    while (!frontier.empty()) {
      auto [vec, gamma] = std::move(frontier.front());
      frontier.pop_front();
      visit(vec, opts_.with_witnesses ? &gamma : nullptr);
      if (vec.y.is_zero()) {
        for (const Mat2& g : surface_->generators) {
          Vec2 next = mat_apply(g, vec);
          if (opts_.with_witnesses) {
            Mat2 next_gamma = mat_mul(g, gamma);
            push(next, &next_gamma);
          } else {
            push(next, nullptr);
          }
        }
        continue;
      }
      QuadVal period = alpha * vec.y;
      Int k_lo = ceil_q((-x_bound_q - vec.x) / period);
      Int k_hi = floor_q((x_bound_q - vec.x) / period);
      Vec2 translate{vec.x + QuadVal(Rational(k_lo)) * period, vec.y};
      Mat2 tr_gamma;
      if (opts_.with_witnesses)
        tr_gamma = mat_mul(parabolic_mat(alpha * QuadVal(Rational(k_lo))), gamma);
      Mat2 step = parabolic_mat(alpha);
      for (Int k = k_lo; k <= k_hi; ++k) {
        for (const Mat2& g : surface_->generators) {
          Vec2 next = mat_apply(g, translate);
          if (opts_.with_witnesses) {
            Mat2 next_gamma = mat_mul(g, tr_gamma);
            push(next, &next_gamma);
          } else {
            push(next, nullptr);
          }
        }
        translate.x += period;
        if (opts_.with_witnesses) tr_gamma = mat_mul(step, tr_gamma);
      }
    }
  }

 private:
  SurfacePtr surface_;
  double y_bound_;
  double x_bound_;
  EnumerateOptions opts_;
};

// Machine-word fast path for integer lattices (d == 0, integral generators,
// reps, and alpha), e.g. the square torus. Witnesses stay integral.
struct IntState {
  std::int64_t x, y;
  bool operator==(const IntState& o) const { return x == o.x && y == o.y; }
};
struct IntStateHash {
  std::size_t operator()(const IntState& s) const {
    std::uint64_t z = static_cast<std::uint64_t>(s.x) * 0x9E3779B97F4A7C15ULL +
                      static_cast<std::uint64_t>(s.y);
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    return static_cast<std::size_t>(z);
  }
};

struct IntMat {
  std::int64_t a, b, c, d;
};

std::optional<std::int64_t> quad_to_int64(const QuadVal& q) {
  if (!q.is_rational()) return std::nullopt;
  if (boost::multiprecision::denominator(q.ra()) != 1) return std::nullopt;
  Int num = Int(boost::multiprecision::numerator(q.ra()));
  static const Int kBound = Int(1) << 40;
  if (num > kBound || num < -kBound) return std::nullopt;
  return num.convert_to<std::int64_t>();
}

std::optional<IntMat> mat_to_int(const Mat2& m) {
  auto a = quad_to_int64(m.e11), b = quad_to_int64(m.e12);
  auto c = quad_to_int64(m.e21), d = quad_to_int64(m.e22);
  if (!a || !b || !c || !d) return std::nullopt;
  return IntMat{*a, *b, *c, *d};
}

class IntClassBfs {
 public:
  static std::optional<IntClassBfs> make(const SurfacePtr& surface, double y_bound,
                                         double x_bound, const EnumerateOptions& opts) {
    if (surface->d != 0) return std::nullopt;
    if (opts.with_witnesses && surface->reps.size() > 1) return std::nullopt;
    auto alpha = quad_to_int64(surface->alpha);
    if (!alpha || *alpha <= 0) return std::nullopt;
    IntClassBfs bfs;
    bfs.alpha_ = *alpha;
    bfs.opts_ = opts;
    bfs.y_bound_ = static_cast<std::int64_t>(y_bound);
    bfs.x_bound_ = static_cast<std::int64_t>(x_bound);
    if (bfs.y_bound_ > (std::int64_t(1) << 30) || bfs.x_bound_ > (std::int64_t(1) << 30))
      return std::nullopt;
    std::int64_t entry_max = 0;
    for (const Mat2& g : surface->generators) {
      auto gi = mat_to_int(g);
      if (!gi) return std::nullopt;
      for (std::int64_t e : {gi->a, gi->b, gi->c, gi->d})
        entry_max = std::max(entry_max, e < 0 ? -e : e);
      bfs.gens_.push_back(*gi);
    }
    if (entry_max > (std::int64_t(1) << 20)) return std::nullopt;
    for (const Vec2& r : surface->reps) {
      auto x = quad_to_int64(r.x), y = quad_to_int64(r.y);
      if (!x || !y) return std::nullopt;
      bfs.seeds_.push_back(IntState{*x, *y});
    }
    return bfs;
  }

  void run(const std::function<void(const Vec2&, const Mat2*)>& visit) {
    struct Node {
      IntState s;
      IntMat w;
    };
    std::unordered_set<IntState, IntStateHash> seen;
    seen.reserve(1 << 16);
    std::deque<Node> frontier;
    std::uint64_t nodes = 0;
    const bool wit = opts_.with_witnesses;

    auto push = [&](std::int64_t x, std::int64_t y, IntMat w) {
      if (y < 0 || (y == 0 && x < 0)) {
        x = -x;
        y = -y;
        if (wit) w = IntMat{-w.a, -w.b, -w.c, -w.d};
      }
      if (y > y_bound_) return;
      if (y == 0 && x > x_bound_) return;
      if (y > 0) {
        std::int64_t p = alpha_ * y;
        std::int64_t k = x / p;
        if (x % p < 0) --k;
        if (k != 0) {
          x -= k * p;
          if (wit) {
            // T^{-k}: row1 -= k*alpha*row2
            w.a -= k * alpha_ * w.c;
            w.b -= k * alpha_ * w.d;
          }
        }
      }
      if (!seen.insert(IntState{x, y}).second) return;
      if (++nodes > opts_.node_cap) throw BudgetError(opts_.node_cap);
      frontier.push_back(Node{IntState{x, y}, w});
    };

    const IntMat id{1, 0, 0, 1};
    for (std::size_t i = 0; i < seeds_.size(); ++i) push(seeds_[i].x, seeds_[i].y, id);

    while (!frontier.empty()) {
      Node node = frontier.front();
      frontier.pop_front();
      {
        Vec2 v{QuadVal(node.s.x), QuadVal(node.s.y)};
        if (wit) {
          Mat2 wm{QuadVal(node.w.a), QuadVal(node.w.b), QuadVal(node.w.c), QuadVal(node.w.d)};
          visit(v, &wm);
        } else {
          visit(v, nullptr);
        }
      }
      const std::int64_t sx = node.s.x, sy = node.s.y;
      if (sy == 0) {
        for (const IntMat& g : gens_)
          push(g.a * sx + g.b * sy, g.c * sx + g.d * sy,
               wit ? IntMat{g.a * node.w.a + g.b * node.w.c, g.a * node.w.b + g.b * node.w.d,
                            g.c * node.w.a + g.d * node.w.c, g.c * node.w.b + g.d * node.w.d}
                   : id);
        continue;
      }
      std::int64_t p = alpha_ * sy;
      std::int64_t k_lo = -((x_bound_ + sx) / p + 1);
      std::int64_t k_hi = (x_bound_ - sx) / p + 1;
      std::int64_t x = sx + k_lo * p;
      IntMat tw = node.w;
      if (wit) {
        // T^{k_lo}: row1 += k_lo*alpha*row2
        tw.a += k_lo * alpha_ * tw.c;
        tw.b += k_lo * alpha_ * tw.d;
      }
      for (std::int64_t k = k_lo; k <= k_hi; ++k, x += p) {
        if (x >= -x_bound_ && x <= x_bound_) {
          for (const IntMat& g : gens_) {
            if (wit) {
              IntMat nw{g.a * tw.a + g.b * tw.c, g.a * tw.b + g.b * tw.d,
                        g.c * tw.a + g.d * tw.c, g.c * tw.b + g.d * tw.d};
              push(g.a * x + g.b * sy, g.c * x + g.d * sy, nw);
            } else {
              push(g.a * x + g.b * sy, g.c * x + g.d * sy, id);
            }
          }
        }
        if (wit) {
          tw.a += alpha_ * tw.c;
          tw.b += alpha_ * tw.d;
        }
      }
    }
  }

 private:
  std::int64_t alpha_ = 1;
  std::int64_t y_bound_ = 0, x_bound_ = 0;
  std::vector<IntMat> gens_;
  std::vector<IntState> seeds_;
  EnumerateOptions opts_;
};

void run_class_bfs(const SurfacePtr& surface, double y_bound, double x_bound,
                   const EnumerateOptions& opts,
                   const std::function<void(const Vec2&, const Mat2*)>& visit) {
  if (auto fast = IntClassBfs::make(surface, y_bound, x_bound, opts)) {
    fast->run(visit);
    return;
  }
  GenericClassBfs bfs(surface, y_bound, x_bound, opts);
  bfs.run(visit);
}

void sort_window(HolonomyWindow& w) {
  if (w.witnesses.empty()) {
    std::sort(w.vectors.begin(), w.vectors.end(), [](const Vec2& a, const Vec2& b) {
      int c = quad_cmp(a.y, b.y);
      if (c != 0) return c < 0;
      return quad_cmp(a.x, b.x) < 0;
    });
    return;
  }
  std::vector<std::size_t> order(w.vectors.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    int c = quad_cmp(w.vectors[i].y, w.vectors[j].y);
    if (c != 0) return c < 0;
    return quad_cmp(w.vectors[i].x, w.vectors[j].x) < 0;
  });
  std::vector<Vec2> vs;
  std::vector<Mat2> ws;
  vs.reserve(order.size());
  ws.reserve(order.size());
  for (std::size_t i : order) {
    vs.push_back(std::move(w.vectors[i]));
    ws.push_back(std::move(w.witnesses[i]));
  }
  w.vectors = std::move(vs);
  w.witnesses = std::move(ws);
}

// One vector per direction: keep the shortest. Directions are distinct by
// construction for a visible Lambda; this guards imported data.
void visibility_filter(HolonomyWindow& w) {
  struct Best {
    std::size_t idx;
    QuadVal len2;
  };
  std::unordered_map<PackedKey, Best, PackedKeyHash> best;
  std::vector<char> keep(w.vectors.size(), 1);
  for (std::size_t i = 0; i < w.vectors.size(); ++i) {
    const Vec2& v = w.vectors[i];
    Vec2 dir;
    if (v.y.is_zero()) {
      dir = {QuadVal(v.x.sign()), QuadVal(0)};
    } else {
      dir = {v.x / v.y, QuadVal(1)};
    }
    PackedKey key = pack_vec(dir);
    QuadVal len2 = v.x * v.x + v.y * v.y;
    auto it = best.find(key);
    if (it == best.end()) {
      best.emplace(key, Best{i, len2});
    } else if (quad_cmp(len2, it->second.len2) < 0) {
      keep[it->second.idx] = 0;
      it->second = Best{i, len2};
    } else {
      keep[i] = 0;
    }
  }
  std::size_t out = 0;
  for (std::size_t i = 0; i < w.vectors.size(); ++i) {
    if (!keep[i]) continue;
    if (out != i) {
      w.vectors[out] = std::move(w.vectors[i]);
      if (!w.witnesses.empty()) w.witnesses[out] = std::move(w.witnesses[i]);
    }
    ++out;
  }
  w.vectors.resize(out);
  if (!w.witnesses.empty()) w.witnesses.resize(out);
}

}  // namespace

void visit_orbit_classes(const SurfacePtr& surface, const QuadVal& height_cutoff,
                         const EnumerateOptions& opts,
                         const std::function<void(const Vec2&, const Mat2*)>& visit) {
  if (height_cutoff.sign() <= 0) throw WindowError("height cutoff must be positive");
  double cutoff_f = to_double(height_cutoff);
  double y_bound = opts.dilation * cutoff_f + 1.0;
  double x_bound = opts.dilation * std::max(1.0, surface->alpha_f * cutoff_f) + 1.0;
  run_class_bfs(surface, y_bound, x_bound, opts, [&](const Vec2& v, const Mat2* gamma) {
    if (v.y.sign() > 0 && quad_cmp(v.y, height_cutoff) >= 0) return;
    visit(v, gamma);
  });
}

HolonomyWindow enumerate_triangle(const SurfacePtr& surface, const QuadVal& height_cutoff,
                                  const EnumerateOptions& opts) {
  HolonomyWindow w;
  w.surface = surface;
  w.y_max = height_cutoff;
  w.x_max = surface->alpha * height_cutoff;
  w.domain = WindowDomain::kTriangle;
  std::uint64_t emitted = 0;
  visit_orbit_classes(surface, height_cutoff, opts, [&](const Vec2& v, const Mat2* gamma) {
    if (v.y.sign() <= 0) return;  // triangle excludes the horizontal row
    if (++emitted > opts.node_cap) throw BudgetError(opts.node_cap);
    w.vectors.push_back(v);
    if (opts.with_witnesses && gamma != nullptr) w.witnesses.push_back(*gamma);
  });
  sort_window(w);
  return w;
}

HolonomyWindow enumerate_orbit(const SurfacePtr& surface, const QuadVal& x_max,
                               const QuadVal& y_max, const EnumerateOptions& opts) {
  if (x_max.sign() <= 0 || y_max.sign() <= 0)
    throw WindowError("window bounds must be positive");
  HolonomyWindow w;
  w.surface = surface;
  w.x_max = x_max;
  w.y_max = y_max;
  w.domain = WindowDomain::kRectangle;

  double y_bound = opts.dilation * to_double(y_max) + 1.0;
  double x_bound = opts.dilation * std::max(1.0, to_double(x_max)) + 1.0;
  std::uint64_t emitted = 0;

  auto emit = [&](const Vec2& v, const Mat2* gamma) {
    if (++emitted > opts.node_cap) throw BudgetError(opts.node_cap);
    w.vectors.push_back(v);
    if (opts.with_witnesses && gamma != nullptr) w.witnesses.push_back(*gamma);
  };

  run_class_bfs(surface, y_bound, x_bound, opts, [&](const Vec2& v, const Mat2* gamma) {
    if (v.y.is_zero()) {
      if (quad_cmp(v.x, x_max) <= 0) emit(v, gamma);
      return;
    }
    if (quad_cmp(v.y, y_max) >= 0) return;
    // Expand the parabolic class across |x| <= x_max.
    QuadVal period = surface->alpha * v.y;
    Int k_lo = ceil_q((-x_max - v.x) / period);
    Int k_hi = floor_q((x_max - v.x) / period);
    Vec2 shifted{v.x + QuadVal(Rational(k_lo)) * period, v.y};
    for (Int k = k_lo; k <= k_hi; ++k) {
      if (gamma != nullptr && opts.with_witnesses) {
        Mat2 g = mat_mul(parabolic_mat(surface->alpha * QuadVal(Rational(k))), *gamma);
        emit(shifted, &g);
      } else {
        emit(shifted, nullptr);
      }
      shifted.x += period;
    }
  });

  if (opts.check_visibility) visibility_filter(w);
  sort_window(w);
  return w;
}

}  // namespace bcz
