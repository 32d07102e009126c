#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "bcz/orbit.hpp"

namespace bcz {

struct HeightRep {
  QuadVal x;
  double x_f = 0.0;
  Mat2 witness;  // gamma with gamma*(1,0) = (x, zeta); valid when table tracks witnesses
};

struct HeightEntry {
  QuadVal zeta;
  double zeta_f = 0.0;
  std::int64_t phi = 0;
  std::vector<HeightRep> reps;  // x in [0, alpha*zeta), sorted; kept when with_reps
};

/// Ordered heights J = {zeta_1 < zeta_2 < ...} below a cutoff, with the
/// geometric totient phi(zeta) = #{x in [0, alpha*zeta) : (x, zeta) in Lambda}.
struct HeightTable {
  SurfacePtr surface;
  QuadVal cutoff;
  double cutoff_f = 0.0;
  bool with_reps = false;
  bool with_witnesses = false;
  std::vector<HeightEntry> entries;       // ascending zeta
  std::vector<double> cum_phi;            // prefix sums of phi
  std::vector<double> cum_phi_over_zeta;  // prefix sums of phi/zeta

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  /// Number of heights strictly below r.
  std::size_t count_below(double r) const;
};

/// Builds the table from an enumerated window. The window must cover the
/// triangle 0 < y < R, 0 <= x < alpha*y (rectangle windows need
/// x_max >= alpha*R and y_max >= R); otherwise WindowError.
HeightTable heights_table(const HolonomyWindow& window, const QuadVal& R);

/// Streaming builder; preferred for large cutoffs since it never
/// materializes a window.
HeightTable heights_table_direct(const SurfacePtr& surface, const QuadVal& R, bool with_reps,
                                 bool with_witnesses, const EnumerateOptions& opts = {});

/// R^-2 * sum of phi over heights < R.
double estimate_c_omega(const HeightTable& table);
double estimate_c_omega(const HeightTable& table, double R);

/// R^-1 * sum of phi(zeta)/zeta over heights < R.
double weighted_height_sum(const HeightTable& table);
double weighted_height_sum(const HeightTable& table, double R);

/// Largest gap zeta_{k+1} - zeta_k; nullopt when fewer than two heights.
std::optional<QuadVal> max_height_gap(const HeightTable& table);

/// Representatives (e1, v) with |det(e1, v)| = j and the x-coordinate of v
/// in [0, alpha*j), both height signs. Exactly 2*phi(j) for j in J, 2 for
/// j = 0, else 0. Window must be a rectangle with y_max > j, x_max >= alpha*j.
std::int64_t det_class_count(const HolonomyWindow& window, const QuadVal& j);

void write_heights_csv(std::ostream& os, const HeightTable& table,
                       const std::string& config_echo);

}  // namespace bcz
