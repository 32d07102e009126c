#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "bcz/counting.hpp"

namespace bcz {

struct Condition1Result {
  double a = 0;
  double claimed = 0;    // a^2
  double empirical = 0;  // fraction of Omega samples with s <= a
  double sigma = 0;      // binomial standard error
  std::uint64_t n = 0;
  bool pass = false;     // |empirical - claimed| <= 4 sigma
};

struct Condition2Result {
  double a = 0;
  bool exact_zero = false;     // conjugacy defect identically zero, exact lane
  double max_defect_f = 0;     // float lane defect
  bool time_scaling_exact = false;  // level-a return time == a^-2 * level-1 time
  std::uint64_t n = 0;
  bool pass = false;
};

struct Condition3Slice {
  double a = 0;
  std::vector<double> fraction_displaced;  // one per delta in the grid
  double max_formula_error = 0;            // |(1-a)^2(s^2+t^2/a^2) - |(s,t)-(as,t/a)|^2|
  std::uint64_t n_in_triangle = 0;
};

struct Condition3Result {
  std::vector<double> delta_grid;
  std::vector<Condition3Slice> slices;  // one per a, increasing a
  bool pass = false;  // fractions decrease in a and end below 0.01; formula holds to 1e-10
};

struct Condition4Result {
  double a = 0, beta = 0, s0 = 0;
  std::int64_t n_n = 0;           // floor(beta / (1 - a))
  double c_omega_est = 0;         // lattice-model estimate used for the boxes
  double mean_return_level_a = 0; // measured calibration
  double min_return_observed = 0;
  double window_lo = 0, window_hi = 0;  // calibrated return-time window per N
  double measure_d0 = 0, measure_d1 = 0, measure_d2 = 0;
  double measure_intersection = 0;
  double ci_low = 0;              // one-sided 95% lower bound on the intersection measure
  double alt_window_lo = 0, alt_window_hi = 0;  // c_omega-based window, for sensitivity
  double measure_d0_alt = 0;
  double proxy_c1 = 0, proxy_c2 = 0, proxy_lower_bound = 0;  // c1 b - 3 c2 b^2
  std::uint64_t lemma_checked = 0, lemma_agree = 0;
  std::uint64_t n = 0;
  bool pass = false;  // ci_low > 0 and the excursion equivalence held sample-by-sample
};

struct CriterionReport {
  std::string surface;
  std::uint64_t seed = 0;
  Condition1Result cond1;
  Condition2Result cond2;
  Condition3Result cond3;
  Condition4Result cond4;
  bool all_pass() const { return cond1.pass && cond2.pass && cond3.pass && cond4.pass; }
};

Condition1Result check_condition1(const SurfacePtr& surface, double a, std::uint64_t n_samples,
                                  std::uint64_t seed);

Condition2Result check_condition2(const SurfacePtr& surface, double a, std::uint64_t n_samples,
                                  std::uint64_t seed, LatticeCache& cache);

Condition3Result check_condition3(const SurfacePtr& surface, const std::vector<double>& a_seq,
                                  const std::vector<double>& delta_grid, std::uint64_t n_samples,
                                  std::uint64_t seed, LatticeCache& cache);

Condition4Result check_condition4(const SurfacePtr& surface, double a, double beta, double s0,
                                  std::uint64_t n_samples, std::uint64_t seed, LatticeCache& cache);

CriterionReport run_criterion_report(const SurfacePtr& surface, double a, double beta, double s0,
                                     std::uint64_t n_samples, std::uint64_t seed,
                                     LatticeCache& cache);

std::string criterion_report_json(const CriterionReport& report);
void print_criterion_report(std::ostream& os, const CriterionReport& report);

struct MeanReturnStats {
  double mean = 0;
  double min = 0;  // smallest observed return time (reported, never asserted)
  std::uint64_t n_steps = 0;
};

/// Level-h return-time statistics along sampled exact orbits.
MeanReturnStats mean_return_time(const SurfacePtr& surface, double level, std::uint64_t n_points,
                                 int steps_per_point, std::uint64_t seed, LatticeCache& cache);

struct CorrelationDiagnostic {
  std::string observable;
  std::vector<int> lags;
  std::vector<double> cesaro_abs_corr;  // (1/L) sum_{l<=L} |corr_l| / var, per lag prefix
};

/// Observables: "ind_s" (s > 1/2), "ind_t" (t > 1/2), "coord_s", "coord_t",
/// "const". Single-orbit ergodic estimator; trend-level diagnostic only.
CorrelationDiagnostic correlation_diagnostic(const SurfacePtr& surface,
                                             const std::string& observable, int orbit_len,
                                             const std::vector<int>& lags, std::uint64_t seed,
                                             LatticeCache& cache);

}  // namespace bcz
