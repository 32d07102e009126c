// bcz: return maps, lattice point counts, and verification suites for
// horizontally short translation surfaces.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "bcz/counting.hpp"
#include "bcz/io.hpp"
#include "bcz/weakmix.hpp"

using namespace bcz;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitConfig = 2;

struct CommonOpts {
  std::string surface_arg;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::uint64_t samples = 1000000;
  int threads = 0;
};

SurfacePtr open_surface(const std::string& arg) {
  return load_surface(resolve_preset_path(arg));
}

std::map<std::string, std::string> echo_map(const CommonOpts& o, const std::string& cmd,
                                            std::map<std::string, std::string> extra = {}) {
  std::map<std::string, std::string> kv;
  kv["command"] = cmd;
  kv["surface"] = o.surface_arg;
  kv["format"] = o.format;
  kv["seed"] = o.seed ? std::to_string(*o.seed) : "none";
  kv["samples"] = std::to_string(o.samples);
  kv["threads"] = std::to_string(o.threads);
  for (auto& [k, v] : extra) kv[k] = v;
  return kv;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DomainError("cannot open output file '" + path + "'");
  return f;
}

// Exact rational points of the torus-like chart used by the oracle suite.
std::pair<Rational, Rational> random_rational_point(const SurfacePtr& s, CounterRng& rng,
                                                    long long den = 9973) {
  double alpha = s->alpha_f;
  for (;;) {
    long long p = static_cast<long long>(rng.next_below(den)) + 1;
    Rational sq(p, den);
    double sf = to_double(sq);
    double lo = 1.0 - alpha * sf;
    long long q = static_cast<long long>(rng.next_below(den));
    Rational t = Rational(1) - Rational(q, den + 1) * rational_of_double(std::min(1.0, 1.0 - lo));
    if (t <= 1 && Rational(1) - t < rational_of_double(alpha) * sq) return {sq, t};
  }
}

int cmd_enumerate(const CommonOpts& o, double x_max, double y_max) {
  auto s = open_surface(o.surface_arg);
  HolonomyWindow w =
      enumerate_orbit(s, QuadVal(rational_of_double(x_max)), QuadVal(rational_of_double(y_max)));
  auto f = open_out(o.out);
  f << config_echo(echo_map(o, "enumerate",
                            {{"x_max", std::to_string(x_max)}, {"y_max", std::to_string(y_max)}}));
  if (o.format == "json") {
    f << "[\n";
    for (std::size_t i = 0; i < w.vectors.size(); ++i) {
      const Vec2& v = w.vectors[i];
      f << "  {\"x\": " << to_double(v.x) << ", \"y\": " << to_double(v.y) << ", \"x_exact\": \""
        << to_exact_string(v.x) << "\", \"y_exact\": \"" << to_exact_string(v.y) << "\"}"
        << (i + 1 < w.vectors.size() ? "," : "") << "\n";
    }
    f << "]\n";
  } else {
    f << "x,y,x_exact,y_exact\n";
    for (const Vec2& v : w.vectors)
      f << to_double(v.x) << "," << to_double(v.y) << "," << to_exact_string(v.x) << ","
        << to_exact_string(v.y) << "\n";
  }
  std::cout << "enumerate: wrote " << o.out << " rows=" << w.vectors.size() << "\n";
  return kExitPass;
}

int cmd_heights(const CommonOpts& o, double R) {
  auto s = open_surface(o.surface_arg);
  HeightTable t = heights_table_direct(s, QuadVal(rational_of_double(R)), false, false);
  auto f = open_out(o.out);
  if (o.format == "json") {
    f << "{\"config\": \"heights R=" << R << " surface=" << o.surface_arg << "\", \"rows\": [\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto& e = t.entries[i];
      f << "  {\"zeta\": " << e.zeta_f << ", \"zeta_exact\": \"" << to_exact_string(e.zeta)
        << "\", \"phi\": " << e.phi << "}" << (i + 1 < t.size() ? "," : "") << "\n";
    }
    f << "]}\n";
  } else {
    write_heights_csv(f, t, config_echo(echo_map(o, "heights", {{"R", std::to_string(R)}})));
  }
  std::cout << "heights: wrote " << o.out << " rows=" << t.size() << "\n";
  return kExitPass;
}

int cmd_orbit(const CommonOpts& o, int n_steps, const std::string& s_str,
              const std::string& t_str) {
  auto s = open_surface(o.surface_arg);
  if (n_steps < 1) throw DomainError("orbit: --N must be >= 1");
  QuadVal sq, tq;
  if (!s_str.empty() && !t_str.empty()) {
    sq = QuadVal(parse_rational(s_str));
    tq = QuadVal(parse_rational(t_str));
  } else {
    if (!o.seed) throw DomainError("orbit: random start requires --seed");
    OmegaSampler sampler(s, *o.seed, 0);
    FloatPoint f = sampler.next();
    sq = QuadVal(rational_of_double(f.s));
    tq = QuadVal(rational_of_double(f.t));
  }
  LatticeCache cache(s);
  OrbitTrace trace = orbit(make_section_point(s, sq, tq), n_steps, cache);
  auto f = open_out(o.out);
  f << config_echo(echo_map(o, "orbit", {{"N", std::to_string(n_steps)}}));
  f << "step,s,t,return_time,cum_time\n";
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const ReturnRecord& r = trace.records[i];
    f << i << "," << to_double(r.next.s) << "," << to_double(r.next.t) << ","
      << to_double(r.return_time) << "," << trace.cumulative_times_f[i] << "\n";
  }
  std::cout << "orbit: wrote " << o.out << " rows=" << trace.records.size() << "\n";
  return kExitPass;
}

// ---- verify suites ----

int verify_oracle_bcz(const SurfacePtr& s, const CommonOpts& o) {
  if (s->name != "torus")
    throw DomainError("oracle-bcz: the closed form is the torus map; use --surface torus");
  LatticeCache cache(s);
  CounterRng rng(o.seed.value_or(1));
  std::uint64_t n = o.samples;
  for (std::uint64_t i = 0; i < n; ++i) {
    auto [x, y] = random_rational_point(s, rng);
    SectionPoint p = make_section_point(s, QuadVal(x), QuadVal(y));
    ReturnRecord rec = return_map(p, cache);
    auto [nx, ny] = bcz_classical(x, y);
    if (rec.next.s != QuadVal(nx) || rec.next.t != QuadVal(ny)) {
      std::cout << "oracle-bcz: FAIL at sample " << i << "\n";
      return kExitVerifyFail;
    }
  }
  std::cout << "oracle-bcz: pass (n=" << n << ", exact equality)\n";
  return kExitPass;
}

int verify_theorem12(const SurfacePtr& s, const CommonOpts& o, double s0,
                     std::optional<double> ba, std::optional<double> bb, std::optional<double> bc,
                     int setups) {
  LatticeCache cache(s, false);
  CounterRng rng(o.seed.value_or(1) ^ 0xabcdef);
  int fails = 0;
  auto run_one = [&](double s0v, BoxRegion box, int idx) {
    auto table = cache.ensure(box.c + 1.0);
    CountingSetup setup = make_counting_setup(s, s0v, box, table);
    ExpectedCount ex = exact_expected_count(setup);
    McEstimate mc = mc_expected_count(setup, o.samples, o.seed.value_or(1) + idx, o.threads);
    double err = std::abs(ex.total - mc.mean);
    double tol = 3.0 * std::max(mc.stderr_of_mean, 1e-12);
    bool ok = err <= tol && ex.lower_bound <= ex.total + 1e-12;
    std::cout << "  setup " << idx << ": s0=" << s0v << " box=[" << box.a << "," << box.b
              << ")x(0," << box.c << ") exact=" << ex.total << " mc=" << mc.mean << "+-"
              << mc.stderr_of_mean << " |diff|=" << err << (ok ? " pass" : " FAIL")
              << " (i2 route gap " << ex.i2_route_gap() << ")\n";
    if (!ok) ++fails;
  };
  if (ba && bb && bc) {
    run_one(s0, BoxRegion{*ba, *bb, *bc}, 0);
  } else {
    auto probe = cache.ensure(32.0);
    double zeta1 = probe->empty() ? 1.0 : probe->entries.front().zeta_f;
    for (int i = 0; i < setups; ++i) {
      double s0v = rng.next_range(0.35, 0.75);
      double width = rng.next_range(0.25, 0.9) * zeta1 * s->alpha_f * s0v;
      double a = rng.next_range(-2.0, 2.0);
      double c = rng.next_range(3.0, 25.0);
      run_one(s0v, BoxRegion{a, a + width, c}, i);
    }
  }
  std::cout << "theorem12: " << (fails == 0 ? "pass" : "FAIL") << "\n";
  return fails == 0 ? kExitPass : kExitVerifyFail;
}

int verify_lemma32(const SurfacePtr& s, const CommonOpts& o) {
  CounterRng rng(o.seed.value_or(1) ^ 0x32);
  double alpha = s->alpha_f;
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    double j = 1.0 + rng.next_range(0.0, 8.0);
    double sv = rng.next_range(0.2, 1.0);
    int k = 1 + static_cast<int>(rng.next_below(6));
    std::vector<double> xs;
    for (int i = 0; i < k; ++i) xs.push_back(rng.next_range(0.0, alpha * j * 0.999));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    double a = rng.next_range(-3.0, 3.0);
    double b = a + rng.next_range(0.05, 0.95) * alpha * j * sv;
    auto res = periodic_interval_average(alpha, j, sv, xs, a, b);
    worst = std::max(worst, std::abs(res.numeric - res.exact));
  }
  bool ok = worst < 1e-10;
  std::cout << "lemma32: " << (ok ? "pass" : "FAIL") << " (max |numeric - exact| = " << worst
            << " over 100 draws)\n";
  return ok ? kExitPass : kExitVerifyFail;
}

int verify_abel(const SurfacePtr& s, const CommonOpts& o, double R) {
  (void)o;
  HeightTable t = heights_table_direct(s, QuadVal(static_cast<long long>(R)), false, false);
  double c = estimate_c_omega(t);
  double w = weighted_height_sum(t);
  double ratio = c > 0 ? w / c : 0.0;
  bool ok = c > 0 && std::abs(ratio - 2.0) < 0.03;
  std::cout << "abel: " << (ok ? "pass" : "FAIL") << " (R=" << R << ", c=" << c
            << ", weighted=" << w << ", ratio=" << ratio << ")\n";
  return ok ? kExitPass : kExitVerifyFail;
}

int verify_conditions(const SurfacePtr& s, const CommonOpts& o) {
  LatticeCache cache(s);
  std::uint64_t seed = o.seed.value_or(1);
  Condition1Result c1a = check_condition1(s, 0.5, o.samples, seed);
  Condition1Result c1b = check_condition1(s, 0.9, o.samples, seed + 1);
  Condition2Result c2 = check_condition2(s, 0.9, std::min<std::uint64_t>(o.samples, 1000), seed, cache);
  Condition3Result c3 = check_condition3(s, {0.9, 0.99, 0.999}, {0.02, 0.05, 0.1},
                                         std::min<std::uint64_t>(o.samples, 20000), seed, cache);
  std::cout << "  condition1 a=0.5: measured " << c1a.empirical << " vs 0.25 -> "
            << (c1a.pass ? "pass" : "FAIL") << "\n";
  std::cout << "  condition1 a=0.9: measured " << c1b.empirical << " vs 0.81 -> "
            << (c1b.pass ? "pass" : "FAIL") << "\n";
  std::cout << "  condition2: exact defect zero " << (c2.exact_zero ? "yes" : "NO")
            << ", time scaling exact " << (c2.time_scaling_exact ? "yes" : "NO") << " -> "
            << (c2.pass ? "pass" : "FAIL") << "\n";
  double worst = 0;
  for (const auto& slice : c3.slices) worst = std::max(worst, slice.max_formula_error);
  std::cout << "  condition3: displacement formula error " << worst << " -> "
            << (c3.pass ? "pass" : "FAIL") << "\n";
  bool ok = c1a.pass && c1b.pass && c2.pass && c3.pass;
  std::cout << "conditions: " << (ok ? "pass" : "FAIL") << "\n";
  return ok ? kExitPass : kExitVerifyFail;
}

double fit_loglog_slope(const std::vector<std::pair<double, McEstimate>>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& [beta, est] : rows) {
    if (est.mean <= 0) continue;
    double x = std::log(beta), y = std::log(est.mean);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int verify_secondmoment(const SurfacePtr& s, const CommonOpts& o, double a_n,
                        std::vector<double> betas) {
  LatticeCache cache(s, false);
  auto rows = second_moment_mc(s, 0.5, betas, a_n, o.samples, o.seed.value_or(1), cache, o.threads);
  for (const auto& [beta, est] : rows)
    std::cout << "  beta=" << beta << ": mean=" << est.mean << " stderr=" << est.stderr_of_mean
              << " n=" << est.n << "\n";
  double slope = fit_loglog_slope(rows);
  bool ok = std::isfinite(slope) && std::abs(slope - 2.0) <= 0.3;
  std::cout << "secondmoment: " << (ok ? "pass" : "FAIL") << " (log-log slope = " << slope
            << ", target 2 +- 0.3)\n";
  return ok ? kExitPass : kExitVerifyFail;
}

int verify_detclass(const SurfacePtr& s, const CommonOpts& o, double jmax) {
  (void)o;
  HeightTable t = heights_table_direct(s, QuadVal(static_cast<long long>(jmax) + 1), false, false);
  HolonomyWindow w = enumerate_orbit(s, s->alpha * QuadVal(static_cast<long long>(jmax) + 1),
                                     QuadVal(static_cast<long long>(jmax) + 1));
  std::int64_t checked = 0;
  for (const auto& e : t.entries) {
    if (e.zeta_f > jmax) break;
    if (det_class_count(w, e.zeta) != 2 * e.phi) {
      std::cout << "detclass: FAIL at height " << to_exact_string(e.zeta) << "\n";
      return kExitVerifyFail;
    }
    ++checked;
  }
  bool zero_ok = det_class_count(w, QuadVal(0)) == 2;
  std::cout << "detclass: " << (zero_ok ? "pass" : "FAIL") << " (2*phi identity on " << checked
            << " heights <= " << jmax << ", and 2 at j=0)\n";
  return zero_ok ? kExitPass : kExitVerifyFail;
}

int cmd_plotdata(const CommonOpts& o, const std::string& what, double R, int n_steps, double a_n,
                 std::vector<double> betas) {
  auto s = open_surface(o.surface_arg);
  auto f = open_out(o.out);
  f << config_echo(echo_map(o, "plotdata", {{"what", what}}));
  if (what == "gaps") {
    if (!o.seed) throw DomainError("plotdata gaps: requires --seed");
    LatticeCache cache(s);
    OmegaSampler sampler(s, *o.seed, 0);
    FloatPoint start = sampler.next();
    SectionPoint p = make_section_point(s, QuadVal(rational_of_double(start.s)),
                                        QuadVal(rational_of_double(start.t)));
    OrbitTrace trace = orbit(p, n_steps, cache);
    const int bins = 60;
    const double cap = 12.0;
    std::vector<std::int64_t> hist(bins + 1, 0);
    for (const auto& rec : trace.records) {
      double r = to_double(rec.return_time);
      int b = r >= cap ? bins : static_cast<int>(r / cap * bins);
      hist[b]++;
    }
    f << "bin_lo,bin_hi,count\n";
    for (int b = 0; b < bins; ++b)
      f << (cap * b / bins) << "," << (cap * (b + 1) / bins) << "," << hist[b] << "\n";
    f << cap << ",inf," << hist[bins] << "\n";
    std::cout << "plotdata: wrote " << o.out << " rows=" << bins + 1 << "\n";
  } else if (what == "comega") {
    HeightTable t = heights_table_direct(s, QuadVal(static_cast<long long>(R)), false, false);
    f << "R,c_omega,weighted,ratio\n";
    int rows = 0;
    for (double r = R / 16.0; r <= R + 1e-9; r *= 2.0) {
      double c = estimate_c_omega(t, r);
      double w = weighted_height_sum(t, r);
      f << r << "," << c << "," << w << "," << (c > 0 ? w / c : 0.0) << "\n";
      ++rows;
    }
    std::cout << "plotdata: wrote " << o.out << " rows=" << rows << "\n";
  } else if (what == "beta") {
    if (!o.seed) throw DomainError("plotdata beta: requires --seed");
    LatticeCache cache(s, false);
    auto rows = second_moment_mc(s, 0.5, betas, a_n, o.samples, *o.seed, cache, o.threads);
    f << "beta,mean,stderr,n,seed\n";
    for (const auto& [beta, est] : rows)
      f << beta << "," << est.mean << "," << est.stderr_of_mean << "," << est.n << "," << est.seed
        << "\n";
    std::cout << "plotdata: wrote " << o.out << " rows=" << rows.size() << "\n";
  } else {
    throw DomainError("plotdata: unknown --what '" + what + "' (gaps|comega|beta)");
  }
  return kExitPass;
}

int cmd_report(const CommonOpts& o, double a, double beta, double s0) {
  auto s = open_surface(o.surface_arg);
  if (!o.seed) throw DomainError("report: requires --seed");
  LatticeCache cache(s);
  CriterionReport rep = run_criterion_report(s, a, beta, s0, o.samples, *o.seed, cache);
  print_criterion_report(std::cout, rep);
  if (!o.out.empty()) {
    auto f = open_out(o.out);
    f << criterion_report_json(rep) << "\n";
    std::cout << "report: wrote " << o.out << "\n";
  }
  return rep.all_pass() ? kExitPass : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bcz: horocycle return maps and lattice point statistics on translation surfaces"};
  app.require_subcommand(1);
  CommonOpts o;

  auto add_common = [&](CLI::App* cmd, bool need_out) {
    cmd->add_option("--surface", o.surface_arg, "preset name or path")->required();
    if (need_out) cmd->add_option("--out", o.out, "output file")->required();
    cmd->add_option("--format", o.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", o.seed, "RNG seed (mandatory for stochastic commands)");
    cmd->add_option("--samples", o.samples, "Monte-Carlo sample count");
    cmd->add_option("--threads", o.threads, "worker threads (default: cores)");
  };

  double x_max = 10, y_max = 10, R = 100;
  auto* c_enum = app.add_subcommand("enumerate", "export a finite window of Lambda");
  add_common(c_enum, true);
  c_enum->add_option("--x-max", x_max);
  c_enum->add_option("--y-max", y_max);

  auto* c_heights = app.add_subcommand("heights", "export the height table (zeta, phi)");
  add_common(c_heights, true);
  c_heights->add_option("--R", R, "height cutoff");

  int n_steps = 100;
  std::string s_str, t_str;
  auto* c_orbit = app.add_subcommand("orbit", "export a return-map orbit");
  add_common(c_orbit, true);
  c_orbit->add_option("--N", n_steps, "number of returns");
  c_orbit->add_option("--s", s_str, "exact start s (rational, e.g. 3/5)");
  c_orbit->add_option("--t", t_str, "exact start t");

  std::string suite;
  double s0 = 0.5, a_level = 0.99, beta = 0.1, jmax = 100, abel_R = 2000;
  int setups = 20;
  std::optional<double> box_a, box_b, box_c;
  std::vector<double> betas{0.05, 0.1, 0.2, 0.4};
  auto* c_verify = app.add_subcommand("verify", "run a named verification suite");
  add_common(c_verify, false);
  c_verify->add_option("suite", suite,
                       "theorem12|lemma32|abel|conditions|secondmoment|detclass|oracle-bcz")
      ->required();
  c_verify->add_option("--s0", s0);
  c_verify->add_option("--a", a_level);
  c_verify->add_option("--beta", beta);
  c_verify->add_option("--betas", betas);
  c_verify->add_option("--jmax", jmax);
  c_verify->add_option("--R", abel_R);
  c_verify->add_option("--setups", setups);
  c_verify->add_option("--box-a", box_a);
  c_verify->add_option("--box-b", box_b);
  c_verify->add_option("--box-c", box_c);

  std::string what = "comega";
  auto* c_plot = app.add_subcommand("plotdata", "emit plot-ready tables");
  add_common(c_plot, true);
  c_plot->add_option("--what", what, "gaps|comega|beta");
  c_plot->add_option("--R", R);
  c_plot->add_option("--N", n_steps);
  c_plot->add_option("--a", a_level);
  c_plot->add_option("--betas", betas);

  auto* c_report = app.add_subcommand("report", "full weak-mixing criterion report");
  add_common(c_report, false);
  c_report->add_option("--out", o.out, "JSON report path");
  c_report->add_option("--a", a_level);
  c_report->add_option("--beta", beta);
  c_report->add_option("--s0", s0);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (c_enum->parsed()) return cmd_enumerate(o, x_max, y_max);
    if (c_heights->parsed()) return cmd_heights(o, R);
    if (c_orbit->parsed()) return cmd_orbit(o, n_steps, s_str, t_str);
    if (c_plot->parsed()) return cmd_plotdata(o, what, R, n_steps, a_level, betas);
    if (c_report->parsed()) return cmd_report(o, a_level, beta, s0);
    if (c_verify->parsed()) {
      auto s = open_surface(o.surface_arg);
      bool stochastic = suite == "theorem12" || suite == "secondmoment" || suite == "oracle-bcz" ||
                        suite == "conditions";
      if (stochastic && !o.seed) throw DomainError("verify " + suite + ": requires --seed");
      if (suite == "oracle-bcz") return verify_oracle_bcz(s, o);
      if (suite == "theorem12") return verify_theorem12(s, o, s0, box_a, box_b, box_c, setups);
      if (suite == "lemma32") return verify_lemma32(s, o);
      if (suite == "abel") return verify_abel(s, o, abel_R);
      if (suite == "conditions") return verify_conditions(s, o);
      if (suite == "secondmoment") return verify_secondmoment(s, o, a_level, betas);
      if (suite == "detclass") return verify_detclass(s, o, jmax);
      throw DomainError("unknown verify suite '" + suite + "'");
    }
  } catch (const HypothesisError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PresetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerifyFail;
  }
  return kExitConfig;
}
