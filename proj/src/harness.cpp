#include "cylperc/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "cylperc/lemmas.hpp"
#include "cylperc/line_process.hpp"
#include "cylperc/parallel.hpp"
#include "cylperc/renormalization.hpp"
#include "cylperc/rng.hpp"
#include "cylperc/stats.hpp"
#include "cylperc/surface.hpp"

#ifndef CYLPERC_BUILD_ID
#define CYLPERC_BUILD_ID "unknown"
#endif

namespace cylperc {

using json = nlohmann::ordered_json;

const char* build_id() { return CYLPERC_BUILD_ID; }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x) || std::abs(x) > 9e15) throw ConfigError("config: " + key + " expects an integer");
  return static_cast<long long>(x);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos, 0);
    if (pos != v.size() || v.front() == '-') throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an unsigned 64-bit integer, got '" + v + "'");
  }
}

// "1e16", "288^6" or "(8*10)^168".
BigFloat parse_big(const std::string& v) {
  const auto caret = v.find('^');
  try {
    if (caret == std::string::npos) return BigFloat(v);
    std::string base = trim(v.substr(0, caret));
    if (!base.empty() && base.front() == '(' && base.back() == ')') base = base.substr(1, base.size() - 2);
    BigFloat b(1);
    std::stringstream factors(base);
    std::string f;
    while (std::getline(factors, f, '*')) b *= BigFloat(trim(f));
    return boost::multiprecision::pow(b, BigFloat(trim(v.substr(caret + 1))));
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse number '" + v + "'");
  }
}

std::vector<Vec2> parse_points(const std::string& v) {
  std::vector<Vec2> out;
  if (v == "default") return out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ';')) {
    const auto comma = item.find(',');
    if (comma == std::string::npos) throw ConfigError("config: x_points expects 'x,y;x,y;...'");
    out.push_back({to_double("x_points", trim(item.substr(0, comma))), to_double("x_points", trim(item.substr(comma + 1)))});
  }
  if (out.empty()) throw ConfigError("config: x_points is empty");
  return out;
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "u") cfg.u = to_double(key, v);
  else if (key == "a0") cfg.a0 = to_double(key, v);
  else if (key == "n") cfg.n = static_cast<int>(to_int(key, v));
  else if (key == "h") cfg.h = to_double(key, v);
  else if (key == "reps") {
    const long long r = to_int(key, v);
    if (r < 1) throw ConfigError("config: reps must be positive");
    cfg.reps = static_cast<std::size_t>(r);
  } else if (key == "seed") cfg.seed = to_u64(key, v);
  else if (key == "window_radius") cfg.window_radius = to_double(key, v);
  else if (key == "pair_family") cfg.pair_family = v;
  else if (key == "x_points") cfg.x_points = parse_points(v);
  else if (key == "out_dir") cfg.out_dir = v;
  else if (key == "threads") {
    const long long t = to_int(key, v);
    if (t < 1 || t > 1024) throw ConfigError("config: threads must be in 1..1024");
    cfg.threads = static_cast<unsigned>(t);
  } else if (key == "distance") cfg.distance = to_double(key, v);
  else if (key == "r_in") cfg.r_in = to_double(key, v);
  else if (key == "i") cfg.i = static_cast<int>(to_int(key, v));
  else if (key == "k0") cfg.k0 = static_cast<int>(to_int(key, v));
  else if (key == "a0_hat") {
    parse_big(v);
    cfg.a0_hat = v;
  } else if (key == "c_p") cfg.c_p = to_double(key, v);
  else if (key == "c_q") cfg.c_q = to_double(key, v);
  else if (key == "levels") cfg.levels = static_cast<int>(to_int(key, v));
  else if (key == "padding") cfg.padding = to_double(key, v);
  else if (key == "directions") cfg.directions = static_cast<int>(to_int(key, v));
  else if (key == "offsets") cfg.offsets = static_cast<int>(to_int(key, v));
  else if (key == "corpus") cfg.corpus = v;
  else throw ConfigError("config: unknown key '" + key + "'");
  cfg.raw[key] = v;
}

void validate_config(const RunConfig& cfg) {
  auto need = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(std::string("config: ") + msg);
  };
  need(cfg.u >= 0.0, "u must be >= 0");
  need(cfg.a0 > 0.0, "a0 must be positive");
  need(cfg.n >= 0, "n must be >= 0");
  need(!cfg.h || *cfg.h > 0.0, "h must be positive");
  need(cfg.window_radius > 0.0, "window_radius must be positive");
  need(cfg.distance > 0.0, "distance must be positive");
  need(cfg.r_in > 0.0, "r_in must be positive");
  need(cfg.k0 >= 1, "k0 must be >= 1");
  need(cfg.c_p > 0.0 && cfg.c_q > 0.0, "c_p and c_q must be positive");
  need(cfg.levels >= 1, "levels must be >= 1");
  need(cfg.padding > 0.0, "padding must be positive");
  need(cfg.directions >= 1 && cfg.offsets >= 2, "directions >= 1 and offsets >= 2 required");
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in);
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "vacancy", "cov",        "crossing_H", "crossing_plane", "circuit",        "pn",       "qn",       "recursion",
      "induction", "tail",     "lemma_tube", "lemma_core",     "lemma_horizon", "lemma_blocking", "covering", "contrast"};
  return names;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ResultRecord record(const std::string& name, json params, double est, double se, std::size_t reps, std::uint64_t seed) {
  ResultRecord r;
  r.experiment = name;
  r.params = std::move(params);
  r.estimate = est;
  r.stderr_ = se;
  r.replicas = reps;
  r.seed = seed;
  return r;
}

ResultRecord binomial_record(const std::string& name, json params, std::size_t hits, std::size_t reps,
                             std::uint64_t seed) {
  const EstimateWithCI e = binomial_estimate(hits, reps, seed);
  return record(name, std::move(params), e.mean, e.se, reps, seed);
}

Vec2 first_point(const RunConfig& cfg) { return cfg.x_points.empty() ? Vec2{} : cfg.x_points.front(); }

std::vector<Vec2> points_or_default(const RunConfig& cfg) {
  return cfg.x_points.empty() ? default_x_points() : cfg.x_points;
}

std::size_t count(const std::vector<std::uint8_t>& v) {
  std::size_t k = 0;
  for (auto b : v) k += b;
  return k;
}

void check_radius(double r) {
  if (r > 500.0) throw ConfigError("config: window_radius must be <= 500 for grid experiments");
}

enum class Event { VacantH, VacantPlane, CircuitH };

std::vector<ResultRecord> crossing_like(const RunConfig& cfg, const std::string& name, Event ev) {
  check_radius(cfg.window_radius);
  const double h = cfg.h.value_or(0.25);
  const Vec2 x0 = first_point(cfg);
  const double R = cfg.window_radius;
  const Window w = ev == Event::VacantPlane ? Window::disk_slab(x0, R, 0.0, 0.0) : Window::disk_slab(x0, R);
  std::vector<std::uint8_t> hit(cfg.reps, 0), bad(cfg.reps, 0);
  parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
    const LineSample s = sample_poisson(cfg.u, w, derive_seed(cfg.seed, r));
    const GridMask m = ev == Event::VacantPlane ? rasterize_plane_regions(s, x0, R, h)
                                                : rasterize_surface(s, SurfaceModel::H(), x0, R, h);
    const AnnulusResult a = analyze_annulus(m, x0, cfg.r_in, R);
    hit[r] = ev == Event::CircuitH ? a.obstacle_circuit : a.vacant_crossing;
    bad[r] = a.vacant_crossing == a.obstacle_circuit;
  });
  json p{{"u", cfg.u}, {"r_in", cfg.r_in}, {"r_out", R}, {"h", h}, {"x0", {x0.x, x0.y}},
         {"duality_checks", cfg.reps}, {"duality_violations", count(bad)}};
  return {binomial_record(name, p, count(hit), cfg.reps, cfg.seed)};
}

std::vector<ResultRecord> run_vacancy(const RunConfig& cfg) {
  const Vec3 x{0.0, 0.0, 0.0};
  const Window w = Window::ball(x, 0.0);
  std::vector<std::uint8_t> vac(cfg.reps, 0);
  parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
    vac[r] = point_vacant(sample_poisson(cfg.u, w, derive_seed(cfg.seed, r)), x);
  });
  json p{{"u", cfg.u}, {"oracle", std::exp(-cfg.u * std::numbers::pi)}};
  return {binomial_record("vacancy", p, count(vac), cfg.reps, cfg.seed)};
}

std::vector<ResultRecord> run_cov(const RunConfig& cfg) {
  const Vec3 x{0.0, 0.0, 0.0}, y{cfg.distance, 0.0, 0.0};
  const CovarianceEstimate c = covariance_estimate(x, y, cfg.u, cfg.reps, cfg.seed);
  json p{{"u", cfg.u}, {"distance", cfg.distance}, {"mu_xy", c.mu_xy.value}, {"mu_xy_se", c.mu_xy.se}};
  json pm = p, ps = p;
  pm["method"] = "mc";
  ps["method"] = "semi_analytic";
  return {record("cov", pm, c.mc.value, c.mc.se, cfg.reps, cfg.seed),
          record("cov", ps, c.semi_analytic.value, c.semi_analytic.se, cfg.reps, cfg.seed)};
}

json estimate_params(const RunConfig& cfg, const ScaleEstimate& e, const std::vector<Vec2>& xs) {
  json per = json::array();
  for (const auto& pp : e.per_point) per.push_back({{"mean", pp.mean}, {"se", pp.se}});
  return {{"u", cfg.u},
          {"a0", cfg.a0},
          {"n", cfg.n},
          {"best_point", {xs[e.best_point].x, xs[e.best_point].y}},
          {"best_pair", e.best_pair},
          {"sup_is_proxy", e.sup_is_proxy},
          {"upper95", e.best.upper(normal_quantile(0.95))},
          {"per_point", per}};
}

std::vector<ResultRecord> run_pn(const RunConfig& cfg) {
  const ScaleSequence seq(cfg.a0, true);
  const auto xs = points_or_default(cfg);
  const ScaleEstimate e = estimate_pn(seq, cfg.n, cfg.u, xs, cfg.reps, cfg.seed, cfg.h.value_or(0.5), cfg.threads);
  return {record("pn", estimate_params(cfg, e, xs), e.best.mean, e.best.se, cfg.reps, cfg.seed)};
}

std::vector<ResultRecord> run_qn(const RunConfig& cfg) {
  const ScaleSequence seq(cfg.a0, true);
  const auto xs = points_or_default(cfg);
  const ScaleEstimate e =
      estimate_qn(seq, cfg.n, cfg.u, cfg.pair_family, cfg.reps, cfg.seed, xs, cfg.h.value_or(0.5), cfg.threads);
  json p = estimate_params(cfg, e, xs);
  p["pair_family"] = cfg.pair_family;
  return {record("qn", p, e.best.mean, e.best.se, cfg.reps, cfg.seed)};
}

std::string big_str(const BigFloat& x) { return x.str(12, std::ios_base::scientific); }

std::vector<ResultRecord> run_recursion(const RunConfig& cfg) {
  const RecursionTrace t = iterate_recursion(parse_big(cfg.a0_hat), cfg.levels, cfg.c_p, cfg.c_q);
  std::vector<ResultRecord> out;
  for (std::size_t k = 0; k < t.p.size(); ++k) {
    json p{{"a0_hat", cfg.a0_hat}, {"c_p", cfg.c_p},  {"c_q", cfg.c_q},
           {"level", k},           {"p", big_str(t.p[k])}, {"q", big_str(t.q[k])},
           {"p_threshold", big_str(t.p_threshold[k])}, {"q_threshold", big_str(t.q_threshold[k])},
           {"below_thresholds", t.p[k] <= t.p_threshold[k] && t.q[k] <= t.q_threshold[k]}};
    // log10 p keeps the value representable at every level.
    const double lp = t.p[k] > 0 ? boost::multiprecision::log10(t.p[k]).convert_to<double>() : -INFINITY;
    out.push_back(record("recursion", p, lp, 0.0, 0, cfg.seed));
  }
  return out;
}

std::vector<ResultRecord> run_induction(const RunConfig& cfg) {
  const InductionCheck c = induction_step_details(parse_big(cfg.a0_hat), cfg.c_p, cfg.c_q);
  auto q = [](const Rational& r) {
    std::ostringstream s;
    s << r;
    return s.str();
  };
  json p{{"a0_hat", cfg.a0_hat},        {"c_p", cfg.c_p},
         {"c_q", cfg.c_q},              {"p_exponent", q(c.p_exponent)},
         {"p_target", q(c.p_target)},   {"q_exponent", q(c.q_exponent)},
         {"q_target", q(c.q_target)},   {"exponents_ok", c.exponents_ok},
         {"scale_ok", c.scale_ok},      {"absorption_ok", c.absorption_ok}};
  return {record("induction", p, c.ok() ? 1.0 : 0.0, 0.0, 0, cfg.seed)};
}

std::vector<ResultRecord> run_tail(const RunConfig& cfg) {
  const BigFloat v = tail_bound(parse_big(cfg.a0_hat), cfg.k0);
  json p{{"a0_hat", cfg.a0_hat}, {"k0", cfg.k0}, {"value", big_str(v)}};
  return {record("tail", p, v.convert_to<double>(), 0.0, 0, cfg.seed)};
}

struct TubeOutcome {
  bool pass = false;
  std::string witness;
};

TubeOutcome check_tube(const TubeInstance& inst) {
  TubeOutcome o;
  try {
    const Polyline eta(inst.vertices);
    const TubeResult t = tube_from_two_cylinders(inst.c1, inst.c2, eta, inst.a0);
    const double disp = norm(eta.at(t.t2) - eta.at(t.t1));
    const double md = max_dist_to_line(eta, t.t1, t.t2, t.axis);
    o.pass = disp >= inst.a0 / 100.0 && md <= 4.0 + 1e-6;
    std::ostringstream w;
    w.precision(10);
    w << t.branch << " axis=" << t.axis_index << " t1=" << t.t1 << " t2=" << t.t2 << " disp=" << disp
      << " maxdist=" << md;
    o.witness = w.str();
  } catch (const DomainError& e) {
    o.witness = e.what();
  }
  return o;
}

std::vector<ResultRecord> run_lemma_tube(const RunConfig& cfg) {
  std::vector<TubeInstance> insts;
  std::vector<std::string> lines;
  if (!cfg.corpus.empty()) {
    std::ifstream in(cfg.corpus);
    if (!in) throw ConfigError("cannot open corpus " + cfg.corpus);
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty() || trim(line)[0] == '#') continue;
      lines.push_back(line);
    }
  }
  const std::size_t n = lines.empty() ? cfg.reps : lines.size();
  std::vector<TubeOutcome> res(n);
  parallel_for(n, cfg.threads, [&](std::size_t r) {
    if (!lines.empty()) {
      try {
        res[r] = check_tube(parse_tube_instance(lines[r]));
      } catch (const DomainError& e) {
        res[r].witness = e.what();
      }
      return;
    }
    Rng rng(derive_seed(cfg.seed, r));
    res[r] = check_tube(random_tube_instance(rng, cfg.a0));
  });
  std::size_t fails = 0;
  for (const auto& o : res) fails += !o.pass;
  if (!lines.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream out(std::filesystem::path(cfg.out_dir) / "lemma_tube_results.txt");
    for (std::size_t k = 0; k < n; ++k)
      out << lines[k] << ' ' << (res[k].pass ? "PASS" : "FAIL") << ' ' << res[k].witness << '\n';
  }
  json p{{"a0", cfg.a0}, {"source", lines.empty() ? "random" : cfg.corpus}, {"failures", fails}};
  return {binomial_record("lemma_tube", p, fails, n, cfg.seed)};
}

std::vector<ResultRecord> run_lemma_core(const RunConfig& cfg) {
  std::vector<double> hs(cfg.reps), he(cfg.reps);
  parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
    Rng rng(derive_seed(cfg.seed, r));
    const auto [c1, c2] = random_intersecting_pair(rng);
    const CoreSegment cs = core_segment(c1, c2);
    hs[r] = hausdorff_segments(cs.x[0], cs.y[0], cs.x[1], cs.y[1]);
    he[r] = hausdorff_endpoint_sets(cs.x[0], cs.y[0], cs.x[1], cs.y[1]);
  });
  double ms = 0.0, me = 0.0;
  std::size_t fs = 0, fe = 0;
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    ms = std::max(ms, hs[r]);
    me = std::max(me, he[r]);
    fs += hs[r] > 2.0;
    fe += he[r] > 2.0 * std::numbers::sqrt2 + 1e-6;
  }
  return {record("lemma_core", {{"quantity", "max_hausdorff_segments"}, {"bound", 2.0}, {"failures", fs}}, ms, 0.0,
                 cfg.reps, cfg.seed),
          record("lemma_core",
                 {{"quantity", "max_hausdorff_endpoints"}, {"bound", 2.0 * std::numbers::sqrt2}, {"failures", fe}}, me,
                 0.0, cfg.reps, cfg.seed)};
}

std::vector<ResultRecord> run_lemma_horizon(const RunConfig& cfg) {
  const HorizonResult h = horizon_scan(cfg.padding, cfg.directions, cfg.offsets);
  json p{{"padding", cfg.padding}, {"directions", cfg.directions}, {"offsets", cfg.offsets},
         {"unbounded", h.unbounded}, {"theta", h.theta}, {"offset", h.offset}};
  return {record("lemma_horizon", p, h.unbounded ? INFINITY : h.max_free, 0.0, 0, cfg.seed)};
}

std::vector<ResultRecord> run_lemma_blocking(const RunConfig& cfg) {
  const Vec2 x0 = first_point(cfg);
  std::vector<std::uint8_t> ok(cfg.reps, 0);
  std::vector<double> fdisp(cfg.reps, 0.0);
  const double h = cfg.h.value_or(0.5);
  parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
    Rng rng(derive_seed(cfg.seed, r));
    const auto [c1, c2] = random_adversarial_pair(rng, x0, cfg.a0);
    ok[r] = blocking_check(c1, c2, x0, cfg.a0, h);
    fdisp[r] = std::max(max_axis_F_displacement(c1, x0, cfg.a0, h), max_axis_F_displacement(c2, x0, cfg.a0, h));
  });
  double mf = 0.0;
  for (double f : fdisp) mf = std::max(mf, f);
  json p{{"a0", cfg.a0}, {"h", h}, {"x0", {x0.x, x0.y}}, {"max_axis_F_displacement", mf}};
  return {binomial_record("lemma_blocking", p, count(ok), cfg.reps, cfg.seed)};
}

std::vector<ResultRecord> run_covering(const RunConfig& cfg) {
  const ScaleSequence seq(cfg.a0, true);
  const int n = std::max(cfg.n, 1);
  const double ratio = seq.scale_double(n - 1) / seq.scale_double(n);
  const HexTiling tiling;
  std::vector<ResultRecord> out;
  for (int i = 1; i <= 4; ++i) {
    CoveringSet cov;
    try {
      cov = build_covering(seq, n, i);
    } catch (const ResourceLimit& e) {
      throw PartialResults(e.what(), out);
    }
    std::vector<std::uint8_t> miss(cfg.reps, 0);
    parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
      Rng rng(derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)), r));
      Vec2 x;
      do x = rng.disk(tiling.circumradius());
      while (!tiling.in_central_face(x));
      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      miss[r] = !cov.covers_point(x + cov.radius * Vec2{std::cos(phi), std::sin(phi)});
    });
    json p{{"a0", cfg.a0}, {"n", n}, {"i", i}, {"size", cov.points.size()}, {"uncovered", count(miss)},
           {"quantity", "size * a_{n-1} / a_n"}};
    out.push_back(record("covering", p, static_cast<double>(cov.points.size()) * ratio, 0.0, cfg.reps, cfg.seed));
  }
  return out;
}

}  // namespace

std::vector<ResultRecord> contrast_experiment(const RunConfig& cfg) {
  const double r0 = cfg.window_radius;
  if (4.0 * r0 > 500.0) throw ConfigError("config: contrast uses radii r, 2r, 4r and needs 4 * window_radius <= 500");
  const double h = cfg.h.value_or(0.25);
  const Vec2 x0 = first_point(cfg);
  const double radii[3] = {r0, 2.0 * r0, 4.0 * r0};
  const Window w = Window::disk_slab(x0, radii[2]);
  // Per replica: bit k = H crossing at radius k, bit 3 + k = plane crossing.
  std::vector<std::uint8_t> bits(cfg.reps, 0), bad(cfg.reps, 0);
  parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
    const LineSample s = sample_poisson(cfg.u, w, derive_seed(cfg.seed, r));
    const GridMask mh = rasterize_surface(s, SurfaceModel::H(), x0, radii[2], h);
    const GridMask mp = rasterize_plane_regions(s, x0, radii[2], h);
    for (int k = 0; k < 3; ++k) {
      const AnnulusResult ah = analyze_annulus(mh, x0, cfg.r_in, radii[k]);
      const AnnulusResult ap = analyze_annulus(mp, x0, cfg.r_in, radii[k]);
      bits[r] |= static_cast<std::uint8_t>(ah.vacant_crossing << k);
      bits[r] |= static_cast<std::uint8_t>(ap.vacant_crossing << (3 + k));
      bad[r] += (ah.vacant_crossing == ah.obstacle_circuit) + (ap.vacant_crossing == ap.obstacle_circuit);
    }
  });
  std::size_t violations = 0;
  for (auto b : bad) violations += b;
  std::vector<ResultRecord> out;
  for (int k = 0; k < 3; ++k) {
    std::size_t nh = 0, np = 0;
    RunningStats diff;
    for (auto b : bits) {
      const int hb = (b >> k) & 1, pb = (b >> (3 + k)) & 1;
      nh += hb;
      np += pb;
      diff.add(hb - pb);
    }
    json base{{"u", cfg.u}, {"r_in", cfg.r_in}, {"radius", radii[k]}, {"h", h},
              {"duality_checks", 6 * cfg.reps}, {"duality_violations", violations}};
    json ph = base, pp = base, pd = base;
    ph["surface"] = "H";
    pp["surface"] = "plane";
    pd["surface"] = "H-plane";
    out.push_back(binomial_record("contrast", ph, nh, cfg.reps, cfg.seed));
    out.push_back(binomial_record("contrast", pp, np, cfg.reps, cfg.seed));
    const double se = cfg.reps > 1 ? diff.stderr_of_mean() : 0.0;
    out.push_back(record("contrast", pd, diff.mean(), se, cfg.reps, cfg.seed));
  }
  return out;
}

std::vector<ResultRecord> run_experiment(const RunConfig& cfg, const std::string& name) {
  validate_config(cfg);
  static const std::map<std::string, std::function<std::vector<ResultRecord>(const RunConfig&)>> table{
      {"vacancy", run_vacancy},
      {"cov", run_cov},
      {"crossing_H", [](const RunConfig& c) { return crossing_like(c, "crossing_H", Event::VacantH); }},
      {"crossing_plane", [](const RunConfig& c) { return crossing_like(c, "crossing_plane", Event::VacantPlane); }},
      {"circuit", [](const RunConfig& c) { return crossing_like(c, "circuit", Event::CircuitH); }},
      {"pn", run_pn},
      {"qn", run_qn},
      {"recursion", run_recursion},
      {"induction", run_induction},
      {"tail", run_tail},
      {"lemma_tube", run_lemma_tube},
      {"lemma_core", run_lemma_core},
      {"lemma_horizon", run_lemma_horizon},
      {"lemma_blocking", run_lemma_blocking},
      {"covering", run_covering},
      {"contrast", contrast_experiment},
  };
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown experiment '" + name + "'");
  const auto t0 = Clock::now();
  std::vector<ResultRecord> recs;
  try {
    recs = it->second(cfg);
  } catch (const PartialResults&) {
    throw;
  } catch (const ResourceLimit& e) {
    throw PartialResults(e.what(), {});
  }
  const double wall = seconds_since(t0);
  for (auto& r : recs) r.wall_time = wall;
  return recs;
}

namespace {

std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string csv_header() { return "experiment,param_json,estimate,stderr,replicas,seed,wall_time,schema_version"; }

std::string csv_row(const ResultRecord& r) {
  std::ostringstream out;
  out << r.experiment << ',' << csv_quote(r.params.dump()) << ',' << fmt_double(r.estimate) << ','
      << fmt_double(r.stderr_) << ',' << r.replicas << ',' << r.seed << ',' << fmt_double(r.wall_time) << ','
      << r.schema_version;
  return out.str();
}

json summary_json(const RunConfig& cfg, const std::string& experiment, const std::vector<ResultRecord>& records,
                  bool partial) {
  json config = json::object();
  for (const auto& [k, v] : cfg.raw) config[k] = v;
  config["seed"] = cfg.seed;
  config["threads"] = cfg.threads;
  json recs = json::array();
  for (const auto& r : records)
    recs.push_back({{"experiment", r.experiment},
                    {"params", r.params},
                    {"estimate", std::isfinite(r.estimate) ? json(r.estimate) : json(fmt_double(r.estimate))},
                    {"stderr", r.stderr_},
                    {"replicas", r.replicas},
                    {"seed", r.seed},
                    {"wall_time", r.wall_time},
                    {"schema_version", r.schema_version}});
  return {{"schema_version", kSchemaVersion}, {"experiment", experiment}, {"build_id", build_id()},
          {"partial", partial}, {"config", config}, {"records", recs}};
}

void write_outputs(const RunConfig& cfg, const std::string& experiment, const std::vector<ResultRecord>& records,
                   bool partial) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  std::ofstream csv(fs::path(cfg.out_dir) / (experiment + ".csv"));
  csv << csv_header() << '\n';
  for (const auto& r : records) csv << csv_row(r) << '\n';
  std::ofstream js(fs::path(cfg.out_dir) / (experiment + ".json"));
  js << summary_json(cfg, experiment, records, partial).dump(2) << '\n';
  if (!csv || !js) throw std::runtime_error("failed to write outputs to " + cfg.out_dir);
}

}  // namespace cylperc
