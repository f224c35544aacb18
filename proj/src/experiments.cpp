#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lqg/gmc.hpp"
#include "lqg/levy.hpp"
#include "lqg/loewner.hpp"
#include "lqg/params.hpp"
#include "lqg/perc.hpp"
#include "lqg/rng.hpp"
#include "lqg/stats.hpp"

namespace lqg::harness::detail {

namespace {

std::size_t trials_or(const ExperimentSpec& s, std::size_t fallback) { return s.trials ? s.trials : fallback; }

std::string num(double x) { return format_number(x); }

Json jnum(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::string verb_or(const ExperimentSpec& s, std::initializer_list<const char*> allowed, const char* fallback) {
  const std::string v = s.verb.empty() ? std::string(fallback ? fallback : "") : s.verb;
  for (const char* a : allowed)
    if (v == a) return v;
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : "|") + a;
  throw ParameterError(s.subcommand + " verb must be one of " + list + (v.empty() ? "" : ", got '" + v + "'"));
}

void require_no_verb(const ExperimentSpec& s) {
  if (!s.verb.empty()) throw ParameterError(s.subcommand + " takes no verb, got '" + s.verb + "'");
}

std::vector<int> sorted_ints(const std::vector<std::int64_t>& v, const char* what, int min_value) {
  std::vector<int> out;
  for (auto x : v) {
    if (x < min_value || x > (1 << 16)) throw ParameterError(std::string(what) + " out of range");
    out.push_back(static_cast<int>(x));
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) throw ParameterError(std::string(what) + " repeat");
  return out;
}

std::size_t positive_count(std::int64_t v, const char* what) {
  if (v < 1) throw ParameterError(std::string(what) + " must be >= 1");
  return static_cast<std::size_t>(v);
}

std::vector<double> as_doubles(const std::vector<int>& v) { return {v.begin(), v.end()}; }

std::vector<double> default_kappa_grid() {
  std::vector<double> out;
  for (int i = 0; i < 20; ++i) out.push_back(8.0 / 3.0 + (4.0 - 8.0 / 3.0) * (i + 0.5) / 20.0);
  return out;
}

Check upper_check(std::string criterion, std::string name, double measured, double bound, double stderr_ = 0.0) {
  auto c = make_check(std::move(criterion), std::move(name), measured, bound, 0.0, stderr_, "one-sided: measured < target");
  c.pass = measured < bound;
  return c;
}

const std::vector<std::string> kPercHeader{"quantity", "scale", "mean", "stderr", "slope", "slope_lo", "slope_hi", "r2"};

void add_fit_rows(CsvTable& t, const std::string& quantity, const perc::ScalingFit& fit) {
  const double lo = fit.slope - 1.96 * fit.slope_se, hi = fit.slope + 1.96 * fit.slope_se;
  for (std::size_t k = 0; k < fit.scales.size(); ++k)
    t.add({quantity, num(fit.scales[k]), num(fit.means[k]), num(fit.stderrs[k]), num(fit.slope), num(lo), num(hi),
           num(fit.r2)});
}

void add_mean_row(CsvTable& t, const std::string& quantity, double scale, const stats::Summary& s) {
  t.add({quantity, num(scale), num(s.mean), num(s.stderr_), "", "", "", ""});
}

/// Streams for per-scale alpha estimates, kept apart from the configuration streams.
constexpr std::uint64_t kAlphaTag = 1000000;

}  // namespace

std::vector<TrialRecord> row_records(const std::vector<Json>& rows, std::uint64_t seed) {
  std::vector<TrialRecord> out;
  for (std::size_t i = 0; i < rows.size(); ++i) out.push_back({i, seed, rows[i], 0.0});
  return out;
}

Check make_check(std::string criterion, std::string name, double measured, double target, double tolerance,
                 double stderr_, std::string note) {
  Check c{std::move(criterion), std::move(name), measured, target, tolerance, stderr_, false, std::move(note)};
  c.pass = std::abs(measured - target) <= tolerance;
  return c;
}

RunResult run_dims(const ExperimentSpec& spec, bool assert_kpz) {
  require_no_verb(spec);
  const auto& P = spec.params;
  const auto kinds = P.texts("kinds", {"boundary", "cut", "pivotal", "carpet", "gasket"});
  const auto kappas = P.numbers("kappa", default_kappa_grid());
  const auto rho_fracs = P.numbers("rho_frac", {0.1, 0.5, 0.9});
  const bool explicit_rho = P.has("rho");
  const auto rhos = P.numbers("rho", {});
  const double tol = P.number("tol", 1e-12);
  P.reject_unused();
  std::vector<FractalTag> tags;
  for (const auto& k : kinds) tags.push_back(parse_fractal_tag(k));

  RunResult r;
  r.experiment = spec.subcommand;
  r.summary.header = {"kind", "kappa", "rho", "dimension", "quantum_exponent", "kpz_residual"};
  std::vector<Json> rows;
  std::map<FractalTag, double> worst;
  for (double kappa : kappas) {
    const auto p = SleParams::from_kappa(kappa);
    for (auto tag : tags) {
      std::vector<double> rho_list{0.0};
      if (tag == FractalTag::BoundaryTouching) {
        rho_list = rhos;
        if (!explicit_rho) {
          rho_list.clear();
          for (double f : rho_fracs) rho_list.push_back(-2.0 + f * 0.5 * p.kappa);
        }
      }
      for (double rho : rho_list) {
        const FractalKind kind{tag, rho};
        try {
          validate(kind, p);
        } catch (const ParameterError&) {
          continue;
        }
        const double d = dimension(kind, p), a = quantum_exponent(kind, p), res = kpz_residual(kind, p);
        worst[tag] = std::max(worst[tag], std::abs(res));
        const std::string name(to_string(tag));
        r.summary.add({name, num(kappa), num(rho), num(d), num(a), num(res)});
        rows.push_back(Json{{"kind", name}, {"kappa", kappa}, {"rho", rho}, {"dimension", d}, {"quantum_exponent", a},
                            {"kpz_residual", res}});
      }
    }
  }
  if (rows.empty()) throw ParameterError("no (kind, kappa) pair in the sweep is admissible");
  r.records = row_records(rows, spec.seed);
  if (assert_kpz)
    for (const auto& [tag, w] : worst) r.checks.push_back(make_check("kpz", std::string(to_string(tag)), w, 0.0, tol));
  return r;
}

RunResult run_loewner(const ExperimentSpec& spec) {
  require_no_verb(spec);
  const auto& P = spec.params;
  const double kappa = P.number("kappa", 2.0);
  const double rho = P.number("rho", 0.0);
  const double dt = P.number("dt", 1e-4);
  const double horizon = P.number("horizon", 1.0);
  const auto resolution = positive_count(P.integer("resolution", 256), "resolution");
  const auto walks = positive_count(P.integer("walks", 400), "walks");
  double tolerance = P.number("tolerance", -1.0);
  const double min_time = P.number("min_time", 0.0);
  P.reject_unused();
  if (!(kappa > 0.0 && kappa < 8.0)) throw ParameterError("kappa must lie in (0, 8)");
  if (!(dt > 0.0 && horizon > dt)) throw ParameterError("need 0 < dt < horizon");
  if (resolution < 2) throw ParameterError("resolution must be >= 2");
  if (tolerance < 0.0) tolerance = 0.03 * std::sqrt(dt);
  const std::vector<loewner::ForceSpec> forces{{loewner::Side::Right, 0.0, rho}};
  loewner::validate_forces(forces);

  RunResult r;
  r.experiment = "loewner";
  r.records = run_trials(trials_or(spec, 16), spec.seed, spec.threads, [&](std::size_t, std::uint64_t key) {
    const auto d = loewner::simulate_driving(kappa, forces, dt, horizon, key);
    Json hits = Json::array();
    for (const auto& h : loewner::boundary_hits(d, tolerance, min_time)) hits.push_back(h.time);
    const auto tr = loewner::trace_curve(d, resolution);
    const auto tip = tr.points.back();
    const double hcap = loewner::halfplane_capacity(tr, {walks, key, 1e-4});
    return Json{{"seed", key},     {"kappa", kappa},        {"rho", rho}, {"hit_times", hits},
                {"tip", {tip.real(), tip.imag()}}, {"hcap_est", hcap}};
  });
  std::vector<double> hcaps, nhits;
  double touched = 0.0;
  for (const auto& rec : r.records) {
    hcaps.push_back(rec.payload["hcap_est"].get<double>());
    nhits.push_back(static_cast<double>(rec.payload["hit_times"].size()));
    touched += rec.payload["hit_times"].empty() ? 0.0 : 1.0;
  }
  const auto hs = stats::summarize(hcaps);
  const auto ns = stats::summarize(nhits);
  r.summary.header = {"kappa", "rho", "paths", "touch_share", "mean_hits", "hcap_mean", "hcap_stderr"};
  r.summary.add({num(kappa), num(rho), std::to_string(hcaps.size()), num(touched / static_cast<double>(hcaps.size())),
                 num(ns.mean), num(hs.mean), num(hs.stderr_)});
  r.checks.push_back(make_check("loewner", "hcap", hs.mean, 2.0 * horizon, 0.2 * horizon, hs.stderr_, "10% of 2T"));
  return r;
}

RunResult run_levy(const ExperimentSpec& spec) {
  require_no_verb(spec);
  const auto& P = spec.params;
  const auto betas = P.numbers("beta", {0.3, 0.5, 0.7, 0.9});
  const double c = P.number("c", 1.0);
  const double t = P.number("t", 1.0);
  const double a = P.number("scale", 4.0);
  const double cutoff = P.number("cutoff", 1e-5);
  const double lam_lo = P.number("lambda_lo", 0.1);
  const double lam_hi = P.number("lambda_hi", 10.0);
  const auto lam_points = positive_count(P.integer("lambda_points", 100), "lambda_points");
  const double beta_tol = P.number("beta_tol", 0.05);
  const double ks_level = P.number("ks_level", 0.01);
  const double beta_prime = P.number("beta_prime", 0.0);
  const auto tail_q = P.numbers("tail_quantiles", {0.5, 0.999});
  P.reject_unused();
  for (double b : betas)
    if (!(b > 0.0 && b <= 1.0)) throw ParameterError("beta must lie in (0, 1]");
  if (!(c > 0.0 && t > 0.0 && a > 0.0 && cutoff > 0.0)) throw ParameterError("c, t, scale and cutoff must be > 0");
  if (tail_q.size() != 2) throw ParameterError("tail_quantiles takes two values");
  if (beta_prime != 0.0 && !(beta_prime > 1.0 && beta_prime < 2.0)) throw ParameterError("beta_prime must lie in (1, 2)");
  const auto lambdas = levy::log_grid(lam_lo, lam_hi, lam_points);
  const std::size_t n = trials_or(spec, 2000);

  RunResult r;
  r.experiment = "levy";
  r.records = run_trials(n, spec.seed, spec.threads, [&](std::size_t, std::uint64_t key) {
    Json tau = Json::array(), tau_at = Json::array();
    for (std::size_t k = 0; k < betas.size(); ++k) {
      tau.push_back(levy::sample_subordinator(betas[k], c, t, cutoff, derive_seed(key, 2 * k)).value(t));
      tau_at.push_back(levy::sample_subordinator(betas[k], c, a * t, cutoff, derive_seed(key, 2 * k + 1)).value(a * t));
    }
    return Json{{"beta", betas}, {"tau_t", tau}, {"tau_at", tau_at}};
  });
  r.summary.header = {"beta", "c", "n", "beta_hat", "c_hat", "ks_stat", "tail_slope"};
  for (std::size_t k = 0; k < betas.size(); ++k) {
    const double b = betas[k];
    std::vector<double> tau, scaled, big;
    for (const auto& rec : r.records) {
      tau.push_back(rec.payload["tau_t"][k].get<double>());
      big.push_back(rec.payload["tau_at"][k].get<double>());
      scaled.push_back(std::pow(a, 1.0 / b) * tau.back());
    }
    const auto fit = levy::laplace_fit(tau, lambdas);
    const auto ks = stats::ks_two_sample(big, scaled);
    const double crit = stats::ks_two_sample_critical(n, n, ks_level);
    const double slope = b < 1.0 ? levy::tail_slope(tau, tail_q[0], tail_q[1]) : std::nan("");
    r.summary.add({num(b), num(c), std::to_string(n), num(fit.beta_hat), num(fit.c_hat), num(ks.statistic), num(slope)});
    const std::string tag = "beta=" + num(b);
    r.checks.push_back(make_check("levy", "laplace/" + tag, fit.beta_hat, b, beta_tol, fit.beta_se));
    r.checks.push_back(upper_check("levy", "scaling_ks/" + tag, ks.statistic, crit));
    if (b == 1.0) {
      double dev = 0.0;
      for (double x : tau) dev = std::max(dev, std::abs(x - c * t));
      r.checks.push_back(make_check("levy", "line/" + tag, dev, 0.0, 0.0));
    }
  }
  if (beta_prime != 0.0) {
    const auto fp = levy::first_passage_sizebias(beta_prime, n, derive_seed(spec.seed, ~std::uint64_t{0}));
    double slope = std::nan("");
    std::string note;
    try {
      slope = levy::tail_slope(fp.size_biased, tail_q[0], tail_q[1]);
    } catch (const ParameterError& e) {
      note = e.what();
    }
    r.checks.push_back(make_check("levy", "first_passage_tail/beta'=" + num(beta_prime), slope,
                                  -(1.0 + 1.0 / beta_prime), 0.15, 0.0, note));
  }
  return r;
}

RunResult run_gmc(const ExperimentSpec& spec) {
  const auto verb = verb_or(spec, {"all", "girsanov", "coordinate", "variance"}, "all");
  const auto& P = spec.params;
  const auto n = positive_count(P.integer("n", 64), "n");
  const auto gammas = P.numbers("gamma", {0.25, 0.5, 1.0});
  const double eps_cells = P.number("eps_cells", 4.0);
  const auto cc_cells = positive_count(P.integer("cc_cells", 64), "cc_cells");
  const auto cc_r = P.numbers("cc_r", {0.5, 2.0});
  const double cc_gamma = P.number("cc_gamma", 0.5);
  const double cc_eps_cells = P.number("cc_eps_cells", 4.0);
  const auto cc_trials = positive_count(P.integer("cc_trials", 100), "cc_trials");
  const auto var_n = positive_count(P.integer("var_n", 128), "var_n");
  const auto var_eps = P.numbers("var_eps_cells", {2, 3, 4, 6, 8, 12, 16});
  P.reject_unused();
  const bool all = verb == "all";

  RunResult r;
  r.experiment = "gmc." + verb;
  r.summary.header = {"n", "gamma", "eps", "test_name", "estimate", "stderr", "zscore"};
  std::vector<Json> rows;
  auto row = [&](std::size_t nn, double g, double eps, const std::string& name, double est, double se, double z) {
    r.summary.add({std::to_string(nn), num(g), num(eps), name, num(est), num(se), num(z)});
    rows.push_back(Json{{"n", nn}, {"gamma", g}, {"eps", eps}, {"test_name", name}, {"estimate", jnum(est)},
                        {"stderr", jnum(se)}, {"zscore", jnum(z)}});
  };
  if (all || verb == "girsanov") {
    const double eps = eps_cells / static_cast<double>(n - 1);
    const auto battery = gmc::girsanov_battery(n);
    for (std::size_t g = 0; g < gammas.size(); ++g) {
      const auto res = gmc::girsanov_check(n, gammas[g], n / 2, n / 2, eps, battery, trials_or(spec, 2000),
                                           derive_seed(spec.seed, g));
      for (std::size_t s = 0; s < battery.size(); ++s) {
        const auto name = "girsanov/" + battery[s].name;
        row(n, gammas[g], eps, name, res[s].weighted - res[s].shifted, res[s].stderr_, res[s].zscore);
        r.checks.push_back(make_check("gmc", name + "/gamma=" + num(gammas[g]), res[s].zscore, 0.0, 3.0));
      }
    }
  }
  if (all || verb == "coordinate") {
    const double eps = cc_eps_cells / static_cast<double>(cc_cells);
    for (std::size_t k = 0; k < cc_r.size(); ++k) {
      const auto res = gmc::coordinate_change_check(cc_cells, cc_r[k], cc_gamma, eps, cc_trials, derive_seed(spec.seed, 100 + k));
      const double se = std::hypot(res.stderr_original, res.stderr_mapped);
      const double z = se > 0.0 ? (res.mass_mapped - res.mass_original) / se : 0.0;
      const auto name = "coordinate/r=" + num(cc_r[k]);
      row(cc_cells, cc_gamma, eps, name, res.discrepancy, res.mass_original > 0.0 ? se / res.mass_original : 0.0, z);
      r.checks.push_back(upper_check("gmc", name, res.discrepancy, 0.10));
    }
  }
  if (all || verb == "variance") {
    const double cell = 1.0 / static_cast<double>(var_n - 1);
    std::vector<double> xs, ys;
    for (double e : var_eps) {
      const double eps = e * cell;
      const double v = gmc::circle_average_variance(var_n, 0.5, 0.5, eps);
      xs.push_back(std::log(eps));
      ys.push_back(v);
      row(var_n, 0.0, eps, "variance", v, 0.0, std::nan(""));
    }
    const auto fit = stats::fit_line(xs, ys);
    row(var_n, 0.0, std::nan(""), "variance_fit/slope", -fit.slope, fit.slope_se, std::nan(""));
    row(var_n, 0.0, std::nan(""), "variance_fit/r2", fit.r2, 0.0, std::nan(""));
    r.checks.push_back(make_check("gmc", "variance_fit/slope", -fit.slope, 1.0, 0.1, fit.slope_se));
    auto r2 = make_check("gmc", "variance_fit/r2", fit.r2, 0.95, 0.0, 0.0, "one-sided: measured > target");
    r2.pass = fit.r2 > 0.95;
    r.checks.push_back(r2);
  }
  r.records = row_records(rows, spec.seed);
  return r;
}

RunResult run_perc(const ExperimentSpec& spec) {
  const auto verb = verb_or(spec, {"arms", "pivotal", "area", "pseudo", "energy", "qmult"}, nullptr);
  const auto& P = spec.params;
  RunResult r;
  r.experiment = "perc." + verb;
  r.summary.header = kPercHeader;

  if (verb == "arms") {
    const auto arms = P.integer("arms", 4);
    const auto ns = sorted_ints(P.integers("ns", {32, 64, 128, 256}), "ns", 8);
    P.reject_unused();
    if (arms != 1 && arms != 4) throw ParameterError("arms must be 1 or 4");
    if (ns.size() < 3) throw ParameterError("ns needs at least three sizes");
    const int rmax = ns.back() / 2;
    const auto annulus = arms == 4 ? perc::four_arm_annulus(1, rmax) : perc::one_arm_annulus(0, rmax);
    const std::size_t trials = trials_or(spec, 2000);
    r.records = run_trials(trials, spec.seed, spec.threads, [&](std::size_t, std::uint64_t key) {
      return Json{{"reach", perc::arm_reach(annulus, key)}};
    });
    std::vector<double> means, ses;
    for (int n : ns) {
      std::size_t hits = 0;
      for (const auto& rec : r.records) hits += rec.payload["reach"].get<int>() >= n / 2 ? 1 : 0;
      const auto e = perc::make_estimate(hits, trials);
      means.push_back(e.value);
      ses.push_back(e.stderr_);
    }
    auto fit = perc::scaling_fit(as_doubles(ns), means, ses);
    fit.slope = -fit.slope;
    const auto quantity = std::to_string(arms) + "-arm";
    add_fit_rows(r.summary, quantity, fit);
    r.checks.push_back(make_check("perc", "arm_exponent/" + quantity, fit.slope, arms == 4 ? 5.0 / 4.0 : 5.0 / 48.0,
                                  arms == 4 ? 0.15 : 0.04, fit.slope_se));
  } else if (verb == "pivotal" || verb == "area") {
    const bool pivotal = verb == "pivotal";
    const auto scales = pivotal ? sorted_ints(P.integers("sides", {16, 32, 64, 128, 256}), "sides", 8)
                                : sorted_ints(P.integers("radii", {8, 16, 32, 64, 128}), "radii", 1);
    const double alpha4 = pivotal ? P.number("alpha4", 1.0) : 1.0;
    const double n_ref = pivotal ? P.number("n_ref", scales.empty() ? 1.0 : scales.back()) : 1.0;
    P.reject_unused();
    if (scales.size() < 3) throw ParameterError(verb + " needs at least three scales");
    if (!(alpha4 > 0.0 && n_ref > 0.0)) throw ParameterError("alpha4 and n_ref must be > 0");
    const double unit = 1.0 / (n_ref * n_ref * alpha4);
    r.records = run_trials(trials_or(spec, 100), spec.seed, spec.threads, [&](std::size_t t, std::uint64_t) {
      Json counts = Json::array();
      for (int s : scales) {
        const auto key = derive_seed(perc::scale_seed(spec.seed, static_cast<std::uint64_t>(s)), t);
        counts.push_back(pivotal ? perc::four_arm_sites(perc::sample_config(static_cast<std::size_t>(s), perc::Shape::box, key), s)
                                       .size()
                                 : perc::area_count(s, key));
      }
      return Json{{"scale", scales}, {"count", counts}};
    });
    std::vector<double> means, ses;
    for (std::size_t k = 0; k < scales.size(); ++k) {
      std::vector<double> v;
      for (const auto& rec : r.records) v.push_back(rec.payload["count"][k].get<double>() * (pivotal ? unit : 1.0));
      const auto sm = stats::summarize(v);
      means.push_back(sm.mean);
      ses.push_back(sm.stderr_);
    }
    const auto fit = perc::scaling_fit(as_doubles(scales), means, ses);
    add_fit_rows(r.summary, pivotal ? "pivotal_mass" : "area_count", fit);
    r.checks.push_back(make_check("perc", pivotal ? "pivotal_scaling" : "area_scaling", fit.slope,
                                  pivotal ? 0.75 : 91.0 / 48.0, 0.10, fit.slope_se));
  } else if (verb == "pseudo" || verb == "energy") {
    const bool pseudo = verb == "pseudo";
    const auto ns = sorted_ints(P.integers("ns", pseudo ? std::vector<std::int64_t>{64, 128} : std::vector<std::int64_t>{64, 128, 256}),
                                "ns", 16);
    const auto alpha_trials = positive_count(P.integer("alpha_trials", pseudo ? 100000 : 20000), "alpha_trials");
    const double d = pseudo ? 0.0 : P.number("d", 91.0 / 48.0);
    const double eps_exp = pseudo ? 0.0 : P.number("eps_exp", 0.1);
    P.reject_unused();
    if (ns.size() < 2) throw ParameterError(verb + " needs at least two sizes");
    std::vector<double> alpha;
    std::vector<perc::Estimate> alpha_est;
    for (int n : ns) {
      const auto a = pseudo ? perc::four_arm_annulus(1, n / 2) : perc::one_arm_annulus(0, n / 2);
      const auto e = perc::arm_probability(static_cast<std::size_t>(n), a, alpha_trials,
                                           perc::scale_seed(spec.seed, kAlphaTag + static_cast<std::uint64_t>(n)));
      if (!(e.value > 0.0)) throw ParameterError("no arm events in the alpha estimate; raise alpha_trials");
      alpha.push_back(e.value);
      alpha_est.push_back(e);
    }
    r.records = run_trials(trials_or(spec, pseudo ? 200 : 40), spec.seed, spec.threads, [&](std::size_t t, std::uint64_t) {
      Json first = Json::array(), second = Json::array();
      for (std::size_t k = 0; k < ns.size(); ++k) {
        const int n = ns[k];
        const auto cfg = perc::sample_config(static_cast<std::size_t>(n), perc::Shape::disk,
                                             derive_seed(perc::scale_seed(spec.seed, static_cast<std::uint64_t>(n)), t));
        if (pseudo) {
          const auto sel = perc::pseudo_interface(cfg).p0_in(n / 8, 3 * n / 8);
          const auto piv = perc::four_arm_filter(cfg, sel, n / 16);
          first.push_back(sel.size());
          second.push_back(static_cast<double>(piv.size()) * cfg.delta() * cfg.delta() / alpha[k]);
        } else {
          const auto m = perc::area_measure(cfg, n / 4, n / 2, alpha[k]);
          first.push_back(m.total());
          second.push_back(m.atoms.size() >= 2 ? perc::energy_estimate(m, d, eps_exp) : 0.0);
        }
      }
      return pseudo ? Json{{"n", ns}, {"p0_sites", first}, {"mu_p0", second}}
                    : Json{{"n", ns}, {"lambda", first}, {"energy", second}};
    });
    const char* first_key = pseudo ? "p0_sites" : "lambda";
    const char* second_key = pseudo ? "mu_p0" : "energy";
    std::vector<double> means;
    for (std::size_t k = 0; k < ns.size(); ++k) {
      std::vector<double> a, b;
      for (const auto& rec : r.records) {
        a.push_back(rec.payload[first_key][k].get<double>());
        b.push_back(rec.payload[second_key][k].get<double>());
      }
      add_mean_row(r.summary, pseudo ? "alpha4" : "alpha1", ns[k], {alpha[k], alpha_est[k].stderr_, 0.0, alpha_trials});
      add_mean_row(r.summary, first_key, ns[k], stats::summarize(a));
      const auto sb = stats::summarize(b);
      add_mean_row(r.summary, second_key, ns[k], sb);
      means.push_back(sb.mean);
    }
    if (pseudo) {
      const double ratio = means.front() > 0.0 ? means.back() / means.front() : std::nan("");
      r.checks.push_back(upper_check("perc", "p0_mass_ratio", ratio, 1.3));
    } else {
      const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
      r.checks.push_back(upper_check("perc", "energy_max_over_min", *lo > 0.0 ? *hi / *lo : std::nan(""), 3.0));
    }
  } else {
    const auto n = P.integer("n", 128);
    const auto rr = P.integers("r", {2, 8, 32});
    P.reject_unused();
    if (rr.size() != 3) throw ParameterError("r takes three radii r1, r2, r3");
    const int r1 = static_cast<int>(rr[0]), r2 = static_cast<int>(rr[1]), r3 = static_cast<int>(rr[2]);
    if (!(r1 >= 0 && r1 <= r2 && r2 < r3)) throw ParameterError("radii need r1 <= r2 < r3");
    if (n < 8 || r3 > n / 2) throw ParameterError("r3 must be <= n/2 with n >= 8");
    const auto whole = perc::one_arm_annulus(r1, r3), inner = perc::one_arm_annulus(r1, r2 == r1 ? r1 + 1 : r2),
               outer = perc::one_arm_annulus(r2 + 1, r3);
    const bool split = r2 > r1;
    const std::size_t trials = trials_or(spec, 8000);
    r.records = run_trials(trials, spec.seed, spec.threads, [&](std::size_t t, std::uint64_t key) {
      Json j{{"whole", perc::arm_reach(whole, key) >= r3}};
      if (split) {
        j["inner"] = perc::arm_reach(inner, derive_seed(perc::scale_seed(spec.seed, 1), t)) >= r2;
        j["outer"] = perc::arm_reach(outer, derive_seed(perc::scale_seed(spec.seed, 2), t)) >= r3;
      }
      return j;
    });
    auto count = [&](const char* k) {
      std::size_t h = 0;
      for (const auto& rec : r.records) h += rec.payload[k].get<bool>() ? 1 : 0;
      return perc::make_estimate(h, trials);
    };
    const auto w = count("whole");
    const auto res = split ? perc::quasi_mult_result(count("inner"), count("outer"), w)
                           : perc::quasi_mult_result(perc::make_estimate(trials, trials), w, w);
    add_mean_row(r.summary, "inner", static_cast<double>(n), {res.inner.value, res.inner.stderr_, 0.0, trials});
    add_mean_row(r.summary, "outer", static_cast<double>(n), {res.outer.value, res.outer.stderr_, 0.0, trials});
    add_mean_row(r.summary, "whole", static_cast<double>(n), {res.whole.value, res.whole.stderr_, 0.0, trials});
    add_mean_row(r.summary, "product", static_cast<double>(n), {res.product, res.product_stderr, 0.0, trials});
    const double sigma = std::hypot(res.product_stderr, res.whole.stderr_);
    auto c = make_check("perc", "quasi_mult", res.whole.value, res.product, 3.0 * sigma, sigma,
                        "one-sided: measured <= target + tolerance");
    c.pass = res.pass;
    r.checks.push_back(c);
  }
  return r;
}

RunResult run_suite(const ExperimentSpec& spec) {
  const auto verb = verb_or(spec, {"fast", "full"}, "fast");
  spec.params.reject_unused();
  SuiteOptions opts;
  opts.seed = spec.seed;
  const auto report = regression_suite(parse_suite_level(verb), opts);
  RunResult r;
  r.experiment = "suite." + verb;
  r.checks = report.checks;
  r.summary = checks_table(report.checks);
  std::vector<Json> rows;
  for (const auto& c : report.checks)
    rows.push_back(Json{{"criterion", c.criterion}, {"check", c.name}, {"measured", jnum(c.measured)},
                        {"target", jnum(c.target)}, {"tolerance", jnum(c.tolerance)}, {"stderr", jnum(c.stderr_)},
                        {"pass", c.pass}, {"note", c.note}});
  r.records = row_records(rows, spec.seed);
  return r;
}

}  // namespace lqg::harness::detail
