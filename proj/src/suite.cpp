#include <algorithm>
#include <array>
#include <cmath>

#include "experiments.hpp"
#include "lqg/gmc.hpp"
#include "lqg/levy.hpp"
#include "lqg/params.hpp"
#include "lqg/perc.hpp"
#include "lqg/rng.hpp"

namespace lqg::harness {

namespace {

using detail::make_check;

class Collector {
 public:
  Collector(SuiteReport& report, const SuiteOptions& opts) : report_(report), opts_(opts) {}

  void add(Check c) {
    if (opts_.on_check) opts_.on_check(c);
    report_.checks.push_back(std::move(c));
  }

  /// Runs an experiment and files its checks under `criterion`.
  RunResult run(const std::string& criterion, ExperimentSpec spec) {
    auto r = run_experiment(spec);
    for (auto c : r.checks) {
      c.criterion = criterion;
      c.name = r.experiment + "/" + c.name;
      add(std::move(c));
    }
    return r;
  }

 private:
  SuiteReport& report_;
  const SuiteOptions& opts_;
};

ExperimentSpec make_spec(std::string sub, std::string verb, std::size_t trials, std::uint64_t seed,
                         std::initializer_list<std::pair<const char*, const char*>> params) {
  ExperimentSpec s;
  s.subcommand = std::move(sub);
  s.verb = std::move(verb);
  s.trials = trials;
  s.seed = seed;
  s.threads = 0;
  for (const auto& [k, v] : params) s.params.set(k, std::string_view(v));
  return s;
}

void exact_identities(Collector& out, const SuiteOptions& opts) {
  const std::string crit = "exact-identities";
  const KpzResidualFn kpz = opts.kpz_residual ? opts.kpz_residual : KpzResidualFn(&kpz_residual);
  for (auto tag : {FractalTag::BoundaryTouching, FractalTag::CutPoints, FractalTag::Pivotal, FractalTag::Carpet,
                   FractalTag::Gasket}) {
    double worst = 0.0;
    std::size_t points = 0;
    for (int i = 0; i < 20; ++i) {
      const auto p = SleParams::from_kappa(8.0 / 3.0 + (4.0 - 8.0 / 3.0) * (i + 0.5) / 20.0);
      std::vector<double> rhos{0.0};
      if (tag == FractalTag::BoundaryTouching) rhos = {-2.0 + 0.1 * 0.5 * p.kappa, -2.0 + 0.5 * 0.5 * p.kappa, -2.0 + 0.9 * 0.5 * p.kappa};
      for (double rho : rhos) {
        worst = std::max(worst, std::abs(kpz({tag, rho}, p)));
        ++points;
      }
    }
    out.add(make_check(crit, "kpz/" + std::string(to_string(tag)), worst, 0.0, 1e-12, 0.0,
                       "max over " + std::to_string(points) + " grid points"));
  }
  const auto p6 = SleParams::from_kappa(6.0);
  const auto p3 = SleParams::from_kappa(3.0);
  out.add(make_check(crit, "dimension/cut@kappa'=6", dimension(FractalKind::cut_points(), p6), 0.75, 1e-12));
  out.add(make_check(crit, "dimension/pivotal@kappa'=6", dimension(FractalKind::pivotal(), p6), 0.75, 1e-12));
  out.add(make_check(crit, "dimension/gasket@kappa'=6", dimension(FractalKind::gasket(), p6), 91.0 / 48.0, 1e-12));
  out.add(make_check(crit, "index/cut@kappa'=6", subordinator_index(SubordinatorConstruction::CutPoints, p6), 0.5, 1e-12));
  out.add(make_check(crit, "index/pivotal@kappa'=6", subordinator_index(SubordinatorConstruction::Pivotal, p6), 0.5, 1e-12));
  out.add(make_check(crit, "index/carpet_mass@kappa=3", subordinator_index(SubordinatorConstruction::CarpetCpiMass, p3),
                     0.6, 1e-12));
}

void subordinator(Collector& out, SuiteLevel level, std::uint64_t seed) {
  const std::string crit = "subordinator";
  double dev = 0.0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto p = levy::sample_subordinator(1.0, 1.5, 1.0, 1e-8, derive_seed(seed, i));
    for (int k = 0; k <= 16; ++k) dev = std::max(dev, std::abs(p.value(k / 16.0) - 1.5 * (k / 16.0)));
  }
  out.add(make_check(crit, "line/beta=1", dev, 0.0, 0.0, 0.0, "1000 paths, 17 times each"));
  if (level == SuiteLevel::full)
    out.run(crit, make_spec("levy", "", 10000, derive_seed(seed, 1 << 20),
                            {{"beta", "[0.3, 0.5, 0.7, 0.9]"}, {"beta_prime", "7/6"}}));
}

void bessel(Collector& out, std::uint64_t seed) {
  for (double dim : {2.0 / 3.0, 1.0, 4.0 / 3.0}) {
    std::vector<double> scales, mean_log;
    const std::size_t seeds = 16;
    for (std::uint64_t s = 0; s < seeds; ++s) {
      const auto z = levy::bessel_zero_set(dim, 0x1.0p-20, 1.0, derive_seed(seed, s));
      if (scales.empty()) {
        scales = z.box_scales;
        mean_log.assign(scales.size(), 0.0);
      }
      for (std::size_t j = 0; j < scales.size(); ++j) mean_log[j] += std::log(z.box_counts[j]) / seeds;
    }
    const std::size_t levels = scales.size();
    const double est = levy::box_dimension(scales, mean_log, 2, levels > 7 ? levels - 6 : levels - 1);
    out.add(make_check("bessel", "zero_set_dimension/dim=" + format_number(dim), est, 1.0 - dim / 2.0, 0.07, 0.0,
                       "16 paths, dt = 2^-20"));
  }
}

void gmc_checks(Collector& out, SuiteLevel level, std::uint64_t seed) {
  const std::string crit = "gmc";
  const std::size_t n = 64;
  auto f = gmc::sample_gff(n, derive_seed(seed, 0));
  const auto area = gmc::gmc_measure(f, 0.0, 0.05);
  double dev = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dev = std::max(dev, std::abs(area.masses[i * n + j] - gmc::cell_area(n, 1.0, i, j)));
  out.add(make_check(crit, "gamma0_equals_area", dev, 0.0, 0.0));

  const double gamma = 0.8, c = 0.37;
  const auto mol = gmc::make_mollifier(n, 4.0 / 63.0);
  const auto base = gmc::gmc_measure(f, gamma, mol);
  f.offset = c;
  const auto shifted = gmc::gmc_measure(f, gamma, mol);
  double rel = 0.0;
  for (std::size_t q = 0; q < base.masses.size(); ++q)
    if (base.masses[q] > 0.0) rel = std::max(rel, std::abs(shifted.masses[q] / (base.masses[q] * std::exp(gamma * c)) - 1.0));
  out.add(make_check(crit, "constant_shift", rel, 0.0, 1e-12, 0.0, "max relative deviation from e^{gamma c}"));

  const std::vector<gmc::Statistic> one{{"one", [](const gmc::GridField&) { return 1.0; }}};
  const auto g1 = gmc::girsanov_check(n, 0.7, 32, 32, 4.0 / 63.0, one, 200, derive_seed(seed, 1));
  out.add(make_check(crit, "girsanov/constant_statistic", g1[0].weighted - g1[0].shifted, 0.0, 1e-12));
  out.add(make_check(crit, "coordinate/r=1", gmc::coordinate_change_check(64, 1.0, 0.5, 0.05, 20, derive_seed(seed, 2)).discrepancy,
                     0.0, 0.0));
  if (level == SuiteLevel::full)
    out.run(crit, make_spec("gmc", "all", 20000, derive_seed(seed, 3),
                            {{"n", "128"}, {"gamma", "[0.25, 0.5, 1.0]"}, {"eps_cells", "8"}, {"cc_cells", "256"},
                             {"cc_r", "[0.5, 2]"}, {"cc_eps_cells", "8"}, {"cc_trials", "200"}, {"var_n", "128"}}));
}

void percolation(Collector& out, std::uint64_t seed) {
  const std::string crit = "percolation";
  const std::vector<std::size_t> ns{32, 64, 128, 256};
  const auto one = perc::arm_exponent(ns, false, 20000, derive_seed(seed, 1));
  out.add(make_check(crit, "arm_exponent/1-arm", one.slope, 5.0 / 48.0, 0.04, one.slope_se, "n = 32..256, 20000 trials"));
  const auto four = perc::arm_exponent(ns, true, 400000, derive_seed(seed, 2));
  out.add(make_check(crit, "arm_exponent/4-arm", four.slope, 5.0 / 4.0, 0.15, four.slope_se, "n = 32..256, 400000 trials"));
  const auto piv = perc::pivotal_scaling({16, 32, 64, 128, 256, 512}, 512, 1.0, 200, derive_seed(seed, 3));
  out.add(make_check(crit, "pivotal_scaling", piv.slope, 0.75, 0.10, piv.slope_se, "box sides 16..512, 200 trials"));
  const auto area = perc::area_scaling({8, 16, 32, 64, 128}, 200, derive_seed(seed, 4));
  out.add(make_check(crit, "area_scaling", area.slope, 91.0 / 48.0, 0.10, area.slope_se, "radii 8..128, 200 trials"));

  int k = 5;
  for (auto [r1, r2, r3] : {std::array<int, 3>{2, 2, 32}, {2, 8, 32}, {4, 16, 64}}) {
    const auto q = perc::quasi_mult_check(128, r1, r2, r3, 8000, derive_seed(seed, static_cast<std::uint64_t>(k++)));
    const double sigma = std::hypot(q.product_stderr, q.whole.stderr_);
    auto c = make_check(crit, "quasi_mult/" + std::to_string(r1) + "," + std::to_string(r2) + "," + std::to_string(r3),
                        q.whole.value, q.product, 3.0 * sigma, sigma, "one-sided: measured <= target + tolerance");
    c.pass = q.pass;
    out.add(c);
  }
  out.run(crit, make_spec("perc", "energy", 60, derive_seed(seed, 8), {{"ns", "[64, 128, 256]"}, {"alpha_trials", "20000"}}));
  out.run(crit, make_spec("perc", "pseudo", 1000, derive_seed(seed, 9), {{"ns", "[64, 128]"}, {"alpha_trials", "200000"}}));
}

void oracle(Collector& out) {
  std::size_t mismatches = 0;
  for (unsigned m = 0; m < (1u << 16); ++m) {
    std::vector<std::uint8_t> bits(16);
    for (unsigned i = 0; i < 16; ++i) bits[i] = static_cast<std::uint8_t>((m >> i) & 1u);
    const auto c = perc::config_from_bits(4, perc::Shape::box, bits);
    mismatches += perc::four_arm_sites(c, 3) == perc::flip_pivotals(c) ? 0 : 1;
  }
  out.add(make_check("oracle", "four_arm_sites_vs_flip/4x4", static_cast<double>(mismatches), 0.0, 0.0, 0.0,
                     "all 65536 configurations"));
}

void determinism(Collector& out, std::uint64_t seed) {
  const std::vector<ExperimentSpec> specs{
      make_spec("dims", "", 0, seed, {}),
      make_spec("loewner", "", 3, seed, {{"kappa", "3"}, {"rho", "-1"}, {"dt", "1e-3"}, {"resolution", "64"}, {"walks", "50"}}),
      make_spec("levy", "", 1000, seed, {{"beta", "[0.5, 0.8]"}, {"cutoff", "1e-4"}, {"lambda_points", "20"}}),
      make_spec("gmc", "girsanov", 60, seed, {{"n", "32"}, {"gamma", "[0.5]"}}),
      make_spec("perc", "arms", 400, seed, {{"ns", "[16, 32, 64]"}}),
      make_spec("perc", "pseudo", 8, seed, {{"ns", "[32, 64]"}, {"alpha_trials", "4000"}}),
  };
  for (auto spec : specs) {
    spec.threads = 1;
    const auto a = run_experiment(spec);
    const auto b = run_experiment(spec);
    spec.threads = 4;
    const auto c = run_experiment(spec);
    const auto text = [](const RunResult& r) { return r.ndjson() + r.summary.str() + checks_table(r.checks).str(); };
    const double diff = (text(a) == text(b) ? 0.0 : 1.0) + (text(a) == text(c) ? 0.0 : 1.0);
    out.add(make_check("determinism", a.experiment, diff, 0.0, 0.0, 0.0,
                       std::to_string(a.records.size()) + " records; repeat and 1 vs 4 threads"));
  }
}

}  // namespace

SuiteReport regression_suite(SuiteLevel level, const SuiteOptions& opts) {
  SuiteReport report;
  Collector out(report, opts);
  exact_identities(out, opts);
  subordinator(out, level, derive_seed(opts.seed, 1));
  if (level == SuiteLevel::full) bessel(out, derive_seed(opts.seed, 2));
  gmc_checks(out, level, derive_seed(opts.seed, 3));
  if (level == SuiteLevel::full) percolation(out, derive_seed(opts.seed, 4));
  oracle(out);
  determinism(out, derive_seed(opts.seed, 5));
  return report;
}

}  // namespace lqg::harness
