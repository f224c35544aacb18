#include <CLI11.hpp>

#include <charconv>
#include <iostream>
#include <string>
#include <vector>

#include "lqg/harness.hpp"

namespace {

namespace h = lqg::harness;

constexpr const char* kFooter = R"(subcommands:
  dims                 dimension / quantum exponent / KPZ residual table
                       params: kinds=[boundary,cut,pivotal,carpet,gasket] kappa=[..] rho=[..] rho_frac=[0.1,0.5,0.9]
  kpz                  as dims, and asserts |residual| <= tol (default 1e-12)
  loewner              SLE_kappa(rho) paths with a right force point at 0+
                       params: kappa rho dt horizon resolution walks tolerance min_time
  levy                 stable subordinators: Laplace fit, scaling KS, tail slope
                       params: beta=[..] c t scale cutoff lambda_lo lambda_hi lambda_points beta_tol ks_level
                               beta_prime tail_quantiles=[lo,hi]
  gmc [all|girsanov|coordinate|variance]
                       params: n gamma=[..] eps_cells cc_cells cc_r=[..] cc_gamma cc_eps_cells cc_trials
                               var_n var_eps_cells=[..]
  perc arms            params: arms=1|4 ns=[..]
  perc pivotal         params: sides=[..] alpha4 n_ref
  perc area            params: radii=[..]
  perc pseudo          params: ns=[..] alpha_trials
  perc energy          params: ns=[..] alpha_trials d eps_exp
  perc qmult           params: n r=[r1,r2,r3]
  suite [fast|full]    regression suite

Parameters are key=value words after the subcommand, --param key=value, or lines of a --config file
(flat key=value, lists as a=[1,2,3], '#' comments). The config file may also set seed, trials and threads.

Pseudo-interface conventions: the exploration starts on the edge between (R+1, 0) and (R, 1) with open
hexagons on its left and walks towards the origin; sites off the lattice count as closed. When the front
hexagon is explored or cut off from the origin's component, the turn leading back to that component is
taken; a turn against the hexagon's colour is a colour change (a disconnection time), any other such turn
records its pivot hexagon as a P0 point.

Outputs under --out: records.ndjson, summary.csv, checks.csv, timings.csv.
Exit codes: 0 all checks pass, 1 a check failed, 2 unknown subcommand, 3 invalid parameter, 4 I/O failure.)";

bool parse_u64(const std::string& s, std::uint64_t& out) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && !s.empty();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo experiments for SLE, Levy subordinators, GMC and critical percolation", "lqgkit"};
  app.footer(kFooter);
  std::uint64_t seed = 1;
  std::size_t trials = 0;
  int threads = 1;
  std::string out, config;
  std::vector<std::string> params, words;
  auto* seed_opt = app.add_option("--seed", seed, "root seed; trial t uses a stream derived from (seed, t)");
  auto* trials_opt = app.add_option("--trials", trials, "number of trials (0 = subcommand default)");
  auto* threads_opt = app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");
  app.add_option("--out", out, "output directory");
  app.add_option("--config", config, "key=value parameter file");
  app.add_option("-p,--param", params, "key=value parameter (repeatable)");
  app.add_option("command", words, "subcommand [verb] [key=value ...]")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return h::kExitInvalidParameter;
  }

  h::ExperimentSpec spec;
  spec.subcommand = words.front();
  spec.out = out;
  try {
    if (!config.empty()) {
      const auto file = h::load_config(config);
      for (const auto& [k, v] : file.entries()) {
        if (k == "seed" || k == "trials" || k == "threads") {
          std::uint64_t x = 0;
          if (v.is_list || !parse_u64(v.items.front(), x)) throw lqg::ParameterError("config '" + k + "' must be an integer");
          if (k == "seed" && seed_opt->count() == 0) seed = x;
          if (k == "trials" && trials_opt->count() == 0) trials = static_cast<std::size_t>(x);
          if (k == "threads" && threads_opt->count() == 0) threads = static_cast<int>(x);
        } else {
          spec.params.set(k, v);
        }
      }
    }
    for (std::size_t i = 1; i < words.size(); ++i) {
      if (words[i].find('=') != std::string::npos) {
        params.push_back(words[i]);
      } else if (spec.verb.empty()) {
        spec.verb = words[i];
      } else {
        throw lqg::ParameterError("unexpected argument '" + words[i] + "'");
      }
    }
    for (const auto& kv : params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw lqg::ParameterError("expected key=value, got '" + kv + "'");
      spec.params.set(kv.substr(0, eq), std::string_view(kv).substr(eq + 1));
    }
  } catch (const lqg::ParameterError& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return h::kExitInvalidParameter;
  } catch (const h::IoError& e) {
    std::cerr << "i/o failure: " << e.what() << '\n';
    return h::kExitIoFailure;
  }
  spec.seed = seed;
  spec.trials = trials;
  spec.threads = threads;
  return h::execute(spec, std::cout);
}
