#include <chrono>
#include <cstdio>
#include <map>
#include <string>

#include "lqg/harness.hpp"

using lqg::harness::Check;

namespace {

const char* const kCriteria[][2] = {
    {"exact-identities", "KPZ residuals, dimensions and subordinator indices in closed form"},
    {"subordinator", "Laplace exponent, scaling law and first-passage tail of stable subordinators"},
    {"bessel", "zero-set box dimension of Bessel processes"},
    {"gmc", "Girsanov shift, coordinate change and variance growth of the GMC field"},
    {"percolation", "arm exponents, pivotal and area scaling, quasi-multiplicativity, energy, pseudo-interface"},
    {"oracle", "four-arm detector against brute-force pivotals on all 4x4 boxes"},
    {"determinism", "byte-identical outputs across repeats and thread counts"},
};

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  std::map<std::string, double> seconds;
  auto last = clock::now();
  const auto start = last;

  lqg::harness::SuiteOptions opts;
  opts.on_check = [&](const Check& c) {
    const auto now = clock::now();
    seconds[c.criterion] += std::chrono::duration<double>(now - last).count();
    last = now;
    std::printf("  [%s] %-48s measured=%.6g target=%.6g tol=%.3g se=%.3g %s%s%s\n", c.criterion.c_str(), c.name.c_str(),
                c.measured, c.target, c.tolerance, c.stderr_, c.pass ? "ok" : "FAIL", c.note.empty() ? "" : "  ",
                c.note.c_str());
    std::fflush(stdout);
  };
  const auto report = lqg::harness::regression_suite(lqg::harness::SuiteLevel::full, opts);

  std::printf("\n");
  bool all = true;
  for (const auto& [name, title] : kCriteria) {
    std::size_t total = 0, failed = 0;
    for (const auto& c : report.checks) {
      if (c.criterion != name) continue;
      ++total;
      if (!c.pass) ++failed;
    }
    const bool pass = total > 0 && failed == 0;
    all = all && pass;
    std::printf("%s %-17s %zu/%zu checks, %.1f s: %s\n", pass ? "PASS" : "FAIL", name, total - failed, total,
                seconds[name], title);
  }
  std::printf("total %.1f s\n", std::chrono::duration<double>(clock::now() - start).count());
  return all ? 0 : 1;
}
