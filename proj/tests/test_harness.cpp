#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "lqg/harness.hpp"
#include "lqg/perc.hpp"
#include "lqg/rng.hpp"

using namespace lqg;
using namespace lqg::harness;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("lqgkit_test_" + name);
  std::filesystem::remove_all(d);
  return d;
}

ExperimentSpec spec_of(std::string sub, std::string verb, std::size_t trials, std::uint64_t seed,
                       std::initializer_list<std::pair<const char*, const char*>> params) {
  ExperimentSpec s;
  s.subcommand = std::move(sub);
  s.verb = std::move(verb);
  s.trials = trials;
  s.seed = seed;
  for (const auto& [k, v] : params) s.params.set(k, std::string_view(v));
  return s;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto m = parse_config("# header\nkappa = 8/3\nns=[32, 64,128]  # sizes\n\nname=cut\nempty=[]\n");
  CHECK(m.number("kappa", 0.0) == doctest::Approx(8.0 / 3.0));
  CHECK(m.integers("ns", {}) == std::vector<std::int64_t>{32, 64, 128});
  CHECK(m.text("name", "") == "cut");
  CHECK(m.numbers("empty", {1.0}).empty());
  CHECK(m.number("absent", 2.5) == 2.5);
  m.reject_unused();

  CHECK_THROWS_AS(parse_config("a=1\na=2\n"), ParameterError);
  CHECK_THROWS_AS(parse_config("just a line\n"), ParameterError);
  CHECK_THROWS_AS(parse_config("a=[1,2\n"), ParameterError);
  CHECK_THROWS_AS(parse_config("a=[1,,2]\n"), ParameterError);
  CHECK_THROWS_AS(parse_config("a=[1,2,]\n"), ParameterError);
  CHECK_THROWS_AS(parse_config("bad key=1\n"), ParameterError);
  CHECK_THROWS_AS(parse_config("a=\n"), ParameterError);

  const auto typed = parse_config("x=abc\ny=[1,2]\nz=1.5\n");
  CHECK_THROWS_AS(typed.number("x", 0.0), ParameterError);
  CHECK_THROWS_AS(typed.number("y", 0.0), ParameterError);
  CHECK_THROWS_AS(typed.integer("z", 0), ParameterError);

  const auto unused = parse_config("used=1\nspare=2\n");
  unused.number("used", 0.0);
  CHECK_THROWS_AS(unused.reject_unused(), ParameterError);

  const auto dir = scratch_dir("config");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "c.txt") << "beta=[0.5]\n";
  CHECK(load_config(dir / "c.txt").numbers("beta", {}) == std::vector<double>{0.5});
  CHECK_THROWS_AS(load_config(dir / "missing.txt"), IoError);
}

TEST_CASE("csv quoting and number format") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  CsvTable t{{"k", "v"}, {}};
  t.add({"x,y", "1"});
  CHECK(t.str() == "k,v\n\"x,y\",1\n");
  CHECK_THROWS(t.add({"short"}));

  for (double x : {0.1, 1.0 / 3.0, 6.02e23, -2.5e-300, 0.0}) CHECK(std::stod(format_number(x)) == x);
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("ndjson lines carry the schema fields and no wall time") {
  TrialRecord r{3, 99, Json{{"x", 1.5}, {"v", {1, 2}}}, 12.0};
  const auto line = ndjson_line(r, "demo");
  CHECK(line.find('\n') == std::string::npos);
  const auto j = Json::parse(line);
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["experiment"] == "demo");
  CHECK(j["trial"] == 3);
  CHECK(j["seed"] == 99);
  CHECK(j["payload"]["x"] == 1.5);
  CHECK(j.size() == 5);
}

TEST_CASE("trial runner: order, seeds and errors are schedule independent") {
  auto fn = [](std::size_t t, std::uint64_t key) {
    CounterRng rng(key);
    return Json{{"t", t}, {"u", rng.uniform()}};
  };
  const auto a = run_trials(200, 5, 1, fn);
  const auto b = run_trials(200, 5, 4, fn);
  REQUIRE(a.size() == 200);
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].trial == t);
    CHECK(a[t].seed == derive_seed(5, t));
    CHECK(a[t].payload == b[t].payload);
  }
  auto bad = [](std::size_t t, std::uint64_t) -> Json {
    if (t == 7 || t == 150) throw ParameterError("trial " + std::to_string(t));
    return Json{};
  };
  try {
    run_trials(200, 1, 4, bad);
    FAIL("no exception");
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()) == "trial 7");
  }
}

TEST_CASE("dims sweep writes the documented files and exits 0") {
  const auto dir = scratch_dir("dims");
  auto spec = spec_of("dims", "", 0, 1, {});
  spec.out = dir;
  std::ostringstream log;
  CHECK(execute(spec, log) == kExitOk);
  const auto csv = slurp(dir / "summary.csv");
  CHECK(csv.rfind("kind,kappa,rho,dimension,quantum_exponent,kpz_residual\n", 0) == 0);
  const auto nd = slurp(dir / "records.ndjson");
  std::istringstream lines(nd);
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    const auto j = Json::parse(line);
    CHECK(j["schema_version"].is_number_integer());
    CHECK(j["experiment"] == "dims");
    CHECK(j["trial"] == count);
    CHECK(j["payload"]["kpz_residual"].is_number());
    ++count;
  }
  CHECK(count == 20 * (3 + 4));
  CHECK(nd.back() == '\n');
  CHECK(std::filesystem::exists(dir / "checks.csv"));
  CHECK(std::filesystem::exists(dir / "timings.csv"));

  auto at_six = spec_of("dims", "", 0, 1, {{"kinds", "[cut, pivotal, gasket]"}, {"kappa", "[6]"}});
  const auto r = run_experiment(at_six);
  REQUIRE(r.summary.rows.size() == 3);
  CHECK(r.summary.rows[0][3] == "0.75");
  CHECK(r.summary.rows[1][3] == "0.75");
  CHECK(std::stod(r.summary.rows[2][3]) == doctest::Approx(91.0 / 48.0).epsilon(1e-14));
}

TEST_CASE("exit codes") {
  std::ostringstream log;
  CHECK(execute(spec_of("bogus", "", 0, 1, {}), log) == kExitUnknownSubcommand);
  CHECK(execute(spec_of("perc", "", 0, 1, {}), log) == kExitInvalidParameter);
  CHECK(execute(spec_of("perc", "spiral", 0, 1, {}), log) == kExitInvalidParameter);
  CHECK(execute(spec_of("perc", "arms", 10, 1, {{"ns", "[32, 64, x]"}}), log) == kExitInvalidParameter);
  CHECK(execute(spec_of("perc", "arms", 10, 1, {{"typo", "1"}}), log) == kExitInvalidParameter);
  CHECK(execute(spec_of("levy", "", 10, 1, {{"beta", "[1.5]"}}), log) == kExitInvalidParameter);
  CHECK(execute(spec_of("kpz", "", 0, 1, {{"tol", "-1"}}), log) == kExitToleranceFailure);

  const auto dir = scratch_dir("io");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  auto spec = spec_of("dims", "", 0, 1, {});
  spec.out = dir / "file" / "sub";
  CHECK(execute(spec, log) == kExitIoFailure);
}

TEST_CASE("repeated runs and thread counts give identical outputs") {
  for (auto spec : {spec_of("levy", "", 1000, 3, {{"beta", "[0.6]"}, {"cutoff", "1e-4"}, {"lambda_points", "20"}}),
                    spec_of("perc", "area", 20, 3, {{"radii", "[4, 8, 16]"}}),
                    spec_of("perc", "qmult", 300, 3, {{"n", "64"}, {"r", "[1, 4, 16]"}})}) {
    spec.threads = 1;
    const auto dir_a = scratch_dir("det_a"), dir_b = scratch_dir("det_b"), dir_c = scratch_dir("det_c");
    write_outputs(run_experiment(spec), dir_a);
    write_outputs(run_experiment(spec), dir_b);
    spec.threads = 3;
    write_outputs(run_experiment(spec), dir_c);
    CHECK(slurp(dir_a / "records.ndjson") == slurp(dir_b / "records.ndjson"));
    CHECK(slurp(dir_a / "records.ndjson") == slurp(dir_c / "records.ndjson"));
    CHECK(slurp(dir_a / "summary.csv") == slurp(dir_c / "summary.csv"));
    CHECK(slurp(dir_a / "checks.csv") == slurp(dir_c / "checks.csv"));
  }
}

TEST_CASE("CLI percolation runs reproduce the library estimators") {
  const auto arms = run_experiment(spec_of("perc", "arms", 3000, 11, {{"arms", "1"}, {"ns", "[16, 32, 64]"}}));
  const auto lib = perc::arm_exponent({16, 32, 64}, false, 3000, 11);
  CHECK(std::stod(arms.summary.rows[0][4]) == lib.slope);
  CHECK(arms.checks.at(0).measured == lib.slope);

  const auto area = run_experiment(spec_of("perc", "area", 30, 12, {{"radii", "[4, 8, 16]"}}));
  CHECK(area.checks.at(0).measured == perc::area_scaling({4, 8, 16}, 30, 12).slope);

  const auto piv = run_experiment(spec_of("perc", "pivotal", 20, 13, {{"sides", "[8, 16, 32]"}}));
  CHECK(piv.checks.at(0).measured == perc::pivotal_scaling({8, 16, 32}, 32, 1.0, 20, 13).slope);

  const auto qm = run_experiment(spec_of("perc", "qmult", 2000, 14, {{"n", "64"}, {"r", "[2, 6, 24]"}}));
  const auto q = perc::quasi_mult_check(64, 2, 6, 24, 2000, 14);
  CHECK(qm.checks.at(0).measured == q.whole.value);
  CHECK(qm.checks.at(0).target == q.product);
  CHECK(qm.checks.at(0).pass == q.pass);
}

TEST_CASE("fast regression suite and the KPZ mutation") {
  CHECK(parse_suite_level("full") == SuiteLevel::full);
  CHECK_THROWS_AS(parse_suite_level("medium"), ParameterError);

  const auto clean = regression_suite(SuiteLevel::fast);
  for (const auto& c : clean.checks) CHECK_MESSAGE(c.pass, c.criterion << "/" << c.name);
  CHECK(clean.passed());
  const std::vector<std::string> expected{"exact-identities", "subordinator", "gmc", "oracle", "determinism"};
  CHECK(clean.criteria() == expected);

  SuiteOptions faulty;
  faulty.kpz_residual = [](const FractalKind& k, const SleParams& p) {
    return kpz_residual(k, p) + 2.0 * quantum_exponent(k, p) * p.q_coeff;
  };
  const auto mutated = regression_suite(SuiteLevel::fast, faulty);
  std::set<std::string> failed, kpz;
  for (const auto& c : mutated.checks) {
    if (!c.pass) failed.insert(c.name);
    if (c.name.rfind("kpz/", 0) == 0) kpz.insert(c.name);
  }
  CHECK(kpz.size() == 5);
  CHECK(failed == kpz);
  CHECK_FALSE(mutated.passed("exact-identities"));
  CHECK(mutated.passed("oracle"));
}
