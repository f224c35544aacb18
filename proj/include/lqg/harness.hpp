#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lqg/params.hpp"

namespace lqg::harness {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int {
  kExitOk = 0,
  kExitToleranceFailure = 1,
  kExitUnknownSubcommand = 2,
  kExitInvalidParameter = 3,
  kExitIoFailure = 4,
};

class UnknownSubcommand : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scalar or a bracketed list, kept as text until a reader asks for a type.
struct ParamValue {
  std::vector<std::string> items;
  bool is_list = false;
};

/// Parses "3.5", "cut" or "[1, 2, 3]".
ParamValue parse_value(std::string_view text);

/// String-keyed parameters. Every typed read marks the key as used.
class ParamMap {
 public:
  void set(const std::string& key, ParamValue value);
  void set(const std::string& key, std::string_view text) { set(key, parse_value(text)); }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  double number(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::int64_t> integers(const std::string& key, const std::vector<std::int64_t>& fallback) const;
  std::vector<std::string> texts(const std::string& key, const std::vector<std::string>& fallback) const;

  /// Throws ParameterError naming the first key that no reader asked for.
  void reject_unused() const;

  const std::map<std::string, ParamValue>& entries() const { return values_; }

 private:
  const ParamValue* lookup(const std::string& key) const;

  std::map<std::string, ParamValue> values_;
  mutable std::set<std::string> used_;
};

/// Flat key=value lines with list syntax a=[1,2,3]; '#' starts a comment.
ParamMap parse_config(std::string_view text);
ParamMap load_config(const std::filesystem::path& path);

struct ExperimentSpec {
  std::string subcommand;  // dims, kpz, loewner, levy, gmc, perc, suite
  std::string verb;        // perc: arms|pivotal|area|pseudo|energy|qmult; gmc: all|girsanov|coordinate|variance
  ParamMap params;
  std::size_t trials = 0;  // 0 selects the subcommand default
  std::uint64_t seed = 1;
  int threads = 1;         // 0 leaves the OpenMP default
  std::filesystem::path out;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Json payload;
  double wall_time = 0.0;
};

/// One NDJSON line (no trailing newline). Wall time is left out so that lines are reproducible.
std::string ndjson_line(const TrialRecord& r, std::string_view experiment);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::string str() const;
};

/// Quotes a field when it holds a comma, quote, CR or LF.
std::string csv_field(std::string_view s);

/// Shortest round-trip decimal form.
std::string format_number(double x);

struct Check {
  std::string criterion;
  std::string name;
  double measured = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  double stderr_ = 0.0;
  bool pass = false;
  std::string note;
};

CsvTable checks_table(const std::vector<Check>& checks);

struct RunResult {
  std::string experiment;
  std::vector<TrialRecord> records;
  CsvTable summary;
  std::vector<Check> checks;

  bool passed() const;
  std::string ndjson() const;
};

/// Calls fn(t, derive_seed(seed, t)) for t < trials on `threads` threads. Records come back in
/// trial order whatever the schedule.
std::vector<TrialRecord> run_trials(std::size_t trials, std::uint64_t seed, int threads,
                                    const std::function<Json(std::size_t, std::uint64_t)>& fn);

/// Throws UnknownSubcommand, ParameterError or IoError.
RunResult run_experiment(const ExperimentSpec& spec);

/// records.ndjson, summary.csv, checks.csv and timings.csv under `dir`.
void write_outputs(const RunResult& r, const std::filesystem::path& dir);

/// run_experiment plus write_outputs, with errors mapped to exit codes and reported on `log`.
int execute(const ExperimentSpec& spec, std::ostream& log);

enum class SuiteLevel { fast, full };

SuiteLevel parse_suite_level(std::string_view name);

using KpzResidualFn = std::function<double(const FractalKind&, const SleParams&)>;

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  /// Replaces lqg::kpz_residual in the identity checks when set.
  KpzResidualFn kpz_residual;
  /// Called as each check completes.
  std::function<void(const Check&)> on_check;
};

struct SuiteReport {
  std::vector<Check> checks;

  /// Criteria in first-appearance order.
  std::vector<std::string> criteria() const;
  bool passed(const std::string& criterion) const;
  bool passed() const;
};

SuiteReport regression_suite(SuiteLevel level, const SuiteOptions& opts = {});

}  // namespace lqg::harness
