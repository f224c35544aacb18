#include "lqg/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <ostream>
#include <sstream>

#include "experiments.hpp"
#include "lqg/loewner.hpp"
#include "lqg/rng.hpp"

namespace lqg::harness {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, std::string_view text) {
  const auto slash = text.find('/');
  if (slash != std::string_view::npos)
    return parse_double(key, text.substr(0, slash)) / parse_double(key, text.substr(slash + 1));
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ParameterError("parameter '" + key + "': '" + std::string(text) + "' is not a number");
  return v;
}

std::int64_t parse_int(const std::string& key, std::string_view text) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ParameterError("parameter '" + key + "': '" + std::string(text) + "' is not an integer");
  return v;
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  return std::all_of(k.begin(), k.end(), [](char ch) {
    return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_' || ch == '.';
  });
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot open " + p.string() + " for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("write failed: " + p.string());
}

class ThreadScope {
 public:
  explicit ThreadScope(int threads) : saved_(omp_get_max_threads()) {
    if (threads > 0) omp_set_num_threads(threads);
  }
  ~ThreadScope() { omp_set_num_threads(saved_); }
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

 private:
  int saved_;
};

}  // namespace

ParamValue parse_value(std::string_view text) {
  text = trim(text);
  ParamValue v;
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') throw ParameterError("unterminated list: " + std::string(text));
    v.is_list = true;
    auto body = trim(text.substr(1, text.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const auto item = trim(body.substr(0, comma));
      if (item.empty()) throw ParameterError("empty list item in " + std::string(text));
      v.items.emplace_back(item);
      if (comma == std::string_view::npos) break;
      body = body.substr(comma + 1);
      if (trim(body).empty()) throw ParameterError("trailing comma in " + std::string(text));
    }
    return v;
  }
  if (text.empty()) throw ParameterError("empty value");
  v.items.emplace_back(text);
  return v;
}

void ParamMap::set(const std::string& key, ParamValue value) {
  if (!valid_key(key)) throw ParameterError("invalid parameter name '" + key + "'");
  values_[key] = std::move(value);
  used_.erase(key);
}

const ParamValue* ParamMap::lookup(const std::string& key) const {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

double ParamMap::number(const std::string& key, double fallback) const {
  const auto* v = lookup(key);
  if (!v) return fallback;
  if (v->is_list) throw ParameterError("parameter '" + key + "' expects a scalar");
  return parse_double(key, v->items.front());
}

std::int64_t ParamMap::integer(const std::string& key, std::int64_t fallback) const {
  const auto* v = lookup(key);
  if (!v) return fallback;
  if (v->is_list) throw ParameterError("parameter '" + key + "' expects a scalar");
  return parse_int(key, v->items.front());
}

std::string ParamMap::text(const std::string& key, const std::string& fallback) const {
  const auto* v = lookup(key);
  if (!v) return fallback;
  if (v->is_list) throw ParameterError("parameter '" + key + "' expects a scalar");
  return v->items.front();
}

std::vector<double> ParamMap::numbers(const std::string& key, const std::vector<double>& fallback) const {
  const auto* v = lookup(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& s : v->items) out.push_back(parse_double(key, s));
  return out;
}

std::vector<std::int64_t> ParamMap::integers(const std::string& key, const std::vector<std::int64_t>& fallback) const {
  const auto* v = lookup(key);
  if (!v) return fallback;
  std::vector<std::int64_t> out;
  for (const auto& s : v->items) out.push_back(parse_int(key, s));
  return out;
}

std::vector<std::string> ParamMap::texts(const std::string& key, const std::vector<std::string>& fallback) const {
  const auto* v = lookup(key);
  return v ? v->items : fallback;
}

void ParamMap::reject_unused() const {
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) throw ParameterError("unknown parameter '" + k + "'");
}

ParamMap parse_config(std::string_view text) {
  ParamMap m;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw ParameterError(where + "expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    if (!seen.insert(key).second) throw ParameterError(where + "duplicate key '" + key + "'");
    try {
      m.set(key, parse_value(line.substr(eq + 1)));
    } catch (const ParameterError& e) {
      throw ParameterError(where + e.what());
    }
  }
  return m;
}

ParamMap load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string ndjson_line(const TrialRecord& r, std::string_view experiment) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["experiment"] = experiment;
  j["trial"] = r.trial;
  j["seed"] = r.seed;
  j["payload"] = r.payload;
  return j.dump();
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header.size()) throw std::logic_error("csv row width differs from header");
  rows.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

CsvTable checks_table(const std::vector<Check>& checks) {
  CsvTable t{{"criterion", "check", "measured", "target", "tolerance", "stderr", "pass", "note"}, {}};
  for (const auto& c : checks)
    t.add({c.criterion, c.name, format_number(c.measured), format_number(c.target), format_number(c.tolerance),
           format_number(c.stderr_), c.pass ? "1" : "0", c.note});
  return t;
}

bool RunResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string RunResult::ndjson() const {
  std::string out;
  for (const auto& r : records) out += ndjson_line(r, experiment) + '\n';
  return out;
}

std::vector<TrialRecord> run_trials(std::size_t trials, std::uint64_t seed, int threads,
                                    const std::function<Json(std::size_t, std::uint64_t)>& fn) {
  std::vector<TrialRecord> out(trials);
  std::vector<std::exception_ptr> errors(trials);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for num_threads(nt) schedule(dynamic, 1)
  for (std::size_t t = 0; t < trials; ++t) {
    const auto start = std::chrono::steady_clock::now();
    auto& r = out[t];
    r.trial = t;
    r.seed = derive_seed(seed, t);
    try {
      r.payload = fn(t, r.seed);
    } catch (...) {
      errors[t] = std::current_exception();
    }
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

RunResult run_experiment(const ExperimentSpec& spec) {
  if (spec.threads < 0) throw ParameterError("threads must be >= 0");
  ThreadScope scope(spec.threads);
  RunResult r;
  if (spec.subcommand == "dims") {
    r = detail::run_dims(spec, false);
  } else if (spec.subcommand == "kpz") {
    r = detail::run_dims(spec, true);
  } else if (spec.subcommand == "loewner") {
    r = detail::run_loewner(spec);
  } else if (spec.subcommand == "levy") {
    r = detail::run_levy(spec);
  } else if (spec.subcommand == "gmc") {
    r = detail::run_gmc(spec);
  } else if (spec.subcommand == "perc") {
    r = detail::run_perc(spec);
  } else if (spec.subcommand == "suite") {
    r = detail::run_suite(spec);
  } else {
    throw UnknownSubcommand("unknown subcommand '" + spec.subcommand + "'");
  }
  spec.params.reject_unused();
  return r;
}

void write_outputs(const RunResult& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  write_file(dir / "records.ndjson", r.ndjson());
  write_file(dir / "summary.csv", r.summary.str());
  write_file(dir / "checks.csv", checks_table(r.checks).str());
  CsvTable timings{{"trial", "wall_time"}, {}};
  for (const auto& rec : r.records) timings.add({std::to_string(rec.trial), format_number(rec.wall_time)});
  write_file(dir / "timings.csv", timings.str());
}

int execute(const ExperimentSpec& spec, std::ostream& log) {
  try {
    const auto r = run_experiment(spec);
    if (!spec.out.empty()) write_outputs(r, spec.out);
    for (const auto& c : r.checks)
      log << (c.pass ? "PASS " : "FAIL ") << c.criterion << '/' << c.name << " measured=" << format_number(c.measured)
          << " target=" << format_number(c.target) << " tol=" << format_number(c.tolerance)
          << (c.note.empty() ? "" : " (" + c.note + ")") << '\n';
    if (spec.out.empty()) log << r.summary.str();
    return r.passed() ? kExitOk : kExitToleranceFailure;
  } catch (const UnknownSubcommand& e) {
    log << "error: " << e.what() << '\n';
    return kExitUnknownSubcommand;
  } catch (const ParameterError& e) {
    log << "invalid parameter: " << e.what() << '\n';
    return kExitInvalidParameter;
  } catch (const loewner::StepSizeError& e) {
    log << "invalid parameter: " << e.what() << '\n';
    return kExitInvalidParameter;
  } catch (const IoError& e) {
    log << "i/o failure: " << e.what() << '\n';
    return kExitIoFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    log << "i/o failure: " << e.what() << '\n';
    return kExitIoFailure;
  }
}

SuiteLevel parse_suite_level(std::string_view name) {
  if (name == "fast") return SuiteLevel::fast;
  if (name == "full") return SuiteLevel::full;
  throw ParameterError("suite level must be fast or full, got '" + std::string(name) + "'");
}

std::vector<std::string> SuiteReport::criteria() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (std::find(out.begin(), out.end(), c.criterion) == out.end()) out.push_back(c.criterion);
  return out;
}

bool SuiteReport::passed(const std::string& criterion) const {
  bool any = false;
  for (const auto& c : checks)
    if (c.criterion == criterion) {
      any = true;
      if (!c.pass) return false;
    }
  return any;
}

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

}  // namespace lqg::harness
