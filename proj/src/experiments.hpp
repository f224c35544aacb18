#pragma once

#include "lqg/harness.hpp"

namespace lqg::harness::detail {

RunResult run_dims(const ExperimentSpec& spec, bool assert_kpz);
RunResult run_loewner(const ExperimentSpec& spec);
RunResult run_levy(const ExperimentSpec& spec);
RunResult run_gmc(const ExperimentSpec& spec);
RunResult run_perc(const ExperimentSpec& spec);
RunResult run_suite(const ExperimentSpec& spec);

/// Records for rows of a deterministic table: trial = row index, seed = the spec seed.
std::vector<TrialRecord> row_records(const std::vector<Json>& rows, std::uint64_t seed);

Check make_check(std::string criterion, std::string name, double measured, double target, double tolerance,
                 double stderr_ = 0.0, std::string note = {});

}  // namespace lqg::harness::detail
