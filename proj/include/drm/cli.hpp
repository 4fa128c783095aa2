#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "drm/config.hpp"

namespace drm::cli {

/// One row per (method, trial).
struct RunRecord {
  std::string method;
  double lambda = 0.0;  // NaN for the kernel baselines
  std::size_t d = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  double sq_error_fwd = 0.0;
  double sq_error_inv = 0.0;
  double drm_estimate_likelihood = 0.0;
  double drm_estimate_khat = 0.0;
  double wall_time_s = 0.0;
  std::string error;  // empty on success
};

inline constexpr const char* kRunRecordHeader =
    "method,lambda,d,n,m,seed,sq_error_fwd,sq_error_inv,drm_estimate_likelihood,drm_estimate_khat,wall_time_s,error";

void write_run_records(std::ostream& os, std::span<const RunRecord> rows, bool wall_time);

/// Seed of trial `trial` in dimension d under the master seed.
std::uint64_t trial_seed(std::uint64_t master, std::size_t d, int trial);

/// Samples (or loads) data, fits `method`, evaluates. Failures land in
/// RunRecord::error instead of propagating.
RunRecord run_trial(const RunConfig& cfg, const std::string& method, double lambda, std::size_t d,
                    std::uint64_t seed);

/// Table-1 style summary of squared forward errors: one line per dimension,
/// mean/med/std per method cell.
void write_summary(std::ostream& os, std::span<const RunRecord> rows);

/// Entry point of the `drm` tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace drm::cli
