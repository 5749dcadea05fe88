#pragma once

// Front end: analyze, certify and sweep pipelines with their exit codes.
//
// Exit codes: 0 success, 1 certification inconclusive at the requested t0,
// 2 invalid input (including reducible models where irreducibility is
// required), 3 internal inconsistency (failed audit, disagreeing equivalent
// conditions, failed sweep instance).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergocert/io.hpp"
#include "ergocert/models.hpp"

namespace ergocert::cli {

enum ExitCode : int { kOk = 0, kInconclusive = 1, kInvalid = 2, kInconsistent = 3 };

struct AnalyzeArgs {
  std::filesystem::path model;
  double t_max = 32.0;
  double grid = 0.25;
  double tol = 1e-9;
  std::filesystem::path out = ".";
};

struct CertifyArgs {
  std::filesystem::path model;
  double t0 = 1.0;
  double t_max = 64.0;
  double tol = 1e-9;
  std::filesystem::path out = ".";
};

struct SweepArgs {
  std::string family;  // random-ctmc | pdmp | rotation | atom
  std::size_t count = 1;
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
};

/// {0, step, 2 step, ...} up to t_max. Grid models need an integer step.
std::vector<double> time_grid(const Model& model, double step, double t_max);

/// t0, 2 t0, ..., 32 t0, then doubling, all <= t_max.
std::vector<double> audit_grid(double t0, double t_max);

/// One row per time; C_0 is the identity and distances to P are NaN when the
/// model is reducible.
std::vector<io::SeriesRow> time_series(const Model& model, std::span<const double> times);

/// Worker pool size: ERGOCERT_THREADS when set (a positive integer),
/// otherwise the OpenMP default.
int worker_count();

struct InstanceResult {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::string verdict;
  bool passed = false;
  nlohmann::json detail;
};

/// Builds the family member for `seed` and checks the family's expected
/// verdict. Never throws; errors are reported as failed instances.
InstanceResult run_instance(const std::string& family, std::uint64_t seed);

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err);
int cmd_certify(const CertifyArgs& args, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches; returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ergocert::cli
