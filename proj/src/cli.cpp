#include "ergocert/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ergocert/certify.hpp"
#include "ergocert/error.hpp"
#include "ergocert/evolution.hpp"
#include "ergocert/lower_bounds.hpp"
#include "ergocert/rng.hpp"
#include "ergocert/spectral.hpp"

namespace ergocert::cli {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxGridPoints = 100000;

void write_json(const std::filesystem::path& path, const json& doc) {
  io::write_text(path, doc.dump(2) + "\n");
}

void write_series(const std::filesystem::path& path, const std::vector<io::SeriesRow>& rows) {
  std::ostringstream os;
  io::write_series_csv(os, rows);
  io::write_text(path, os.str());
}

void prepare_out(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + dir.string());
}

bool kernel_part_zero(const Model& model, double t0) {
  return split(semigroup_at(model, t0)).kernel.is_zero(1e-14);
}

bool certified(const CertificationResult& r) { return std::holds_alternative<ConvergenceCertificate>(r); }

/// Certificate at the fastest grid t0; NoCertificate at the largest grid time
/// when every Doeblin mass vanishes.
CertificationResult best_certificate(const Model& model, std::span<const double> t0_grid, double t_max,
                                     double tol) {
  const auto samples = lower_bound_sweep(model, t0_grid);
  const auto best = best_t0(samples, tol);
  if (!best) {
    const double t = samples.empty() ? 0.0 : samples.back().t0;
    return NoCertificate{t, samples.empty() ? 0.0 : samples.back().eta, "Doeblin mass vanishes on the grid"};
  }
  const auto grid = audit_grid(best->t0, std::max(t_max, best->t0));
  return certify_uniform_convergence(model, best->t0, grid, tol);
}

double min_margin(const ConvergenceCertificate& c) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& a : c.audit) m = std::min(m, a.margin);
  return m;
}

InstanceResult random_ctmc_instance(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = 2 + rng.below(11);
  const Model model = random_irreducible_ctmc(n, 0.3, seed);
  InstanceResult r{seed, n, {}, false, json::object()};
  std::vector<double> t0s;
  for (int k = 1; k <= 32; ++k) t0s.push_back(0.25 * k);
  const auto cert = best_certificate(model, t0s, 64.0, 1e-9);
  r.detail["certificate"] = io::to_json(cert);
  if (const auto* c = std::get_if<ConvergenceCertificate>(&cert)) {
    r.verdict = "uniform convergence";
    r.passed = min_margin(*c) >= -1e-9;
  } else {
    r.verdict = "no certificate";
  }
  return r;
}

InstanceResult pdmp_instance(std::uint64_t seed) {
  Rng rng(seed);
  static constexpr std::size_t sizes[] = {4, 8, 16};
  const std::size_t n = sizes[rng.below(3)];
  const double rate = rng.uniform(0.5, 2.0);
  const Model model = build_pdmp(n, rate, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
  InstanceResult r{seed, n, {}, false, {{"jump_rate", rate}}};
  const auto cert = certify_uniform_convergence(model, 1.0, audit_grid(1.0, 64.0));
  const auto chain = verify_proof_chain(model, 1.0, audit_grid(1.0, 64.0));
  r.detail["certificate"] = io::to_json(cert);
  r.detail["proof_chain_passed"] = chain.passed;
  r.detail["delta"] = chain.delta;
  r.verdict = certified(cert) ? "uniform convergence" : "no certificate";
  r.passed = certified(cert) && chain.passed;
  return r;
}

InstanceResult rotation_instance(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = 3 + rng.below(6);
  const Model model = build_rotation(n);
  InstanceResult r{seed, n, {}, false, json::object()};
  const Density g = stationary_density(model);
  const StructuredOperator p(KernelOperator::rank_one(g));
  double max_mass = 0.0;
  double min_distance = std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t <= 4 * n; ++t) {
    const double td = static_cast<double>(t);
    max_mass = std::max(max_mass, doeblin_mass(model, td));
    min_distance = std::min(min_distance, op_norm(semigroup_at(model, td) - p));
  }
  r.detail["max_doeblin_mass"] = max_mass;
  r.detail["min_distance_to_P"] = min_distance;
  const bool converges = max_mass > 0.0 || min_distance < 1.0;
  r.verdict = converges ? "uniform convergence" : "no uniform convergence";
  r.passed = !converges;
  return r;
}

InstanceResult atom_instance(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = 3 + rng.below(8);
  const AtomModel atom = random_atom_model(n, seed);
  const Model model = atom.ctmc;
  InstanceResult r{seed, n, {}, false, {{"atom", atom.atom}}};
  const KernelOperator k = split(semigroup_at(model, 1.0)).kernel;
  const double row_min = k.entries().row(static_cast<Eigen::Index>(atom.atom)).minCoeff();
  std::vector<double> t0s;
  for (int j = 1; j <= 32; ++j) t0s.push_back(0.5 * j);
  const auto cert = best_certificate(model, t0s, 64.0, 1e-9);
  r.detail["atom_row_min"] = row_min;
  r.detail["certificate"] = io::to_json(cert);
  r.verdict = certified(cert) ? "uniform convergence" : "no certificate";
  r.passed = row_min > 0.0 && certified(cert);
  return r;
}

}  // namespace

std::vector<double> time_grid(const Model& model, double step, double t_max) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("grid step must be positive");
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw ValidationError("t-max must be non-negative");
  if (!is_valid_time(model, step)) throw ValidationError("grid step is not an admissible time for this model");
  const double count = std::floor(t_max / step + 1e-9);
  if (count > static_cast<double>(kMaxGridPoints)) throw ValidationError("grid has too many points");
  std::vector<double> out;
  for (std::size_t k = 0; k <= static_cast<std::size_t>(count); ++k) out.push_back(static_cast<double>(k) * step);
  return out;
}

std::vector<double> audit_grid(double t0, double t_max) {
  std::vector<double> out;
  double t = t0;
  for (int k = 1; k <= 32 && t0 * k <= t_max * (1 + 1e-12); ++k) {
    t = t0 * k;
    out.push_back(t);
  }
  for (t *= 2; t <= t_max * (1 + 1e-12); t *= 2) out.push_back(t);
  return out;
}

std::vector<io::SeriesRow> time_series(const Model& model, std::span<const double> times) {
  std::optional<StructuredOperator> p;
  if (is_irreducible(model)) p = StructuredOperator(KernelOperator::rank_one(stationary_density(model)));
  const auto space = space_of(model);
  std::vector<io::SeriesRow> rows(times.size());
  const auto count = static_cast<std::ptrdiff_t>(times.size());
#pragma omp parallel for schedule(dynamic) if (count >= 16)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const double t = times[static_cast<std::size_t>(k)];
    const StructuredOperator tt = semigroup_at(model, t);
    const StructuredOperator ct = t > 0.0 ? cesaro_mean(model, t) : StructuredOperator::identity(space);
    auto& row = rows[static_cast<std::size_t>(k)];
    row.t = t;
    row.op_distance_to_p = p ? op_norm(tt - *p) : std::numeric_limits<double>::quiet_NaN();
    row.cesaro_distance = p ? op_norm(ct - *p) : std::numeric_limits<double>::quiet_NaN();
    row.doeblin_mass = total_mass(maximal_lower_bound_at(tt));
  }
  return rows;
}

int worker_count() {
  const int available = omp_get_max_threads();
  const char* env = std::getenv("ERGOCERT_THREADS");
  if (!env || !*env) return available;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw ValidationError("ERGOCERT_THREADS must be a positive integer");
  return static_cast<int>(std::min<long>(v, 1024));
}

InstanceResult run_instance(const std::string& family, std::uint64_t seed) {
  try {
    if (family == "random-ctmc") return random_ctmc_instance(seed);
    if (family == "pdmp") return pdmp_instance(seed);
    if (family == "rotation") return rotation_instance(seed);
    if (family == "atom") return atom_instance(seed);
    return InstanceResult{seed, 0, "unknown family", false, json::object()};
  } catch (const std::exception& e) {
    return InstanceResult{seed, 0, "error", false, {{"error", e.what()}}};
  }
}

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err) {
  const Model model = io::load_model(args.model);
  const auto times = time_grid(model, args.grid, args.t_max);
  prepare_out(args.out);

  json report;
  report["model"] = io::model_to_json(model);
  report["parameters"] = {{"t_max", args.t_max}, {"grid", args.grid}, {"tol", args.tol}};
  report["spectral"] = io::to_json(spectral_report(model, args.tol));

  SuiteOptions suite_options;
  suite_options.throw_on_disagreement = false;
  suite_options.tol = args.tol;
  const CorollarySuite suite = corollary_suite(model, suite_options);
  report["suite"] = io::to_json(suite);

  const auto samples = lower_bound_sweep(model, times);
  json sweep = json::array();
  for (const auto& s : samples) sweep.push_back({{"t0", s.t0}, {"eta", s.eta}});
  report["lower_bound_sweep"] = std::move(sweep);

  const bool irreducible = is_irreducible(model);
  report["irreducible"] = irreducible;
  report["certificate"] = nullptr;
  report["proof_chain"] = nullptr;
  if (irreducible) {
    report["stationary"] = io::to_json(stationary_density(model));
    if (const auto best = best_t0(samples, args.tol)) {
      report["certificate"] = io::to_json(certify_uniform_convergence(model, best->t0, times, args.tol));
      if (!kernel_part_zero(model, best->t0))
        report["proof_chain"] = io::to_json(verify_proof_chain(model, best->t0, times));
    } else {
      report["certificate"] = io::to_json(
          NoCertificate{args.t_max, 0.0, "Doeblin mass vanishes at every grid time"});
    }
  } else {
    report["stationary"] = nullptr;
  }

  write_json(args.out / "report.json", report);
  write_series(args.out / "series.csv", time_series(model, times));

  if (suite.hypothesis_met && !suite.agree) {
    err << "inconsistency: equivalent conditions disagree (see report.json)\n";
    return kInconsistent;
  }
  out << "analyze: " << kind_name(model) << " n=" << space_of(model)->size()
      << (report["certificate"].is_object() && report["certificate"]["certified"].get<bool>()
              ? " certified"
              : " no certificate")
      << "\n";
  return kOk;
}

int cmd_certify(const CertifyArgs& args, std::ostream& out, std::ostream& err) {
  const Model model = io::load_model(args.model);
  if (!is_valid_time(model, args.t0) || !(args.t0 > 0.0)) throw ValidationError("t0 is not an admissible positive time");
  if (!(args.t_max >= args.t0)) throw ValidationError("t-max must be at least t0");
  if (!is_irreducible(model)) throw ValidationError("certification needs an irreducible model");
  prepare_out(args.out);
  const auto grid = audit_grid(args.t0, args.t_max);

  const CertificationResult cert = certify_uniform_convergence(model, args.t0, grid, args.tol);
  const bool kernel_zero = kernel_part_zero(model, args.t0);

  json report;
  report["model"] = io::model_to_json(model);
  report["parameters"] = {{"t0", args.t0}, {"t_max", args.t_max}, {"tol", args.tol}};
  report["certificate"] = io::to_json(cert);
  bool chain_passed = false;
  if (kernel_zero) {
    report["proof_chain"] = {{"applicable", false}, {"reason", "kernel part of T_t0 is zero; hypothesis not met"}};
  } else {
    const ProofChainReport chain = verify_proof_chain(model, args.t0, grid);
    chain_passed = chain.passed;
    report["proof_chain"] = io::to_json(chain);
    report["proof_chain"]["applicable"] = true;
  }
  write_json(args.out / "report.json", report);
  std::vector<double> times{0.0};
  times.insert(times.end(), grid.begin(), grid.end());
  write_series(args.out / "series.csv", time_series(model, times));

  if (kernel_zero && !certified(cert)) {
    out << "no certificate, hypothesis not met\n";
    return kOk;
  }
  if (certified(cert) && (chain_passed || kernel_zero)) {
    out << "certified: eta=" << io::format_double(std::get<ConvergenceCertificate>(cert).eta)
        << (kernel_zero ? ", proof chain not applicable" : ", proof chain passed") << "\n";
    return kOk;
  }
  err << "inconclusive: "
      << (certified(cert) ? "proof chain failed at " + report["proof_chain"]["failing_step"].get<std::string>()
                          : std::get<NoCertificate>(cert).reason)
      << "\n";
  return kInconclusive;
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> families{"random-ctmc", "pdmp", "rotation", "atom"};
  if (std::find(families.begin(), families.end(), args.family) == families.end())
    throw ValidationError("unknown family '" + args.family + "'");
  const int workers = worker_count();
  prepare_out(args.out);

  std::vector<InstanceResult> results(args.count);
  const auto count = static_cast<std::ptrdiff_t>(args.count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const std::uint64_t seed = args.seed + static_cast<std::uint64_t>(i);
    InstanceResult r = run_instance(args.family, seed);
    json doc = {{"family", args.family}, {"seed", seed}, {"n", r.n},
                {"verdict", r.verdict},  {"passed", r.passed}, {"detail", r.detail}};
    try {
      write_json(args.out / (args.family + "_" + std::to_string(seed) + ".json"), doc);
    } catch (const std::exception& e) {
      r.passed = false;
      r.verdict = "error";
      r.detail["error"] = e.what();
    }
    results[static_cast<std::size_t>(i)] = std::move(r);
  }

  json instances = json::array();
  json failures = json::array();
  std::size_t passed = 0;
  for (const auto& r : results) {
    instances.push_back({{"seed", r.seed}, {"n", r.n}, {"verdict", r.verdict}, {"passed", r.passed}});
    if (r.passed) {
      ++passed;
    } else {
      failures.push_back(r.seed);
    }
  }
  const json summary = {{"family", args.family},
                        {"count", args.count},
                        {"seed", args.seed},
                        {"passed", passed},
                        {"failed", args.count - passed},
                        {"pass_rate", args.count ? static_cast<double>(passed) / static_cast<double>(args.count) : 1.0},
                        {"failures", failures},
                        {"instances", std::move(instances)}};
  write_json(args.out / "summary.json", summary);

  out << "sweep " << args.family << ": " << passed << "/" << args.count << " passed\n";
  if (passed != args.count) {
    err << "failing seeds:";
    for (const auto& s : failures) err << ' ' << s.get<std::uint64_t>();
    err << "\n";
    return kInconsistent;
  }
  return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ergocert: uniform convergence certificates for stochastic semigroups"};
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* a = app.add_subcommand("analyze", "spectral suite, lower-bound sweep and time series");
  a->add_option("--model", analyze.model, "model JSON file")->required();
  a->add_option("--t-max", analyze.t_max, "largest time in the series");
  a->add_option("--grid", analyze.grid, "time step of the series");
  a->add_option("--tol", analyze.tol, "audit tolerance");
  a->add_option("--out", analyze.out, "output directory");

  CertifyArgs certify;
  auto* c = app.add_subcommand("certify", "Doeblin certificate and proof-chain verification at t0");
  c->add_option("--model", certify.model, "model JSON file")->required();
  c->add_option("--t0", certify.t0, "certification time")->required();
  c->add_option("--t-max", certify.t_max, "largest audit time");
  c->add_option("--tol", certify.tol, "audit tolerance");
  c->add_option("--out", certify.out, "output directory");

  SweepArgs sweep;
  auto* s = app.add_subcommand("sweep", "seeded batch over a model family");
  s->add_option("--family", sweep.family, "random-ctmc | pdmp | rotation | atom")->required();
  s->add_option("--count", sweep.count, "number of instances")->required();
  s->add_option("--seed", sweep.seed, "seed of the first instance")->required();
  s->add_option("--out", sweep.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }

  try {
    if (*a) return cmd_analyze(analyze, out, err);
    if (*c) return cmd_certify(certify, out, err);
    return cmd_sweep(sweep, out, err);
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const AuditFailure& e) {
    err << "audit failure: " << e.what() << "\n";
    return kInconsistent;
  } catch (const InconsistencyError& e) {
    err << "inconsistency: " << e.what() << "\n";
    return kInconsistent;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInconsistent;
  }
}

}  // namespace ergocert::cli
