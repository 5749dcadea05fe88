#include "ergocert/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "ergocert/error.hpp"
#include "ergocert/evolution.hpp"

namespace ergocert {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

constexpr double kRankThreshold = 1e-10;
constexpr double kZeroEigenTol = 1e-8;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// Bordered solve of A g = 0, <1, g> = 1. Requires a one-dimensional kernel.
std::optional<Density> solve_stationary(const Model& model, const Eigen::MatrixXd& a) {
  const auto& space = space_of(model);
  const auto n = a.rows();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(kRankThreshold);
  if (n - lu.rank() != 1) return std::nullopt;
  Eigen::MatrixXd m = a;
  m.row(n - 1) = space->weights().transpose();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[n - 1] = 1.0;
  Eigen::VectorXd g = m.fullPivLu().solve(rhs);
  if (g.minCoeff() < -1e-10) return std::nullopt;
  g = g.cwiseMax(0.0);
  g /= space->weights().dot(g);
  // Snap to the exactly representable uniform density when it is the fixed
  // point, so doubly stochastic models give P without rounding residue.
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(n, 1.0 / space->total_mass());
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a * uniform).cwiseAbs().maxCoeff() <= 1e-15 * scale && (g - uniform).cwiseAbs().maxCoeff() <= 1e-12)
    g = uniform;
  return Density(space, std::move(g));
}

KernelOperator projection_of(const Density& g) { return KernelOperator::rank_one(g); }

}  // namespace

Eigen::MatrixXd generator_matrix(const Model& model) {
  if (const auto* c = std::get_if<CtmcModel>(&model)) return c->rates;
  const auto n = idx(space_of(model)->size());
  return semigroup_at(model, 1.0).dense() - Eigen::MatrixXd::Identity(n, n);
}

KernelOperator resolvent(const Model& model, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("resolvent needs lambda > 0");
  const auto& space = space_of(model);
  const auto n = idx(space->size());
  const Eigen::MatrixXd shifted = lambda * Eigen::MatrixXd::Identity(n, n) - generator_matrix(model);
  return KernelOperator(space, shifted.partialPivLu().solve(Eigen::MatrixXd::Identity(n, n)));
}

DualVector dual_resolvent(const Model& model, double lambda, const DualVector& phi) {
  return dual_apply(resolvent(model, lambda), phi);
}

Density stationary_density(const Model& model) {
  if (!is_irreducible(model)) {
    throw ValidationError("stationary density needs an irreducible model");
  }
  auto g = solve_stationary(model, generator_matrix(model));
  if (!g) throw InconsistencyError("irreducible model without a unique positive fixed density");
  return *g;
}

SpectralReport spectral_report(const Model& model, double tol) {
  SpectralReport r;
  r.generator_applicable = has_rate_generator(model);
  const auto n = idx(space_of(model)->size());
  const Eigen::MatrixXd a = generator_matrix(model);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(kRankThreshold);
  r.geometric_multiplicity = static_cast<int>(n - lu.rank());

  if (r.generator_applicable) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    if (es.info() != Eigen::Success) throw InconsistencyError("eigenvalue solver failed");
    const double scale = std::max(1.0, a.diagonal().cwiseAbs().maxCoeff());
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::complex<double> nu = es.eigenvalues()[i];
      r.eigenvalues.push_back(nu);
      if (std::abs(nu) <= kZeroEigenTol * scale) {
        ++r.algebraic_multiplicity;
      } else {
        top = std::max(top, nu.real());
      }
      if (std::abs(nu.real()) <= std::max(tol, kZeroEigenTol) * scale) r.peripheral.push_back(nu);
    }
    r.spectral_gap = std::isfinite(top) ? -top : std::numeric_limits<double>::infinity();
  } else {
    const Eigen::MatrixXd step = a + Eigen::MatrixXd::Identity(n, n);
    Eigen::EigenSolver<Eigen::MatrixXd> es(step, false);
    if (es.info() != Eigen::Success) throw InconsistencyError("eigenvalue solver failed");
    double top = 0.0;
    bool other = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::complex<double> z = es.eigenvalues()[i];
      r.eigenvalues.push_back(z);
      if (std::abs(z - 1.0) <= kZeroEigenTol) {
        ++r.algebraic_multiplicity;
      } else {
        top = std::max(top, std::abs(z));
        other = true;
      }
      if (std::abs(z) >= 1.0 - std::max(tol, kZeroEigenTol)) r.peripheral.push_back(z);
    }
    r.spectral_gap = other ? 1.0 - top : std::numeric_limits<double>::infinity();
  }
  return r;
}

PoleCheck zero_pole_check(const Model& model, double tol) {
  PoleCheck p;
  p.report = spectral_report(model, tol);
  p.is_simple_pole = p.report.algebraic_multiplicity == 1 && p.report.geometric_multiplicity == 1;
  p.gap = p.report.spectral_gap;
  p.generator_applicable = p.report.generator_applicable;
  return p;
}

namespace {

MeanErgodicReport mean_ergodic_with(const Model& model, const KernelOperator& limit,
                                    std::span<const double> grid, double tol) {
  MeanErgodicReport r;
  std::vector<double> times;
  for (double t : grid)
    if (t > 0.0 && is_valid_time(model, t)) times.push_back(t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  if (times.size() < 2) throw ValidationError("mean ergodic check needs at least two positive grid times");

  const StructuredOperator p(limit);
  for (double t : times) {
    r.times.push_back(t);
    r.distances.push_back(op_norm(cesaro_mean(model, t) - p));
  }
  r.monotone = true;
  double early = 0.0;
  double late = 0.0;
  const double split = times.back() / 4.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double scaled = times[k] * r.distances[k];
    r.decay_constant = std::max(r.decay_constant, scaled);
    if (k > 0 && r.distances[k] > r.distances[k - 1] + tol) r.monotone = false;
    if (times[k] < split) {
      early = std::max(early, scaled);
    } else {
      late = std::max(late, scaled);
    }
  }
  const bool bounded = late <= 2.0 * early + tol;
  const bool decayed = r.distances.back() <= tol || r.distances.back() < r.distances.front();
  r.passed = bounded && decayed;
  return r;
}

}  // namespace

MeanErgodicReport mean_ergodic_check(const Model& model, std::span<const double> grid, double tol) {
  auto g = solve_stationary(model, generator_matrix(model));
  if (!g) throw ValidationError("mean ergodic check needs a unique stationary density");
  return mean_ergodic_with(model, projection_of(*g), grid, tol);
}

bool dual_resolvent_quasi_interior(const Model& model, const DualVector& f, double lambda, double eps) {
  if (!f.is_positive()) throw ValidationError("functional must be nonnegative");
  if (f.values().cwiseAbs().maxCoeff() == 0.0) throw ValidationError("functional must be non-zero");
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  return dual_resolvent(model, lambda, f).values().minCoeff() >= eps;
}

bool dual_irreducibility(const Model& model) {
  return is_strongly_connected(transpose_graph(transition_graph(model)));
}

CorollarySuite corollary_suite(const Model& model, const SuiteOptions& options) {
  CorollarySuite s;
  const auto& space = space_of(model);
  const std::size_t n = space->size();
  s.irreducible = is_irreducible(model);
  s.continuous_time = !std::holds_alternative<DtmcModel>(model);

  const double base = is_grid_model(model) ? 1.0 : 0.25;
  for (double t = base; t <= 8.0 * base; t *= 2.0) {
    if (!semigroup_at(model, t).kernel().is_zero(options.positivity_floor)) {
      s.kernel_part_nonzero = true;
      break;
    }
  }
  s.hypothesis_met = s.irreducible && s.continuous_time && s.kernel_part_nonzero;
  if (!s.irreducible) {
    s.hypothesis_note = "model is reducible";
  } else if (!s.continuous_time) {
    s.hypothesis_note = "discrete-time semigroup; the equivalences are stated for continuous time";
  } else if (!s.kernel_part_nonzero) {
    s.hypothesis_note = "no probed T_t dominates a non-zero kernel operator";
  }

  auto g = solve_stationary(model, generator_matrix(model));
  const PoleCheck pole = zero_pole_check(model, options.tol);

  // (i) ||T_t - P|| < 1 at some t; then (T_t - P)^k = T_{kt} - P -> 0.
  if (g) {
    const StructuredOperator p(projection_of(*g));
    double best = std::numeric_limits<double>::infinity();
    double best_t = base;
    for (double t = base; t <= options.t_max; t *= 2.0) {
      const double d = op_norm(semigroup_at(model, t) - p);
      if (d < best) {
        best = d;
        best_t = t;
      }
      if (d < 1.0 - options.tol) break;
    }
    s.conditions[0] = {best < 1.0 - options.tol,
                       "min ||T_t - P|| = " + fmt(best) + " at t = " + fmt(best_t)};

    std::vector<double> grid;
    if (is_grid_model(model)) {
      const double last = std::max(64.0, 8.0 * static_cast<double>(n));
      for (double t = 1.0; t <= last; t += 1.0) grid.push_back(t);
    } else {
      const double gap = std::isfinite(pole.gap) && pole.gap > 0.0 ? pole.gap : 1.0;
      const double last = std::min(options.t_max, std::max(64.0, 64.0 / gap));
      for (double t = base; t <= last; t *= 2.0) grid.push_back(t);
    }
    const MeanErgodicReport me = mean_ergodic_with(model, projection_of(*g), grid, options.tol);
    s.conditions[1] = {me.passed, "||C_t - P|| <= " + fmt(me.decay_constant) + "/t, last " +
                                      fmt(me.distances.back()) + " at t = " + fmt(me.times.back())};
  } else {
    s.conditions[0] = {std::nullopt, "no unique stationary density"};
    s.conditions[1] = {std::nullopt, "no unique stationary density"};
  }

  s.conditions[2] = {pole.is_simple_pole, "multiplicity " + std::to_string(pole.report.algebraic_multiplicity) +
                                              ", gap " + fmt(pole.gap)};
  s.conditions[3] = {dual_irreducibility(model), "transposed transition graph"};

  bool some_lambda_all_cells = true;
  bool every_lambda_all_cells = true;
  double worst = std::numeric_limits<double>::infinity();
  std::vector<Eigen::MatrixXd> resolvents;
  for (double l : options.lambdas) resolvents.push_back(resolvent(model, l).entries());
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    e[static_cast<Eigen::Index>(i)] = 1.0;
    const DualVector f(space, e);
    bool any = false;
    for (std::size_t k = 0; k < options.lambdas.size(); ++k) {
      const double m = dual_apply(KernelOperator(space, resolvents[k]), f).values().minCoeff();
      worst = std::min(worst, m);
      const bool ok = m >= options.positivity_floor;
      any = any || ok;
      every_lambda_all_cells = every_lambda_all_cells && ok;
    }
    some_lambda_all_cells = some_lambda_all_cells && any;
  }
  s.conditions[4] = {some_lambda_all_cells, "min_i R(lambda)'e_i over sweep: " + fmt(worst)};
  s.conditions[5] = {every_lambda_all_cells, "min_i R(lambda)'e_i over sweep: " + fmt(worst)};

  bool all_evaluated = true;
  bool all_equal = true;
  std::optional<bool> first;
  for (const auto& c : s.conditions) {
    if (!c.holds) {
      all_evaluated = false;
      continue;
    }
    if (!first) first = *c.holds;
    all_equal = all_equal && (*c.holds == *first);
  }
  s.agree = s.hypothesis_met && all_evaluated && all_equal;
  if (s.hypothesis_met && !s.agree && options.throw_on_disagreement) {
    std::string msg = "equivalent conditions disagree:";
    for (std::size_t k = 0; k < s.conditions.size(); ++k) {
      const auto& c = s.conditions[k];
      msg += " (" + std::to_string(k + 1) + ") " + (c.holds ? (*c.holds ? "true" : "false") : "n/a") +
             " [" + c.evidence + "];";
    }
    throw InconsistencyError(msg);
  }
  return s;
}

}  // namespace ergocert
