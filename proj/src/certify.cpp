#include "ergocert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ergocert/error.hpp"
#include "ergocert/kernels.hpp"
#include "ergocert/lower_bounds.hpp"
#include "ergocert/spectral.hpp"

namespace ergocert {

namespace {

std::vector<double> admissible_sorted(const Model& model, std::span<const double> grid) {
  std::vector<double> out;
  for (double t : grid)
    if (is_valid_time(model, t)) out.push_back(t);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

KernelOperator meet_with_projection(const Model& model, double t0) {
  const Density g = stationary_density(model);
  return op_meet(semigroup_at(model, t0).kernel(), KernelOperator::rank_one(g));
}

CompactConstruction squared_compact_construction(const Model& model, const KernelOperator& j,
                                                 const KernelOperator& g,
                                                 std::span<const double> s_grid, double t0,
                                                 double zero_tol) {
  const KernelOperator jg = op_meet(j, g);
  if (jg.is_zero(zero_tol)) throw ValidationError("J ^ G is zero; no compact square can be built");
  for (double s : admissible_sorted(model, s_grid)) {
    const Eigen::MatrixXd first = semigroup_at(model, s).dense() * jg.entries();
    Eigen::MatrixXd square = first * first;
    const Eigen::VectorXd column_max = square.colwise().maxCoeff().transpose();
    Eigen::Index col = 0;
    if (column_max.maxCoeff(&col) > zero_tol) {
      return CompactConstruction{s, static_cast<std::size_t>(col),
                                 KernelOperator(j.space(), std::move(square)), 2.0 * (s + t0)};
    }
  }
  throw ValidationError("no grid time s gives a non-zero (T_s (J ^ G))^2");
}

ProofDecomposition::ProofDecomposition(const Model& model, double t0, double eps)
    : t0_(t0), split_(split(semigroup_at(model, t0, eps))), semigroup_(model, eps) {}

StructuredOperator ProofDecomposition::kernel_at(double t) const {
  if (t < t0_) throw ValidationError("K_t is defined for t >= t0");
  return StructuredOperator(split_.kernel) * semigroup_.at(t - t0_);
}

StructuredOperator ProofDecomposition::remainder_at(double t) const {
  if (t < t0_) throw ValidationError("R_t is defined for t >= t0");
  return split_.remainder * semigroup_.at(t - t0_);
}

ProofChainReport verify_proof_chain(const Model& model, double t0, std::span<const double> grid,
                                    const ProofChainOptions& options) {
  if (!is_valid_time(model, t0)) throw ValidationError("t0 is not an admissible time");
  if (!is_irreducible(model)) throw ValidationError("the proof chain needs an irreducible model");

  const Density g = stationary_density(model);
  const StructuredOperator projection(KernelOperator::rank_one(g));
  const ProofDecomposition dec(model, t0);
  SemigroupEvaluator semigroup(model);
  const std::vector<double> times = admissible_sorted(model, grid);
  const double tol = options.tol;
  const double eps = options.lower_bound_tol;

  ProofChainReport r{t0,
                     g,
                     dec.kernel(),
                     dec.remainder(),
                     0.0,
                     std::nullopt,
                     0.0,
                     0.0,
                     0.0,
                     {},
                     std::nullopt,
                     0.0,
                     0.0,
                     {},
                     Density::zero(g.space()),
                     std::nullopt,
                     std::nullopt,
                     false,
                     {},
                     0.0};
  auto fail = [&r](const char* step, double margin) {
    r.failing_step = step;
    r.failing_margin = margin;
    return r;
  };

  if (options.include_meet) {
    KernelOperator meet = op_meet(semigroup.at(t0).kernel(), projection.kernel());
    if (!meet.is_zero(1e-14)) {
      std::vector<double> s_grid{0.0};
      s_grid.insert(s_grid.end(), times.begin(), times.end());
      try {
        r.construction =
            squared_compact_construction(model, meet, projection.kernel(), s_grid, t0);
      } catch (const ValidationError&) {
      }
    }
    r.meet = std::move(meet);
  }

  r.delta = l1_norm(dec.kernel().apply(g));
  r.lower_bound = (0.5 * r.delta) * g;
  if (r.delta <= tol) return fail("kernel-part", r.delta - tol);

  // t1 > t0 with ||C_{t1} - P|| <= delta/2.
  double closest = std::numeric_limits<double>::infinity();
  for (double t : times) {
    if (t <= t0) continue;
    const double d = op_norm(cesaro_mean(model, t) - projection);
    closest = std::min(closest, d);
    if (d <= 0.5 * r.delta) {
      r.t1 = t;
      r.cesaro_distance = d;
      break;
    }
  }
  if (!r.t1) return fail("t1-search", 0.5 * r.delta - closest);
  const double t1 = *r.t1;

  const StructuredOperator r_t1 = dec.remainder_at(t1);
  r.remainder_projection_norm = op_norm(r_t1 * projection);
  const double projection_gap = std::abs(r.remainder_projection_norm - (1.0 - r.delta));
  if (projection_gap > tol) return fail("remainder-projection", tol - projection_gap);

  r.remainder_cesaro_norm = op_norm(r_t1 * cesaro_mean(model, t1));
  const double cesaro_margin = 1.0 - 0.5 * r.delta + tol - r.remainder_cesaro_norm;
  if (cesaro_margin < 0.0) return fail("remainder-cesaro", cesaro_margin);

  // s_f in [t1, 2 t1] for every extreme point f = e_j / mu_j.
  std::vector<double> candidates{t1};
  for (double t : times)
    if (t > t1 && t < 2.0 * t1) candidates.push_back(t);
  candidates.push_back(2.0 * t1);
  const std::size_t n = g.size();
  const double target = 1.0 - 0.5 * r.delta + tol;
  std::vector<std::optional<ExtremePointWitness>> found(n);
  std::vector<double> best_remainder(n, std::numeric_limits<double>::infinity());
  for (double s : candidates) {
    const Eigen::VectorXd rem = kernels::column_norms(dec.remainder_at(s).dense(), g.space()->weights());
    const Eigen::VectorXd ker = kernels::column_norms(dec.kernel_at(s).dense(), g.space()->weights());
    for (std::size_t j = 0; j < n; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      best_remainder[j] = std::min(best_remainder[j], rem[jj]);
      if (!found[j] && rem[jj] <= target) found[j] = ExtremePointWitness{j, s, rem[jj], ker[jj]};
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!found[j]) return fail("extreme-points", target - best_remainder[j]);
    r.witnesses.push_back(*found[j]);
  }

  // t2: ||T_t K f - P K f|| <= eps for every extreme point f and all later
  // probed t.
  std::vector<double> probe{0.0};
  for (double t : times)
    if (t > 0.0) probe.push_back(t);
  std::vector<double> err;
  for (double t : probe) err.push_back(op_norm((semigroup.at(t) - projection) * dec.kernel()));
  std::size_t first_good = probe.size();
  for (std::size_t i = probe.size(); i-- > 0;) {
    if (err[i] > eps) break;
    first_good = i;
  }
  if (first_good == probe.size()) return fail("t2-search", eps - err.back());
  r.t2 = probe[first_good];

  r.audit_start = 2.0 * t1 + *r.t2;
  std::vector<double> audit{r.audit_start};
  for (double t : times)
    if (t > r.audit_start) audit.push_back(t);
  for (double t : audit) {
    const double d = deficiency(semigroup.at(t), r.lower_bound, t).deficiency;
    r.audit.emplace_back(t, d);
    r.max_audit_deficiency = std::max(r.max_audit_deficiency, d);
  }
  if (r.max_audit_deficiency > eps) return fail("lower-bound-audit", eps - r.max_audit_deficiency);

  r.passed = true;
  return r;
}

}  // namespace ergocert
