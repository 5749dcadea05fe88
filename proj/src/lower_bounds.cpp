#include "ergocert/lower_bounds.hpp"

#include <algorithm>
#include <string>

#include "ergocert/error.hpp"
#include "ergocert/evolution.hpp"
#include "ergocert/kernels.hpp"
#include "ergocert/spectral.hpp"

namespace ergocert {

DeficiencyReport deficiency(const StructuredOperator& t, const Density& h, double time) {
  require_same_space(t.space(), h.space());
  if (!h.is_positive()) throw ValidationError("lower bound candidate must be nonnegative");
  const Eigen::VectorXd d = kernels::column_deficiency(t.dense(), t.space()->weights(), h.values());
  Eigen::Index j = 0;
  const double worst = d.maxCoeff(&j);
  return DeficiencyReport{time, h, std::max(worst, 0.0), static_cast<std::size_t>(j)};
}

Density maximal_lower_bound_at(const StructuredOperator& t) {
  Eigen::VectorXd h = kernels::column_infimum(t.dense(), t.space()->weights());
  return Density(t.space(), h.cwiseMax(0.0));
}

double doeblin_mass(const Model& model, double t) {
  return l1_norm(maximal_lower_bound_at(semigroup_at(model, t)));
}

CertificationResult certify_uniform_convergence(const Model& model, double t0,
                                                std::span<const double> audit_grid, double tol) {
  if (!(t0 > 0.0) || !is_valid_time(model, t0)) {
    throw ValidationError("t0 must be a positive admissible time");
  }
  if (!is_irreducible(model)) {
    throw ValidationError("certification needs an irreducible model (stationary density not unique)");
  }
  SemigroupEvaluator semigroup(model);
  const Density h = maximal_lower_bound_at(semigroup.at(t0));
  const double eta = l1_norm(h);
  if (eta <= tol) {
    return NoCertificate{t0, eta, "maximal lower bound at t0 has no mass"};
  }

  const Density g = stationary_density(model);
  const KernelOperator limit = KernelOperator::rank_one(g);
  const StructuredOperator projection(limit);
  const RateBound rate{2.0, std::max(0.0, 1.0 - eta), t0};

  ConvergenceCertificate cert{h, t0, eta, rate, g, limit, {}};
  std::vector<double> times(audit_grid.begin(), audit_grid.end());
  std::sort(times.begin(), times.end());
  for (double t : times) {
    if (t < t0 * (1.0 - 1e-12) || !is_valid_time(model, t)) continue;
    const StructuredOperator tt = semigroup.at(t);
    AuditEntry e;
    e.time = t;
    e.deficiency = deficiency(tt, h, t).deficiency;
    e.distance = op_norm(tt - projection);
    e.bound = rate.at(t);
    e.margin = e.bound - e.distance;
    if (e.deficiency > tol) {
      throw AuditFailure("lower bound deficiency " + std::to_string(e.deficiency) + " at t = " +
                             std::to_string(t),
                         t, tol - e.deficiency);
    }
    if (e.margin < -tol) {
      throw AuditFailure("rate bound violated at t = " + std::to_string(t) + " (margin " +
                             std::to_string(e.margin) + ")",
                         t, e.margin);
    }
    cert.audit.push_back(e);
  }
  return cert;
}

std::vector<LowerBoundSample> lower_bound_sweep(const Model& model, std::span<const double> grid) {
  std::vector<LowerBoundSample> out;
  for (double t : grid) {
    if (!(t > 0.0) || !is_valid_time(model, t)) continue;
    out.push_back({t, doeblin_mass(model, t)});
  }
  return out;
}

std::optional<LowerBoundSample> best_t0(std::span<const LowerBoundSample> sweep, double tol) {
  std::optional<LowerBoundSample> best;
  double best_rate = 0.0;
  for (const auto& s : sweep) {
    if (s.eta <= tol) continue;
    const double rate = s.eta >= 1.0 ? std::numeric_limits<double>::infinity() : -std::log1p(-s.eta) / s.t0;
    if (!best || rate > best_rate) {
      best = s;
      best_rate = rate;
    }
  }
  return best;
}

}  // namespace ergocert
