#pragma once

// Deficiency functionals, single-time maximal lower bounds and Doeblin-type
// certificates of operator-norm convergence.

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ergocert/lattice.hpp"
#include "ergocert/models.hpp"

namespace ergocert {

struct DeficiencyReport {
  double time = std::numeric_limits<double>::quiet_NaN();
  Density candidate;
  /// sup over normalized positive f of ||(T f - h)^-||.
  double deficiency = 0.0;
  /// Cell whose normalized indicator attains the supremum.
  std::size_t column = 0;
};

/// The supremum is convex in f, so it is attained at one of the normalized
/// cell indicators e_j / mu_j; only those n points are evaluated.
/// Throws ValidationError if h has a negative entry.
DeficiencyReport deficiency(const StructuredOperator& t, const Density& h,
                            double time = std::numeric_limits<double>::quiet_NaN());

/// h_i = min_j (T e_j / mu_j)_i: the largest h with zero deficiency for T.
Density maximal_lower_bound_at(const StructuredOperator& t);

/// ||maximal_lower_bound_at(T_t)||.
double doeblin_mass(const Model& model, double t);

/// ||T_t - P|| <= c * rho^floor(t / t0).
struct RateBound {
  double c = 2.0;
  double rho = 1.0;
  double t0 = 1.0;

  double at(double t) const { return c * std::pow(rho, std::floor(t / t0 + 1e-12)); }
};

struct AuditEntry {
  double time = 0.0;
  double deficiency = 0.0;
  double distance = 0.0;  // ||T_t - P||
  double bound = 0.0;     // rate bound at t
  double margin = 0.0;    // bound - distance
};

struct ConvergenceCertificate {
  Density lower_bound;  // h
  double t0 = 0.0;
  double eta = 0.0;  // ||h||
  RateBound rate;
  Density stationary;      // g
  KernelOperator limit;    // P = 1 (x) g
  std::vector<AuditEntry> audit;
};

struct NoCertificate {
  double t0 = 0.0;
  double eta = 0.0;
  std::string reason;
};

using CertificationResult = std::variant<ConvergenceCertificate, NoCertificate>;

/// Builds h from T_{t0}; if ||h|| <= tol returns NoCertificate. Otherwise
/// audits every grid time t >= t0: deficiency(T_t, h) <= tol and
/// ||T_t - P|| <= 2 (1 - eta)^floor(t/t0) + tol. A failed audit throws
/// AuditFailure; a reducible model throws ValidationError.
CertificationResult certify_uniform_convergence(const Model& model, double t0,
                                                std::span<const double> audit_grid,
                                                double tol = 1e-9);

struct LowerBoundSample {
  double t0 = 0.0;
  double eta = 0.0;
};

/// Doeblin mass at every positive grid time.
std::vector<LowerBoundSample> lower_bound_sweep(const Model& model, std::span<const double> grid);

/// Grid time with the fastest certified rate -log(1 - eta) / t0, or nullopt
/// when every sampled mass is <= tol.
std::optional<LowerBoundSample> best_t0(std::span<const LowerBoundSample> sweep, double tol = 1e-9);

}  // namespace ergocert
