#pragma once

// Step-by-step verification of the argument that turns a non-zero kernel
// part K <= T_{t0} plus uniform mean ergodicity into the uniform lower bound
// (delta/2) g, with delta = ||K g||.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergocert/evolution.hpp"
#include "ergocert/lattice.hpp"
#include "ergocert/models.hpp"

namespace ergocert {

/// J = kernel(T_{t0}) ^ P with P = 1 (x) g. Zero is a legitimate result.
KernelOperator meet_with_projection(const Model& model, double t0);

struct CompactConstruction {
  double s = 0.0;
  std::size_t witness_column = 0;  // f = e_j / mu_j with K f != 0
  KernelOperator square;            // (T_s (J ^ G))^2
  /// The square is dominated by T_{2(s + t0)} when J <= T_{t0}.
  double domination_time = 0.0;
};

/// Smallest grid s with (T_s (J ^ G))^2 != 0. Throws ValidationError if the
/// grid is exhausted (including J ^ G = 0).
CompactConstruction squared_compact_construction(const Model& model, const KernelOperator& j,
                                                 const KernelOperator& g,
                                                 std::span<const double> s_grid, double t0 = 0.0,
                                                 double zero_tol = 1e-14);

/// K and R fixed at t0 and propagated as K_t = K T_{t-t0}, R_t = R T_{t-t0}.
class ProofDecomposition {
 public:
  ProofDecomposition(const Model& model, double t0, double eps = kDefaultTruncation);

  double t0() const noexcept { return t0_; }
  const KernelOperator& kernel() const noexcept { return split_.kernel; }
  const StructuredOperator& remainder() const noexcept { return split_.remainder; }

  StructuredOperator kernel_at(double t) const;
  StructuredOperator remainder_at(double t) const;

 private:
  double t0_;
  Split split_;
  SemigroupEvaluator semigroup_;
};

struct ExtremePointWitness {
  std::size_t column = 0;
  double s = 0.0;                // s_f in [t1, 2 t1]
  double remainder_mass = 0.0;   // ||R_{s_f} f||
  double kernel_mass = 0.0;      // ||K_{s_f} f||
};

struct ProofChainOptions {
  /// Tolerance for identities and inequalities between norms.
  double tol = 1e-10;
  /// epsilon of the lower-bound argument: target for ||T_t K f - P K f|| and
  /// for the deficiency of (delta/2) g.
  double lower_bound_tol = 1e-8;
  bool include_meet = true;
};

struct ProofChainReport {
  double t0 = 0.0;
  Density stationary;
  KernelOperator kernel;           // K
  StructuredOperator remainder;    // R
  double delta = 0.0;              // ||K g||
  std::optional<double> t1;
  double cesaro_distance = 0.0;    // ||C_{t1} - P||
  double remainder_projection_norm = 0.0;   // ||R_{t1} P||
  double remainder_cesaro_norm = 0.0;       // ||R_{t1} C_{t1}||
  std::vector<ExtremePointWitness> witnesses;
  std::optional<double> t2;
  double audit_start = 0.0;        // 2 t1 + t2
  double max_audit_deficiency = 0.0;
  std::vector<std::pair<double, double>> audit;  // (t, deficiency of (delta/2) g)
  Density lower_bound;             // (delta/2) g
  std::optional<KernelOperator> meet;              // T_{t0} ^ P
  std::optional<CompactConstruction> construction;

  bool passed = false;
  std::string failing_step;  // empty when passed
  double failing_margin = 0.0;
};

/// Runs every step; the first failure is recorded in failing_step/margin and
/// the remaining steps are skipped. Steps: "kernel-part", "t1-search",
/// "remainder-projection", "remainder-cesaro", "extreme-points",
/// "t2-search", "lower-bound-audit". A reducible model throws
/// ValidationError.
ProofChainReport verify_proof_chain(const Model& model, double t0, std::span<const double> grid,
                                    const ProofChainOptions& options = {});

}  // namespace ergocert
