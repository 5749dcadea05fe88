#pragma once

// Resolvents, stationary densities, spectral diagnostics and the
// equivalent conditions for uniform convergence of an irreducible
// semigroup that dominates a non-zero kernel operator.

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergocert/lattice.hpp"
#include "ergocert/models.hpp"

namespace ergocert {

/// Matrix used as generator: Q for rate matrices, T_1 - I for grid models
/// (the generator of the Poissonized discrete semigroup, which has the same
/// fixed space and the same positivity pattern as the model).
Eigen::MatrixXd generator_matrix(const Model& model);

/// (lambda - A)^{-1}. Throws ValidationError for lambda <= 0.
KernelOperator resolvent(const Model& model, double lambda);

/// R(lambda, A)' phi in the mu-weighted pairing.
DualVector dual_resolvent(const Model& model, double lambda, const DualVector& phi);

/// Unique density g >= 0 with A g = 0 and <1, g> = 1.
/// Throws ValidationError for reducible models.
Density stationary_density(const Model& model);

struct SpectralReport {
  /// Eigenvalues of Q (rate matrices) or of the step operator T_1.
  std::vector<std::complex<double>> eigenvalues;
  /// Rate matrices: -max Re nu over nu != 0. Grid models: 1 - max |z| over
  /// eigenvalues z != 1 of T_1.
  double spectral_gap = 0.0;
  int algebraic_multiplicity = 0;
  int geometric_multiplicity = 0;
  /// Rate matrices: |Re nu| <= tol. Grid models: |z| >= 1 - tol.
  std::vector<std::complex<double>> peripheral;
  bool generator_applicable = true;
};

SpectralReport spectral_report(const Model& model, double tol = 1e-9);

struct PoleCheck {
  bool is_simple_pole = false;
  double gap = 0.0;
  bool generator_applicable = true;
  SpectralReport report;
};

/// In finite dimension 0 is always a pole once it is an eigenvalue, so this
/// reports whether it is a simple one together with the spectral gap.
PoleCheck zero_pole_check(const Model& model, double tol = 1e-9);

struct MeanErgodicReport {
  std::vector<double> times;
  std::vector<double> distances;  // ||C_t - P||
  /// Smallest c with ||C_t - P|| <= c / t on the grid.
  double decay_constant = 0.0;
  /// ||C_t - P|| nonincreasing along the grid up to tol.
  bool monotone = false;
  /// The c/t envelope holds on the later half of the grid with the constant
  /// fitted on the earlier half, and the last distance is below the first.
  bool passed = false;
};

/// Throws ValidationError when no unique stationary density exists.
MeanErgodicReport mean_ergodic_check(const Model& model, std::span<const double> grid,
                                     double tol = 1e-9);

/// min_i (R(lambda)' f)_i >= eps. Throws ValidationError for f = 0,
/// f not positive, lambda <= 0 or eps <= 0.
bool dual_resolvent_quasi_interior(const Model& model, const DualVector& f, double lambda,
                                   double eps);

/// Strong connectivity of the transposed transition graph.
bool dual_irreducibility(const Model& model);

struct ConditionResult {
  std::optional<bool> holds;  // nullopt: not evaluated
  std::string evidence;
};

struct CorollarySuite {
  bool irreducible = false;
  bool kernel_part_nonzero = false;
  bool continuous_time = true;
  bool hypothesis_met = false;
  std::string hypothesis_note;
  /// conditions[0..5] = (i)..(vi).
  std::array<ConditionResult, 6> conditions;
  /// True iff the hypothesis holds and all six conditions were evaluated
  /// and agree.
  bool agree = false;
};

struct SuiteOptions {
  std::vector<double> lambdas{0.5, 1.0, 2.0};
  double tol = 1e-9;
  /// Smallest positive value accepted as "strictly positive".
  double positivity_floor = 1e-13;
  /// Largest time probed for ||T_t - P|| < 1.
  double t_max = 1.0e4;
  bool throw_on_disagreement = true;
};

/// Evaluates the six equivalent conditions. When the hypothesis (irreducible,
/// continuous time, non-zero kernel part at some probed time) holds, a
/// disagreement throws InconsistencyError unless throw_on_disagreement is
/// off; without the hypothesis the table is only reported.
CorollarySuite corollary_suite(const Model& model, const SuiteOptions& options = {});

}  // namespace ergocert
