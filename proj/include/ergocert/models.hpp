#pragma once

// Objects that generate stochastic semigroups: rate matrices (continuous
// time), stochastic matrices (discrete time) and transport-plus-jump models
// on a circle of unit cells.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ergocert/lattice.hpp"

namespace ergocert {

/// Rate matrix in density coordinates: off-diagonal entries >= 0 and
/// sum_i mu_i q_ij = 0 for every column j.
struct CtmcModel {
  SpacePtr space;
  Eigen::MatrixXd rates;
};

/// Discrete-time semigroup (T^n) generated by a stochastic step operator.
struct DtmcModel {
  SpacePtr space;
  KernelOperator step;
};

/// Transport on a circle of n unit cells (one cell per unit time) with jumps
/// at rate `jump_rate` to the shift-invariant density `jump_target`. Only
/// integer times are valid, where
///   T_t = e^{-rate t} S^t + (1 - e^{-rate t}) 1 (x) jump_target.
struct PdmpModel {
  SpacePtr space;
  double jump_rate = 0.0;
  Density jump_target;

  std::size_t cells() const { return space->size(); }
  /// Cell reached from cell j after one unit of time.
  std::size_t shift(std::size_t j) const { return (j + 1) % cells(); }
};

/// Rate-matrix model with a distinguished cell of positive mass.
struct AtomModel {
  CtmcModel ctmc;
  std::size_t atom = 0;
};

using Model = std::variant<CtmcModel, DtmcModel, PdmpModel>;

CtmcModel build_ctmc(const SpacePtr& space, Eigen::MatrixXd rates, double tol = kDefaultTol);
DtmcModel build_dtmc(const SpacePtr& space, Eigen::MatrixXd step, double tol = kDefaultTol);
PdmpModel build_pdmp(std::size_t n, double jump_rate, const Eigen::VectorXd& jump_target);
/// Pure transport: build_pdmp(n, 0, uniform).
PdmpModel build_rotation(std::size_t n);
AtomModel build_atom(CtmcModel ctmc, std::size_t atom);

/// Cyclic shift j -> j+1 mod n on unit cells.
DtmcModel cyclic_dtmc(std::size_t n);

/// Adjacency lists: edges[j] holds every i reachable from j in one step.
std::vector<std::vector<std::size_t>> transition_graph(const Model& model);
bool is_strongly_connected(const std::vector<std::vector<std::size_t>>& edges);
std::vector<std::vector<std::size_t>> transpose_graph(const std::vector<std::vector<std::size_t>>& edges);
bool is_irreducible(const Model& model);

/// Reproducible irreducible rate matrix: random cell masses in [0.5, 2),
/// a random Hamiltonian cycle of rates in [0.5, 2) and every other ordered
/// pair present with probability `density`, rate in [0.1, 2).
CtmcModel random_irreducible_ctmc(std::size_t n, double density, std::uint64_t seed);

/// A drift chain of n-1 light cells that empties into one heavy atom cell,
/// which returns mass to the chain at a positive rate.
AtomModel random_atom_model(std::size_t n, std::uint64_t seed);

const SpacePtr& space_of(const Model& model);
std::string_view kind_name(const Model& model);
/// True for DTMC and PDMP models, whose semigroups live on an integer grid.
bool is_grid_model(const Model& model);
/// Whether the model has a genuine rate-matrix generator.
bool has_rate_generator(const Model& model);

}  // namespace ergocert
