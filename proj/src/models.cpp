#include "ergocert/models.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "ergocert/error.hpp"
#include "ergocert/rng.hpp"

namespace ergocert {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

void require_shape(const Eigen::MatrixXd& m, const StateSpace& space, const char* what) {
  if (m.rows() != idx(space.size()) || m.cols() != idx(space.size())) {
    throw ValidationError(std::string(what) + " must be " + std::to_string(space.size()) + "x" +
                          std::to_string(space.size()));
  }
  if (!m.allFinite()) throw ValidationError(std::string(what) + " has non-finite entries");
}

}  // namespace

CtmcModel build_ctmc(const SpacePtr& space, Eigen::MatrixXd rates, double tol) {
  require_shape(rates, *space, "rate matrix");
  const Eigen::VectorXd& mu = space->weights();
  for (Eigen::Index j = 0; j < rates.cols(); ++j) {
    for (Eigen::Index i = 0; i < rates.rows(); ++i) {
      if (i != j && rates(i, j) < 0.0) {
        throw ValidationError("negative off-diagonal rate at (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
      }
    }
    const double mass = mu.dot(rates.col(j));
    if (std::abs(mass) > tol * mu[j] * std::max(1.0, std::abs(rates(j, j)))) {
      throw ValidationError("rate matrix column " + std::to_string(j) +
                            " does not conserve mass (net " + std::to_string(mass) + ")");
    }
  }
  return CtmcModel{space, std::move(rates)};
}

DtmcModel build_dtmc(const SpacePtr& space, Eigen::MatrixXd step, double tol) {
  require_shape(step, *space, "step matrix");
  if (step.minCoeff() < 0.0) throw ValidationError("step matrix has negative entries");
  KernelOperator op(space, std::move(step));
  if (!is_stochastic(op, tol)) throw ValidationError("step matrix is not stochastic");
  return DtmcModel{space, std::move(op)};
}

PdmpModel build_pdmp(std::size_t n, double jump_rate, const Eigen::VectorXd& jump_target) {
  if (n == 0) throw ValidationError("transport model needs at least one cell");
  if (!(jump_rate >= 0.0) || !std::isfinite(jump_rate)) {
    throw ValidationError("jump rate must be finite and nonnegative");
  }
  if (jump_target.size() != idx(n)) throw ValidationError("jump target has wrong length");
  if (!jump_target.allFinite() || jump_target.minCoeff() < 0.0) {
    throw ValidationError("jump target must be a nonnegative density");
  }
  auto space = StateSpace::uniform(n);
  Density target(space, jump_target);
  if (std::abs(total_mass(target) - 1.0) > 1e-12) throw ValidationError("jump target must have mass 1");
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(jump_target[idx((j + 1) % n)] - jump_target[idx(j)]) > 1e-12) {
      throw ValidationError("jump target is not invariant under the transport shift");
    }
  }
  return PdmpModel{space, jump_rate, std::move(target)};
}

PdmpModel build_rotation(std::size_t n) {
  if (n == 0) throw ValidationError("transport model needs at least one cell");
  return build_pdmp(n, 0.0, Eigen::VectorXd::Constant(idx(n), 1.0 / static_cast<double>(n)));
}

AtomModel build_atom(CtmcModel ctmc, std::size_t atom) {
  const std::size_t n = ctmc.space->size();
  if (atom >= n) throw ValidationError("atom index out of range");
  double out = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (i != atom) out += ctmc.rates(idx(i), idx(atom));
  if (!(out > 0.0)) throw ValidationError("atom must return mass at a positive rate");
  return AtomModel{std::move(ctmc), atom};
}

DtmcModel cyclic_dtmc(std::size_t n) {
  auto space = StateSpace::uniform(n);
  Eigen::MatrixXd step = Eigen::MatrixXd::Zero(idx(n), idx(n));
  for (std::size_t j = 0; j < n; ++j) step(idx((j + 1) % n), idx(j)) = 1.0;
  return build_dtmc(space, std::move(step));
}

std::vector<std::vector<std::size_t>> transition_graph(const Model& model) {
  const std::size_t n = space_of(model)->size();
  std::vector<std::vector<std::size_t>> edges(n);
  std::visit(overloaded{
                 [&](const CtmcModel& m) {
                   for (std::size_t j = 0; j < n; ++j)
                     for (std::size_t i = 0; i < n; ++i)
                       if (i != j && m.rates(idx(i), idx(j)) > 0.0) edges[j].push_back(i);
                 },
                 [&](const DtmcModel& m) {
                   for (std::size_t j = 0; j < n; ++j)
                     for (std::size_t i = 0; i < n; ++i)
                       if (m.step.entries()(idx(i), idx(j)) > 0.0) edges[j].push_back(i);
                 },
                 [&](const PdmpModel& m) {
                   for (std::size_t j = 0; j < n; ++j) {
                     edges[j].push_back(m.shift(j));
                     if (m.jump_rate > 0.0)
                       for (std::size_t i = 0; i < n; ++i)
                         if (m.jump_target[i] > 0.0 && i != m.shift(j)) edges[j].push_back(i);
                   }
                 },
             },
             model);
  return edges;
}

namespace {

std::size_t reachable_from_zero(const std::vector<std::vector<std::size_t>>& edges) {
  std::vector<bool> seen(edges.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t j = stack.back();
    stack.pop_back();
    for (std::size_t i : edges[j]) {
      if (!seen[i]) {
        seen[i] = true;
        ++count;
        stack.push_back(i);
      }
    }
  }
  return count;
}

}  // namespace

std::vector<std::vector<std::size_t>> transpose_graph(
    const std::vector<std::vector<std::size_t>>& edges) {
  std::vector<std::vector<std::size_t>> t(edges.size());
  for (std::size_t j = 0; j < edges.size(); ++j)
    for (std::size_t i : edges[j]) t[i].push_back(j);
  return t;
}

bool is_strongly_connected(const std::vector<std::vector<std::size_t>>& edges) {
  if (edges.size() <= 1) return true;
  return reachable_from_zero(edges) == edges.size() &&
         reachable_from_zero(transpose_graph(edges)) == edges.size();
}

bool is_irreducible(const Model& model) { return is_strongly_connected(transition_graph(model)); }

CtmcModel random_irreducible_ctmc(std::size_t n, double density, std::uint64_t seed) {
  if (n < 2) throw ValidationError("random rate matrices need n >= 2");
  if (!(density > 0.0 && density <= 1.0)) throw ValidationError("density must lie in (0, 1]");
  Rng rng(seed);
  Eigen::VectorXd mu(idx(n));
  for (std::size_t i = 0; i < n; ++i) mu[idx(i)] = rng.uniform(0.5, 2.0);

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n - 1; i >= 1; --i) std::swap(perm[i], perm[rng.below(i + 1)]);

  // r(i, j): mass transferred j -> i per unit mass in j.
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(idx(n), idx(n));
  for (std::size_t k = 0; k < n; ++k) r(idx(perm[(k + 1) % n]), idx(perm[k])) = rng.uniform(0.5, 2.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j || r(idx(i), idx(j)) > 0.0) continue;
      if (rng.bernoulli(density)) r(idx(i), idx(j)) = rng.uniform(0.1, 2.0);
    }
  }

  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(idx(n), idx(n));
  for (std::size_t j = 0; j < n; ++j) {
    double out = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      q(idx(i), idx(j)) = r(idx(i), idx(j)) * mu[idx(j)] / mu[idx(i)];
      out += r(idx(i), idx(j));
    }
    q(idx(j), idx(j)) = -out;
  }
  return build_ctmc(StateSpace::create(mu), std::move(q));
}

AtomModel random_atom_model(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ValidationError("atom models need n >= 2");
  Rng rng(seed);
  const std::size_t atom = n - 1;
  Eigen::VectorXd mu(idx(n));
  for (std::size_t i = 0; i < atom; ++i) mu[idx(i)] = rng.uniform(0.05, 0.15);
  mu[idx(atom)] = rng.uniform(0.5, 2.0);

  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(idx(n), idx(n));
  for (std::size_t i = 0; i < atom; ++i) r(idx(i + 1), idx(i)) = rng.uniform(2.0, 6.0);
  for (std::size_t i = 0; i + 1 < atom; ++i)
    if (rng.bernoulli(0.3)) r(idx(atom), idx(i)) = rng.uniform(0.1, 1.0);
  r(0, idx(atom)) = rng.uniform(0.5, 2.0);

  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(idx(n), idx(n));
  for (std::size_t j = 0; j < n; ++j) {
    double out = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      q(idx(i), idx(j)) = r(idx(i), idx(j)) * mu[idx(j)] / mu[idx(i)];
      out += r(idx(i), idx(j));
    }
    q(idx(j), idx(j)) = -out;
  }
  return build_atom(build_ctmc(StateSpace::create(mu), std::move(q)), atom);
}

const SpacePtr& space_of(const Model& model) {
  return std::visit([](const auto& m) -> const SpacePtr& { return m.space; }, model);
}

std::string_view kind_name(const Model& model) {
  return std::visit(overloaded{
                        [](const CtmcModel&) { return std::string_view("ctmc"); },
                        [](const DtmcModel&) { return std::string_view("dtmc"); },
                        [](const PdmpModel&) { return std::string_view("pdmp"); },
                    },
                    model);
}

bool is_grid_model(const Model& model) { return !std::holds_alternative<CtmcModel>(model); }

bool has_rate_generator(const Model& model) { return std::holds_alternative<CtmcModel>(model); }

}  // namespace ergocert
