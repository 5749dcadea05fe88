#include "ergocert/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ergocert/error.hpp"
#include "ergocert/kernels.hpp"

namespace ergocert {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_square(const Eigen::MatrixXd& m, const StateSpace& space, const char* what) {
  if (m.rows() != idx(space.size()) || m.cols() != idx(space.size())) {
    throw ValidationError(std::string(what) + ": expected " + std::to_string(space.size()) + "x" +
                          std::to_string(space.size()) + " matrix, got " +
                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

}  // namespace

SpacePtr StateSpace::create(std::vector<double> weights) {
  return create(Eigen::Map<const Eigen::VectorXd>(weights.data(), idx(weights.size())));
}

SpacePtr StateSpace::create(const Eigen::VectorXd& weights) {
  if (weights.size() == 0) throw ValidationError("state space needs at least one cell");
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw ValidationError("cell mass " + std::to_string(i) + " must be positive and finite");
    }
  }
  return SpacePtr(new StateSpace(weights));
}

SpacePtr StateSpace::uniform(std::size_t n, double mass) {
  return create(Eigen::VectorXd::Constant(idx(n), mass));
}

bool StateSpace::same_as(const StateSpace& other) const {
  return this == &other || weights_ == other.weights_;
}

void require_same_space(const SpacePtr& a, const SpacePtr& b) {
  if (!a || !b || !a->same_as(*b)) throw ValidationError("state space mismatch");
}

template <class Tag>
LatticeVector<Tag>::LatticeVector(SpacePtr space, Eigen::VectorXd values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (!space_) throw ValidationError("vector without state space");
  if (values_.size() != idx(space_->size())) {
    throw ValidationError("vector length " + std::to_string(values_.size()) +
                          " does not match state space of size " + std::to_string(space_->size()));
  }
}

template <class Tag>
LatticeVector<Tag>& LatticeVector<Tag>::operator+=(const LatticeVector& o) {
  require_same_space(space_, o.space_);
  values_ += o.values_;
  return *this;
}

template <class Tag>
LatticeVector<Tag>& LatticeVector<Tag>::operator-=(const LatticeVector& o) {
  require_same_space(space_, o.space_);
  values_ -= o.values_;
  return *this;
}

template class LatticeVector<DensityTag>;
template class LatticeVector<DualTag>;

Density unit_mass_at(const SpacePtr& space, std::size_t j) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(idx(space->size()));
  v[idx(j)] = 1.0 / space->weight(j);
  return Density(space, std::move(v));
}

double l1_norm(const Density& f) { return f.space()->weights().dot(f.values().cwiseAbs()); }

double total_mass(const Density& f) { return f.space()->weights().dot(f.values()); }

Density pos_part(const Density& f) { return Density(f.space(), f.values().cwiseMax(0.0)); }

Density neg_part(const Density& f) { return Density(f.space(), (-f.values()).cwiseMax(0.0)); }

Density lattice_sup(const Density& a, const Density& b) {
  require_same_space(a.space(), b.space());
  return Density(a.space(), a.values().cwiseMax(b.values()));
}

Density lattice_inf(const Density& a, const Density& b) {
  require_same_space(a.space(), b.space());
  return Density(a.space(), a.values().cwiseMin(b.values()));
}

double sup_norm(const DualVector& phi) { return phi.values().cwiseAbs().maxCoeff(); }

double pairing(const DualVector& phi, const Density& f) {
  require_same_space(phi.space(), f.space());
  return f.space()->weights().dot(phi.values().cwiseProduct(f.values()));
}

// ---------------------------------------------------------------------------

KernelOperator::KernelOperator(SpacePtr space, Eigen::MatrixXd entries)
    : space_(std::move(space)), entries_(std::move(entries)) {
  if (!space_) throw ValidationError("operator without state space");
  require_square(entries_, *space_, "kernel operator");
}

KernelOperator KernelOperator::zero(const SpacePtr& space) {
  return KernelOperator(space, Eigen::MatrixXd::Zero(idx(space->size()), idx(space->size())));
}

KernelOperator KernelOperator::identity(const SpacePtr& space) {
  return KernelOperator(space, Eigen::MatrixXd::Identity(idx(space->size()), idx(space->size())));
}

KernelOperator KernelOperator::rank_one(const Density& g) {
  return KernelOperator(g.space(), g.values() * g.space()->weights().transpose());
}

bool KernelOperator::is_positive(double tol) const { return entries_.minCoeff() >= -tol; }

bool KernelOperator::is_zero(double tol) const { return entries_.cwiseAbs().maxCoeff() <= tol; }

Density KernelOperator::apply(const Density& f) const {
  require_same_space(space_, f.space());
  return Density(space_, entries_ * f.values());
}

KernelOperator operator+(const KernelOperator& a, const KernelOperator& b) {
  require_same_space(a.space(), b.space());
  return KernelOperator(a.space(), a.entries() + b.entries());
}

KernelOperator operator-(const KernelOperator& a, const KernelOperator& b) {
  require_same_space(a.space(), b.space());
  return KernelOperator(a.space(), a.entries() - b.entries());
}

KernelOperator operator*(const KernelOperator& a, const KernelOperator& b) {
  require_same_space(a.space(), b.space());
  return KernelOperator(a.space(), a.entries() * b.entries());
}

KernelOperator operator*(double s, const KernelOperator& a) {
  return KernelOperator(a.space(), s * a.entries());
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd SingularPart::dense() const {
  const auto n = idx(map.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < map.size(); ++j) m(idx(map[j]), idx(j)) = weight;
  return m;
}

namespace {

void validate_singular(const SingularPart& s, const StateSpace& space) {
  if (s.map.size() != space.size()) throw ValidationError("singular map has wrong length");
  if (!(s.weight >= 0.0)) throw ValidationError("singular weight must be nonnegative");
  std::vector<bool> hit(space.size(), false);
  for (std::size_t j = 0; j < s.map.size(); ++j) {
    const std::size_t i = s.map[j];
    if (i >= space.size() || hit[i]) throw ValidationError("singular map is not a permutation");
    hit[i] = true;
    if (std::abs(space.weight(i) - space.weight(j)) > 1e-12 * space.weight(j)) {
      throw ValidationError("singular map must preserve cell masses");
    }
  }
}

std::vector<std::size_t> compose_maps(const std::vector<std::size_t>& outer,
                                      const std::vector<std::size_t>& inner) {
  std::vector<std::size_t> out(inner.size());
  for (std::size_t j = 0; j < inner.size(); ++j) out[j] = outer[inner[j]];
  return out;
}

// (w S_sigma) * K: row j of K moves to row sigma(j).
Eigen::MatrixXd singular_times(const SingularPart& s, const Eigen::MatrixXd& k) {
  Eigen::MatrixXd out(k.rows(), k.cols());
  for (std::size_t j = 0; j < s.map.size(); ++j) out.row(idx(s.map[j])) = s.weight * k.row(idx(j));
  return out;
}

// K * (w S_sigma): column j of the product is column sigma(j) of K.
Eigen::MatrixXd times_singular(const Eigen::MatrixXd& k, const SingularPart& s) {
  Eigen::MatrixXd out(k.rows(), k.cols());
  for (std::size_t j = 0; j < s.map.size(); ++j) out.col(idx(j)) = s.weight * k.col(idx(s.map[j]));
  return out;
}

}  // namespace

StructuredOperator::StructuredOperator(KernelOperator kernel) : kernel_(std::move(kernel)) {}

StructuredOperator::StructuredOperator(SingularPart singular, KernelOperator kernel)
    : singular_(std::move(singular)), kernel_(std::move(kernel)) {
  validate_singular(*singular_, *kernel_.space());
}

StructuredOperator StructuredOperator::identity(const SpacePtr& space) {
  return StructuredOperator(KernelOperator::identity(space));
}

Eigen::MatrixXd StructuredOperator::singular_dense() const {
  if (!singular_) return Eigen::MatrixXd::Zero(idx(size()), idx(size()));
  return singular_->dense();
}

Eigen::MatrixXd StructuredOperator::dense() const {
  if (!singular_) return kernel_.entries();
  Eigen::MatrixXd m = kernel_.entries();
  for (std::size_t j = 0; j < singular_->map.size(); ++j) {
    m(idx(singular_->map[j]), idx(j)) += singular_->weight;
  }
  return m;
}

bool StructuredOperator::is_positive(double tol) const {
  return kernel_.is_positive(tol) && (!singular_ || singular_->weight >= -tol);
}

Density StructuredOperator::apply(const Density& f) const {
  require_same_space(space(), f.space());
  return Density(space(), dense() * f.values());
}

StructuredOperator operator*(const StructuredOperator& a, const StructuredOperator& b) {
  require_same_space(a.space(), b.space());
  Eigen::MatrixXd k = a.kernel().entries() * b.kernel().entries();
  if (a.singular()) k += singular_times(*a.singular(), b.kernel().entries());
  if (b.singular()) k += times_singular(a.kernel().entries(), *b.singular());
  KernelOperator kernel(a.space(), std::move(k));
  if (a.singular() && b.singular()) {
    SingularPart s{a.singular()->weight * b.singular()->weight,
                   compose_maps(a.singular()->map, b.singular()->map)};
    return StructuredOperator(std::move(s), std::move(kernel));
  }
  return StructuredOperator(std::move(kernel));
}

KernelOperator operator-(const StructuredOperator& a, const StructuredOperator& b) {
  require_same_space(a.space(), b.space());
  return KernelOperator(a.space(), a.dense() - b.dense());
}

StructuredOperator scaled(const StructuredOperator& a, double s) {
  KernelOperator k = s * a.kernel();
  if (!a.singular()) return StructuredOperator(std::move(k));
  SingularPart sp = *a.singular();
  sp.weight *= s;
  return StructuredOperator(std::move(sp), std::move(k));
}

double op_norm(const Eigen::MatrixXd& t, const StateSpace& space) {
  return kernels::column_norms(t, space.weights()).maxCoeff();
}

double op_norm(const KernelOperator& t) { return op_norm(t.entries(), *t.space()); }

double op_norm(const StructuredOperator& t) { return op_norm(t.dense(), *t.space()); }

KernelOperator op_meet(const KernelOperator& a, const KernelOperator& b) {
  require_same_space(a.space(), b.space());
  if (!a.is_positive() || !b.is_positive()) throw ValidationError("op_meet needs positive operators");
  return KernelOperator(a.space(), kernels::entrywise_min(a.entries(), b.entries()));
}

StructuredOperator op_meet(const StructuredOperator& a, const StructuredOperator& b) {
  KernelOperator k = op_meet(a.kernel(), b.kernel());
  if (a.singular() && b.singular() && a.singular()->map == b.singular()->map) {
    if (a.singular()->weight < 0.0 || b.singular()->weight < 0.0) {
      throw ValidationError("op_meet needs positive operators");
    }
    SingularPart s{std::min(a.singular()->weight, b.singular()->weight), a.singular()->map};
    return StructuredOperator(std::move(s), std::move(k));
  }
  return StructuredOperator(std::move(k));
}

namespace {

bool stochastic_matrix(const Eigen::MatrixXd& m, const StateSpace& space, double tol) {
  if (m.minCoeff() < -tol) return false;
  const Eigen::VectorXd& mu = space.weights();
  const Eigen::RowVectorXd mass = mu.transpose() * m;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (std::abs(mass[j] - mu[j]) > tol * mu[j]) return false;
  }
  return true;
}

Eigen::VectorXd dual_matrix_apply(const Eigen::MatrixXd& m, const StateSpace& space,
                                  const Eigen::VectorXd& phi) {
  const Eigen::VectorXd& mu = space.weights();
  Eigen::VectorXd weighted = mu.cwiseProduct(phi);
  return (m.transpose() * weighted).cwiseQuotient(mu);
}

}  // namespace

bool is_stochastic(const KernelOperator& t, double tol) {
  return stochastic_matrix(t.entries(), *t.space(), tol);
}

bool is_stochastic(const StructuredOperator& t, double tol) {
  return stochastic_matrix(t.dense(), *t.space(), tol);
}

DualVector dual_apply(const KernelOperator& t, const DualVector& phi) {
  require_same_space(t.space(), phi.space());
  return DualVector(t.space(), dual_matrix_apply(t.entries(), *t.space(), phi.values()));
}

DualVector dual_apply(const StructuredOperator& t, const DualVector& phi) {
  require_same_space(t.space(), phi.space());
  return DualVector(t.space(), dual_matrix_apply(t.dense(), *t.space(), phi.values()));
}

}  // namespace ergocert
