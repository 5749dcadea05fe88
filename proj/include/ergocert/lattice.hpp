#pragma once

// Vector and operator lattices for a finite cell decomposition of (Omega, mu).
//
// Coordinates are densities with respect to mu: a vector f holds the value
// f_i on cell i, its L1 norm is sum_i mu_i |f_i|, and an operator with matrix
// t acts by (Tf)_i = sum_j t_ij f_j. Column j of t is therefore T applied to
// the indicator of cell j, and T is stochastic iff t >= 0 and
// sum_i mu_i t_ij = mu_j for every j.

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace ergocert {

inline constexpr double kDefaultTol = 1e-10;

class StateSpace;
using SpacePtr = std::shared_ptr<const StateSpace>;

class StateSpace {
 public:
  /// Throws ValidationError unless weights is non-empty and strictly positive.
  static SpacePtr create(std::vector<double> weights);
  static SpacePtr create(const Eigen::VectorXd& weights);
  static SpacePtr uniform(std::size_t n, double mass = 1.0);

  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  double weight(std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }
  double total_mass() const { return weights_.sum(); }

  bool same_as(const StateSpace& other) const;

 private:
  explicit StateSpace(Eigen::VectorXd weights) : weights_(std::move(weights)) {}

  Eigen::VectorXd weights_;
};

/// Throws ValidationError if the two spaces differ.
void require_same_space(const SpacePtr& a, const SpacePtr& b);

struct DensityTag {};
struct DualTag {};

/// Element of the discretized L1 (DensityTag) or L-infinity (DualTag).
template <class Tag>
class LatticeVector {
 public:
  LatticeVector(SpacePtr space, Eigen::VectorXd values);

  static LatticeVector zero(const SpacePtr& space) {
    return LatticeVector(space, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space->size())));
  }
  static LatticeVector constant(const SpacePtr& space, double value) {
    return LatticeVector(space,
                         Eigen::VectorXd::Constant(static_cast<Eigen::Index>(space->size()), value));
  }

  const SpacePtr& space() const noexcept { return space_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  bool is_positive(double tol = 0.0) const { return values_.size() == 0 || values_.minCoeff() >= -tol; }

  LatticeVector& operator+=(const LatticeVector& o);
  LatticeVector& operator-=(const LatticeVector& o);
  LatticeVector& operator*=(double s) {
    values_ *= s;
    return *this;
  }

 private:
  SpacePtr space_;
  Eigen::VectorXd values_;
};

using Density = LatticeVector<DensityTag>;
using DualVector = LatticeVector<DualTag>;

template <class Tag>
LatticeVector<Tag> operator+(LatticeVector<Tag> a, const LatticeVector<Tag>& b) {
  return a += b;
}
template <class Tag>
LatticeVector<Tag> operator-(LatticeVector<Tag> a, const LatticeVector<Tag>& b) {
  return a -= b;
}
template <class Tag>
LatticeVector<Tag> operator*(double s, LatticeVector<Tag> a) {
  return a *= s;
}

/// e_j / mu_j: the normalized indicator of cell j (an extreme point of the
/// positive unit sphere of L1).
Density unit_mass_at(const SpacePtr& space, std::size_t j);

double l1_norm(const Density& f);
/// <1, f> = sum_i mu_i f_i.
double total_mass(const Density& f);
Density pos_part(const Density& f);
Density neg_part(const Density& f);
Density lattice_sup(const Density& a, const Density& b);
Density lattice_inf(const Density& a, const Density& b);

double sup_norm(const DualVector& phi);
/// <phi, f> = sum_i mu_i phi_i f_i.
double pairing(const DualVector& phi, const Density& f);

/// Operator given by a matrix in density coordinates (possibly signed).
class KernelOperator {
 public:
  KernelOperator(SpacePtr space, Eigen::MatrixXd entries);

  static KernelOperator zero(const SpacePtr& space);
  static KernelOperator identity(const SpacePtr& space);
  /// 1 (x) g, i.e. f -> <1, f> g.
  static KernelOperator rank_one(const Density& g);

  const SpacePtr& space() const noexcept { return space_; }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return space_->size(); }

  bool is_positive(double tol = 0.0) const;
  bool is_zero(double tol = 0.0) const;

  Density apply(const Density& f) const;

 private:
  SpacePtr space_;
  Eigen::MatrixXd entries_;
};

KernelOperator operator+(const KernelOperator& a, const KernelOperator& b);
KernelOperator operator-(const KernelOperator& a, const KernelOperator& b);
KernelOperator operator*(const KernelOperator& a, const KernelOperator& b);
KernelOperator operator*(double s, const KernelOperator& a);

/// Weighted cell permutation w * S_sigma with (S_sigma f)_{sigma(j)} = f_j.
/// This is the non-integral ("singular") share of a structured operator.
struct SingularPart {
  double weight = 0.0;
  std::vector<std::size_t> map;

  Eigen::MatrixXd dense() const;
};

/// T = w * S_sigma + kernel. The singular part emulates the non-integral
/// component of a partially integral operator.
class StructuredOperator {
 public:
  explicit StructuredOperator(KernelOperator kernel);
  StructuredOperator(SingularPart singular, KernelOperator kernel);

  /// Identity stored as a kernel (the convention for rate-matrix models).
  static StructuredOperator identity(const SpacePtr& space);

  const SpacePtr& space() const noexcept { return kernel_.space(); }
  std::size_t size() const noexcept { return kernel_.size(); }
  const std::optional<SingularPart>& singular() const noexcept { return singular_; }
  const KernelOperator& kernel() const noexcept { return kernel_; }

  /// Singular part as a matrix (zero if absent).
  Eigen::MatrixXd singular_dense() const;
  /// Full matrix including the singular part.
  Eigen::MatrixXd dense() const;

  bool is_positive(double tol = 0.0) const;
  Density apply(const Density& f) const;

 private:
  std::optional<SingularPart> singular_;
  KernelOperator kernel_;
};

/// Composition: singular * singular stays singular, every other product
/// lands in the kernel part.
StructuredOperator operator*(const StructuredOperator& a, const StructuredOperator& b);
/// Signed difference of the full matrices.
KernelOperator operator-(const StructuredOperator& a, const StructuredOperator& b);
StructuredOperator scaled(const StructuredOperator& a, double s);

/// Exact L(L1_mu) norm: max_j sum_i mu_i |t_ij| / mu_j.
double op_norm(const KernelOperator& t);
double op_norm(const StructuredOperator& t);
double op_norm(const Eigen::MatrixXd& t, const StateSpace& space);

/// Lattice infimum of positive operators (entrywise minimum).
/// Throws ValidationError on non-positive input.
KernelOperator op_meet(const KernelOperator& a, const KernelOperator& b);
/// Band-respecting meet: kernel parts meet entrywise, singular parts meet only
/// when they share the same map, and kernel/singular cross terms are disjoint.
StructuredOperator op_meet(const StructuredOperator& a, const StructuredOperator& b);

bool is_stochastic(const KernelOperator& t, double tol = kDefaultTol);
bool is_stochastic(const StructuredOperator& t, double tol = kDefaultTol);

/// T' phi with (T' phi)_j = sum_i mu_i t_ij phi_i / mu_j, so that
/// <T' phi, f> = <phi, T f>.
DualVector dual_apply(const KernelOperator& t, const DualVector& phi);
DualVector dual_apply(const StructuredOperator& t, const DualVector& phi);

}  // namespace ergocert
