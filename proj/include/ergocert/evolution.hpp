#pragma once

#include <map>
#include <shared_mutex>

#include "ergocert/lattice.hpp"
#include "ergocert/models.hpp"

namespace ergocert {

inline constexpr double kDefaultTruncation = 1e-14;

/// True if t is admissible for the model (t >= 0, and integer for grid models).
bool is_valid_time(const Model& model, double t);

/// T_t.
///  * rate matrices: uniformization e^{-qt} sum_k (qt)^k/k! P^k with
///    q = 1.1 max_j |q_jj| and P = I + Q/q, cut when the Poisson tail is below
///    `eps`; long times are split into 2^s pieces that are squared back;
///  * transport models: exact closed form with a singular shift part;
///  * discrete time: integer power by repeated squaring.
/// Throws ValidationError for negative or (grid models) non-integer t.
StructuredOperator semigroup_at(const Model& model, double t, double eps = kDefaultTruncation);

/// C_t = (1/t) int_0^t T_s ds.
///  * rate matrices: upper-right block of exp(t [[Q, I], [0, 0]]), evaluated by
///    uniformization of the block matrix and block squaring;
///  * transport models: exact integral of the cell-averaged transport, whose
///    shift weights are geometric sums over the cycle;
///  * discrete time: (1/m) sum_{k<m} T^k.
/// The result carries no singular part. Throws ValidationError for t <= 0.
StructuredOperator cesaro_mean(const Model& model, double t, double eps = kDefaultTruncation);

/// Cesaro mean by trapezoid quadrature over `substeps` uniform substeps of
/// semigroup evaluations (rate-matrix models only).
StructuredOperator cesaro_trapezoid(const Model& model, double t, int substeps,
                                    double eps = kDefaultTruncation);

struct Split {
  KernelOperator kernel;
  StructuredOperator remainder;
};

/// T = K + R with K the kernel part and R the singular part (R = 0 when T
/// has no singular part).
Split split(const StructuredOperator& t);

/// Caches T_t by exact time value. Reads take a shared lock and insertion an
/// exclusive one, so one evaluator may be shared across threads.
class SemigroupEvaluator {
 public:
  explicit SemigroupEvaluator(Model model, double eps = kDefaultTruncation)
      : model_(std::move(model)), eps_(eps) {}

  const Model& model() const noexcept { return model_; }
  double truncation() const noexcept { return eps_; }

  StructuredOperator at(double t) const;
  std::size_t cached() const;

 private:
  Model model_;
  double eps_;
  mutable std::shared_mutex mutex_;
  mutable std::map<double, StructuredOperator> cache_;
};

enum class CesaroMethod { closed_form, grid_average };

class CesaroEvaluator {
 public:
  explicit CesaroEvaluator(Model model, CesaroMethod method = CesaroMethod::closed_form,
                           int substeps = 1024)
      : model_(std::move(model)), method_(method), substeps_(substeps) {}

  CesaroMethod method() const noexcept { return method_; }
  StructuredOperator at(double t) const;

 private:
  Model model_;
  CesaroMethod method_;
  int substeps_;
};

}  // namespace ergocert
