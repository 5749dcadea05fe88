#include "ergocert/kernels.hpp"

#include <algorithm>
#include <limits>

namespace ergocert::kernels {

namespace {

double column_norm(const Eigen::MatrixXd& m, const Eigen::VectorXd& mu, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) s += mu[i] * std::abs(m(i, j));
  return s / mu[j];
}

double row_infimum(const Eigen::MatrixXd& m, const Eigen::VectorXd& mu, Eigen::Index i) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < m.cols(); ++j) best = std::min(best, m(i, j) / mu[j]);
  return best;
}

double deficiency_of_column(const Eigen::MatrixXd& m, const Eigen::VectorXd& mu,
                            const Eigen::VectorXd& h, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double d = h[i] - m(i, j) / mu[j];
    if (d > 0.0) s += mu[i] * d;
  }
  return s;
}

void series_column(const Eigen::MatrixXd& step, std::span<const double> weights,
                   const Eigen::MatrixXd& start, Eigen::MatrixXd& out, Eigen::Index j) {
  Eigen::VectorXd v = start.col(j);
  Eigen::VectorXd acc = weights.empty() ? Eigen::VectorXd::Zero(v.size()) : Eigen::VectorXd(weights[0] * v);
  Eigen::VectorXd next(v.size());
  for (std::size_t k = 1; k < weights.size(); ++k) {
    next.noalias() = step * v;
    v.swap(next);
    acc.noalias() += weights[k] * v;
  }
  out.col(j) = acc;
}

}  // namespace

namespace serial {

Eigen::VectorXd column_norms(const Eigen::MatrixXd& m, const Eigen::VectorXd& mu) {
  Eigen::VectorXd out(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) out[j] = column_norm(m, mu, j);
  return out;
}

Eigen::VectorXd column_infimum(const Eigen::MatrixXd& m, const Eigen::VectorXd& mu) {
  Eigen::VectorXd out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[i] = row_infimum(m, mu, i);
  return out;
}

Eigen::VectorXd column_deficiency(const Eigen::MatrixXd& m, const Eigen::VectorXd& mu,
                                  const Eigen::VectorXd& h) {
  Eigen::VectorXd out(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) out[j] = deficiency_of_column(m, mu, h, j);
  return out;
}

Eigen::MatrixXd entrywise_min(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = std::min(a(i, j), b(i, j));
  return out;
}

Eigen::MatrixXd poisson_series(const Eigen::MatrixXd& step, std::span<const double> weights,
                               const Eigen::MatrixXd& start) {
  Eigen::MatrixXd out(start.rows(), start.cols());
  for (Eigen::Index j = 0; j < start.cols(); ++j) series_column(step, weights, start, out, j);
  return out;
}

}  // namespace serial

namespace omp {

Eigen::VectorXd column_norms(const Eigen::MatrixXd& m, const Eigen::VectorXd& mu) {
  const Eigen::Index n = m.cols();
  Eigen::VectorXd out(n);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (Eigen::Index j = 0; j < n; ++j) out[j] = column_norm(m, mu, j);
  return out;
}

Eigen::VectorXd column_infimum(const Eigen::MatrixXd& m, const Eigen::VectorXd& mu) {
  const Eigen::Index n = m.rows();
  Eigen::VectorXd out(n);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (Eigen::Index i = 0; i < n; ++i) out[i] = row_infimum(m, mu, i);
  return out;
}

Eigen::VectorXd column_deficiency(const Eigen::MatrixXd& m, const Eigen::VectorXd& mu,
                                  const Eigen::VectorXd& h) {
  const Eigen::Index n = m.cols();
  Eigen::VectorXd out(n);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (Eigen::Index j = 0; j < n; ++j) out[j] = deficiency_of_column(m, mu, h, j);
  return out;
}

Eigen::MatrixXd entrywise_min(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index n = a.cols();
  Eigen::MatrixXd out(a.rows(), n);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = std::min(a(i, j), b(i, j));
  return out;
}

Eigen::MatrixXd poisson_series(const Eigen::MatrixXd& step, std::span<const double> weights,
                               const Eigen::MatrixXd& start) {
  const Eigen::Index n = start.cols();
  Eigen::MatrixXd out(start.rows(), n);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (Eigen::Index j = 0; j < n; ++j) series_column(step, weights, start, out, j);
  return out;
}

}  // namespace omp

}  // namespace ergocert::kernels
