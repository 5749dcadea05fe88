#pragma once

// Column-parallel numeric kernels.
//
// Every kernel exists twice with the same signature: `serial` is the plain
// reference loop, `omp` distributes independent columns (or rows) over an
// OpenMP team. No kernel reduces across threads, so both variants produce
// bit-identical results. The library calls the unqualified names, which
// resolve to the OpenMP variants.

#include <span>

#include <Eigen/Dense>

namespace ergocert::kernels {

/// Problems smaller than this run on one thread even in the omp variants.
inline constexpr Eigen::Index kParallelThreshold = 48;

namespace serial {

/// out_j = sum_i mu_i |m_ij| / mu_j.
Eigen::VectorXd column_norms(const Eigen::MatrixXd& m, const Eigen::VectorXd& mu);
/// out_i = min_j m_ij / mu_j.
Eigen::VectorXd column_infimum(const Eigen::MatrixXd& m, const Eigen::VectorXd& mu);
/// out_j = || (m e_j / mu_j - h)^- ||_1.
Eigen::VectorXd column_deficiency(const Eigen::MatrixXd& m, const Eigen::VectorXd& mu,
                                  const Eigen::VectorXd& h);
Eigen::MatrixXd entrywise_min(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
/// sum_k weights[k] * step^k * start, evaluated one column of `start` at a time.
Eigen::MatrixXd poisson_series(const Eigen::MatrixXd& step, std::span<const double> weights,
                               const Eigen::MatrixXd& start);

}  // namespace serial

namespace omp {

Eigen::VectorXd column_norms(const Eigen::MatrixXd& m, const Eigen::VectorXd& mu);
Eigen::VectorXd column_infimum(const Eigen::MatrixXd& m, const Eigen::VectorXd& mu);
Eigen::VectorXd column_deficiency(const Eigen::MatrixXd& m, const Eigen::VectorXd& mu,
                                  const Eigen::VectorXd& h);
Eigen::MatrixXd entrywise_min(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
Eigen::MatrixXd poisson_series(const Eigen::MatrixXd& step, std::span<const double> weights,
                               const Eigen::MatrixXd& start);

}  // namespace omp

using omp::column_deficiency;
using omp::column_infimum;
using omp::column_norms;
using omp::entrywise_min;
using omp::poisson_series;

}  // namespace ergocert::kernels
