#include "ergocert/evolution.hpp"

#include <cmath>
#include <mutex>
#include <string>
#include <vector>

#include "ergocert/error.hpp"
#include "ergocert/kernels.hpp"

namespace ergocert {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// Uniformization rates above this are split into halves and squared back.
constexpr double kMaxDirectRate = 8.0;
constexpr double kSafety = 1.1;

// Poisson(a) probabilities p_0..p_K with sum_{k>K} p_k <= eps, followed by
// `extra` further terms.
std::vector<double> poisson_pmf(double a, double eps, int extra = 0) {
  std::vector<double> p;
  double pk = std::exp(-a);
  p.push_back(pk);
  for (std::size_t k = 0;; ++k) {
    const double kk = static_cast<double>(k);
    if (kk + 2.0 > a) {
      const double tail = pk * (a / (kk + 1.0)) / (1.0 - a / (kk + 2.0));
      if (tail <= eps) break;
    }
    pk *= a / (kk + 1.0);
    p.push_back(pk);
  }
  for (int e = 0; e < extra; ++e) {
    pk *= a / static_cast<double>(p.size());
    p.push_back(pk);
  }
  return p;
}

std::size_t grid_steps(const Model& model, double t) {
  if (!is_valid_time(model, t)) {
    throw ValidationError("time " + std::to_string(t) + " is not on the integer grid of a " +
                          std::string(kind_name(model)) + " model");
  }
  return static_cast<std::size_t>(std::llround(t));
}

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("time must be finite and nonnegative");
}

struct Uniformized {
  double q = 0.0;
  Eigen::MatrixXd step;  // I + Q/q
};

Uniformized uniformize(const Eigen::MatrixXd& rates) {
  const double qmax = rates.diagonal().cwiseAbs().maxCoeff();
  if (qmax == 0.0) return {};
  const double q = kSafety * qmax;
  const auto n = rates.rows();
  return {q, Eigen::MatrixXd::Identity(n, n) + rates / q};
}

int halvings(double a) {
  int s = 0;
  while (a > kMaxDirectRate) {
    a *= 0.5;
    ++s;
  }
  return s;
}

StructuredOperator ctmc_semigroup(const CtmcModel& m, double t, double eps) {
  if (t == 0.0) return StructuredOperator::identity(m.space);
  const Uniformized u = uniformize(m.rates);
  if (u.q == 0.0) return StructuredOperator::identity(m.space);
  const int s = halvings(u.q * t);
  const double a = std::ldexp(u.q * t, -s);
  const auto w = poisson_pmf(a, std::ldexp(eps, -s));
  const auto n = m.rates.rows();
  Eigen::MatrixXd e = kernels::poisson_series(u.step, w, Eigen::MatrixXd::Identity(n, n));
  for (int k = 0; k < s; ++k) e = (e * e).eval();
  return StructuredOperator(KernelOperator(m.space, std::move(e)));
}

StructuredOperator ctmc_cesaro(const CtmcModel& m, double t, double eps) {
  const Uniformized u = uniformize(m.rates);
  if (u.q == 0.0) return StructuredOperator::identity(m.space);
  const auto n = m.rates.rows();
  const int s = halvings(u.q * t);
  const double piece = std::ldexp(t, -s);
  const double a = u.q * piece;

  // Uniformized block [[P, I/q], [0, I]] of [[Q, I], [0, 0]]. The upper-right
  // block of its exponential is int_0^piece e^{sQ} ds; one extra Poisson term
  // bounds that block's truncation by eps.
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = u.step;
  block.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n) / u.q;
  block.bottomRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  const auto w = poisson_pmf(a, std::ldexp(eps, -s), 1);
  const Eigen::MatrixXd e = kernels::poisson_series(block, w, Eigen::MatrixXd::Identity(2 * n, 2 * n));

  Eigen::MatrixXd semigroup = e.topLeftCorner(n, n);
  Eigen::MatrixXd mean = e.topRightCorner(n, n) / piece;
  // exp(2tM) = exp(tM)^2 in block form: C_{2t} = (C_t + T_t C_t) / 2.
  for (int k = 0; k < s; ++k) {
    mean = (0.5 * (mean + semigroup * mean)).eval();
    semigroup = (semigroup * semigroup).eval();
  }
  return StructuredOperator(KernelOperator(m.space, std::move(mean)));
}

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& base, std::size_t k) {
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(base.rows(), base.cols());
  Eigen::MatrixXd b = base;
  while (k > 0) {
    if (k & 1U) result = (result * b).eval();
    k >>= 1U;
    if (k > 0) b = (b * b).eval();
  }
  return result;
}

StructuredOperator dtmc_semigroup(const DtmcModel& m, std::size_t k) {
  return StructuredOperator(KernelOperator(m.space, matrix_power(m.step.entries(), k)));
}

StructuredOperator dtmc_cesaro(const DtmcModel& m, std::size_t steps) {
  const auto n = idx(m.space->size());
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < steps; ++k) {
    sum += power;
    power = (m.step.entries() * power).eval();
  }
  return StructuredOperator(KernelOperator(m.space, sum / static_cast<double>(steps)));
}

// 1 (x) nu as a matrix: entries nu_i mu_j.
Eigen::MatrixXd jump_matrix(const PdmpModel& m) {
  return m.jump_target.values() * m.space->weights().transpose();
}

StructuredOperator pdmp_semigroup(const PdmpModel& m, std::size_t steps) {
  const std::size_t n = m.cells();
  const double x = m.jump_rate * static_cast<double>(steps);
  const double survive = std::exp(-x);
  const double jumped = -std::expm1(-x);
  SingularPart s{survive, std::vector<std::size_t>(n)};
  for (std::size_t j = 0; j < n; ++j) s.map[j] = (j + steps) % n;
  return StructuredOperator(std::move(s), KernelOperator(m.space, jumped * jump_matrix(m)));
}

// int_0^1 e^{-l u}(1 - u) du and int_0^1 e^{-l u} u du.
std::pair<double, double> interpolation_weights(double l) {
  if (l < 1e-4) {
    const double a = 0.5 - l / 6.0 + l * l / 24.0 - l * l * l / 120.0;
    const double b = 0.5 - l / 3.0 + l * l / 8.0 - l * l * l / 30.0;
    return {a, b};
  }
  const double e0 = -std::expm1(-l) / l;
  const double b = (-std::expm1(-l) - l * std::exp(-l)) / (l * l);
  return {e0 - b, b};
}

StructuredOperator pdmp_cesaro(const PdmpModel& m, std::size_t steps) {
  // Within [k, k+1) the transported cell indicator of cell j is split between
  // cells j+k and j+k+1 in proportions (1-u, u); jumped mass is already
  // stationary under transport.
  const std::size_t n = m.cells();
  const auto [a, b] = interpolation_weights(m.jump_rate);
  std::vector<double> coeff(n, 0.0);
  double shift_total = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double decay = std::exp(-m.jump_rate * static_cast<double>(k));
    coeff[k % n] += a * decay;
    coeff[(k + 1) % n] += b * decay;
    shift_total += (a + b) * decay;
  }
  const double total = static_cast<double>(steps);
  Eigen::MatrixXd c = (total - shift_total) * jump_matrix(m);
  for (std::size_t r = 0; r < n; ++r) {
    if (coeff[r] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) c(idx((j + r) % n), idx(j)) += coeff[r];
  }
  return StructuredOperator(KernelOperator(m.space, c / total));
}

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

}  // namespace

bool is_valid_time(const Model& model, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) return false;
  if (!is_grid_model(model)) return true;
  return std::abs(t - std::round(t)) <= 1e-12 * std::max(1.0, t);
}

StructuredOperator semigroup_at(const Model& model, double t, double eps) {
  require_time(t);
  return std::visit(overloaded{
                        [&](const CtmcModel& m) { return ctmc_semigroup(m, t, eps); },
                        [&](const DtmcModel& m) { return dtmc_semigroup(m, grid_steps(model, t)); },
                        [&](const PdmpModel& m) { return pdmp_semigroup(m, grid_steps(model, t)); },
                    },
                    model);
}

StructuredOperator cesaro_mean(const Model& model, double t, double eps) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("Cesaro mean needs t > 0");
  return std::visit(overloaded{
                        [&](const CtmcModel& m) { return ctmc_cesaro(m, t, eps); },
                        [&](const DtmcModel& m) { return dtmc_cesaro(m, grid_steps(model, t)); },
                        [&](const PdmpModel& m) { return pdmp_cesaro(m, grid_steps(model, t)); },
                    },
                    model);
}

StructuredOperator cesaro_trapezoid(const Model& model, double t, int substeps, double eps) {
  if (!has_rate_generator(model)) throw ValidationError("trapezoid Cesaro mean needs a rate matrix");
  if (!(t > 0.0) || substeps < 1) throw ValidationError("trapezoid Cesaro mean needs t > 0, substeps >= 1");
  const auto& space = space_of(model);
  const auto n = idx(space->size());
  const double h = t / substeps;
  const Eigen::MatrixXd step = semigroup_at(model, h, eps).dense();
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd sum = 0.5 * power;
  for (int k = 1; k < substeps; ++k) {
    power = (step * power).eval();
    sum += power;
  }
  power = (step * power).eval();
  sum += 0.5 * power;
  return StructuredOperator(KernelOperator(space, sum / substeps));
}

Split split(const StructuredOperator& t) {
  if (!t.singular()) {
    return {t.kernel(), StructuredOperator(KernelOperator::zero(t.space()))};
  }
  return {t.kernel(), StructuredOperator(*t.singular(), KernelOperator::zero(t.space()))};
}

StructuredOperator SemigroupEvaluator::at(double t) const {
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache_.find(t); it != cache_.end()) return it->second;
  }
  StructuredOperator value = semigroup_at(model_, t, eps_);
  std::unique_lock lock(mutex_);
  return cache_.try_emplace(t, std::move(value)).first->second;
}

std::size_t SemigroupEvaluator::cached() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

StructuredOperator CesaroEvaluator::at(double t) const {
  if (method_ == CesaroMethod::grid_average) return cesaro_trapezoid(model_, t, substeps_);
  return cesaro_mean(model_, t);
}

}  // namespace ergocert
