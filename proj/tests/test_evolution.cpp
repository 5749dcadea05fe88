#include <doctest.h>

#include <cmath>
#include <thread>

#include "ergocert/error.hpp"
#include "ergocert/evolution.hpp"
#include "ergocert/spectral.hpp"
#include "oracles.hpp"

using namespace ergocert;

namespace {

Model two_state() {
  Eigen::MatrixXd q(2, 2);
  q << -1, 1, 1, -1;
  return build_ctmc(StateSpace::uniform(2), q);
}

double dist(const StructuredOperator& a, const Eigen::MatrixXd& b) {
  return op_norm(KernelOperator(a.space(), a.dense() - b));
}

}  // namespace

TEST_CASE("two-state semigroup at ln2/2") {
  const double t = std::log(2.0) / 2;
  const auto tt = semigroup_at(two_state(), t);
  Eigen::Matrix2d expect;
  expect << 0.75, 0.25, 0.25, 0.75;
  CHECK(dist(tt, expect) <= 1e-13);
  CHECK_FALSE(tt.singular());
}

TEST_CASE("time zero is the identity for every kind") {
  for (const Model& m : {two_state(), Model(cyclic_dtmc(3)), Model(build_pdmp(4, 1.0, Eigen::VectorXd::Constant(4, 1.0 / 4)))}) {
    const auto n = static_cast<Eigen::Index>(space_of(m)->size());
    CHECK(semigroup_at(m, 0.0).dense() == Eigen::MatrixXd::Identity(n, n));
  }
}

TEST_CASE("zero rate matrix gives the identity") {
  const Model m = build_ctmc(StateSpace::uniform(3), Eigen::MatrixXd::Zero(3, 3));
  CHECK(semigroup_at(m, 5.0).dense() == Eigen::MatrixXd::Identity(3, 3));
  CHECK(cesaro_mean(m, 5.0).dense().isApprox(Eigen::MatrixXd::Identity(3, 3), 1e-15));
}

TEST_CASE("transport model closed form at t = 1") {
  const Model m = build_pdmp(4, 1.0, Eigen::VectorXd::Constant(4, 1.0 / 4));
  const auto t1 = semigroup_at(m, 1.0);
  REQUIRE(t1.singular());
  CHECK(t1.singular()->weight == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(t1.singular()->map == std::vector<std::size_t>{1, 2, 3, 0});
  CHECK(t1.kernel().entries().isApprox(Eigen::MatrixXd::Constant(4, 4, (1 - std::exp(-1.0)) / 4), 1e-15));
  const auto [k, r] = split(t1);
  CHECK(k.entries() == t1.kernel().entries());
  REQUIRE(r.singular());
  CHECK(r.singular()->weight == t1.singular()->weight);
  CHECK(r.kernel().is_zero());
}

TEST_CASE("time validation") {
  const Model pdmp = build_pdmp(4, 1.0, Eigen::VectorXd::Constant(4, 1.0 / 4));
  CHECK_THROWS_AS(semigroup_at(pdmp, 0.5), ValidationError);
  CHECK_THROWS_AS(semigroup_at(two_state(), -1.0), ValidationError);
  CHECK_THROWS_AS(semigroup_at(cyclic_dtmc(3), 1.5), ValidationError);
  CHECK_THROWS_AS(cesaro_mean(two_state(), 0.0), ValidationError);
  CHECK_THROWS_AS(cesaro_mean(pdmp, 2.5), ValidationError);
  CHECK(is_valid_time(pdmp, 3.0));
  CHECK_FALSE(is_valid_time(pdmp, 3.1));
  CHECK(is_valid_time(two_state(), 3.1));
}

TEST_CASE("split conventions") {
  const auto ct = semigroup_at(two_state(), 0.7);
  const auto [k, r] = split(ct);
  CHECK(k.entries() == ct.dense());
  CHECK(r.dense().isZero());
  const auto rot = semigroup_at(build_rotation(5), 3.0);
  const auto [k0, r0] = split(rot);
  CHECK(k0.is_zero());
  CHECK(r0.dense() == rot.dense());
}

TEST_CASE("property: uniformization matches the eigendecomposition oracle") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const int n = 2 + static_cast<int>(seed % 11);
    const auto m = random_irreducible_ctmc(static_cast<std::size_t>(n), 0.4, seed);
    for (double t : {0.05, 0.7, 3.0, 11.0, 20.0}) {
      CAPTURE(seed);
      CAPTURE(t);
      CHECK(dist(semigroup_at(m, t), oracle::expm_eig(m.rates, t)) <= 1e-9);
    }
  }
}

TEST_CASE("property: semigroup law on every model kind") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Model m = random_irreducible_ctmc(2 + seed % 8, 0.3, seed);
    for (auto [t, s] : {std::pair{0.3, 0.9}, {1.7, 2.2}, {5.0, 0.25}}) {
      const auto lhs = semigroup_at(m, t + s);
      const auto rhs = semigroup_at(m, t) * semigroup_at(m, s);
      CHECK(op_norm(lhs - rhs) <= 1e-9);
    }
  }
  const Model pdmp = build_pdmp(5, 0.6, Eigen::VectorXd::Constant(5, 1.0 / 5));
  const Model dtmc = cyclic_dtmc(4);
  for (const Model& m : {pdmp, dtmc}) {
    for (double t : {0.0, 1.0, 3.0})
      for (double s : {1.0, 2.0, 7.0}) CHECK(op_norm(semigroup_at(m, t + s) - semigroup_at(m, t) * semigroup_at(m, s)) <= 1e-12);
  }
}

TEST_CASE("property: splitting commutes with the semigroup on transport models") {
  const Model m = build_pdmp(6, 0.8, Eigen::VectorXd::Constant(6, 1.0 / 6));
  for (double t : {1.0, 2.0, 4.0}) {
    for (double s : {0.0, 1.0, 3.0}) {
      const auto whole = split(semigroup_at(m, t + s));
      const auto composed = split(semigroup_at(m, t) * semigroup_at(m, s));
      CHECK((whole.kernel - composed.kernel).entries().cwiseAbs().maxCoeff() <= 1e-14);
      CHECK(op_norm(whole.remainder - composed.remainder) <= 1e-14);
      REQUIRE(whole.remainder.singular());
      CHECK(whole.remainder.singular()->weight == doctest::Approx(std::exp(-0.8 * (t + s))).epsilon(1e-14));
    }
  }
}

TEST_CASE("cyclic chain Cesaro mean over one period is the uniform average") {
  const auto c3 = cesaro_mean(cyclic_dtmc(3), 3.0);
  CHECK(c3.dense() == Eigen::MatrixXd::Constant(3, 3, 1.0 / 3));
  CHECK_FALSE(c3.singular());
}

TEST_CASE("property: Cesaro block method matches corrected trapezoid quadrature") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const int n = 2 + static_cast<int>(seed % 11);
    const auto m = random_irreducible_ctmc(static_cast<std::size_t>(n), 0.4, 100 + seed);
    for (double t : {0.5, 2.0, 9.0}) {
      CAPTURE(seed);
      CHECK(dist(cesaro_mean(m, t), oracle::cesaro_trapezoid(m.rates, t, 1024)) <= 1e-6);
    }
  }
}

TEST_CASE("library quadrature Cesaro agrees with the block method") {
  const auto m = random_irreducible_ctmc(4, 0.5, 3);
  CHECK(op_norm(cesaro_trapezoid(m, 2.0, 1024) - cesaro_mean(m, 2.0)) <= 1e-4);
  CesaroEvaluator quad(m, CesaroMethod::grid_average, 2048);
  CesaroEvaluator closed(m);
  CHECK(op_norm(quad.at(1.0) - closed.at(1.0)) <= 1e-5);
}

TEST_CASE("two-state Cesaro distance decays like 1/t") {
  const Model m = two_state();
  const StructuredOperator p(KernelOperator::rank_one(Density::constant(space_of(m), 0.5)));
  for (double t : {1.0, 4.0, 16.0, 64.0}) {
    // C_t - P = ((1 - e^{-2t}) / (2t)) (I - P), and ||I - P|| = 1.
    const double expect = (1 - std::exp(-2 * t)) / (2 * t);
    CHECK(op_norm(cesaro_mean(m, t) - p) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("transport Cesaro mean") {
  for (std::size_t n : {3, 4, 8}) {
    for (double rate : {0.0, 0.5, 2.0}) {
      const Model m = build_pdmp(n, rate, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
      for (double t : {1.0, 2.0, 5.0, 16.0}) {
        const auto c = cesaro_mean(m, t);
        CHECK_FALSE(c.singular());
        CHECK(is_stochastic(c, 1e-12));
      }
      const StructuredOperator p(KernelOperator::rank_one(Density::constant(space_of(m), 1.0 / static_cast<double>(n))));
      // One full cycle averages the transport to the uniform operator.
      if (rate == 0.0) CHECK(op_norm(cesaro_mean(m, static_cast<double>(n)) - p) <= 1e-14);
    }
  }
}

TEST_CASE("Cesaro results are stochastic") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const Model m = random_irreducible_ctmc(2 + seed % 10, 0.3, seed);
    for (double t : {0.1, 1.0, 30.0, 500.0}) CHECK(is_stochastic(cesaro_mean(m, t), 1e-9));
  }
  for (double t : {1.0, 2.0, 5.0}) CHECK(is_stochastic(cesaro_mean(cyclic_dtmc(5), t), 1e-12));
}

TEST_CASE("evaluator cache is shared safely") {
  const auto m = random_irreducible_ctmc(6, 0.4, 2);
  SemigroupEvaluator ev(m);
  std::vector<std::thread> threads;
  std::vector<double> norms(8);
  for (int k = 0; k < 8; ++k) {
    threads.emplace_back([&, k] {
      for (int rep = 0; rep < 10; ++rep) norms[static_cast<std::size_t>(k)] = op_norm(ev.at(0.5 * (rep % 4 + 1)));
    });
  }
  for (auto& th : threads) th.join();
  CHECK(ev.cached() == 4);
  for (double x : norms) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(is_stochastic(ev.at(2.0), 10 * kDefaultTruncation + 1e-12));
}
