#include <doctest.h>

#include <cmath>

#include "ergocert/certify.hpp"
#include "ergocert/error.hpp"
#include "ergocert/lower_bounds.hpp"
#include "ergocert/spectral.hpp"

using namespace ergocert;

namespace {

Model two_state() {
  Eigen::MatrixXd q(2, 2);
  q << -1, 1, 1, -1;
  return build_ctmc(StateSpace::uniform(2), q);
}

std::vector<double> integers(int last) {
  std::vector<double> out;
  for (int k = 1; k <= last; ++k) out.push_back(k);
  return out;
}

std::vector<double> steps(double h, int count) {
  std::vector<double> out;
  for (int k = 1; k <= count; ++k) out.push_back(k * h);
  return out;
}

}  // namespace

TEST_CASE("meet with the limit projection") {
  Eigen::Matrix2d expect;
  expect << 0.5, 0.25, 0.25, 0.5;
  CHECK(meet_with_projection(two_state(), std::log(2.0) / 2).entries().isApprox(expect, 1e-13));
  for (double t : {1.0, 2.0, 5.0}) CHECK(meet_with_projection(build_rotation(4), t).is_zero());
  const auto j = meet_with_projection(build_pdmp(4, 1.0, Eigen::VectorXd::Constant(4, 1.0 / 4)), 1.0);
  CHECK(j.entries().isApprox(Eigen::MatrixXd::Constant(4, 4, (1 - std::exp(-1.0)) / 4), 1e-15));
}

TEST_CASE("squared compact construction") {
  const Model m = two_state();
  const double t0 = std::log(2.0) / 2;
  const auto j = meet_with_projection(m, t0);
  const auto g = KernelOperator::rank_one(stationary_density(m));
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const auto c = squared_compact_construction(m, j, g, grid, t0);
  CHECK(c.s == 0.0);
  CHECK_FALSE(c.square.is_zero());
  CHECK(c.domination_time == doctest::Approx(2 * t0));
  // The square is dominated by T at twice (s + t0).
  CHECK((semigroup_at(m, c.domination_time).dense() - c.square.entries()).minCoeff() >= -1e-15);

  const Model pdmp = build_pdmp(4, 1.0, Eigen::VectorXd::Constant(4, 1.0 / 4));
  const auto jp = meet_with_projection(pdmp, 1.0);
  const auto gp = KernelOperator::rank_one(stationary_density(pdmp));
  const auto cp = squared_compact_construction(pdmp, jp, gp, std::vector<double>{1.0, 2.0}, 1.0);
  CHECK(cp.s == 1.0);
  CHECK(cp.square.entries().minCoeff() > 0.0);

  const auto s3 = StateSpace::uniform(3);
  const auto zero = KernelOperator::zero(s3);
  CHECK_THROWS_AS(squared_compact_construction(build_rotation(3), zero, KernelOperator::rank_one(Density::constant(s3, 1.0 / 3)),
                                               std::vector<double>{1.0, 2.0}),
                  ValidationError);
}

TEST_CASE("proof chain on the transport model") {
  const Model m = build_pdmp(4, 1.0, Eigen::VectorXd::Constant(4, 1.0 / 4));
  const auto r = verify_proof_chain(m, 1.0, integers(40));
  CHECK(r.passed);
  CHECK(r.failing_step.empty());
  const double delta = 1 - std::exp(-1.0);
  CHECK(r.delta == doctest::Approx(delta).epsilon(1e-14));
  REQUIRE(r.t1);
  CHECK(r.cesaro_distance <= delta / 2);
  CHECK(r.remainder_projection_norm == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(r.remainder_cesaro_norm <= 1 - delta / 2 + 1e-10);
  CHECK(r.witnesses.size() == 4);
  for (const auto& w : r.witnesses) {
    CHECK(w.s >= *r.t1);
    CHECK(w.s <= 2 * *r.t1);
    CHECK(w.remainder_mass + w.kernel_mass == doctest::Approx(1.0).epsilon(1e-14));
  }
  REQUIRE(r.t2);
  CHECK(r.audit_start == doctest::Approx(2 * *r.t1 + *r.t2));
  CHECK(r.max_audit_deficiency <= 1e-8);
  CHECK(l1_norm(r.lower_bound) == doctest::Approx(delta / 2).epsilon(1e-14));
  REQUIRE(r.meet);
  REQUIRE(r.construction);
}

TEST_CASE("proof chain on the two-state chain") {
  const double t0 = std::log(2.0) / 2;
  const auto r = verify_proof_chain(two_state(), t0, steps(t0, 80));
  CHECK(r.passed);
  CHECK(r.delta == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(r.remainder_cesaro_norm == 0.0);
  CHECK(r.remainder_projection_norm == 0.0);
  REQUIRE(r.t1);
  CHECK(r.cesaro_distance <= 0.5);
}

TEST_CASE("proof chain stops at the kernel part for a rotation") {
  const auto r = verify_proof_chain(build_rotation(4), 1.0, integers(10));
  CHECK_FALSE(r.passed);
  CHECK(r.failing_step == "kernel-part");
  CHECK(r.delta == 0.0);
}

TEST_CASE("proof chain reports a grid that is too short") {
  const Model m = build_pdmp(8, 0.1, Eigen::VectorXd::Constant(8, 1.0 / 8));
  const auto r = verify_proof_chain(m, 1.0, integers(2));
  CHECK_FALSE(r.passed);
  CHECK(r.failing_step == "t1-search");
  CHECK(r.failing_margin < 0.0);
}

TEST_CASE("proof chain preconditions") {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(4, 4);
  q.block(0, 0, 2, 2) << -1, 1, 1, -1;
  q.block(2, 2, 2, 2) << -1, 1, 1, -1;
  CHECK_THROWS_AS(verify_proof_chain(build_ctmc(StateSpace::uniform(4), q), 1.0, integers(3)), ValidationError);
  CHECK_THROWS_AS(verify_proof_chain(build_rotation(3), 0.5, integers(3)), ValidationError);
}

TEST_CASE("property: propagated parts follow the semigroup exactly") {
  const Model m = build_pdmp(6, 0.9, Eigen::VectorXd::Constant(6, 1.0 / 6));
  const ProofDecomposition d(m, 2.0);
  for (double t : {2.0, 3.0, 5.0}) {
    for (double s : {0.0, 1.0, 4.0}) {
      const auto ts = semigroup_at(m, s);
      CHECK(op_norm(d.kernel_at(t) * ts - d.kernel_at(t + s)) <= 1e-12);
      CHECK(op_norm(d.remainder_at(t) * ts - d.remainder_at(t + s)) <= 1e-12);
    }
    for (std::size_t j = 0; j < 6; ++j) {
      const Density f = unit_mass_at(space_of(m), j);
      CHECK(l1_norm(d.kernel_at(t).apply(f)) + l1_norm(d.remainder_at(t).apply(f)) ==
            doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(d.kernel_at(1.0), ValidationError);
}

TEST_CASE("property: proof bound is weaker than the Doeblin bound") {
  // At every audited time the columns of T_t dominate (delta/2) g up to the
  // audited deficiency, so the column infimum has at least that mass minus n
  // times the deficiency.
  auto check = [](const Model& m, const ProofChainReport& r) {
    REQUIRE(r.passed);
    const double n = static_cast<double>(space_of(m)->size());
    CHECK(l1_norm(r.lower_bound) <= doeblin_mass(m, r.audit_start) + n * r.max_audit_deficiency + 1e-14);
  };
  for (double rate : {0.5, 1.0, 2.0}) {
    const Model m = build_pdmp(8, rate, Eigen::VectorXd::Constant(8, 1.0 / 8));
    check(m, verify_proof_chain(m, 1.0, integers(64)));
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Model m = random_irreducible_ctmc(2 + seed % 6, 0.5, seed);
    check(m, verify_proof_chain(m, 1.0, steps(1.0, 128)));
  }
}

TEST_CASE("property: passing chain and certificate go together") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Model m = random_irreducible_ctmc(2 + seed % 6, 0.5, 70 + seed);
    const auto grid = steps(0.5, 256);
    const auto r = verify_proof_chain(m, 0.5, grid);
    CAPTURE(seed);
    CAPTURE(r.failing_step);
    CHECK(r.passed);
    CHECK(std::holds_alternative<ConvergenceCertificate>(certify_uniform_convergence(m, 0.5, grid)));
  }
}
