#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "svl/errors.hpp"
#include "svl/problem.hpp"
#include "test_helpers.hpp"

using namespace svl;

namespace {

QuadraticComponent scalar_component(double a, double b) {
  return {Eigen::MatrixXd::Constant(1, 1, a), Eigen::VectorXd::Constant(1, b)};
}

}  // namespace

TEST_CASE("assemble: two-component scalar instance by hand") {
  auto p = assemble({scalar_component(2, 1), scalar_component(4, -1)});
  CHECK(p.mean_hessian(0, 0) == doctest::Approx(3.0));
  CHECK(p.mean_linear[0] == doctest::Approx(0.0));
  CHECK(p.minimizer[0] == doctest::Approx(0.0));
  CHECK(p.noise_vectors[0][0] == doctest::Approx(1.0));
  CHECK(p.noise_vectors[1][0] == doctest::Approx(-1.0));
  CHECK(p.noise_covariance(0, 0) == doctest::Approx(1.0));
  CHECK(p.eigenvalues[0] == doctest::Approx(3.0));
  CHECK(p.mode_powers[0] == doctest::Approx(1.0));
}

TEST_CASE("assemble: zero linear parts give a noiseless problem") {
  auto p = assemble({{Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)},
                     {2 * Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)}});
  CHECK(p.minimizer.norm() == 0.0);
  CHECK(p.noise_covariance.norm() == 0.0);
  for (const auto& y : p.noise_vectors) CHECK(y.norm() == 0.0);
}

TEST_CASE("assemble: noise vectors always sum to zero") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    auto p = test::random_instance(7, 3, seed);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(3);
    double max_norm = 0.0;
    for (const auto& y : p.noise_vectors) {
      sum += y;
      max_norm = std::max(max_norm, y.norm());
    }
    CHECK(sum.norm() <= 1e-9 * max_norm * p.n());
  }
}

TEST_CASE("assemble: derived-field identities on a random instance") {
  auto p = test::random_instance(9, 4, 17);
  CounterRng rng(99);
  Eigen::VectorXd x(4);
  for (int i = 0; i < 4; ++i) x[i] = rng.next_gaussian();

  // gradient identity: A x + b equals the component average
  Eigen::VectorXd mean_grad = Eigen::VectorXd::Zero(4);
  for (int i = 0; i < p.n(); ++i) mean_grad += component_gradient(p, i, x);
  mean_grad /= p.n();
  CHECK((gradient(p, x) - mean_grad).norm() <= 1e-10 * mean_grad.norm());

  // zero-th order identity: g_i(x) - (A_i - A)(x - x*)
  for (int i = 0; i < p.n(); ++i) {
    const Eigen::VectorXd expected =
        component_gradient(p, i, x) -
        (p.components[i].hessian_part - p.mean_hessian) * (x - p.minimizer);
    const Eigen::VectorXd got = zero_order_gradient(p, i, x);
    CHECK((got - expected).norm() <= 1e-10 * expected.norm());
  }

  // minimizer residual and eigensystem sanity
  CHECK((p.mean_hessian * p.minimizer + p.mean_linear).norm() <=
        1e-10 * p.mean_linear.norm());
  CHECK((p.eigenvectors.transpose() * p.eigenvectors - Eigen::MatrixXd::Identity(4, 4))
            .cwiseAbs()
            .maxCoeff() <= 1e-10);
  CHECK(p.mode_powers.minCoeff() >= -1e-12);
  CHECK(test::rel_err(p.mode_powers.sum(), p.noise_covariance.trace()) <= 1e-10);
  for (int i = 1; i < 4; ++i) CHECK(p.eigenvalues[i] >= p.eigenvalues[i - 1]);
}

TEST_CASE("assemble: rejects asymmetric and singular inputs") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 1e-6, 0.0, 1.0;
  CHECK_THROWS_AS(assemble({{bad, Eigen::VectorXd::Zero(2)}}), std::invalid_argument);

  Eigen::MatrixXd rank1 = Eigen::MatrixXd::Zero(2, 2);
  rank1(0, 0) = 1.0;
  CHECK_THROWS_AS(assemble({{rank1, Eigen::VectorXd::Zero(2)}}), NotPositiveDefiniteError);

  Eigen::MatrixXd other(1, 1);
  other << 1.0;
  CHECK_THROWS_AS(assemble({{rank1, Eigen::VectorXd::Zero(2)}, {other, Eigen::VectorXd::Zero(1)}}),
                  std::invalid_argument);
}

TEST_CASE("build_regression_instance: shape, determinism and spectra") {
  CHECK_THROWS_AS(build_regression_instance(1, 3, 0.1, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_regression_instance(10, 0, 0.1, 0), std::invalid_argument);

  auto a = build_regression_instance(50, 3, 0.1, 7);
  auto b = build_regression_instance(50, 3, 0.1, 7);
  REQUIRE(a.size() == 50);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].hessian_part == b[i].hessian_part);
    CHECK(a[i].linear_part == b[i].linear_part);
  }

  // Large n: Wishart mean concentrates, eigenvalues cluster near 0.2 with the
  // 1/(2n) loss convention.
  auto big = assemble(build_regression_instance(1000, 5, 0.1, 38));
  for (int i = 0; i < 5; ++i) {
    CHECK(big.eigenvalues[i] > 0.1);
    CHECK(big.eigenvalues[i] < 0.35);
  }
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(5);
  e1[0] = 1.0;
  CHECK((big.minimizer - e1).norm() < 0.05);

  // Small n: dispersed spectrum.
  auto small = assemble(build_regression_instance(10, 5, 0.1, 38));
  CHECK(small.eigenvalues[4] / small.eigenvalues[0] > 3.0);
}

TEST_CASE("assemble: degenerate one-dimensional pair with identical features") {
  // Two components sharing the same feature value, zero label noise.
  const double z = 0.8;
  auto components = std::vector<QuadraticComponent>{
      {Eigen::MatrixXd::Constant(1, 1, z * z), Eigen::VectorXd::Constant(1, -z * z)},
      {Eigen::MatrixXd::Constant(1, 1, z * z), Eigen::VectorXd::Constant(1, -z * z)}};
  auto p = assemble(components);
  CHECK(p.mean_hessian(0, 0) == doctest::Approx(z * z));
  CHECK(p.minimizer[0] == doctest::Approx(1.0));  // target z per unit feature
  CHECK(p.noise_covariance(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("build_spectrum_instance: reproduces the requested spectrum exactly") {
  auto p = test::clustered_spectrum_instance();
  const Eigen::VectorXd lam_ref{{0.1807, 0.1951, 0.1998, 0.2033, 0.2194}};
  const Eigen::VectorXd pow_ref{{0.0019, 0.0019, 0.0022, 0.0020, 0.0022}};
  const SpectrumSpec round_trip = extract_spectrum(p);
  CHECK((round_trip.eigenvalues - lam_ref).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((round_trip.mode_powers - pow_ref).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(p.minimizer.norm() <= 1e-12);

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(5);
  for (const auto& y : p.noise_vectors) sum += y;
  CHECK(sum.norm() <= 1e-9);
}

TEST_CASE("build_spectrum_instance: edge cases") {
  SpectrumSpec zero{Eigen::VectorXd::Constant(2, 1.0), Eigen::VectorXd::Zero(2)};
  auto p = build_spectrum_instance(zero, 5, 3);
  for (const auto& y : p.noise_vectors) CHECK(y.norm() == 0.0);

  SpectrumSpec one{Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 1.0)};
  auto q = build_spectrum_instance(one, 2, 4);
  CHECK(q.noise_vectors[0][0] == doctest::Approx(-q.noise_vectors[1][0]));
  CHECK(std::abs(q.noise_vectors[0][0]) == doctest::Approx(1.0));

  CHECK_THROWS_AS(build_spectrum_instance(one, 1, 0), std::invalid_argument);
  SpectrumSpec wide{Eigen::VectorXd::Constant(3, 1.0), Eigen::VectorXd::Constant(3, 1.0)};
  CHECK_THROWS_AS(build_spectrum_instance(wide, 3, 0), std::invalid_argument);
}

TEST_CASE("problem json round trip") {
  auto p = test::random_instance(6, 2, 5);
  const std::string text = problem_to_json(p);
  auto q = problem_from_json(text);
  REQUIRE(q.n() == p.n());
  REQUIRE(q.d() == p.d());
  for (int i = 0; i < p.n(); ++i) {
    CHECK((q.components[i].hessian_part - p.components[i].hessian_part).norm() == 0.0);
    CHECK((q.components[i].linear_part - p.components[i].linear_part).norm() == 0.0);
  }
  CHECK((q.eigenvalues - p.eigenvalues).norm() <= 1e-14);
  CHECK((q.minimizer - p.minimizer).norm() <= 1e-14);

  const std::string path = "/tmp/svl_test_problem.json";
  save_problem(p, path);
  auto r = load_problem(path);
  CHECK(r.n() == p.n());
  CHECK((r.eigenvalues - p.eigenvalues).norm() <= 1e-14);
  std::remove(path.c_str());
}
