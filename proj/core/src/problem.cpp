#include "svl/problem.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "svl/errors.hpp"
#include "svl/rng.hpp"

namespace svl {

std::vector<QuadraticComponent> build_regression_instance(int n, int d,
                                                          double label_noise_std,
                                                          std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("build_regression_instance: n must be >= 2");
  if (d < 1) throw std::invalid_argument("build_regression_instance: d must be >= 1");
  if (label_noise_std < 0)
    throw std::invalid_argument("build_regression_instance: label_noise_std must be >= 0");

  CounterRng rng(seed);
  // Features normalized to unit expected length; this is the scaling that
  // puts the mean-Hessian eigenvalues near 1/d for large n.
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<QuadraticComponent> components;
  components.reserve(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd z(d);
    for (int j = 0; j < d; ++j) z[j] = scale * rng.next_gaussian();
    const double target = z[0] + label_noise_std * rng.next_gaussian();
    components.push_back({z * z.transpose(), -target * z});
  }
  return components;
}

namespace {

void check_component(const QuadraticComponent& c, int d) {
  if (c.hessian_part.rows() != d || c.hessian_part.cols() != d ||
      c.linear_part.size() != d)
    throw std::invalid_argument("assemble: components disagree on dimension");
  const double asym = (c.hessian_part - c.hessian_part.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12)
    throw std::invalid_argument("assemble: hessian_part is not symmetric (max deviation " +
                                std::to_string(asym) + ")");
}

// Deterministic eigenvector orientation: first coordinate of meaningful
// magnitude is made positive.
void normalize_eigenvector_signs(Eigen::MatrixXd& U) {
  for (Eigen::Index j = 0; j < U.cols(); ++j) {
    const double scale = U.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
      if (std::abs(U(i, j)) > 1e-12 * scale) {
        if (U(i, j) < 0) U.col(j) = -U.col(j);
        break;
      }
    }
  }
}

}  // namespace

QuadraticProblem assemble(std::vector<QuadraticComponent> components) {
  if (components.empty()) throw std::invalid_argument("assemble: no components");
  const int n = static_cast<int>(components.size());
  const int d = static_cast<int>(components.front().hessian_part.rows());
  for (const auto& c : components) check_component(c, d);

  QuadraticProblem p;
  p.mean_hessian = Eigen::MatrixXd::Zero(d, d);
  p.mean_linear = Eigen::VectorXd::Zero(d);
  for (const auto& c : components) {
    p.mean_hessian += c.hessian_part;
    p.mean_linear += c.linear_part;
  }
  p.mean_hessian /= n;
  p.mean_linear /= n;
  // Exact symmetrization keeps the solver and eigendecomposition honest.
  p.mean_hessian = ((p.mean_hessian + p.mean_hessian.transpose()) / 2).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p.mean_hessian);
  if (eig.info() != Eigen::Success)
    throw Error("assemble: eigendecomposition failed");
  const Eigen::VectorXd lam = eig.eigenvalues();  // ascending
  const double lam_max = lam[d - 1];
  if (lam[0] <= 1e-12 * std::max(lam_max, 0.0))
    throw NotPositiveDefiniteError(
        "assemble: mean Hessian is not strictly positive definite (smallest eigenvalue " +
        std::to_string(lam[0]) + ")");

  p.eigenvalues = lam;
  p.eigenvectors = eig.eigenvectors();
  normalize_eigenvector_signs(p.eigenvectors);

  Eigen::LLT<Eigen::MatrixXd> chol(p.mean_hessian);
  if (chol.info() != Eigen::Success)
    throw NotPositiveDefiniteError("assemble: Cholesky factorization failed");
  p.minimizer = chol.solve(-p.mean_linear);

  const Eigen::VectorXd a_inv_b = -p.minimizer;  // A^{-1} b
  p.noise_vectors.reserve(n);
  p.noise_covariance = Eigen::MatrixXd::Zero(d, d);
  for (const auto& c : components) {
    Eigen::VectorXd y = -c.hessian_part * a_inv_b + c.linear_part;
    p.noise_covariance += y * y.transpose();
    p.noise_vectors.push_back(std::move(y));
  }
  p.noise_covariance /= n;

  p.mode_powers.resize(d);
  for (int i = 0; i < d; ++i) {
    const Eigen::VectorXd u = p.eigenvectors.col(i);
    p.mode_powers[i] = u.dot(p.noise_covariance * u);
  }
  p.components = std::move(components);
  return p;
}

QuadraticProblem build_spectrum_instance(const SpectrumSpec& spec, int n,
                                         std::uint64_t seed) {
  const int d = static_cast<int>(spec.eigenvalues.size());
  if (d < 1) throw std::invalid_argument("build_spectrum_instance: empty spectrum");
  if (spec.mode_powers.size() != d)
    throw std::invalid_argument("build_spectrum_instance: eigenvalues/mode_powers size mismatch");
  if (n <= d)
    throw std::invalid_argument(
        "build_spectrum_instance: need n > d to match the covariance exactly");
  for (int i = 0; i < d; ++i) {
    if (!(spec.eigenvalues[i] > 0))
      throw std::invalid_argument("build_spectrum_instance: eigenvalues must be positive");
    if (spec.mode_powers[i] < 0)
      throw std::invalid_argument("build_spectrum_instance: mode_powers must be nonnegative");
  }

  // Sort modes ascending by eigenvalue so the synthesized problem reports the
  // spectrum in the same order it was given.
  std::vector<int> order(d);
  for (int i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return spec.eigenvalues[a] < spec.eigenvalues[b];
  });
  Eigen::VectorXd lam(d), pow(d);
  for (int i = 0; i < d; ++i) {
    lam[i] = spec.eigenvalues[order[i]];
    pow[i] = spec.mode_powers[order[i]];
  }

  // Draw n Gaussian rows, center, then whiten and re-color so the empirical
  // (divide-by-n) second moment is exactly diag(pow).
  CounterRng rng(seed, 1);
  Eigen::MatrixXd y(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) y(i, j) = rng.next_gaussian();
  y.rowwise() -= y.colwise().mean();

  Eigen::MatrixXd second_moment = y.transpose() * y / n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(second_moment);
  if (eig.eigenvalues()[0] <= 1e-12 * eig.eigenvalues()[d - 1])
    throw Error("build_spectrum_instance: degenerate sample, try another seed");
  const Eigen::MatrixXd whitener =
      eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      eig.eigenvectors().transpose();
  y = y * whitener * pow.cwiseSqrt().asDiagonal();

  const Eigen::MatrixXd a = lam.asDiagonal();
  std::vector<QuadraticComponent> components;
  components.reserve(n);
  for (int i = 0; i < n; ++i) components.push_back({a, y.row(i).transpose()});
  return assemble(std::move(components));
}

SpectrumSpec extract_spectrum(const QuadraticProblem& problem) {
  return {problem.eigenvalues, problem.mode_powers};
}

Eigen::VectorXd gradient(const QuadraticProblem& problem, const Eigen::VectorXd& x) {
  return problem.mean_hessian * x + problem.mean_linear;
}

Eigen::VectorXd component_gradient(const QuadraticProblem& problem, int i,
                                   const Eigen::VectorXd& x) {
  const auto& c = problem.components.at(i);
  return c.hessian_part * x + c.linear_part;
}

Eigen::VectorXd zero_order_gradient(const QuadraticProblem& problem, int i,
                                    const Eigen::VectorXd& x) {
  return problem.mean_hessian * x + problem.mean_linear + problem.noise_vectors.at(i);
}

std::string problem_to_json(const QuadraticProblem& problem) {
  nlohmann::json doc;
  doc["n"] = problem.n();
  doc["d"] = problem.d();
  auto& comps = doc["components"] = nlohmann::json::array();
  for (const auto& c : problem.components) {
    std::vector<double> a(c.hessian_part.size());
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        a.data(), c.hessian_part.rows(), c.hessian_part.cols()) = c.hessian_part;
    std::vector<double> b(c.linear_part.data(), c.linear_part.data() + c.linear_part.size());
    comps.push_back({{"A", a}, {"b", b}});
  }
  return doc.dump(2);
}

QuadraticProblem problem_from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  const int n = doc.at("n").get<int>();
  const int d = doc.at("d").get<int>();
  const auto& comps = doc.at("components");
  if (static_cast<int>(comps.size()) != n)
    throw std::invalid_argument("problem_from_json: component count does not match n");
  std::vector<QuadraticComponent> components;
  components.reserve(n);
  for (const auto& c : comps) {
    const auto a = c.at("A").get<std::vector<double>>();
    const auto b = c.at("b").get<std::vector<double>>();
    if (static_cast<int>(a.size()) != d * d || static_cast<int>(b.size()) != d)
      throw std::invalid_argument("problem_from_json: component has wrong dimensions");
    QuadraticComponent comp;
    comp.hessian_part =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            a.data(), d, d);
    comp.linear_part = Eigen::Map<const Eigen::VectorXd>(b.data(), d);
    components.push_back(std::move(comp));
  }
  return assemble(std::move(components));
}

void save_problem(const QuadraticProblem& problem, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("save_problem: cannot open " + path);
  out << problem_to_json(problem) << "\n";
  if (!out) throw Error("save_problem: write failed for " + path);
}

QuadraticProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_problem: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return problem_from_json(text);
}

}  // namespace svl
