#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace svl {

// One term f_i(x) = 1/2 x'A_i x + b_i'x of a finite-sum quadratic objective.
struct QuadraticComponent {
  Eigen::MatrixXd hessian_part;  // A_i, symmetric
  Eigen::VectorXd linear_part;   // b_i
};

// Assembled finite-sum quadratic instance together with every derived
// quantity of its zero-th order noise model: aggregate Hessian A, minimizer
// x* = -A^{-1}b, noise vectors y_i = -A_i A^{-1}b + b_i (which sum to zero),
// noise covariance Sigma = (1/n) sum y_i y_i', and the spectrum of A with the
// per-eigenvector noise powers s_i = u_i' Sigma u_i.
//
// Immutable after construction; safe to share across threads.
struct QuadraticProblem {
  std::vector<QuadraticComponent> components;
  Eigen::MatrixXd mean_hessian;
  Eigen::VectorXd mean_linear;
  Eigen::VectorXd minimizer;
  std::vector<Eigen::VectorXd> noise_vectors;
  Eigen::MatrixXd noise_covariance;
  Eigen::VectorXd eigenvalues;   // ascending, all > 0
  Eigen::MatrixXd eigenvectors;  // orthonormal columns, sign-normalized
  Eigen::VectorXd mode_powers;   // u_i' Sigma u_i >= 0

  int n() const { return static_cast<int>(components.size()); }
  int d() const { return static_cast<int>(mean_hessian.rows()); }
};

// Eigenvalues of A plus mode powers u_i' Sigma u_i: everything the stationary
// variance formulas need, and what instance summaries report.
struct SpectrumSpec {
  Eigen::VectorXd eigenvalues;
  Eigen::VectorXd mode_powers;
};

// Components of the least-squares regression f(x) = (1/2n) sum (<z_i,x> - t_i)^2
// with z_i standard Gaussian and t_i = <e_1, z_i> + eps_i, eps_i ~ N(0, std^2).
std::vector<QuadraticComponent> build_regression_instance(int n, int d,
                                                          double label_noise_std,
                                                          std::uint64_t seed);

// Populates all derived fields. Throws std::invalid_argument on mismatched
// dimensions or asymmetric hessian parts, NotPositiveDefiniteError when the
// mean Hessian has an eigenvalue <= 1e-12 times the largest.
QuadraticProblem assemble(std::vector<QuadraticComponent> components);

// Instance whose zero-th order model matches `spec` exactly: A = diag(eigenvalues),
// x* = 0, and n noise vectors with zero sum whose empirical covariance equals
// diag(mode_powers) (biased, divide-by-n). Requires n > d.
QuadraticProblem build_spectrum_instance(const SpectrumSpec& spec, int n,
                                         std::uint64_t seed);

SpectrumSpec extract_spectrum(const QuadraticProblem& problem);

// Full, per-component and zero-th order gradients.
Eigen::VectorXd gradient(const QuadraticProblem& problem, const Eigen::VectorXd& x);
Eigen::VectorXd component_gradient(const QuadraticProblem& problem, int i,
                                   const Eigen::VectorXd& x);
Eigen::VectorXd zero_order_gradient(const QuadraticProblem& problem, int i,
                                    const Eigen::VectorXd& x);

// JSON document {"n", "d", "components": [{"A": row-major, "b": [...]}]}.
// Loading re-runs assemble(); derived fields are never trusted from file.
std::string problem_to_json(const QuadraticProblem& problem);
QuadraticProblem problem_from_json(const std::string& text);
void save_problem(const QuadraticProblem& problem, const std::string& path);
QuadraticProblem load_problem(const std::string& path);

}  // namespace svl
