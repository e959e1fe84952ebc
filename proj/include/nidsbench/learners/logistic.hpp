#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nidsbench {

struct LogisticParams {
  double strength = 1.0;  // inverse L2 strength C
  std::size_t max_iter = 1000;
  double tol = 1e-4;
  bool standardize = true;
};

/// Standardized inputs, one weight vector per one-vs-rest problem.
/// A binary model has a single problem scoring the second class.
struct LogisticModel {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<std::vector<double>> weights;  // per problem: p weights then bias
  std::vector<std::size_t> iterations;       // per problem
  std::vector<bool> converged;               // per problem

  /// Decision value of each one-vs-rest problem for `row`.
  std::vector<double> decision(std::span<const double> row) const;
  int predict_index(std::span<const double> row) const;
};

/// Regularized, sample-averaged logistic loss
///   f(w, b) = (1/n) sum_i log(1 + exp(-s_i (w.x_i + b))) + |w|^2 / (2 C n)
/// with s_i = +1 for target 1 and -1 for target 0. The bias is unpenalized.
struct LogisticProblem {
  std::span<const double> x;        // row-major, n x p (already standardized)
  std::size_t n = 0;
  std::size_t p = 0;
  std::span<const double> targets;  // 0 or 1
  double strength = 1.0;
};

/// Objective value; writes the analytic gradient into `grad` when non-empty.
/// `params` holds p weights followed by the bias.
double logistic_objective(const LogisticProblem& problem, std::span<const double> params,
                          std::span<double> grad, int workers = 1);

struct LogisticFitResult {
  std::vector<double> params;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Full-batch gradient descent with Armijo backtracking; stops once the
/// gradient's max-norm drops below tol or after max_iter steps.
LogisticFitResult minimize_logistic(const LogisticProblem& problem, const LogisticParams& params,
                                    int workers);

}  // namespace nidsbench
