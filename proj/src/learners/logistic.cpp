#include "nidsbench/learners/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "nidsbench/common.hpp"
#include "nidsbench/parallel.hpp"

namespace nidsbench {

namespace {

// Chunking is fixed so the reduction order, and hence every bit of the
// result, does not depend on the worker count.
constexpr std::size_t kChunkRows = 2048;

double softplus(double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); }

double sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

std::vector<double> LogisticModel::decision(std::span<const double> row) const {
  std::vector<double> out;
  out.reserve(weights.size());
  const std::size_t p = mean.size();
  for (const auto& w : weights) {
    double z = w[p];
    for (std::size_t j = 0; j < p; ++j) z += w[j] * (row[j] - mean[j]) / scale[j];
    out.push_back(z);
  }
  return out;
}

int LogisticModel::predict_index(std::span<const double> row) const {
  auto z = decision(row);
  if (z.size() == 1) return z[0] > 0.0 ? 1 : 0;
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

double logistic_objective(const LogisticProblem& pr, std::span<const double> params, std::span<double> grad,
                          int workers) {
  const std::size_t p = pr.p;
  if (params.size() != p + 1) throw Error("logistic_objective: expected p + 1 parameters");
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != p + 1) throw Error("logistic_objective: gradient buffer has wrong size");

  const std::size_t n_chunks = (pr.n + kChunkRows - 1) / kChunkRows;
  std::vector<double> chunk_loss(n_chunks, 0.0);
  std::vector<std::vector<double>> chunk_grad(want_grad ? n_chunks : 0);
  parallel_for(n_chunks, workers, [&](std::size_t c) {
    const std::size_t begin = c * kChunkRows;
    const std::size_t end = std::min(pr.n, begin + kChunkRows);
    double loss = 0.0;
    std::vector<double> g(want_grad ? p + 1 : 0, 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      const double* xi = pr.x.data() + i * p;
      double z = params[p];
      for (std::size_t j = 0; j < p; ++j) z += params[j] * xi[j];
      const double t = pr.targets[i];
      loss += t > 0.5 ? softplus(-z) : softplus(z);
      if (want_grad) {
        const double r = sigmoid(z) - t;
        for (std::size_t j = 0; j < p; ++j) g[j] += r * xi[j];
        g[p] += r;
      }
    }
    chunk_loss[c] = loss;
    if (want_grad) chunk_grad[c] = std::move(g);
  });

  const double n = static_cast<double>(std::max<std::size_t>(pr.n, 1));
  double loss = 0.0;
  for (double l : chunk_loss) loss += l;
  double penalty = 0.0;
  for (std::size_t j = 0; j < p; ++j) penalty += params[j] * params[j];
  const double reg = 1.0 / (pr.strength * n);
  double value = loss / n + 0.5 * reg * penalty;
  if (want_grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const auto& g : chunk_grad) {
      for (std::size_t j = 0; j <= p; ++j) grad[j] += g[j];
    }
    for (std::size_t j = 0; j <= p; ++j) grad[j] /= n;
    for (std::size_t j = 0; j < p; ++j) grad[j] += reg * params[j];
  }
  return value;
}

LogisticFitResult minimize_logistic(const LogisticProblem& pr, const LogisticParams& params, int workers) {
  const std::size_t dim = pr.p + 1;
  LogisticFitResult out;
  out.params.assign(dim, 0.0);
  std::vector<double> grad(dim), trial(dim), trial_grad(dim);
  double value = logistic_objective(pr, out.params, grad, workers);
  double step = 1.0;
  auto max_abs = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  for (out.iterations = 0; out.iterations < params.max_iter; ++out.iterations) {
    if (max_abs(grad) <= params.tol) {
      out.converged = true;
      break;
    }
    double gnorm2 = 0.0;
    for (double g : grad) gnorm2 += g * g;
    double trial_value = 0.0;
    for (int shrink = 0; shrink < 60; ++shrink) {
      for (std::size_t j = 0; j < dim; ++j) trial[j] = out.params[j] - step * grad[j];
      trial_value = logistic_objective(pr, trial, trial_grad, workers);
      if (trial_value <= value - 0.5 * step * gnorm2) break;
      step *= 0.5;
    }
    if (!(trial_value < value)) {
      // No further decrease representable in floating point.
      out.converged = max_abs(grad) <= params.tol;
      break;
    }
    out.params.swap(trial);
    grad.swap(trial_grad);
    value = trial_value;
    step = std::min(step * 2.0, 1e6);
  }
  if (!out.converged && max_abs(grad) <= params.tol) out.converged = true;
  return out;
}

}  // namespace nidsbench
