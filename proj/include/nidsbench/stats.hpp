#pragma once

#include <span>
#include <string>
#include <string_view>

#include "nidsbench/common.hpp"

namespace nidsbench {

struct Aggregate {
  std::string metric;
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 when n = 1
  double min = 0.0;
  double max = 0.0;
};

Aggregate aggregate(std::span<const double> values, std::string metric = {});

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// CDF of Student's t with `df` (real, > 0) degrees of freedom.
double student_t_cdf(double t, double df);

enum class Verdict { ABetter, BBetter, Inconclusive };
std::string_view to_string(Verdict v);

struct TestResult {
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;  // two-sided
  double alpha = 0.05;
  Verdict verdict = Verdict::Inconclusive;
};

/// Welch's unequal-variance t-test. "Better" means a larger mean unless
/// `lower_is_better` (e.g. for false-positive rates).
TestResult welch(std::span<const double> a, std::span<const double> b, double alpha = 0.05,
                 bool lower_is_better = false);

}  // namespace nidsbench
