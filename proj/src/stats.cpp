#include "nidsbench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nidsbench/common.hpp"

namespace nidsbench {

Aggregate aggregate(std::span<const double> values, std::string metric) {
  if (values.empty()) throw Error("aggregate: no values" + (metric.empty() ? "" : " for " + metric));
  Aggregate a;
  a.metric = std::move(metric);
  a.n = values.size();
  a.min = values[0];
  a.max = values[0];
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw Error("aggregate: non-finite value");
    sum += v;
    a.min = std::min(a.min, v);
    a.max = std::max(a.max, v);
  }
  a.mean = sum / static_cast<double>(a.n);
  if (a.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std = std::sqrt(ss / static_cast<double>(a.n - 1));
  }
  // Rounding can push the mean a hair outside [min, max] for constant input.
  a.mean = std::clamp(a.mean, a.min, a.max);
  return a;
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz's method.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 100000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw Error("incomplete_beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw Error("incomplete_beta: a and b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

namespace {

// P(|T| > |t|) for T ~ t(df).
double two_sided_tail(double t, double df) {
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return incomplete_beta(0.5 * df, 0.5, x);
}

}  // namespace

double student_t_cdf(double t, double df) {
  if (!(df > 0)) throw Error("student_t_cdf: df must be > 0");
  if (std::isnan(t)) throw Error("student_t_cdf: t is NaN");
  const double tail = 0.5 * two_sided_tail(t, df);
  return t > 0 ? 1.0 - tail : tail;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::ABetter: return "A_better";
    case Verdict::BBetter: return "B_better";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

TestResult welch(std::span<const double> a, std::span<const double> b, double alpha, bool lower_is_better) {
  if (a.size() < 2 || b.size() < 2) throw Error("welch: insufficient samples (need at least 2 per side)");
  if (!(alpha > 0 && alpha < 1)) throw Error("welch: alpha must lie in (0, 1)");
  const Aggregate sa = aggregate(a);
  const Aggregate sb = aggregate(b);
  const double na = static_cast<double>(sa.n);
  const double nb = static_cast<double>(sb.n);
  const double va = sa.std * sa.std / na;
  const double vb = sb.std * sb.std / nb;
  TestResult r;
  r.alpha = alpha;
  const double diff = sa.mean - sb.mean;
  const double se2 = va + vb;
  if (se2 == 0.0) {
    // Both samples constant.
    r.degrees_of_freedom = na + nb - 2.0;
    if (diff == 0.0) {
      r.t_statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.t_statistic = diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
  } else {
    r.t_statistic = diff / std::sqrt(se2);
    r.degrees_of_freedom = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    r.p_value = std::clamp(two_sided_tail(r.t_statistic, r.degrees_of_freedom), 0.0, 1.0);
  }
  if (r.p_value < alpha && r.t_statistic != 0.0) {
    const bool a_larger = r.t_statistic > 0;
    r.verdict = a_larger != lower_is_better ? Verdict::ABetter : Verdict::BBetter;
  }
  return r;
}

}  // namespace nidsbench
