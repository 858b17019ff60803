#include "tfs/stats.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "tfs/errors.hpp"

namespace tfs::stats {

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
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
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw InvalidParams("incomplete_beta: need a, b > 0 and x in [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The continued fraction converges fast only below the mean of the
  // distribution; use the reflection I_x(a,b) = 1 - I_{1-x}(b,a) above it.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw InvalidParams("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

TTestResult t_test(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() < 2 || ys.size() < 2) {
    throw DegenerateSample("t-test needs at least two values per sample");
  }
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / nx;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ny;
  double ssx = 0.0;
  for (double v : xs) ssx += (v - mx) * (v - mx);
  double ssy = 0.0;
  for (double v : ys) ssy += (v - my) * (v - my);

  TTestResult r;
  r.df = nx + ny - 2.0;
  const double pooled = (ssx + ssy) / r.df;
  if (!(pooled > 0.0)) throw DegenerateSample("pooled variance is zero");
  r.t = (mx - my) / std::sqrt(pooled * (1.0 / nx + 1.0 / ny));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

}  // namespace tfs::stats
