#pragma once

#include <span>

namespace tfs::stats {

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction,
// converged to ~1e-15 relative; a, b > 0, x in [0, 1].
double incomplete_beta(double a, double b, double x);

// Two-sided tail probability P(|T| >= |t|) for Student's t with df degrees
// of freedom. Absolute error below 1e-8 for df >= 1.
double student_t_two_sided_p(double t, double df);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
};

// Pooled-variance (equal variance) two-sample t-test. Positive t means
// mean(xs) > mean(ys). Throws DegenerateSample if either list has fewer
// than two values or the pooled variance is zero.
TTestResult t_test(std::span<const double> xs, std::span<const double> ys);

}  // namespace tfs::stats
