#pragma once

#include <functional>
#include <vector>

namespace evtail {

struct BrentResult {
  double x = 0.0;
  double f = 0.0;
  int iterations = 0;
};

// Brent minimization of f on [a, b].  Assumes f is continuous; finds a local
// minimum to within tol (absolute on x).
BrentResult brent_minimize(const std::function<double(double)>& f, double a, double b,
                           double tol = 1e-12, int max_iter = 300);

// Bisection root of g on [a, b]; requires sign change.  Returns midpoint of
// the final bracket.
double bisect_root(const std::function<double(double)>& g, double a, double b,
                   double tol = 1e-12, int max_iter = 200);

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Nelder-Mead on an unconstrained objective.  step sets the initial simplex
// edge per coordinate; convergence is on the relative spread of f values.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& start, double step = 0.25,
                          double f_rel_tol = 1e-10, int max_iter = 2000);

}  // namespace evtail
