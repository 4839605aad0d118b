#include "evtail/optim.hpp"

#include <algorithm>
#include <cmath>

#include "evtail/error.hpp"

namespace evtail {

BrentResult brent_minimize(const std::function<double(double)>& f, double a, double b,
                           double tol, int max_iter) {
  if (!(a < b)) throw InvalidArgument("brent_minimize: empty interval");
  const double gold = 0.3819660112501051;
  double x = a + gold * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    const double m = 0.5 * (a + b);
    const double tol1 = tol + 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(x);
    const double tol2 = 2.0 * tol1;
    if (std::fabs(x - m) <= tol2 - 0.5 * (b - a)) break;
    bool parabolic = false;
    if (std::fabs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::fabs(q);
      const double e_old = e;
      e = d;
      if (std::fabs(p) < std::fabs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (x < m) ? tol1 : -tol1;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x < m) ? b - x : a - x;
      d = gold * e;
    }
    const double u = (std::fabs(d) >= tol1) ? x + d : x + ((d > 0.0) ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx, it};
}

double bisect_root(const std::function<double(double)>& g, double a, double b,
                   double tol, int max_iter) {
  double fa = g(a), fb = g(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw InvalidArgument("bisect_root: no sign change");
  for (int it = 0; it < max_iter && b - a > tol; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = g(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m; fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& start, double step,
                          double f_rel_tol, int max_iter) {
  const std::size_t n = start.size();
  if (n == 0) throw InvalidArgument("nelder_mead: empty start point");

  std::vector<std::vector<double>> pts(n + 1, start);
  for (std::size_t i = 0; i < n; ++i)
    pts[i + 1][i] += (start[i] != 0.0) ? step * std::fabs(start[i]) : step;
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(pts[i]);

  auto order = [&] {
    std::vector<std::size_t> idx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> p2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      p2[i] = pts[idx[i]];
      f2[i] = fv[idx[i]];
    }
    pts.swap(p2);
    fv.swap(f2);
  };

  int it = 0;
  bool converged = false;
  for (; it < max_iter; ++it) {
    order();
    const double spread = std::fabs(fv[n] - fv[0]);
    if (spread <= f_rel_tol * (std::fabs(fv[0]) + f_rel_tol)) {
      converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);

    auto blend = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + coef * (pts[n][j] - centroid[j]);
      return p;
    };

    std::vector<double> refl = blend(-1.0);
    const double f_refl = f(refl);
    if (f_refl < fv[0]) {
      std::vector<double> expd = blend(-2.0);
      const double f_exp = f(expd);
      if (f_exp < f_refl) {
        pts[n] = std::move(expd); fv[n] = f_exp;
      } else {
        pts[n] = std::move(refl); fv[n] = f_refl;
      }
    } else if (f_refl < fv[n - 1]) {
      pts[n] = std::move(refl); fv[n] = f_refl;
    } else {
      const bool outside = f_refl < fv[n];
      std::vector<double> ctr = blend(outside ? -0.5 : 0.5);
      const double f_ctr = f(ctr);
      if (f_ctr < std::min(f_refl, fv[n])) {
        pts[n] = std::move(ctr); fv[n] = f_ctr;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[0][j] + 0.5 * (pts[i][j] - pts[0][j]);
          fv[i] = f(pts[i]);
        }
      }
    }
  }
  order();
  return {pts[0], fv[0], it, converged};
}

}  // namespace evtail
