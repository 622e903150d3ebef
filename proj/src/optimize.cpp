#include "gvm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gvm/error.hpp"

namespace gvm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Counter {
  const Objective& f;
  int evals = 0;
  int max_evals;
  std::vector<double> best_x;
  double best_f = kInf;

  double operator()(std::span<const double> x) {
    ++evals;
    double v = kInf;
    try {
      v = f(x);
    } catch (const Error&) {
      v = kInf;
    }
    if (!std::isfinite(v)) v = kInf;
    if (v < best_f) {
      best_f = v;
      best_x.assign(x.begin(), x.end());
    }
    return v;
  }
  bool exhausted() const { return evals >= max_evals; }
};

bool small_change(double before, double after, double tol) {
  if (!std::isfinite(before)) return false;
  return std::abs(before - after) <= tol * (std::abs(after) + tol);
}

}  // namespace

OptimizeResult nelder_mead(const Objective& f, std::vector<double> x0, const OptimizeOptions& opt) {
  const std::size_t d = x0.size();
  if (d == 0) throw DomainError("empty parameter vector");
  Counter eval{f, 0, opt.max_evals, x0, kInf};
  OptimizeResult res;

  const double n = static_cast<double>(d);
  const double alpha = 1.0;
  const double gamma = 1.0 + 2.0 / n;
  const double rho = 0.75 - 0.5 / n;
  const double shrink = 1.0 - 1.0 / n > 0.0 ? 1.0 - 1.0 / n : 0.5;

  std::vector<double> start = x0;
  double prev_round = kInf;
  for (int round = 0; round <= opt.restarts; ++round) {
    std::vector<std::vector<double>> pts(d + 1, start);
    std::vector<double> fv(d + 1);
    for (std::size_t i = 0; i < d; ++i) {
      const double step = start[i] != 0.0 ? opt.initial_step * std::max(1.0, std::abs(start[i])) : opt.initial_step;
      pts[i + 1][i] += step;
    }
    for (std::size_t i = 0; i <= d; ++i) fv[i] = eval(pts[i]);

    std::vector<std::size_t> idx(d + 1);
    std::vector<double> centroid(d), xr(d), xe(d), xc(d);
    while (res.iterations < opt.max_iters && !eval.exhausted()) {
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
      const std::size_t best = idx.front();
      const std::size_t worst = idx.back();
      const std::size_t second = idx[d - 1];

      double spread_x = 0.0;
      for (std::size_t i = 0; i <= d; ++i) {
        for (std::size_t k = 0; k < d; ++k) spread_x = std::max(spread_x, std::abs(pts[i][k] - pts[best][k]));
      }
      const bool flat = std::isfinite(fv[worst]) && small_change(fv[worst], fv[best], opt.tolerance);
      if ((flat && spread_x < 1e-6) || spread_x < 1e-12) {
        res.converged = true;
        break;
      }
      ++res.iterations;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i <= d; ++i) {
        if (i == worst) continue;
        for (std::size_t k = 0; k < d; ++k) centroid[k] += pts[i][k] / n;
      }
      for (std::size_t k = 0; k < d; ++k) xr[k] = centroid[k] + alpha * (centroid[k] - pts[worst][k]);
      const double fr = eval(xr);
      if (fr < fv[best]) {
        for (std::size_t k = 0; k < d; ++k) xe[k] = centroid[k] + gamma * (xr[k] - centroid[k]);
        const double fe = eval(xe);
        if (fe < fr) {
          pts[worst] = xe;
          fv[worst] = fe;
        } else {
          pts[worst] = xr;
          fv[worst] = fr;
        }
      } else if (fr < fv[second]) {
        pts[worst] = xr;
        fv[worst] = fr;
      } else {
        const bool outside = fr < fv[worst];
        for (std::size_t k = 0; k < d; ++k) {
          xc[k] = outside ? centroid[k] + rho * (xr[k] - centroid[k]) : centroid[k] + rho * (pts[worst][k] - centroid[k]);
        }
        const double fc = eval(xc);
        if (fc < std::min(fr, fv[worst])) {
          pts[worst] = xc;
          fv[worst] = fc;
        } else {
          for (std::size_t i = 0; i <= d; ++i) {
            if (i == best) continue;
            for (std::size_t k = 0; k < d; ++k) pts[i][k] = pts[best][k] + shrink * (pts[i][k] - pts[best][k]);
            fv[i] = eval(pts[i]);
          }
        }
      }
      res.history.push_back(eval.best_f);
    }
    if (!std::isfinite(eval.best_f)) break;
    if (round > 0 && small_change(prev_round, eval.best_f, opt.tolerance)) break;
    prev_round = eval.best_f;
    start = eval.best_x;
    if (res.iterations >= opt.max_iters || eval.exhausted()) break;
  }
  if (res.iterations >= opt.max_iters || eval.exhausted()) res.converged = false;
  res.x = eval.best_x;
  res.f = eval.best_f;
  res.evaluations = eval.evals;
  return res;
}

namespace {

// Brent minimization of phi on [left, right] given an interior point xb with value fb.
template <class Phi>
std::pair<double, double> brent(Phi& phi, const Counter& eval, double left, double right, double xb, double fb) {
  double w = xb, fw = fb, v = xb, fv = fb;
  double e = 0.0, step = 0.0;
  for (int it = 0; it < 100 && !eval.exhausted(); ++it) {
    const double mid = 0.5 * (left + right);
    const double tol1 = 1e-8 * std::abs(xb) + 1e-12;
    if (std::abs(xb - mid) <= 2.0 * tol1 - 0.5 * (right - left)) break;
    bool golden = true;
    if (std::abs(e) > tol1) {
      const double r = (xb - w) * (fb - fv);
      double q = (xb - v) * (fb - fw);
      double p = (xb - v) * q - (xb - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      if (std::abs(p) < std::abs(0.5 * q * e) && p > q * (left - xb) && p < q * (right - xb)) {
        e = step;
        step = p / q;
        golden = false;
      }
    }
    if (golden) {
      e = xb >= mid ? left - xb : right - xb;
      step = 0.381966011250105 * e;
    }
    const double u = xb + (std::abs(step) >= tol1 ? step : (step > 0 ? tol1 : -tol1));
    const double fu = phi(u);
    if (fu <= fb) {
      (u >= xb ? left : right) = xb;
      v = w, fv = fw, w = xb, fw = fb, xb = u, fb = fu;
    } else {
      (u < xb ? left : right) = u;
      if (fu <= fw || w == xb) {
        v = w, fv = fw, w = u, fw = fu;
      } else if (fu <= fv || v == xb || v == w) {
        v = u, fv = fu;
      }
    }
  }
  return {xb, fb};
}

// Minimizes phi(t) = f(x + t * dir). Returns the step and the value there.
std::pair<double, double> line_minimize(Counter& eval, const std::vector<double>& x, const std::vector<double>& dir,
                                        double f0) {
  const std::size_t d = x.size();
  std::vector<double> buf(d);
  auto phi = [&](double t) {
    for (std::size_t k = 0; k < d; ++k) buf[k] = x[k] + t * dir[k];
    return eval(buf);
  };

  constexpr double kGold = 1.618033988749895;
  double a = 0.0;
  double b = 1.0;
  double fb = phi(b);
  if (fb > f0) {
    const double fm = phi(-1.0);
    if (fm >= f0) return brent(phi, eval, -1.0, 1.0, 0.0, f0);
    b = -1.0;
    fb = fm;
  }
  double c = b + kGold * (b - a);
  double fc = phi(c);
  for (int guard = 0; fc < fb && guard < 60 && !eval.exhausted(); ++guard) {
    a = b;
    b = c;
    fb = fc;
    c = b + kGold * (b - a);
    fc = phi(c);
  }
  return brent(phi, eval, std::min(a, c), std::max(a, c), b, fb);
}

}  // namespace

OptimizeResult powell(const Objective& f, std::vector<double> x0, const OptimizeOptions& opt) {
  const std::size_t d = x0.size();
  if (d == 0) throw DomainError("empty parameter vector");
  Counter eval{f, 0, opt.max_evals, x0, kInf};
  OptimizeResult res;

  std::vector<std::vector<double>> dirs(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) dirs[i][i] = opt.initial_step * std::max(1.0, std::abs(x0[i]));

  std::vector<double> x = x0;
  double fx = eval(x);
  while (res.iterations < opt.max_iters && !eval.exhausted()) {
    ++res.iterations;
    const std::vector<double> x_start = x;
    const double f_start = fx;
    std::size_t big_i = 0;
    double big_drop = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double before = fx;
      auto [t, ft] = line_minimize(eval, x, dirs[i], fx);
      if (ft < fx) {
        for (std::size_t k = 0; k < d; ++k) x[k] += t * dirs[i][k];
        fx = ft;
      }
      if (before - fx > big_drop) {
        big_drop = before - fx;
        big_i = i;
      }
    }
    res.history.push_back(eval.best_f);
    if (std::isfinite(f_start) && 2.0 * (f_start - fx) <= opt.tolerance * (std::abs(f_start) + std::abs(fx)) + 1e-300) {
      res.converged = true;
      break;
    }
    // Replace the direction of largest decrease by the net displacement when it helps.
    std::vector<double> net(d), extrap(d);
    for (std::size_t k = 0; k < d; ++k) {
      net[k] = x[k] - x_start[k];
      extrap[k] = x[k] + net[k];
    }
    const double fe = eval(extrap);
    if (fe < f_start) {
      const double t1 = f_start - fx - big_drop;
      const double t2 = f_start - fe;
      if (2.0 * (f_start - 2.0 * fx + fe) * t1 * t1 < big_drop * t2 * t2) {
        auto [t, ft] = line_minimize(eval, x, net, fx);
        if (ft < fx) {
          for (std::size_t k = 0; k < d; ++k) x[k] += t * net[k];
          fx = ft;
        }
        dirs[big_i] = dirs.back();
        dirs.back() = net;
      }
    }
  }
  res.x = eval.best_x;
  res.f = eval.best_f;
  res.evaluations = eval.evals;
  return res;
}

}  // namespace gvm
