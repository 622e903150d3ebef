#include "gvm/gp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <random>

#include <fftw3.h>

#include "gvm/error.hpp"
#include "gvm/optimize.hpp"
#include "transform.hpp"

namespace gvm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

bool is_lattice(std::span<const double> t) {
  if (t.size() < 3) return true;
  const double step = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  const double tol = 1e-12 * std::max(std::abs(t.back()), std::abs(t.front()) + std::abs(step));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::abs(t[i] - (t.front() + static_cast<double>(i) * step)) > tol) return false;
  }
  return true;
}

Eigen::VectorXd standard_normals(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd z(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = nd(rng);
  return z;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place forward DFT, unnormalized.
void fft(std::vector<std::complex<double>>& a) {
  auto* data = reinterpret_cast<fftw_complex*>(a.data());
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(a.size()), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

// Real part of sum_k sqrt(lambda_k / M) (z1 + i z2) exp(-2 pi i jk / M), j < n.
std::vector<double> circulant_draw(const std::vector<double>& lambda, std::size_t n, std::mt19937_64& rng) {
  const std::size_t m = lambda.size();
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<std::complex<double>> w(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double a = std::sqrt(std::max(lambda[k], 0.0) / static_cast<double>(m));
    const double z1 = nd(rng);
    const double z2 = nd(rng);
    w[k] = {a * z1, a * z2};
  }
  fft(w);
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) y[j] = w[j].real();
  return y;
}

}  // namespace

GramMatrix gram_matrix(const KernelModel& model, std::span<const double> times) {
  const auto n = static_cast<Eigen::Index>(times.size());
  GramMatrix g;
  g.matrix.resize(n, n);
  const KernelModel clean = model.with_noise(0.0);
  if (is_lattice(times) && n > 0) {
    const double step = n > 1 ? (times.back() - times.front()) / static_cast<double>(n - 1) : 0.0;
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Eigen::Index d = 0; d < n; ++d) row[static_cast<std::size_t>(d)] = eval_kernel(clean, static_cast<double>(d) * step);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) g.matrix(i, j) = row[static_cast<std::size_t>(std::abs(i - j))];
    }
  } else {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = j; i < n; ++i) {
        const double v = eval_kernel(clean, times[static_cast<std::size_t>(i)] - times[static_cast<std::size_t>(j)]);
        g.matrix(i, j) = v;
        g.matrix(j, i) = v;
      }
    }
  }
  g.matrix.diagonal().array() += model.noise_variance();
  return g;
}

GramMatrix gram_matrix(const KernelModel& model, const Eigen::MatrixXd& locations) {
  const Eigen::Index n = locations.rows();
  GramMatrix g;
  g.matrix.resize(n, n);
  const KernelModel clean = model.with_noise(0.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double r = (locations.row(i) - locations.row(j)).norm();
      const double v = eval_kernel(clean, r);
      g.matrix(i, j) = v;
      g.matrix(j, i) = v;
    }
  }
  g.matrix.diagonal().array() += model.noise_variance();
  return g;
}

Cholesky::Cholesky(Eigen::MatrixXd matrix) : factor_(std::move(matrix)) {
  const Eigen::Index n = factor_.rows();
  if (factor_.cols() != n) throw DomainError("Gram matrix must be square");
  if (!factor_.allFinite()) throw ConditioningError("Gram matrix has non-finite entries");
  const Eigen::VectorXd diag = factor_.diagonal();
  const double scale = n > 0 ? std::abs(diag.mean()) : 1.0;
  constexpr double kSchedule[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
  bool first = true;
  for (double rel : kSchedule) {
    if (!first) {
      // The failed attempt overwrote the lower triangle; the upper one is intact.
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j + 1; i < n; ++i) factor_(i, j) = factor_(j, i);
      }
    }
    first = false;
    factor_.diagonal() = diag.array() + rel * scale;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(factor_);
    if (llt.info() == Eigen::Success) {
      jitter_ = rel * scale;
      return;
    }
  }
  throw ConditioningError("Cholesky failed after the largest jitter");
}

double Cholesky::log_det() const { return 2.0 * factor_.diagonal().array().log().sum(); }

Eigen::VectorXd Cholesky::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = factor_.triangularView<Eigen::Lower>().solve(b);
  factor_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
  return x;
}

Eigen::MatrixXd Cholesky::solve(const Eigen::MatrixXd& b) const {
  Eigen::MatrixXd x = factor_.triangularView<Eigen::Lower>().solve(b);
  factor_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
  return x;
}

Eigen::VectorXd Cholesky::lower_times(const Eigen::VectorXd& z) const {
  return factor_.triangularView<Eigen::Lower>() * z;
}

TimeSeries sample_gp(const KernelModel& model, std::span<const double> times, std::uint64_t seed, std::size_t cap) {
  if (times.size() > cap) throw DomainError("n exceeds the GP size cap");
  Cholesky chol(gram_matrix(model, times));
  std::mt19937_64 rng(seed);
  const Eigen::VectorXd y = chol.lower_times(standard_normals(times.size(), rng));
  TimeSeries ts;
  ts.times.assign(times.begin(), times.end());
  ts.values.assign(y.data(), y.data() + y.size());
  return ts;
}

Eigen::VectorXd sample_gp(const KernelModel& model, const Eigen::MatrixXd& locations, std::uint64_t seed,
                          std::size_t cap) {
  if (static_cast<std::size_t>(locations.rows()) > cap) throw DomainError("n exceeds the GP size cap");
  Cholesky chol(gram_matrix(model, locations));
  std::mt19937_64 rng(seed);
  return chol.lower_times(standard_normals(static_cast<std::size_t>(locations.rows()), rng));
}

TimeSeries sample_gp_lattice(const KernelModel& model, std::size_t n, double dt, std::uint64_t seed, double t0,
                             std::string* method) {
  if (n < 2) throw InsufficientDataError("need at least two lattice points");
  if (!(dt > 0.0)) throw DomainError("dt must be > 0");
  TimeSeries ts;
  ts.times.resize(n);
  for (std::size_t i = 0; i < n; ++i) ts.times[i] = t0 + static_cast<double>(i) * dt;
  std::mt19937_64 rng(seed);

  // Circulant embedding of the exact covariance.
  const std::size_t m = std::max<std::size_t>(2, next_pow2(2 * (n - 1)));
  std::vector<std::complex<double>> row(m);
  for (std::size_t j = 0; j <= m / 2; ++j) {
    const double c = eval_kernel(model, static_cast<double>(j) * dt);
    row[j] = c;
    if (j > 0 && j < m / 2) row[m - j] = c;
  }
  fft(row);
  std::vector<double> lambda(m);
  double lmax = 0.0;
  double lmin = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    lambda[k] = row[k].real();
    lmax = std::max(lmax, lambda[k]);
    lmin = std::min(lmin, lambda[k]);
  }
  if (lmin >= -1e-10 * lmax) {
    ts.values = circulant_draw(lambda, n, rng);
    if (method) *method = "circulant";
    return ts;
  }
  if (n <= 2048) {
    auto exact = sample_gp(model, ts.times, seed);
    if (method) *method = "cholesky";
    return exact;
  }

  // Spectral synthesis on an 8x padded periodic grid; aliases up to +-2 periods folded in.
  const std::size_t mp = next_pow2(8 * n);
  const double dxi = 1.0 / (static_cast<double>(mp) * dt);
  std::vector<double> freqs(mp);
  for (std::size_t k = 0; k < mp; ++k) {
    const double kk = k <= mp / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(mp);
    freqs[k] = kk * dxi;
  }
  std::vector<double> lam(mp, model.noise_variance());
  const KernelModel clean = model.with_noise(0.0);
  for (int alias = -2; alias <= 2; ++alias) {
    std::vector<double> shifted(mp);
    for (std::size_t k = 0; k < mp; ++k) shifted[k] = freqs[k] + static_cast<double>(alias) / dt;
    if (model.family().id == FamilyId::Cosine) {
      std::vector<double> order(shifted);
      std::sort(order.begin(), order.end());
      const auto s = eval_psd_two_sided(clean, order);
      for (std::size_t k = 0; k < mp; ++k) {
        const auto pos = std::lower_bound(order.begin(), order.end(), shifted[k]) - order.begin();
        lam[k] += s[static_cast<std::size_t>(pos)] / dt;
      }
    } else {
      const auto s = eval_psd_two_sided(clean, shifted);
      for (std::size_t k = 0; k < mp; ++k) lam[k] += s[k] / dt;
    }
  }
  ts.values = circulant_draw(lam, n, rng);
  if (method) *method = "spectral";
  return ts;
}

TimeSeries sample_gp_random_times(const KernelModel& model, std::size_t n, double span, std::uint64_t seed,
                                  std::size_t oversample, std::string* method) {
  if (n < 2) throw InsufficientDataError("need at least two observations");
  const std::size_t big = std::max<std::size_t>(n, oversample * n);
  const double dt = span / static_cast<double>(big - 1);
  auto lattice = sample_gp_lattice(model, big, dt, seed, 0.0, method);
  std::vector<std::size_t> idx(big);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::size_t> pick;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::sample(idx.begin(), idx.end(), std::back_inserter(pick), n, rng);
  TimeSeries ts;
  for (std::size_t i : pick) {
    ts.times.push_back(lattice.times[i]);
    ts.values.push_back(lattice.values[i]);
  }
  return ts;
}

double nll(const Cholesky& chol, const Eigen::VectorXd& y) {
  const Eigen::VectorXd alpha = chol.solve(y);
  const double n = static_cast<double>(y.size());
  return 0.5 * y.dot(alpha) + 0.5 * chol.log_det() + 0.5 * n * kLog2Pi;
}

double nll(const KernelModel& model, const TimeSeries& ts, std::size_t cap) {
  if (ts.size() > cap) throw DomainError("n exceeds the GP size cap");
  const Eigen::Map<const Eigen::VectorXd> y(ts.values.data(), static_cast<Eigen::Index>(ts.values.size()));
  Cholesky chol(gram_matrix(model, ts.times));
  return nll(chol, y);
}

double nkl(const Eigen::MatrixXd& k0, const Eigen::MatrixXd& k1) {
  if (k0.rows() != k1.rows() || k0.rows() != k0.cols() || k1.rows() != k1.cols()) {
    throw DomainError("nkl needs square matrices of equal size");
  }
  const Cholesky c0(k0);
  const Cholesky c1(k1);
  const double n = static_cast<double>(k0.rows());
  const double tr = c1.solve(k0).trace();
  return -0.5 * (tr - n + c1.log_det() - c0.log_det());
}

double expected_log_likelihood(const Eigen::MatrixXd& k_theta, const Eigen::MatrixXd& k_bar) {
  const Cholesky c(k_theta);
  const double n = static_cast<double>(k_theta.rows());
  return -0.5 * c.solve(k_bar).trace() - 0.5 * c.log_det() - 0.5 * n * kLog2Pi;
}

bool is_diverged(const KernelModel& model, double loss, double threshold) {
  if (!std::isfinite(loss)) return true;
  for (double v : model.theta()) {
    if (!std::isfinite(v) || std::abs(v) > threshold) return true;
  }
  if (model.noise_variance() > threshold) return true;
  for (const auto& c : params_freq_to_time(model).components) {
    if (c.variance > threshold || c.lengthscale > threshold) return true;
  }
  return false;
}

FitResult ml_refine(const KernelModel& init, const TimeSeries& ts, const MlOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  if (ts.size() > opt.cap) throw DomainError("n exceeds the GP size cap");
  KernelModel start = init;
  if (!(start.noise_variance() > 0.0)) start = start.with_noise(1e-3 * std::max(start.power(), 1e-12));
  const double span = ts.span();
  const auto layout = detail::make_layout(start, true, true, 0.0, span > 0.0 ? 0.5 / span : 1.0);
  const Eigen::Map<const Eigen::VectorXd> y(ts.values.data(), static_cast<Eigen::Index>(ts.values.size()));
  Objective loss = [&](std::span<const double> x) {
    const auto m = detail::decode(x, layout);
    Cholesky chol(gram_matrix(m, ts.times));
    return nll(chol, y);
  };
  const auto x0 = detail::encode(start, layout);
  const double f0 = loss(x0);
  if (!std::isfinite(f0)) throw InitError("nll is not finite at the initial point");

  OptimizeOptions o;
  o.max_iters = opt.max_iters;
  o.max_evals = opt.max_evals > 0 ? opt.max_evals : 20 * opt.max_iters;
  o.tolerance = opt.tolerance;
  o.restarts = 0;
  const auto res = nelder_mead(loss, x0, o);

  FitResult r;
  r.model = detail::decode(res.x, layout);
  r.theta_star = r.model.theta();
  r.noise_variance = r.model.noise_variance();
  r.loss = res.f;
  r.iterations = res.iterations;
  r.evaluations = res.evaluations;
  r.converged = res.converged;
  r.loss_history = res.history;
  r.divergence = "nll";
  r.optimizer = "nelder-mead";
  r.diagnostics.set("init_nll", f0);
  r.diagnostics.set("final_nll", res.f);
  r.diagnostics.set("diverged", is_diverged(r.model, res.f, opt.divergence_threshold) ? 1.0 : 0.0);
  r.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

MlBoundReport ml_bound_report(const Eigen::MatrixXd& k0, const KernelModel& theta_star, std::span<const double> times) {
  if (k0.rows() != static_cast<Eigen::Index>(times.size())) throw DomainError("K0 size does not match times");
  const Eigen::MatrixXd kt = gram_matrix(theta_star, times).matrix;
  MlBoundReport rep;
  rep.kl = std::max(0.0, -nkl(k0, kt));
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e0(k0, Eigen::EigenvaluesOnly);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> et(kt, Eigen::EigenvaluesOnly);
  const double inv0 = 1.0 / e0.eigenvalues().minCoeff();
  const double invt = 1.0 / et.eigenvalues().minCoeff();
  rep.bound = 0.5 * inv0 * invt * (k0 - kt).norm();
  rep.holds = rep.bound >= rep.kl;
  return rep;
}

}  // namespace gvm
