#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hdgeuler {

struct GmresOptions {
  double rtol = 1e-10;
  int maxit = 1000;
  int krylov_dim = 200;  // restart length
  bool throw_on_failure = true;
};

struct GmresResult {
  int iterations = 0;
  double residual = 0.0;  // final relative residual ||b - A x|| / ||b||
  bool converged = false;
};

inline std::string format_residual(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", r);
  return buf;
}

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int iterations, double residual)
      : std::runtime_error(what + " (iterations " + std::to_string(iterations) + ", relative residual " +
                           format_residual(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}
  [[nodiscard]] int iterations() const { return iterations_; }
  [[nodiscard]] double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

using LinearMap = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;
using Projection = std::function<void(Eigen::VectorXd&)>;

inline void identity_map(const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = x; }

/// Right-preconditioned restarted GMRES (modified Gram-Schmidt, Givens
/// rotations). The residual monitored is the true residual, which right
/// preconditioning makes available at no extra cost. An optional projection
/// is applied to every preconditioned search direction, which keeps the
/// iterates in a complement of a known kernel. Preconditioner and projection
/// must be fixed linear maps: the update is formed as P M^{-1} (V y) once per
/// cycle. x holds the initial guess.
template <typename Operator, typename Preconditioner>
GmresResult gmres(const Operator& apply_a, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                  const Preconditioner& apply_m, const GmresOptions& opts, const Projection& project = {}) {
  if (opts.rtol <= 0.0) throw std::invalid_argument("gmres: rtol must be positive");
  const Eigen::Index n = b.size();
  if (x.size() != n) x = Eigen::VectorXd::Zero(n);
  GmresResult res;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    res.converged = true;
    return res;
  }
  const int m = std::max(1, opts.krylov_dim);
  std::vector<Eigen::VectorXd> v(static_cast<std::size_t>(m + 1));
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g(m + 1);
  Eigen::VectorXd r(n), w(n), z(n);

  apply_a(x, w);
  r = b - w;
  double beta = r.norm();
  res.residual = beta / bnorm;
  while (res.residual > opts.rtol && res.iterations < opts.maxit) {
    v[0] = r / beta;
    g.setZero();
    g(0) = beta;
    int j = 0;
    for (; j < m && res.iterations < opts.maxit; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      apply_m(v[ju], z);
      if (project) project(z);
      apply_a(z, w);
      for (int i = 0; i <= j; ++i) {
        h(i, j) = w.dot(v[static_cast<std::size_t>(i)]);
        w -= h(i, j) * v[static_cast<std::size_t>(i)];
      }
      h(j + 1, j) = w.norm();
      if (h(j + 1, j) > 0.0) v[ju + 1] = w / h(j + 1, j);
      for (int i = 0; i < j; ++i) {
        const double t = cs(i) * h(i, j) + sn(i) * h(i + 1, j);
        h(i + 1, j) = -sn(i) * h(i, j) + cs(i) * h(i + 1, j);
        h(i, j) = t;
      }
      const double denom = std::hypot(h(j, j), h(j + 1, j));
      cs(j) = denom == 0.0 ? 1.0 : h(j, j) / denom;
      sn(j) = denom == 0.0 ? 0.0 : h(j + 1, j) / denom;
      h(j, j) = denom;
      h(j + 1, j) = 0.0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = cs(j) * g(j);
      ++res.iterations;
      if (std::abs(g(j + 1)) / bnorm <= opts.rtol || denom == 0.0) {
        ++j;
        break;
      }
    }
    const Eigen::VectorXd y =
        h.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    r = y(0) * v[0];
    for (int i = 1; i < j; ++i) r += y(i) * v[static_cast<std::size_t>(i)];
    apply_m(r, z);
    if (project) project(z);
    x += z;
    apply_a(x, w);
    r = b - w;
    const double prev = beta;
    beta = r.norm();
    res.residual = beta / bnorm;
    if (beta >= prev && res.residual > opts.rtol) break;  // stagnation
  }
  res.converged = res.residual <= opts.rtol;
  if (!res.converged && opts.throw_on_failure) throw SolverError("gmres did not converge", res.iterations, res.residual);
  return res;
}

template <typename Operator>
GmresResult gmres(const Operator& apply_a, const Eigen::VectorXd& b, Eigen::VectorXd& x, const GmresOptions& opts) {
  return gmres(apply_a, b, x, identity_map, opts);
}

}  // namespace hdgeuler
