#include "hdgeuler/ilu0.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hdgeuler {

Ilu0::Ilu0(const RowMatrix& a) { compute(a); }

void Ilu0::compute(const RowMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("Ilu0: matrix must be square");
  lu_ = a;
  lu_.makeCompressed();
  const int n = static_cast<int>(lu_.rows());
  const int* outer = lu_.outerIndexPtr();
  const int* inner = lu_.innerIndexPtr();
  double* val = lu_.valuePtr();
  diag_.assign(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i)
    for (int p = outer[i]; p < outer[i + 1]; ++p)
      if (inner[p] == i) diag_[static_cast<std::size_t>(i)] = p;

  std::vector<int> where(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    if (diag_[static_cast<std::size_t>(i)] < 0) throw std::runtime_error("Ilu0: missing diagonal in row " + std::to_string(i));
    for (int p = outer[i]; p < outer[i + 1]; ++p) where[static_cast<std::size_t>(inner[p])] = p;
    for (int p = outer[i]; p < outer[i + 1] && inner[p] < i; ++p) {
      const int k = inner[p];
      val[p] /= val[diag_[static_cast<std::size_t>(k)]];
      const double lik = val[p];
      for (int q = diag_[static_cast<std::size_t>(k)] + 1; q < outer[k + 1]; ++q) {
        const int w = where[static_cast<std::size_t>(inner[q])];
        if (w >= 0) val[w] -= lik * val[q];
      }
    }
    for (int p = outer[i]; p < outer[i + 1]; ++p) where[static_cast<std::size_t>(inner[p])] = -1;
    const double pivot = val[diag_[static_cast<std::size_t>(i)]];
    if (pivot == 0.0 || !std::isfinite(pivot)) throw std::runtime_error("Ilu0: zero pivot in row " + std::to_string(i));
  }

  const auto un = static_cast<std::size_t>(n);
  l_outer_.assign(un + 1, 0);
  u_outer_.assign(un + 1, 0);
  l_inner_.clear();
  u_inner_.clear();
  l_values_.clear();
  u_values_.clear();
  inv_diag_.resize(un);
  for (int i = 0; i < n; ++i) {
    const auto d = diag_[static_cast<std::size_t>(i)];
    for (int p = outer[i]; p < d; ++p) {
      l_inner_.push_back(inner[p]);
      l_values_.push_back(val[p]);
    }
    for (int p = d + 1; p < outer[i + 1]; ++p) {
      u_inner_.push_back(inner[p]);
      u_values_.push_back(val[p]);
    }
    inv_diag_[static_cast<std::size_t>(i)] = 1.0 / val[d];
    l_outer_[static_cast<std::size_t>(i) + 1] = static_cast<int>(l_inner_.size());
    u_outer_[static_cast<std::size_t>(i) + 1] = static_cast<int>(u_inner_.size());
  }
}

Eigen::VectorXd Ilu0::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x;
  apply(b, x);
  return x;
}

void Ilu0::apply(const Eigen::VectorXd& b, Eigen::VectorXd& x) const {
  const auto n = static_cast<int>(inv_diag_.size());
  x = b;
  double* xp = x.data();
  for (int i = 0; i < n; ++i) {
    double s = xp[i];
    for (int p = l_outer_[static_cast<std::size_t>(i)]; p < l_outer_[static_cast<std::size_t>(i) + 1]; ++p)
      s -= l_values_[static_cast<std::size_t>(p)] * xp[l_inner_[static_cast<std::size_t>(p)]];
    xp[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = xp[i];
    for (int p = u_outer_[static_cast<std::size_t>(i)]; p < u_outer_[static_cast<std::size_t>(i) + 1]; ++p)
      s -= u_values_[static_cast<std::size_t>(p)] * xp[u_inner_[static_cast<std::size_t>(p)]];
    xp[i] = s * inv_diag_[static_cast<std::size_t>(i)];
  }
}

}  // namespace hdgeuler
