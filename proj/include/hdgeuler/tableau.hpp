#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hdgeuler {

/// IMEX Runge-Kutta coefficients. In the generic form used by the stepper,
/// stage 0 is the state at the start of the step: the first column of the
/// implicit matrix and b_im(0) vanish.
struct ButcherTableau {
  std::string name;
  Eigen::MatrixXd a_im, a_ex;
  Eigen::VectorXd b_im, b_ex, c;

  [[nodiscard]] int stages() const { return static_cast<int>(b_im.size()); }
  /// Throws std::invalid_argument unless the tableau has the generic form.
  void validate() const;
};

/// Tableau names shipped with the library.
std::vector<std::string> tableau_names();

/// Coefficients exactly as printed in the usual IMEX tables. The SSP tableaus
/// have an implicit first stage and are not in generic form.
ButcherTableau printed_tableau(const std::string& name);

/// Generic form: tableaus whose implicit part starts with a nonzero diagonal
/// are shifted by one stage, with a leading stage that is the state itself.
ButcherTableau to_generic(const ButcherTableau& printed);

/// The tableau used by the stepper: the printed coefficients in generic form.
ButcherTableau tableau(const std::string& name);

/// Residual recursion of the IMEX stages, expressed through the mass-weighted
/// stage values so that the implicit operator is never re-evaluated:
///   r_i = m0 + sum_{j=1}^{i-1} a_im(i,j)/a_im(j,j) (mq_j - r_j) + dt sum_{j<i} a_ex(i,j) fex_j
/// where m0 = M Q^n, mq_j = M Q_j and fex_j the explicit term at t^n + c_j dt.
template <typename Vector>
Vector imex_stage_residual(const ButcherTableau& tab, int i, double dt, const Vector& m0, const std::vector<Vector>& mq,
                           const std::vector<Vector>& r, const std::vector<Vector>& fex) {
  Vector out = m0;
  for (int j = 1; j < i; ++j) {
    const double aij = tab.a_im(i, j);
    if (aij == 0.0) continue;
    const double ajj = tab.a_im(j, j);
    if (ajj == 0.0) throw std::invalid_argument("imex residual: a_im(" + std::to_string(j) + "," + std::to_string(j) + ") = 0");
    out += (aij / ajj) * (mq[static_cast<std::size_t>(j)] - r[static_cast<std::size_t>(j)]);
  }
  for (int j = 0; j < i; ++j)
    if (tab.a_ex(i, j) != 0.0) out += (dt * tab.a_ex(i, j)) * fex[static_cast<std::size_t>(j)];
  return out;
}

/// Final residual: the same recursion with the b weights.
template <typename Vector>
Vector imex_final_residual(const ButcherTableau& tab, double dt, const Vector& m0, const std::vector<Vector>& mq,
                           const std::vector<Vector>& r, const std::vector<Vector>& fex) {
  Vector out = m0;
  const int s = tab.stages();
  for (int i = 1; i < s; ++i) {
    const double bi = tab.b_im(i);
    if (bi == 0.0) continue;
    const double aii = tab.a_im(i, i);
    if (aii == 0.0) throw std::invalid_argument("imex residual: a_im(" + std::to_string(i) + "," + std::to_string(i) + ") = 0");
    out += (bi / aii) * (mq[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)]);
  }
  for (int i = 0; i < s; ++i)
    if (tab.b_ex(i) != 0.0) out += (dt * tab.b_ex(i)) * fex[static_cast<std::size_t>(i)];
  return out;
}

/// Scalar test problem y' = lambda y + g(t) with the implicit part lambda y and
/// the explicit part g(t), advanced with the same recursion as the flow solver.
double integrate_scalar_imex(const ButcherTableau& tab, double lambda, const std::function<double(double)>& g,
                             double y0, double t_end, int steps);

}  // namespace hdgeuler
