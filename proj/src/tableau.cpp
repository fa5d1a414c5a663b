#include "hdgeuler/tableau.hpp"

namespace hdgeuler {

namespace {

constexpr double kSsp3Alpha = 0.24169426078821;
constexpr double kSsp3Beta = 0.06042356519705;
constexpr double kSsp3Eta = 0.12915286960590;

}  // namespace

void ButcherTableau::validate() const {
  const int s = stages();
  auto fail = [&](const std::string& what) { throw std::invalid_argument("tableau " + name + ": " + what); };
  if (s < 2) fail("needs at least two stages");
  if (a_im.rows() != s || a_im.cols() != s || a_ex.rows() != s || a_ex.cols() != s || b_ex.size() != s || c.size() != s)
    fail("inconsistent sizes");
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      if (j >= i && a_ex(i, j) != 0.0) fail("explicit part must be strictly lower triangular");
      if (j > i && a_im(i, j) != 0.0) fail("implicit part must be lower triangular");
    }
  for (int i = 0; i < s; ++i)
    if (a_im(i, 0) != 0.0) fail("implicit first column must vanish");
  if (b_im(0) != 0.0) fail("b_im(0) must vanish");
  for (int i = 1; i < s; ++i)
    if (a_im(i, i) == 0.0) fail("implicit diagonal must be nonzero beyond stage 0");
  if (std::abs(b_im.sum() - 1.0) > 1e-14 || std::abs(b_ex.sum() - 1.0) > 1e-14) fail("weights must sum to one");
}

std::vector<std::string> tableau_names() { return {"imex_euler", "ssp2_332", "ssp3_433"}; }

ButcherTableau printed_tableau(const std::string& name) {
  ButcherTableau t;
  t.name = name;
  if (name == "imex_euler") {
    t.a_ex.resize(2, 2);
    t.a_ex << 0, 0, 1, 0;
    t.a_im.resize(2, 2);
    t.a_im << 0, 0, 0, 1;
    t.b_ex = Eigen::Vector2d(1, 0);
    t.b_im = Eigen::Vector2d(0, 1);
    t.c = Eigen::Vector2d(0, 1);
  } else if (name == "ssp2_332") {
    t.a_ex.resize(3, 3);
    t.a_ex << 0, 0, 0, 0.5, 0, 0, 0.5, 0.5, 0;
    t.a_im.resize(3, 3);
    t.a_im << 0.25, 0, 0, 0, 0.25, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3;
    t.b_ex = Eigen::Vector3d::Constant(1.0 / 3);
    t.b_im = Eigen::Vector3d::Constant(1.0 / 3);
    t.c = Eigen::Vector3d(0, 1, 0.5);
  } else if (name == "ssp3_433") {
    const double a = kSsp3Alpha, b = kSsp3Beta, e = kSsp3Eta, d = 0.5 - a - b - e;
    t.a_ex.resize(4, 4);
    t.a_ex << 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0.25, 0.25, 0;
    t.a_im.resize(4, 4);
    t.a_im << a, 0, 0, 0, -a, a, 0, 0, 0, 1 - a, a, 0, b, e, d, a;
    t.b_ex = Eigen::Vector4d(0, 1.0 / 6, 1.0 / 6, 2.0 / 3);
    t.b_im = t.b_ex;
    t.c = Eigen::Vector4d(0, 0, 1, 0.5);
  } else {
    throw std::invalid_argument("unknown tableau: " + name);
  }
  return t;
}

ButcherTableau to_generic(const ButcherTableau& p) {
  const int s = static_cast<int>(p.b_im.size());
  bool shift = false;
  for (int i = 0; i < s; ++i) shift = shift || p.a_im(i, 0) != 0.0;
  shift = shift || p.b_im(0) != 0.0;
  if (!shift) return p;
  ButcherTableau g;
  g.name = p.name;
  g.a_im = Eigen::MatrixXd::Zero(s + 1, s + 1);
  g.a_ex = Eigen::MatrixXd::Zero(s + 1, s + 1);
  g.a_im.bottomRightCorner(s, s) = p.a_im;
  g.a_ex.bottomRightCorner(s, s) = p.a_ex;
  g.b_im = Eigen::VectorXd::Zero(s + 1);
  g.b_ex = Eigen::VectorXd::Zero(s + 1);
  g.c = Eigen::VectorXd::Zero(s + 1);
  g.b_im.tail(s) = p.b_im;
  g.b_ex.tail(s) = p.b_ex;
  g.c.tail(s) = p.c;
  return g;
}

ButcherTableau tableau(const std::string& name) {
  ButcherTableau t = to_generic(printed_tableau(name));
  t.validate();
  return t;
}

double integrate_scalar_imex(const ButcherTableau& tab, double lambda, const std::function<double(double)>& g,
                             double y0, double t_end, int steps) {
  tab.validate();
  const int s = tab.stages();
  const double dt = t_end / steps;
  double y = y0;
  std::vector<double> mq(static_cast<std::size_t>(s)), r(static_cast<std::size_t>(s)), fex(static_cast<std::size_t>(s));
  for (int n = 0; n < steps; ++n) {
    const double t = n * dt;
    mq[0] = y;
    for (int i = 0; i < s; ++i) fex[static_cast<std::size_t>(i)] = g(t + tab.c(i) * dt);
    for (int i = 1; i < s; ++i) {
      const double ri = imex_stage_residual(tab, i, dt, y, mq, r, fex);
      r[static_cast<std::size_t>(i)] = ri;
      mq[static_cast<std::size_t>(i)] = ri / (1.0 - dt * tab.a_im(i, i) * lambda);
    }
    y = imex_final_residual(tab, dt, y, mq, r, fex);
  }
  return y;
}

}  // namespace hdgeuler
