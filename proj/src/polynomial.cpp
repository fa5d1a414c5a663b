#include "hdgeuler/polynomial.hpp"

#include <cmath>
#include <stdexcept>

namespace hdgeuler {

namespace {

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

}  // namespace

LagrangeTriangle::LagrangeTriangle(int degree) : degree_(degree) {
  if (degree < 0) throw std::invalid_argument("LagrangeTriangle: negative degree");
  const int m = degree;
  for (int total = 0; total <= m; ++total) {
    for (int b = 0; b <= total; ++b) exponents_.emplace_back(total - b, b);
  }
  if (m == 0) {
    nodes_.emplace_back(1.0 / 3.0, 1.0 / 3.0);
    locations_.push_back({NodeLocation::Kind::interior, -1, 0.0});
  } else {
    for (int j = 0; j <= m; ++j) {
      for (int i = 0; i + j <= m; ++i) {
        nodes_.emplace_back(static_cast<double>(i) / m, static_cast<double>(j) / m);
        const int k = m - i - j;
        // barycentric weights of reference vertices 0, 1, 2 in lattice units
        const int bary[3] = {k, i, j};
        NodeLocation loc;
        int zeros = 0;
        for (int v = 0; v < 3; ++v) zeros += bary[v] == 0 ? 1 : 0;
        if (zeros == 2) {
          loc.kind = NodeLocation::Kind::vertex;
          for (int v = 0; v < 3; ++v)
            if (bary[v] == m) loc.entity = v;
        } else if (zeros == 1) {
          loc.kind = NodeLocation::Kind::edge;
          for (int e = 0; e < 3; ++e)
            if (bary[e] == 0) loc.entity = e;
          loc.edge_t = static_cast<double>(bary[(loc.entity + 2) % 3]) / m;
        }
        locations_.push_back(loc);
      }
    }
  }
  const int n = size();
  Eigen::MatrixXd vandermonde(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const auto [a, b] = exponents_[static_cast<std::size_t>(c)];
      vandermonde(r, c) = ipow(nodes_[static_cast<std::size_t>(r)].x(), a) * ipow(nodes_[static_cast<std::size_t>(r)].y(), b);
    }
  }
  coefficients_ = vandermonde.inverse();
}

Eigen::VectorXd LagrangeTriangle::values(const Vec2& xi) const {
  const int n = size();
  Eigen::VectorXd mono(n);
  for (int c = 0; c < n; ++c) {
    const auto [a, b] = exponents_[static_cast<std::size_t>(c)];
    mono(c) = ipow(xi.x(), a) * ipow(xi.y(), b);
  }
  return coefficients_.transpose() * mono;
}

Eigen::MatrixX2d LagrangeTriangle::gradients(const Vec2& xi) const {
  const int n = size();
  Eigen::MatrixX2d mono(n, 2);
  for (int c = 0; c < n; ++c) {
    const auto [a, b] = exponents_[static_cast<std::size_t>(c)];
    mono(c, 0) = a > 0 ? a * ipow(xi.x(), a - 1) * ipow(xi.y(), b) : 0.0;
    mono(c, 1) = b > 0 ? b * ipow(xi.x(), a) * ipow(xi.y(), b - 1) : 0.0;
  }
  return coefficients_.transpose() * mono;
}

LagrangeInterval::LagrangeInterval(int degree) : degree_(degree) {
  if (degree < 0) throw std::invalid_argument("LagrangeInterval: negative degree");
  if (degree == 0) {
    nodes_ = {0.5};
  } else {
    for (int i = 0; i <= degree; ++i) nodes_.push_back(static_cast<double>(i) / degree);
  }
  const int n = size();
  Eigen::MatrixXd vandermonde(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) vandermonde(r, c) = ipow(nodes_[static_cast<std::size_t>(r)], c);
  coefficients_ = vandermonde.inverse();
}

Eigen::VectorXd LagrangeInterval::values(double s) const {
  const int n = size();
  Eigen::VectorXd mono(n);
  for (int c = 0; c < n; ++c) mono(c) = ipow(s, c);
  return coefficients_.transpose() * mono;
}

}  // namespace hdgeuler
