#include "hdgeuler/forms.hpp"

#include <cmath>
#include <stdexcept>

namespace hdgeuler {

namespace {

// Physical gradients (nb x 2) from reference gradients.
Eigen::MatrixX2d physical_gradients(const Eigen::MatrixX2d& ref, const Cell& cell) {
  return ref * cell.inv_jacobian_t.transpose();
}

int default_quad_degree(int k) { return 3 * (k + 1); }

}  // namespace

Discretisation::Discretisation(std::shared_ptr<const Mesh> mesh, int k, FormParams params, int quad_degree)
    : mesh_(std::move(mesh)),
      k_(k),
      params_(params),
      qdeg_(quad_degree > 0 ? quad_degree : default_quad_degree(k)),
      vq_(Space::make(mesh_, Family::dg_vector, k + 1)),
      vp_(Space::make(mesh_, Family::dg_scalar, k)),
      vt_(Space::make(mesh_, Family::trace, k)),
      tab_q_(vq_->basis(), qdeg_),
      tab_p_(vp_->basis(), qdeg_),
      etab_q_(vq_->basis(), qdeg_),
      etab_p_(vp_->basis(), qdeg_),
      trace_vals_(tabulate_facet_basis(vt_->facet_basis(), etab_q_.rule)) {
  if (k < 0) throw std::invalid_argument("Discretisation: k must be >= 0");
  if (!(params.alpha > 0.0) || !(params.tau > 0.0))
    throw std::invalid_argument("Discretisation: alpha and tau must be positive");
}

Eigen::VectorXd Discretisation::cell_coefficients(const Field& f, int c) {
  const auto dofs = f.space().cell_dofs(c);
  Eigen::VectorXd out(static_cast<Eigen::Index>(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i) out(static_cast<Eigen::Index>(i)) = f.coefficients()(dofs[i]);
  return out;
}

MixedBlocks assemble_mixed_blocks(const Discretisation& disc) {
  const Mesh& mesh = disc.mesh();
  const int nbq = disc.nbq();
  const int nq = disc.nq();
  const int np = disc.np();
  const int nt = disc.nt();
  const int nl = 3 * nt;
  const double tau = disc.params().tau;
  const auto& tq = disc.velocity_tab();
  const auto& tp = disc.pressure_tab();
  const auto& frule = disc.facet_rule();
  const auto& mu = disc.trace_values();

  MixedBlocks out;
  out.nq = nq;
  out.np = np;
  out.nl = nl;
  out.num_q = disc.num_velocity_dofs();
  out.num_p = disc.num_pressure_dofs();
  out.num_l = disc.num_trace_dofs();
  out.cells.resize(static_cast<std::size_t>(mesh.num_cells()));
  out.trace_map.resize(static_cast<std::size_t>(mesh.num_cells() * nl));

  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(c);
    LocalMixedBlocks& b = out.cells[static_cast<std::size_t>(c)];
    b.M = Eigen::MatrixXd::Zero(nq, nq);
    b.Gp = Eigen::MatrixXd::Zero(nq, np);
    b.D = Eigen::MatrixXd::Zero(np, nq);
    b.Gl = Eigen::MatrixXd::Zero(nq, nl);
    b.B = Eigen::MatrixXd::Zero(nl, nq);
    b.Cpp = Eigen::MatrixXd::Zero(np, np);
    b.Cpl = Eigen::MatrixXd::Zero(np, nl);
    b.Clp = Eigen::MatrixXd::Zero(nl, np);
    b.Cll = Eigen::MatrixXd::Zero(nl, nl);

    for (std::size_t q = 0; q < tq.rule.weights.size(); ++q) {
      const double w = tq.rule.weights[q] * cell.det_jacobian;
      const auto qi = static_cast<Eigen::Index>(q);
      const Eigen::VectorXd phi = tq.values.row(qi).transpose();
      const Eigen::VectorXd psi = tp.values.row(qi).transpose();
      const Eigen::MatrixX2d dphi = physical_gradients(tq.gradients[q], cell);
      const Eigen::MatrixXd mass = w * phi * phi.transpose();
      b.M.block(0, 0, nbq, nbq) += mass;
      b.M.block(nbq, nbq, nbq, nbq) += mass;
      // (p div w): rows w, columns p
      for (int comp = 0; comp < 2; ++comp) b.Gp.block(comp * nbq, 0, nbq, np) += w * dphi.col(comp) * psi.transpose();
      // (psi div Q): rows psi, columns Q
      for (int comp = 0; comp < 2; ++comp) b.D.block(0, comp * nbq, np, nbq) += w * psi * dphi.col(comp).transpose();
    }

    for (int e = 0; e < 3; ++e) {
      const int f = cell.facets[static_cast<std::size_t>(e)];
      const Facet& facet = mesh.facet(f);
      const FacetSide& side = mesh.side_of(f, c);
      const Vec2 n = cell.normal(e);
      const Eigen::MatrixXd& phi_e = disc.velocity_edge_tab().at(e, side.reversed);
      const Eigen::MatrixXd& psi_e = disc.pressure_edge_tab().at(e, side.reversed);
      for (int j = 0; j < nt; ++j) out.trace_map[static_cast<std::size_t>(c * nl + e * nt + j)] = f * nt + j;
      for (std::size_t q = 0; q < frule.weights.size(); ++q) {
        const auto qi = static_cast<Eigen::Index>(q);
        const double w = frule.weights[q] * facet.length;
        const Eigen::VectorXd phi = phi_e.row(qi).transpose();
        const Eigen::VectorXd psi = psi_e.row(qi).transpose();
        const Eigen::VectorXd m = mu.row(qi).transpose();
        for (int comp = 0; comp < 2; ++comp) {
          b.Gl.block(comp * nbq, e * nt, nbq, nt) -= (w * n[comp]) * phi * m.transpose();
          b.B.block(e * nt, comp * nbq, nt, nbq) += (w * n[comp]) * m * phi.transpose();
        }
        b.Cpp += (tau * w) * psi * psi.transpose();
        b.Cpl.block(0, e * nt, np, nt) -= (tau * w) * psi * m.transpose();
        b.Clp.block(e * nt, 0, nt, np) += (tau * w) * m * psi.transpose();
        b.Cll.block(e * nt, e * nt, nt, nt) -= (tau * w) * m * m.transpose();
      }
    }
  }
  return out;
}

GlobalMixedMatrices assemble_global(const MixedBlocks& blocks) {
  const int nc = static_cast<int>(blocks.cells.size());
  Triplets tM, tGp, tGl, tD, tB, tCpp, tCpl, tClp, tCll;
  auto scatter = [](Triplets& t, const Eigen::MatrixXd& m, auto row_of, auto col_of) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (m(i, j) != 0.0) t.emplace_back(row_of(static_cast<int>(i)), col_of(static_cast<int>(j)), m(i, j));
  };
  for (int c = 0; c < nc; ++c) {
    const auto& b = blocks.cells[static_cast<std::size_t>(c)];
    auto qi = [&](int i) { return c * blocks.nq + i; };
    auto pi = [&](int i) { return c * blocks.np + i; };
    auto li = [&](int i) { return blocks.trace_dof(c, i); };
    scatter(tM, b.M, qi, qi);
    scatter(tGp, b.Gp, qi, pi);
    scatter(tGl, b.Gl, qi, li);
    scatter(tD, b.D, pi, qi);
    scatter(tB, b.B, li, qi);
    scatter(tCpp, b.Cpp, pi, pi);
    scatter(tCpl, b.Cpl, pi, li);
    scatter(tClp, b.Clp, li, pi);
    scatter(tCll, b.Cll, li, li);
  }
  auto build = [](int r, int c, const Triplets& t) {
    SparseMatrix m(r, c);
    m.setFromTriplets(t.begin(), t.end());
    return m;
  };
  GlobalMixedMatrices g;
  g.M = build(blocks.num_q, blocks.num_q, tM);
  g.Gp = build(blocks.num_q, blocks.num_p, tGp);
  g.Gl = build(blocks.num_q, blocks.num_l, tGl);
  g.D = build(blocks.num_p, blocks.num_q, tD);
  g.B = build(blocks.num_l, blocks.num_q, tB);
  g.Cpp = build(blocks.num_p, blocks.num_p, tCpp);
  g.Cpl = build(blocks.num_p, blocks.num_l, tCpl);
  g.Clp = build(blocks.num_l, blocks.num_p, tClp);
  g.Cll = build(blocks.num_l, blocks.num_l, tCll);
  return g;
}

CellBlockMatrix assemble_velocity_mass(const Discretisation& disc) {
  const Mesh& mesh = disc.mesh();
  const int nbq = disc.nbq();
  const auto& tq = disc.velocity_tab();
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(nbq, nbq);
  for (std::size_t q = 0; q < tq.rule.weights.size(); ++q) {
    const auto row = tq.values.row(static_cast<Eigen::Index>(q));
    ref.noalias() += tq.rule.weights[q] * row.transpose() * row;
  }
  CellBlockMatrix out(mesh, disc.nq());
  Eigen::MatrixXd local = Eigen::MatrixXd::Zero(disc.nq(), disc.nq());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double det = mesh.cell(c).det_jacobian;
    local.block(0, 0, nbq, nbq) = det * ref;
    local.block(nbq, nbq, nbq, nbq) = det * ref;
    out.add_block(c, c, local);
  }
  return out;
}

Eigen::VectorXd apply_velocity_mass(const MixedBlocks& blocks, const Eigen::VectorXd& q) {
  Eigen::VectorXd out(q.size());
  for (std::size_t c = 0; c < blocks.cells.size(); ++c) {
    const auto off = static_cast<Eigen::Index>(c) * blocks.nq;
    out.segment(off, blocks.nq).noalias() = blocks.cells[c].M * q.segment(off, blocks.nq);
  }
  return out;
}

void assemble_advection(const Discretisation& disc, const Field& qstar, CellBlockMatrix& out) {
  const Mesh& mesh = disc.mesh();
  const int nbq = disc.nbq();
  const int nq = disc.nq();
  const auto& tq = disc.velocity_tab();
  const auto& frule = disc.facet_rule();
  const double alpha = disc.params().alpha;
  const double delta_up = disc.params().upwind ? 1.0 : 0.0;
  if (qstar.space().total_dofs() != disc.num_velocity_dofs() || qstar.space().degree() != disc.k() + 1)
    throw std::invalid_argument("assemble_advection: advecting velocity has the wrong layout");
  out.set_zero();

  Eigen::MatrixXd local(nq, nq);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(c);
    const Eigen::VectorXd qs = Discretisation::cell_coefficients(qstar, c);
    Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(nbq, nbq);
    for (std::size_t q = 0; q < tq.rule.weights.size(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      const double w = tq.rule.weights[q] * cell.det_jacobian;
      const Eigen::VectorXd phi = tq.values.row(qi).transpose();
      const Vec2 u(phi.dot(qs.head(nbq)), phi.dot(qs.tail(nbq)));
      const Eigen::MatrixX2d dphi = physical_gradients(tq.gradients[q], cell);
      // -(w . (u . grad) Q)
      blk.noalias() -= w * phi * (dphi * u).transpose();
    }
    local.setZero();
    local.block(0, 0, nbq, nbq) = blk;
    local.block(nbq, nbq, nbq, nbq) = blk;
    out.add_block(c, c, local);
  }

  std::array<Eigen::MatrixXd, 4> pair;  // (test side, trial side): ++, +-, -+, --
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facet(f);
    const double hinv = 1.0 / facet.length;
    const Vec2& n = facet.normal;
    const FacetSide& sp = facet.plus;
    const Eigen::MatrixXd& phi_p = disc.velocity_edge_tab().at(sp.local_edge, sp.reversed);
    if (facet.is_boundary()) {
      local.setZero();
      for (std::size_t q = 0; q < frule.weights.size(); ++q) {
        const auto qi = static_cast<Eigen::Index>(q);
        const double w = frule.weights[q] * facet.length;
        const Eigen::VectorXd phi = phi_p.row(qi).transpose();
        const Eigen::MatrixXd pp = phi * phi.transpose();
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) local.block(a * nbq, b * nbq, nbq, nbq) -= (alpha * hinv * w * n[a] * n[b]) * pp;
      }
      out.add_block(sp.cell, sp.cell, local);
      continue;
    }
    const FacetSide& sm = *facet.minus;
    const Eigen::MatrixXd& phi_m = disc.velocity_edge_tab().at(sm.local_edge, sm.reversed);
    const Eigen::VectorXd qs_p = Discretisation::cell_coefficients(qstar, sp.cell);
    const Eigen::VectorXd qs_m = Discretisation::cell_coefficients(qstar, sm.cell);
    for (auto& m : pair) m = Eigen::MatrixXd::Zero(nq, nq);
    for (std::size_t q = 0; q < frule.weights.size(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      const double w = frule.weights[q] * facet.length;
      const Eigen::VectorXd ph[2] = {phi_p.row(qi).transpose(), phi_m.row(qi).transpose()};
      const Vec2 up(ph[0].dot(qs_p.head(nbq)), ph[0].dot(qs_p.tail(nbq)));
      const Vec2 um(ph[1].dot(qs_m.head(nbq)), ph[1].dot(qs_m.tail(nbq)));
      const double u = 0.5 * (up + um).dot(n);
      for (int sw = 0; sw < 2; ++sw) {
        const double sign_w = sw == 0 ? 1.0 : -1.0;
        for (int sq = 0; sq < 2; ++sq) {
          const double sign_q = sq == 0 ? 1.0 : -1.0;
          const Eigen::MatrixXd pp = ph[sw] * ph[sq].transpose();
          Eigen::MatrixXd& m = pair[static_cast<std::size_t>(2 * sw + sq)];
          const double adv = w * sign_q * (0.5 * u - delta_up * std::abs(u) * sign_w);
          for (int a = 0; a < 2; ++a) {
            m.block(a * nbq, a * nbq, nbq, nbq) += adv * pp;
            for (int b = 0; b < 2; ++b)
              m.block(a * nbq, b * nbq, nbq, nbq) -= (alpha * hinv * w * sign_q * sign_w * n[a] * n[b]) * pp;
          }
        }
      }
    }
    const int cells[2] = {sp.cell, sm.cell};
    for (int sw = 0; sw < 2; ++sw)
      for (int sq = 0; sq < 2; ++sq) out.add_block(cells[sw], cells[sq], pair[static_cast<std::size_t>(2 * sw + sq)]);
  }
}

CellBlockMatrix assemble_advection(const Discretisation& disc, const Field& qstar) {
  CellBlockMatrix out(disc.mesh(), disc.nq());
  assemble_advection(disc, qstar, out);
  return out;
}

Eigen::VectorXd assemble_forcing(const Discretisation& disc, const MixedBlocks& blocks, const TimeVectorFunction& f,
                                 double t) {
  const Field fi = interpolate(disc.velocity_space(), VectorFunction([&](const Vec2& x) { return f(x, t); }));
  return apply_velocity_mass(blocks, fi.coefficients());
}

Eigen::VectorXd assemble_boundary_normal_load(const Discretisation& disc, const TimeVectorFunction& f, double t) {
  const Mesh& mesh = disc.mesh();
  const int nt = disc.nt();
  const auto& rule = disc.facet_rule();
  const Eigen::MatrixXd& mu = disc.trace_values();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(disc.num_trace_dofs());
  for (int fi = 0; fi < mesh.num_facets(); ++fi) {
    const Facet& facet = mesh.facet(fi);
    if (!facet.is_boundary()) continue;
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const double fn = f(facet.point(rule.points[q]), t).dot(facet.normal);
      out.segment(static_cast<Eigen::Index>(fi) * nt, nt) +=
          (rule.weights[q] * facet.length * fn) * mu.row(static_cast<Eigen::Index>(q)).transpose();
    }
  }
  return out;
}

SparseMatrix assemble_weak_divergence(const Discretisation& disc) {
  const Mesh& mesh = disc.mesh();
  const int nbq = disc.nbq();
  const int nq = disc.nq();
  const int np = disc.np();
  const auto& tq = disc.velocity_tab();
  const auto& tp = disc.pressure_tab();
  const auto& frule = disc.facet_rule();
  Triplets trips;
  auto add = [&](int cp, int cq, const Eigen::MatrixXd& m) {
    for (int i = 0; i < np; ++i)
      for (int j = 0; j < nq; ++j)
        if (m(i, j) != 0.0) trips.emplace_back(cp * np + i, cq * nq + j, m(i, j));
  };
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(c);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(np, nq);
    for (std::size_t q = 0; q < tq.rule.weights.size(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      const double w = tq.rule.weights[q] * cell.det_jacobian;
      const Eigen::VectorXd psi = tp.values.row(qi).transpose();
      const Eigen::MatrixX2d dphi = physical_gradients(tq.gradients[q], cell);
      for (int comp = 0; comp < 2; ++comp) m.block(0, comp * nbq, np, nbq) += w * psi * dphi.col(comp).transpose();
    }
    add(c, c, m);
  }
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facet(f);
    const Vec2& n = facet.normal;
    const FacetSide* sides[2] = {&facet.plus, facet.minus ? &*facet.minus : nullptr};
    const int count = facet.is_boundary() ? 1 : 2;
    for (int a = 0; a < count; ++a) {
      for (int b = 0; b < count; ++b) {
        const FacetSide& sa = *sides[a];
        const FacetSide& sb = *sides[b];
        const Eigen::MatrixXd& psi_e = disc.pressure_edge_tab().at(sa.local_edge, sa.reversed);
        const Eigen::MatrixXd& phi_e = disc.velocity_edge_tab().at(sb.local_edge, sb.reversed);
        // interior: -2 <(avg(psi Z) - avg(psi) avg(Z)) . n+> = -1/2 <(psi+ - psi-)(Z+ - Z-) . n+>
        // boundary: -<psi Z . n>
        const double coef = facet.is_boundary() ? -1.0 : -0.5 * (a == 0 ? 1.0 : -1.0) * (b == 0 ? 1.0 : -1.0);
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(np, nq);
        for (std::size_t q = 0; q < frule.weights.size(); ++q) {
          const auto qi = static_cast<Eigen::Index>(q);
          const double w = coef * frule.weights[q] * facet.length;
          const Eigen::VectorXd psi = psi_e.row(qi).transpose();
          const Eigen::VectorXd phi = phi_e.row(qi).transpose();
          for (int comp = 0; comp < 2; ++comp) m.block(0, comp * nbq, np, nbq) += (w * n[comp]) * psi * phi.transpose();
        }
        add(sa.cell, sb.cell, m);
      }
    }
  }
  SparseMatrix out(disc.num_pressure_dofs(), disc.num_velocity_dofs());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

SparseMatrix assemble_dg_pressure_gradient(const Discretisation& disc) {
  const Mesh& mesh = disc.mesh();
  const int nbq = disc.nbq();
  const int nq = disc.nq();
  const int np = disc.np();
  const auto& tq = disc.velocity_tab();
  const auto& tp = disc.pressure_tab();
  const auto& frule = disc.facet_rule();
  Triplets trips;
  auto add = [&](int cq, int cp, const Eigen::MatrixXd& m) {
    for (int i = 0; i < nq; ++i)
      for (int j = 0; j < np; ++j)
        if (m(i, j) != 0.0) trips.emplace_back(cq * nq + i, cp * np + j, m(i, j));
  };
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(c);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nq, np);
    for (std::size_t q = 0; q < tq.rule.weights.size(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      const double w = tq.rule.weights[q] * cell.det_jacobian;
      const Eigen::VectorXd psi = tp.values.row(qi).transpose();
      const Eigen::MatrixX2d dphi = physical_gradients(tq.gradients[q], cell);
      for (int comp = 0; comp < 2; ++comp) m.block(comp * nbq, 0, nbq, np) += w * dphi.col(comp) * psi.transpose();
    }
    add(c, c, m);
  }
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facet(f);
    const Vec2& n = facet.normal;
    const FacetSide* sides[2] = {&facet.plus, facet.minus ? &*facet.minus : nullptr};
    const int count = facet.is_boundary() ? 1 : 2;
    for (int a = 0; a < count; ++a) {
      for (int b = 0; b < count; ++b) {
        const FacetSide& sw = *sides[a];
        const FacetSide& sp = *sides[b];
        const Eigen::MatrixXd& phi_e = disc.velocity_edge_tab().at(sw.local_edge, sw.reversed);
        const Eigen::MatrixXd& psi_e = disc.pressure_edge_tab().at(sp.local_edge, sp.reversed);
        // interior: -<jump(w . n) avg(p)>, boundary: -<(w . n) p>
        const double coef = facet.is_boundary() ? -1.0 : -0.5 * (a == 0 ? 1.0 : -1.0);
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nq, np);
        for (std::size_t q = 0; q < frule.weights.size(); ++q) {
          const auto qi = static_cast<Eigen::Index>(q);
          const double w = coef * frule.weights[q] * facet.length;
          const Eigen::VectorXd phi = phi_e.row(qi).transpose();
          const Eigen::VectorXd psi = psi_e.row(qi).transpose();
          for (int comp = 0; comp < 2; ++comp) m.block(comp * nbq, 0, nbq, np) += (w * n[comp]) * phi * psi.transpose();
        }
        add(sw.cell, sp.cell, m);
      }
    }
  }
  SparseMatrix out(disc.num_velocity_dofs(), disc.num_pressure_dofs());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

Field compute_fp(const Field& q, const TimeVectorFunction& f, double t) {
  const Space& sp = q.space();
  if (sp.family() != Family::dg_vector) throw std::invalid_argument("compute_fp: dg_vector field expected");
  const Mesh& mesh = sp.mesh();
  const int nb = sp.local_size();
  const LagrangeTriangle& basis = sp.basis();
  std::vector<Eigen::MatrixX2d> node_grads;
  for (const auto& xi : basis.nodes()) node_grads.push_back(basis.gradients(xi));
  Field out(q.space_ptr());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(c);
    const auto dofs = sp.cell_dofs(c);
    Eigen::VectorXd qx(nb), qy(nb);
    for (int i = 0; i < nb; ++i) {
      qx(i) = q.coefficients()(dofs[static_cast<std::size_t>(i)]);
      qy(i) = q.coefficients()(dofs[static_cast<std::size_t>(nb + i)]);
    }
    for (int i = 0; i < nb; ++i) {
      const Eigen::MatrixX2d g = physical_gradients(node_grads[static_cast<std::size_t>(i)], cell);
      const Vec2 gx = g.transpose() * qx;  // grad of x-component
      const Vec2 gy = g.transpose() * qy;
      const Vec2 u(qx(i), qy(i));
      const Vec2 x = cell.map(basis.nodes()[static_cast<std::size_t>(i)]);
      const Vec2 fp = -f(x, t) + Vec2(u.dot(gx), u.dot(gy));
      out.coefficients()(dofs[static_cast<std::size_t>(i)]) = fp.x();
      out.coefficients()(dofs[static_cast<std::size_t>(nb + i)]) = fp.y();
    }
  }
  return out;
}

Eigen::VectorXd constraint_residual(const MixedBlocks& blocks, const Eigen::VectorXd& q, const Eigen::VectorXd& p,
                                    const Eigen::VectorXd& l) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(blocks.num_p + blocks.num_l);
  Eigen::VectorXd lc(blocks.nl);
  for (std::size_t c = 0; c < blocks.cells.size(); ++c) {
    const auto& b = blocks.cells[c];
    const int ci = static_cast<int>(c);
    const auto qc = q.segment(static_cast<Eigen::Index>(c) * blocks.nq, blocks.nq);
    const auto pc = p.segment(static_cast<Eigen::Index>(c) * blocks.np, blocks.np);
    for (int j = 0; j < blocks.nl; ++j) lc(j) = l(blocks.trace_dof(ci, j));
    out.segment(static_cast<Eigen::Index>(c) * blocks.np, blocks.np) += b.D * qc + b.Cpp * pc + b.Cpl * lc;
    const Eigen::VectorXd mu = b.B * qc + b.Clp * pc + b.Cll * lc;
    for (int j = 0; j < blocks.nl; ++j) out(blocks.num_p + blocks.trace_dof(ci, j)) += mu(j);
  }
  return out;
}

Eigen::VectorXd apply_pressure_gradient(const MixedBlocks& blocks, const Eigen::VectorXd& p, const Eigen::VectorXd& l) {
  Eigen::VectorXd out(blocks.num_q);
  Eigen::VectorXd lc(blocks.nl);
  for (std::size_t c = 0; c < blocks.cells.size(); ++c) {
    const auto& b = blocks.cells[c];
    for (int j = 0; j < blocks.nl; ++j) lc(j) = l(blocks.trace_dof(static_cast<int>(c), j));
    out.segment(static_cast<Eigen::Index>(c) * blocks.nq, blocks.nq) =
        b.Gp * p.segment(static_cast<Eigen::Index>(c) * blocks.np, blocks.np) + b.Gl * lc;
  }
  return out;
}

TracerAdvection::TracerAdvection(std::shared_ptr<const Mesh> mesh, int tracer_degree, int velocity_degree)
    : mesh_(std::move(mesh)),
      space_(Space::make(mesh_, Family::dg_scalar, tracer_degree)),
      velocity_degree_(velocity_degree),
      ubasis_(velocity_degree),
      tab_(space_->basis(), 2 * tracer_degree + velocity_degree + 1),
      etab_(space_->basis(), 2 * tracer_degree + velocity_degree + 1),
      utab_(ubasis_, 2 * tracer_degree + velocity_degree + 1),
      uetab_(ubasis_, 2 * tracer_degree + velocity_degree + 1),
      mass_(*mesh_, space_->local_size()) {
  const int nb = space_->local_size();
  for (int c = 0; c < mesh_->num_cells(); ++c) {
    const double det = mesh_->cell(c).det_jacobian;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nb, nb);
    for (std::size_t q = 0; q < tab_.rule.weights.size(); ++q) {
      const auto row = tab_.values.row(static_cast<Eigen::Index>(q));
      m.noalias() += (tab_.rule.weights[q] * det) * row.transpose() * row;
    }
    mass_.add_block(c, c, m);
    inverse_mass_.push_back(m.inverse());
  }
}

void TracerAdvection::assemble(const Field& u, CellBlockMatrix& out) const {
  if (u.space().family() != Family::cg_vector || u.space().degree() != velocity_degree_)
    throw std::invalid_argument("TracerAdvection: continuous velocity of the configured degree expected");
  const Mesh& mesh = *mesh_;
  const int nb = space_->local_size();
  const int nu = ubasis_.size();
  out.set_zero();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(c);
    const Eigen::VectorXd uc = Discretisation::cell_coefficients(u, c);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nb, nb);
    for (std::size_t q = 0; q < tab_.rule.weights.size(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      const double w = tab_.rule.weights[q] * cell.det_jacobian;
      const Eigen::VectorXd chi = tab_.values.row(qi).transpose();
      const Eigen::MatrixX2d dchi = physical_gradients(tab_.gradients[q], cell);
      const Eigen::VectorXd phu = utab_.values.row(qi).transpose();
      const Eigen::MatrixX2d dphu = physical_gradients(utab_.gradients[q], cell);
      const Vec2 uq(phu.dot(uc.head(nu)), phu.dot(uc.tail(nu)));
      const double divu = dphu.col(0).dot(uc.head(nu)) + dphu.col(1).dot(uc.tail(nu));
      // rows chi, columns q: q (grad chi . U + chi div U)
      m.noalias() += w * (dchi * uq + divu * chi) * chi.transpose();
    }
    out.add_block(c, c, m);
  }
  const auto& rule = etab_.rule;
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facet(f);
    if (facet.is_boundary()) continue;
    const FacetSide& sp = facet.plus;
    const FacetSide& sm = *facet.minus;
    const Eigen::VectorXd up_coeffs = Discretisation::cell_coefficients(u, sp.cell);
    const Eigen::MatrixXd& chi_p = etab_.at(sp.local_edge, sp.reversed);
    const Eigen::MatrixXd& chi_m = etab_.at(sm.local_edge, sm.reversed);
    const Eigen::MatrixXd& phu = uetab_.at(sp.local_edge, sp.reversed);
    std::array<Eigen::MatrixXd, 4> pair;
    for (auto& m : pair) m = Eigen::MatrixXd::Zero(nb, nb);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      const double w = rule.weights[q] * facet.length;
      const Eigen::VectorXd pu = phu.row(qi).transpose();
      const double un = Vec2(pu.dot(up_coeffs.head(nu)), pu.dot(up_coeffs.tail(nu))).dot(facet.normal);
      const int upwind = un >= 0.0 ? 0 : 1;
      const Eigen::VectorXd ch[2] = {chi_p.row(qi).transpose(), chi_m.row(qi).transpose()};
      for (int sw = 0; sw < 2; ++sw) {
        const double sign = sw == 0 ? 1.0 : -1.0;
        // -q_up (chi+ - chi-) (U . n+)
        pair[static_cast<std::size_t>(2 * sw + upwind)].noalias() -= (w * sign * un) * ch[sw] * ch[upwind].transpose();
      }
    }
    const int cells[2] = {sp.cell, sm.cell};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) out.add_block(cells[a], cells[b], pair[static_cast<std::size_t>(2 * a + b)]);
  }
}

CellBlockMatrix TracerAdvection::assemble(const Field& u) const {
  CellBlockMatrix out(*mesh_, space_->local_size());
  assemble(u, out);
  return out;
}

Eigen::VectorXd TracerAdvection::solve_mass(const Eigen::VectorXd& rhs) const {
  const int nb = space_->local_size();
  Eigen::VectorXd out(rhs.size());
  for (std::size_t c = 0; c < inverse_mass_.size(); ++c) {
    const auto off = static_cast<Eigen::Index>(c) * nb;
    out.segment(off, nb).noalias() = inverse_mass_[c] * rhs.segment(off, nb);
  }
  return out;
}

}  // namespace hdgeuler
