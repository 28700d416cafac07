#include "semidirac/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>

#include "semidirac/errors.hpp"

namespace semidirac {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double kSymmetrizationLimit = 1e-13;

struct XTerm {
  int ai;
  double coeff;
};
// x part of (-d_x^2 + delta) at active column ai, potentials excluded.
using XStencil = std::function<void(int ai, std::vector<XTerm>& out)>;

struct Onsite {
  cplx m11{}, m12{}, m21{}, m22{};
};
using OnsiteFn = std::function<Onsite(int ai, int aj)>;

// First-derivative SBP row at active row aj: pairs (aj', coeff).
void dy_row(int aj, int nya, double hy, std::vector<std::pair<int, double>>& out) {
  out.clear();
  if (aj == 0) {
    out.push_back({1, 1.0 / hy});
    out.push_back({0, -1.0 / hy});
    return;
  }
  if (aj + 1 < nya) out.push_back({aj + 1, 0.5 / hy});
  out.push_back({aj - 1, -0.5 / hy});
}

XStencil laplace_stencil(int nxa, double hx, double delta) {
  const double off = -1.0 / (hx * hx);
  const double diag = 2.0 / (hx * hx) + delta;
  return [=](int ai, std::vector<XTerm>& out) {
    out.clear();
    if (ai > 0) out.push_back({ai - 1, off});
    out.push_back({ai, diag});
    if (ai + 1 < nxa) out.push_back({ai + 1, off});
  };
}

CsrMatrix symmetrize(const CsrMatrix& m, double& correction) {
  CsrMatrix h = m.hermitian_part();
  const double scale = std::max(m.max_abs(), 1e-300);
  double defect = 0.0;
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k)
      defect = std::max(defect, std::abs(m.values()[k] - h.at(r, m.cols()[k])));
  correction = defect / scale;
  if (correction > kSymmetrizationLimit)
    throw Error("assembled matrix is not Hermitian: relative correction " +
                std::to_string(correction));
  return h;
}

HermitianOperator build_first_order(const ActiveLayout& layout, double hy, const XStencil& xs,
                                    const OnsiteFn& onsite, double cell_weight,
                                    std::optional<Grid2D> grid) {
  TripletBuilder tb(layout.dimension());
  std::vector<std::pair<int, double>> dy;
  std::vector<XTerm> xt;
  for (int aj = 0; aj < layout.nya; ++aj) {
    const double rw = aj == 0 ? 0.5 : 1.0;  // W row weight / (hx*hy)
    dy_row(aj, layout.nya, hy, dy);
    for (int ai = 0; ai < layout.nxa; ++ai) {
      xs(ai, xt);
      const Onsite m = onsite(ai, aj);
      const std::size_t r1 = layout.index(0, ai, aj), r2 = layout.index(1, ai, aj);
      // Component 1: -i d_y u1 + L u2 + m11 u1 + m12 u2.
      for (auto [bj, c] : dy) tb.add(r1, layout.index(0, ai, bj), rw * (-I * c));
      for (auto [bi, c] : xt) tb.add(r1, layout.index(1, bi, aj), rw * c);
      tb.add(r1, layout.index(0, ai, aj), rw * m.m11);
      tb.add(r1, layout.index(1, ai, aj), rw * m.m12);
      // Component 2: L u1 + i d_y u2 + m21 u1 + m22 u2.
      for (auto [bi, c] : xt) tb.add(r2, layout.index(0, bi, aj), rw * c);
      for (auto [bj, c] : dy) tb.add(r2, layout.index(1, ai, bj), rw * (I * c));
      tb.add(r2, layout.index(0, ai, aj), rw * m.m21);
      tb.add(r2, layout.index(1, ai, aj), rw * m.m22);
    }
  }
  double correction = 0.0;
  CsrMatrix m = symmetrize(tb.build(), correction);
  return HermitianOperator(OperatorKind::FirstOrder, layout, grid, cell_weight, std::move(m),
                           correction);
}

void check_grid(const Grid2D& grid) {
  // Grid2D already enforces nx, ny >= 4; the stencils need at least two
  // active columns and rows.
  if (grid.nx() < 4 || grid.ny() < 4) throw InputError("grid too coarse for the stencils");
}

}  // namespace

HermitianOperator::HermitianOperator(OperatorKind kind, ActiveLayout layout,
                                     std::optional<Grid2D> grid, double cell_weight,
                                     CsrMatrix matrix, double symmetrization_correction)
    : kind_(kind),
      layout_(layout),
      grid_(std::move(grid)),
      cell_weight_(cell_weight),
      matrix_(std::move(matrix)),
      correction_(symmetrization_correction) {
  if (matrix_.size() != layout_.dimension())
    throw DimensionError("operator matrix does not match its layout");
}

PivotPlan HermitianOperator::pivot_plan() const {
  PivotPlan plan;
  plan.perm.reserve(dimension());
  auto emit = [&](int ai, int aj) {
    if (aj == 0) {
      plan.perm.push_back(layout_.index(0, ai, 0));
      plan.blocks.push_back(1);
    } else {
      plan.perm.push_back(layout_.index(0, ai, aj));
      plan.perm.push_back(layout_.index(1, ai, aj));
      plan.blocks.push_back(2);
    }
  };
  if (layout_.nya <= layout_.nxa) {
    for (int ai = 0; ai < layout_.nxa; ++ai)
      for (int aj = 0; aj < layout_.nya; ++aj) emit(ai, aj);
  } else {
    for (int aj = 0; aj < layout_.nya; ++aj)
      for (int ai = 0; ai < layout_.nxa; ++ai) emit(ai, aj);
  }
  return plan;
}

HermitianOperator HermitianOperator::scaled(double c) const {
  return HermitianOperator(kind_, layout_, grid_, cell_weight_, matrix_.scaled(c), correction_);
}

HermitianOperator assemble_T(const Grid2D& grid, const Params& params) {
  return assemble_H(grid, params, NoPotential{});
}

HermitianOperator assemble_H(const Grid2D& grid, const Params& params,
                             const PotentialSpec& potential) {
  params.validate();
  check_grid(grid);
  if (std::holds_alternative<PerturbationW>(potential))
    throw InputError("assemble_H takes a real scalar potential; use assemble_H_eps for W");
  validate_potential(potential, grid);
  const ActiveLayout layout = ActiveLayout::for_grid(grid);
  auto onsite = [&](int ai, int aj) {
    const double v = potential_at(potential, grid, ai + 1, aj);
    return Onsite{0.0, v, v, 0.0};
  };
  return build_first_order(layout, grid.hy(), laplace_stencil(layout.nxa, grid.hx(), params.delta),
                           onsite, grid.hx() * grid.hy(), grid);
}

HermitianOperator assemble_H_eps(const Grid2D& grid, const Params& params,
                                 const PerturbationW& w) {
  params.validate();
  check_grid(grid);
  validate_potential(w, grid);
  if (!w.self_adjoint()) throw InputError("perturbation W must satisfy w12 = conj(w21)");
  const ActiveLayout layout = ActiveLayout::for_grid(grid);
  const double eps = w.epsilon;
  auto onsite = [&](int ai, int aj) {
    const std::size_t k = grid.node(ai + 1, aj);
    return Onsite{eps * w.w11[k], eps * w.w12[k], eps * w.w21[k], eps * w.w22[k]};
  };
  return build_first_order(layout, grid.hy(), laplace_stencil(layout.nxa, grid.hx(), params.delta),
                           onsite, grid.hx() * grid.hy(), grid);
}

HermitianOperator assemble_half_line(double offdiag, int ny, double y_max) {
  if (ny < 4) throw InputError("half-line operator needs ny >= 4");
  if (!(y_max > 0.0)) throw InputError("half-line operator needs y_max > 0");
  const ActiveLayout layout{1, ny - 1};
  const double hy = y_max / (ny - 1);
  XStencil xs = [offdiag](int, std::vector<XTerm>& out) {
    out.clear();
    out.push_back({0, offdiag});
  };
  OnsiteFn none = [](int, int) { return Onsite{}; };
  return build_first_order(layout, hy, xs, none, hy, std::nullopt);
}

HermitianOperator assemble_square_form(const Grid2D& grid, const Params& params,
                                       const PotentialSpec& potential) {
  params.validate();
  check_grid(grid);
  if (std::holds_alternative<BoxXY>(potential) || std::holds_alternative<PerturbationW>(potential))
    throw UnsupportedError("square form requires a potential constant in y (None or XOnly)");
  validate_potential(potential, grid);
  const ActiveLayout layout = ActiveLayout::for_grid(grid);
  const XStencil xs = laplace_stencil(layout.nxa, grid.hx(), params.delta);

  TripletBuilder tb(layout.dimension());
  std::vector<std::pair<int, double>> dy;
  std::vector<XTerm> xt;
  std::vector<std::pair<std::size_t, double>> row;
  // Each discrete row r contributes w_r * d_r^T d_r; the 1/(hx*hy) mass
  // scaling leaves the relative row weight.
  auto outer = [&](double rw) {
    for (auto [ca, va] : row)
      for (auto [cb, vb] : row) tb.add(ca, cb, rw * va * vb);
  };
  for (int aj = 0; aj < layout.nya; ++aj) {
    const double rw = aj == 0 ? 0.5 : 1.0;
    dy_row(aj, layout.nya, grid.hy(), dy);
    for (int ai = 0; ai < layout.nxa; ++ai) {
      xs(ai, xt);
      const double v = potential_at(potential, grid, ai + 1, aj);
      for (int c = 0; c < 2; ++c) {
        row.clear();
        for (auto [bj, coeff] : dy) row.push_back({layout.index(c, ai, bj), coeff});
        outer(rw);
        row.clear();
        for (auto [bi, coeff] : xt)
          row.push_back({layout.index(c, bi, aj), coeff + (bi == ai ? v : 0.0)});
        outer(rw);
      }
    }
  }
  double correction = 0.0;
  CsrMatrix m = symmetrize(tb.build(), correction);
  return HermitianOperator(OperatorKind::SquareForm, layout, grid, grid.hx() * grid.hy(),
                           std::move(m), correction);
}

std::vector<cplx> restrict_field(const SpinorField& u, const ActiveLayout& layout) {
  const Grid2D& g = u.grid();
  if (!(ActiveLayout::for_grid(g) == layout))
    throw DimensionError("field grid does not match operator layout");
  if (!u.bc_admissible(1e-12)) throw InputError("field is not BC-admissible (u1 != u2 on y=0)");
  std::vector<cplx> z(layout.dimension());
  for (std::size_t k = 0; k < z.size(); ++k) {
    const auto s = layout.slot(k);
    z[k] = s.c == 0 ? u.u1(s.ai + 1, s.aj) : u.u2(s.ai + 1, s.aj);
  }
  return z;
}

SpinorField expand_field(std::span<const cplx> z, const Grid2D& grid) {
  const ActiveLayout layout = ActiveLayout::for_grid(grid);
  if (z.size() != layout.dimension()) throw DimensionError("vector does not match grid layout");
  SpinorField u(grid);
  for (std::size_t k = 0; k < z.size(); ++k) {
    const auto s = layout.slot(k);
    if (s.aj == 0) {
      u.u1(s.ai + 1, 0) = z[k];
      u.u2(s.ai + 1, 0) = z[k];
    } else if (s.c == 0) {
      u.u1(s.ai + 1, s.aj) = z[k];
    } else {
      u.u2(s.ai + 1, s.aj) = z[k];
    }
  }
  return u;
}

SpinorField apply(const HermitianOperator& op, const SpinorField& u) {
  if (!op.grid()) throw UnsupportedError("apply needs an operator defined on a 2D grid");
  if (!(*op.grid() == u.grid())) throw DimensionError("apply: field and operator grids differ");
  const std::vector<cplx> z = restrict_field(u, op.layout());
  std::vector<cplx> y(z.size());
  op.matrix().multiply(z, y);
  return expand_field(y, u.grid());
}

double quadratic_form(const HermitianOperator& op, std::span<const cplx> z) {
  if (z.size() != op.dimension()) throw DimensionError("quadratic_form: dimension mismatch");
  std::vector<cplx> y(z.size());
  op.matrix().multiply(z, y);
  cplx s = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) s += std::conj(z[k]) * y[k];
  return op.cell_weight() * s.real();
}

void export_matrix(const HermitianOperator& op, const std::string& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!f) throw Error("cannot open " + path + " for writing");
  const CsrMatrix& m = op.matrix();
  std::fprintf(f.get(), "%%%%MatrixMarket-compatible\n");
  std::fprintf(f.get(), "%% dimension %zu nnz %zu\n", m.size(), m.nnz());
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k)
      std::fprintf(f.get(), "%zu %zu %.17g %.17g\n", r, m.cols()[k], m.values()[k].real(),
                   m.values()[k].imag());
}

}  // namespace semidirac
