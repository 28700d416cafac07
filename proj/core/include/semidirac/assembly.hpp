// semidirac/assembly.hpp
//
// Exactly Hermitian sparse discretizations of the half-space semi-Dirac
// operator and its square form.
//
// Scheme
//   * -d_x^2 : 3-point stencil, Dirichlet walls at x_min and x_max.
//   * d_y    : summation-by-parts first derivative, D = W^{-1} Q with
//              W = hy*diag(1/2, 1, 1, ...), row 0 one-sided (u1 - u0)/hy,
//              central rows elsewhere, Dirichlet wall at y_max. Then
//              W D + D^T W = diag(-1, 0, ..., 0).
//   * u1 = u2 on y = 0 is imposed by identifying the two unknowns of each
//     boundary node. The reduced matrix is P^T W T P / (hx*hy), where P
//     copies the merged unknown into both components. The boundary terms of
//     the two d_y blocks cancel under P, so the result is Hermitian, and the
//     reduced mass matrix P^T W P is hx*hy times the identity.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semidirac/lattice.hpp"
#include "semidirac/sparse.hpp"

namespace semidirac {

enum class OperatorKind { FirstOrder, SquareForm };

class HermitianOperator {
 public:
  HermitianOperator(OperatorKind kind, ActiveLayout layout, std::optional<Grid2D> grid,
                    double cell_weight, CsrMatrix matrix, double symmetrization_correction);

  OperatorKind kind() const noexcept { return kind_; }
  const ActiveLayout& layout() const noexcept { return layout_; }
  /// Absent for 1D fiber operators.
  const std::optional<Grid2D>& grid() const noexcept { return grid_; }
  /// Quadrature weight carried by every reduced unknown (hx*hy in 2D, hy for fibers).
  double cell_weight() const noexcept { return cell_weight_; }
  const CsrMatrix& matrix() const noexcept { return matrix_; }
  std::size_t dimension() const noexcept { return matrix_.size(); }
  /// Relative size of the (M + M^H)/2 correction applied after assembly.
  double symmetrization_correction() const noexcept { return correction_; }

  /// Node-interleaved ordering along the shorter grid direction, with one
  /// pivot block per node (1 for merged boundary nodes, 2 otherwise).
  PivotPlan pivot_plan() const;

  /// Operator scaled by c > 0 (same kind and layout).
  HermitianOperator scaled(double c) const;

 private:
  OperatorKind kind_;
  ActiveLayout layout_;
  std::optional<Grid2D> grid_;
  double cell_weight_;
  CsrMatrix matrix_;
  double correction_;
};

/// Rejects grids too coarse for the stencils (nx, ny < 4).
HermitianOperator assemble_T(const Grid2D& grid, const Params& params);

/// T_h + V sigma_1 for V in {None, BoxXY, XOnly}.
HermitianOperator assemble_H(const Grid2D& grid, const Params& params,
                             const PotentialSpec& potential);

/// T_h + eps W; W must satisfy w12 = conj(w21).
HermitianOperator assemble_H_eps(const Grid2D& grid, const Params& params,
                                 const PerturbationW& w);

/// Matrix of Q(u,u) = ||d_y u||_W^2 + ||(-d_x^2 + delta + V) u||_W^2 on
/// BC-admissible fields, V in {None, XOnly}. Positive definite.
HermitianOperator assemble_square_form(const Grid2D& grid, const Params& params,
                                       const PotentialSpec& potential);

/// Restricts a BC-admissible field to the reduced unknowns (wall values are
/// dropped); throws InputError if u1 != u2 on y = 0.
std::vector<cplx> restrict_field(const SpinorField& u, const ActiveLayout& layout);
/// Inverse of restrict_field: merged unknowns go to both components, walls are 0.
SpinorField expand_field(std::span<const cplx> z, const Grid2D& grid);

/// Sparse matvec mapped back to the field layout.
SpinorField apply(const HermitianOperator& op, const SpinorField& u);

/// <u, op u> in the trapezoid inner product, i.e. cell_weight * z^H M z.
double quadratic_form(const HermitianOperator& op, std::span<const cplx> z);

/// Coordinate text export: header line "%%MatrixMarket-compatible", a
/// "% dimension <n> nnz <m>" comment, then "row col re im" per entry with
/// 0-based indices and 17 significant digits.
void export_matrix(const HermitianOperator& op, const std::string& path);

/// Builds a 1D operator on [0, y_max] whose x part is the scalar `offdiag`
/// (used by the fiber oracle). Same d_y scheme and boundary identification.
HermitianOperator assemble_half_line(double offdiag, int ny, double y_max);

}  // namespace semidirac
