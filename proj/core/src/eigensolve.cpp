// Eigenpairs of assembled operators: the dense oracle, shift-invert Lanczos
// with full reorthogonalization and locking, LOBPCG for the square form, and
// the inertia and localization diagnostics.
#include "semidirac/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <string>

#include "semidirac/errors.hpp"

namespace semidirac {

namespace {

using Vec = std::vector<cplx>;
using SolveFn = std::function<void(const Vec&, Vec&)>;

cplx dotc(const Vec& a, const Vec& b) {
  cplx s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::conj(a[k]) * b[k];
  return s;
}

double norm2(const Vec& a) {
  double s = 0.0;
  for (const auto& x : a) s += std::norm(x);
  return std::sqrt(s);
}

void scale(Vec& a, cplx c) {
  for (auto& x : a) x *= c;
}

// a -= c * b
void axpy(Vec& a, cplx c, const Vec& b) {
  for (std::size_t k = 0; k < a.size(); ++k) a[k] -= c * b[k];
}

// Classical Gram-Schmidt against an orthonormal set, applied twice.
void orthogonalize(Vec& v, const std::vector<Vec>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) axpy(v, dotc(b, v), b);
}

Vec random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec v(n);
  for (auto& x : v) x = {nd(rng), nd(rng)};
  return v;
}

// First component above 1e-8 of the largest is made real-positive.
void fix_sign(Vec& v) {
  double mx = 0.0;
  for (const auto& x : v) mx = std::max(mx, std::abs(x));
  if (mx == 0.0) return;
  for (auto& x : v) {
    if (std::abs(x) > 1e-8 * mx) {
      const cplx ph = std::conj(x) / std::abs(x);
      for (auto& y : v) y *= ph;
      x = {std::abs(x), 0.0};
      return;
    }
  }
}

double rayleigh(const CsrMatrix& m, const Vec& x, Vec& mx) {
  m.multiply(x, mx);
  return dotc(x, mx).real() / dotc(x, x).real();
}

Eigenpair make_pair(const HermitianOperator& op, Vec v, double value) {
  const double nv = norm2(v);
  scale(v, 1.0 / nv);
  fix_sign(v);
  Eigenpair p;
  p.value = value;
  p.residual = residual_norm(op, v, value);
  if (op.grid()) {
    const auto loc = localization_metrics(v, *op.grid());
    p.participation_ratio = loc.participation_ratio;
    p.y_decay_rate = loc.y_decay_rate;
  } else {
    double s4 = 0.0;
    for (const auto& x : v) s4 += std::norm(x) * std::norm(x);
    p.participation_ratio = 1.0 / (static_cast<double>(v.size()) * s4);
  }
  p.vector = std::move(v);
  return p;
}

void sort_pairs(std::vector<Eigenpair>& pairs) {
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Eigenpair& a, const Eigenpair& b) { return a.value < b.value; });
}

double operator_scale(const CsrMatrix& m) { return std::max(m.norm_inf(), 1e-300); }

// Factorization of M - sigma I, nudging sigma off an exact eigenvalue.
std::unique_ptr<BandLdl> factor_near(const HermitianOperator& op, double& sigma) {
  const double s = operator_scale(op.matrix());
  for (int attempt = 0; attempt < 8; ++attempt) {
    try {
      return std::make_unique<BandLdl>(op.matrix(), sigma, op.pivot_plan());
    } catch (const FactorizationError&) {
      sigma += 1e-9 * s * (attempt + 1);
    }
  }
  throw FactorizationError("cannot factor the shifted operator near " + std::to_string(sigma));
}

// MINRES (Paige-Saunders) for the Hermitian, possibly indefinite M - sigma I.
void minres(const CsrMatrix& m, double sigma, const Vec& b, Vec& x, double rtol,
            std::size_t maxit) {
  const std::size_t n = b.size();
  x.assign(n, 0.0);
  const double beta1 = norm2(b);
  if (beta1 == 0.0) return;
  Vec r1 = b, r2 = b, y = b, v(n), w(n, 0.0), w1(n), w2(n, 0.0);
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  for (std::size_t itn = 1; itn <= maxit; ++itn) {
    const double s = 1.0 / beta;
    for (std::size_t k = 0; k < n; ++k) v[k] = s * y[k];
    m.multiply(v, y);
    for (std::size_t k = 0; k < n; ++k) y[k] -= sigma * v[k];
    if (itn >= 2)
      for (std::size_t k = 0; k < n; ++k) y[k] -= (beta / oldb) * r1[k];
    const double alfa = dotc(v, y).real();
    for (std::size_t k = 0; k < n; ++k) y[k] -= (alfa / beta) * r2[k];
    r1.swap(r2);
    r2 = y;
    oldb = beta;
    beta = norm2(y);
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), 1e-300);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    w1.swap(w2);
    w2.swap(w);
    for (std::size_t k = 0; k < n; ++k) {
      w[k] = (v[k] - oldeps * w1[k] - delta * w2[k]) / gamma;
      x[k] += phi * w[k];
    }
    if (phibar <= rtol * beta1 || beta == 0.0) return;
  }
  throw ConvergenceError("MINRES inner solve did not converge", {phibar / beta1});
}

struct Locked {
  std::vector<Vec> vectors;
  std::vector<double> values;
};

// Shift-invert Lanczos with full reorthogonalization and thick restarts.
// Each cycle expands an orthonormal basis V of S = (M - sigma I)^{-1},
// deflated against the locked eigenvectors, and records the projected matrix
// V^H S V column by column from the Gram-Schmidt coefficients, so it stays
// exact after a restart. Ritz pairs that meet the residual tolerance on M and
// pass `accept` are locked; the best unconverged accepted Ritz vectors (up to
// half the basis) plus the residual direction seed the next cycle. Stops once
// `want` pairs are locked or, with `stop_when_dry`, once a cycle shows no Ritz
// value passing `accept`.
void lanczos_engine(const HermitianOperator& op, double sigma, const SolveFn& solve,
                    const std::function<bool(double)>& accept, std::size_t want,
                    bool stop_when_dry, const SolverOptions& opt, Locked& locked,
                    std::size_t& steps) {
  const CsrMatrix& m = op.matrix();
  const std::size_t n = m.size();
  std::mt19937_64 rng(opt.seed);
  std::vector<double> history;
  Vec mx(n), w(n);

  auto fresh_start = [&](const std::vector<Vec>& against) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      Vec q = random_vector(n, rng);
      orthogonalize(q, locked.vectors);
      orthogonalize(q, against);
      const double nq = norm2(q);
      if (nq > 0.0) {
        scale(q, 1.0 / nq);
        return q;
      }
    }
    return Vec{};
  };

  std::vector<Vec> basis;          // basis[0..kept) are Ritz vectors
  std::vector<double> kept_theta;  // their S-Ritz values
  std::size_t growth = 1;

  for (std::size_t cycle = 0; cycle < opt.max_iter; ++cycle) {
    if (locked.vectors.size() >= want || locked.vectors.size() >= n) return;
    const std::size_t remaining = n - locked.vectors.size();
    const std::size_t need = want - locked.vectors.size();
    const std::size_t mdim =
        std::min(remaining, growth * std::max<std::size_t>(2 * need + 30, 40));
    const std::size_t locked_before = locked.vectors.size();
    if (basis.size() <= kept_theta.size()) {
      Vec q = fresh_start(basis);
      if (q.empty()) return;
      basis.push_back(std::move(q));
    }
    const std::size_t kept = kept_theta.size();

    std::vector<cplx> h(mdim * mdim, 0.0);
    auto H = [&](std::size_t r, std::size_t c) -> cplx& { return h[r * mdim + c]; };
    for (std::size_t i = 0; i < kept; ++i) H(i, i) = kept_theta[i];

    double amax = 0.0;
    for (double t : kept_theta) amax = std::max(amax, std::abs(t));
    Vec resid;
    for (std::size_t j = kept; j < mdim && j < basis.size(); ++j) {
      solve(basis[j], w);
      ++steps;
      orthogonalize(w, locked.vectors);
      std::vector<cplx> coef(basis.size(), 0.0);
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < basis.size(); ++i) {
          const cplx c = dotc(basis[i], w);
          coef[i] += c;
          axpy(w, c, basis[i]);
        }
      for (std::size_t i = 0; i < j; ++i) {
        H(i, j) = coef[i];
        H(j, i) = std::conj(coef[i]);
      }
      H(j, j) = coef[j].real();
      amax = std::max(amax, std::abs(coef[j].real()));
      const double b = norm2(w);
      if (b <= 1e-13 * std::max(amax, 1e-300)) break;  // invariant subspace
      scale(w, 1.0 / b);
      if (j + 1 == mdim) {
        resid = w;
        break;
      }
      H(j + 1, j) = b;
      H(j, j + 1) = b;
      basis.push_back(w);
    }
    const std::size_t kdim = basis.size();
    std::vector<cplx> hk(kdim * kdim);
    for (std::size_t r = 0; r < kdim; ++r)
      for (std::size_t c = 0; c < kdim; ++c) hk[r * kdim + c] = H(r, c);
    const DenseEigen ritz = hermitian_eigen(std::move(hk), kdim);
    std::vector<std::size_t> order(kdim);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return std::abs(ritz.values[x]) > std::abs(ritz.values[y]);
    });

    const std::size_t keep_max = std::max<std::size_t>(mdim / 2, 1);
    bool any_candidate = false;
    double best_unconverged = 0.0;
    std::vector<Vec> next;
    std::vector<double> next_theta;
    for (std::size_t idx : order) {
      if (locked.vectors.size() >= want) break;
      const double theta = ritz.values[idx];
      if (theta == 0.0) continue;
      if (!accept(sigma + 1.0 / theta)) continue;
      any_candidate = true;
      Vec x(n, 0.0);
      const cplx* y = &ritz.vectors[idx * kdim];
      for (std::size_t b = 0; b < kdim; ++b)
        if (y[b] != 0.0) axpy(x, -y[b], basis[b]);
      const double nx = norm2(x);
      if (nx == 0.0) continue;
      scale(x, 1.0 / nx);
      const double lambda = rayleigh(m, x, mx);
      Vec r = mx;
      axpy(r, lambda, x);
      const double res = norm2(r);
      if (res <= opt.tol && accept(lambda)) {
        orthogonalize(x, locked.vectors);
        scale(x, 1.0 / norm2(x));
        locked.vectors.push_back(std::move(x));
        locked.values.push_back(lambda);
      } else {
        best_unconverged = std::max(best_unconverged, res);
        if (next.size() < keep_max) {
          next.push_back(std::move(x));
          next_theta.push_back(theta);
        }
      }
    }
    history.push_back(best_unconverged);
    if (locked.vectors.size() >= want) return;
    if (stop_when_dry && !any_candidate) return;
    if (locked.vectors.size() == locked_before && growth * 40 < remaining) growth *= 2;

    // Thick restart: kept Ritz vectors, then the residual direction.
    basis = std::move(next);
    kept_theta = std::move(next_theta);
    if (!resid.empty()) {
      orthogonalize(resid, locked.vectors);
      orthogonalize(resid, basis);
      const double nr = norm2(resid);
      if (nr > 1e-8) {
        scale(resid, 1.0 / nr);
        basis.push_back(std::move(resid));
      }
    }
  }
  throw ConvergenceError("shift-invert Lanczos did not converge within " +
                             std::to_string(opt.max_iter) + " restart cycles",
                         history);
}

SolveFn make_solver(const HermitianOperator& op, double& sigma, bool factor,
                    std::shared_ptr<BandLdl>& keep) {
  if (factor) {
    keep = factor_near(op, sigma);
    BandLdl* f = keep.get();
    return [f](const Vec& b, Vec& x) { f->solve(b, x); };
  }
  const CsrMatrix* m = &op.matrix();
  const double s = sigma;
  const std::size_t maxit = std::max<std::size_t>(20 * m->size(), 1000);
  return [m, s, maxit](const Vec& b, Vec& x) { minres(*m, s, b, x, 1e-13, maxit); };
}

void validate_options(const SolverOptions& opt) {
  if (!(opt.tol > 0.0) || !std::isfinite(opt.tol)) throw InputError("solver tol must be > 0");
  if (opt.max_iter == 0) throw InputError("solver max_iter must be >= 1");
}

}  // namespace

std::vector<double> SpectrumReport::values() const {
  std::vector<double> v;
  v.reserve(pairs.size());
  for (const auto& p : pairs) v.push_back(p.value);
  return v;
}

double residual_norm(const HermitianOperator& op, std::span<const cplx> v, double lambda) {
  if (v.size() != op.dimension()) throw DimensionError("residual_norm: dimension mismatch");
  Vec mv(v.size());
  op.matrix().multiply(v, mv);
  double r = 0.0, nv = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    r += std::norm(mv[k] - lambda * v[k]);
    nv += std::norm(v[k]);
  }
  if (nv == 0.0) throw InputError("residual_norm: zero vector");
  return std::sqrt(r / nv);
}

Localization localization_metrics(std::span<const cplx> v, const Grid2D& grid) {
  const ActiveLayout layout = ActiveLayout::for_grid(grid);
  if (v.size() != layout.dimension()) throw DimensionError("localization: dimension mismatch");
  double n2 = 0.0;
  for (const auto& x : v) n2 += std::norm(x);
  if (n2 == 0.0) throw InputError("localization metrics of a zero vector");
  double s4 = 0.0;
  std::vector<double> rows(layout.nya, 0.0);
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double p = std::norm(v[k]) / n2;
    s4 += p * p;
    rows[layout.slot(k).aj] += p;
  }
  Localization out{1.0 / (static_cast<double>(v.size()) * s4), 0.0};
  // Least-squares slope of log(row mass) against y over the outer half.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cnt = 0;
  for (int aj = 0; aj < layout.nya; ++aj) {
    const double y = grid.y(aj);
    if (y < 0.5 * grid.y_max() || rows[aj] <= 0.0) continue;
    const double ly = std::log(rows[aj]);
    sx += y;
    sy += ly;
    sxx += y * y;
    sxy += y * ly;
    ++cnt;
  }
  if (cnt >= 2) {
    const double den = cnt * sxx - sx * sx;
    if (den > 0.0) out.y_decay_rate = (cnt * sxy - sx * sy) / den;
  }
  return out;
}

std::size_t count_below(const HermitianOperator& op, double x) {
  double sigma = x;
  const auto f = factor_near(op, sigma);
  return f->inertia().negative;
}

SpectrumReport dense_eigs(const HermitianOperator& op, const SolverOptions& opt) {
  const std::size_t n = op.dimension();
  if (n > opt.dense_cap)
    throw InputError("dense_eigs: dimension " + std::to_string(n) + " exceeds the cap " +
                     std::to_string(opt.dense_cap));
  const CsrMatrix& m = op.matrix();
  std::vector<cplx> a(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k)
      a[r * n + m.cols()[k]] = m.values()[k];
  const DenseEigen e = hermitian_eigen(std::move(a), n, true);
  SpectrumReport rep;
  rep.method = "dense";
  rep.tolerance = 1e-10 * operator_scale(m);
  rep.certificate = CertificateKind::Certified;
  rep.certified_count = n;
  rep.pairs.reserve(n);
  for (std::size_t j = 0; j < n; ++j)
    rep.pairs.push_back(
        make_pair(op, Vec(e.vectors.begin() + j * n, e.vectors.begin() + (j + 1) * n),
                  e.values[j]));
  sort_pairs(rep.pairs);
  return rep;
}

SpectrumReport gap_eigs(const HermitianOperator& op, double lo, double hi, std::size_t k,
                        const SolverOptions& opt) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw InputError("gap_eigs: interval requires lo < hi");
  if (k == 0) throw InputError("gap_eigs: k must be >= 1");
  validate_options(opt);

  SpectrumReport rep;
  rep.tolerance = opt.tol;
  double sigma = 0.5 * (lo + hi);
  std::size_t want = k;
  if (opt.use_factorization) {
    const std::size_t count = count_below(op, hi) - count_below(op, lo);
    rep.certificate = CertificateKind::Certified;
    rep.certified_count = count;
    want = std::min(k, count);
  }
  rep.method = opt.use_factorization ? "shift-invert-lanczos" : "shift-invert-lanczos-minres";
  if (want > 0) {
    std::shared_ptr<BandLdl> keep;
    const SolveFn solve = make_solver(op, sigma, opt.use_factorization, keep);
    Locked locked;
    lanczos_engine(
        op, sigma, solve, [lo, hi](double l) { return l >= lo && l <= hi; }, want,
        !opt.use_factorization, opt, locked, rep.iterations);
    for (std::size_t j = 0; j < locked.vectors.size(); ++j)
      rep.pairs.push_back(make_pair(op, std::move(locked.vectors[j]), locked.values[j]));
    sort_pairs(rep.pairs);
  }
  rep.shift = sigma;
  return rep;
}

SpectrumReport nearest_eigs(const HermitianOperator& op, double shift, std::size_t k,
                            const SolverOptions& opt) {
  if (!std::isfinite(shift)) throw InputError("nearest_eigs: shift must be finite");
  if (k == 0) throw InputError("nearest_eigs: k must be >= 1");
  validate_options(opt);
  k = std::min(k, op.dimension());
  SpectrumReport rep;
  rep.tolerance = opt.tol;
  rep.method = opt.use_factorization ? "shift-invert-lanczos" : "shift-invert-lanczos-minres";
  double sigma = shift;
  std::shared_ptr<BandLdl> keep;
  const SolveFn solve = make_solver(op, sigma, opt.use_factorization, keep);
  Locked locked;
  // Two guard pairs make a second certificate round rare when the k-th
  // distance is shared by a +- pair.
  std::size_t want = std::min(op.dimension(), k + 2);
  auto all = [](double) { return true; };
  auto radius = [&]() {
    std::vector<double> dist;
    for (double v : locked.values) dist.push_back(std::abs(v - shift));
    std::sort(dist.begin(), dist.end());
    return dist[k - 1];
  };
  lanczos_engine(op, sigma, solve, all, want, false, opt, locked, rep.iterations);
  if (opt.use_factorization) {
    // Every eigenvalue within the k-th distance must have been found.
    for (int round = 0; round < 8; ++round) {
      const double r = radius();
      const double pad = 1e-9 * std::max(1.0, r);
      const std::size_t inside = count_below(op, shift + r + pad) - count_below(op, shift - r - pad);
      rep.certified_count = inside;
      std::size_t found = 0;
      for (double v : locked.values) found += std::abs(v - shift) <= r + pad;
      if (inside <= found) {
        rep.certificate = CertificateKind::Certified;
        break;
      }
      want = locked.vectors.size() + (inside - found);
      lanczos_engine(op, sigma, solve, all, want, false, opt, locked, rep.iterations);
    }
  }
  std::vector<std::size_t> idx(locked.values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(locked.values[a] - shift) < std::abs(locked.values[b] - shift);
  });
  for (std::size_t j = 0; j < k && j < idx.size(); ++j)
    rep.pairs.push_back(make_pair(op, locked.vectors[idx[j]], locked.values[idx[j]]));
  sort_pairs(rep.pairs);
  rep.shift = sigma;
  return rep;
}

SpectrumReport lowest_of_square(const HermitianOperator& q, std::size_t k,
                                const SolverOptions& opt) {
  if (q.kind() != OperatorKind::SquareForm)
    throw InputError("lowest_of_square needs a SquareForm operator");
  if (k == 0) throw InputError("lowest_of_square: k must be >= 1");
  validate_options(opt);
  const CsrMatrix& m = q.matrix();
  const std::size_t n = m.size();
  k = std::min(k, n);
  const std::size_t bs = std::min(n, std::max(k, opt.block_size));

  // Preconditioner: exact factorization of Q (SPD), or Jacobi without it.
  std::shared_ptr<BandLdl> ldl;
  std::vector<double> inv_diag;
  if (opt.use_factorization) {
    ldl = std::make_shared<BandLdl>(m, 0.0, q.pivot_plan());
  } else {
    inv_diag.resize(n);
    for (std::size_t r = 0; r < n; ++r) inv_diag[r] = 1.0 / m.at(r, r).real();
  }
  auto precondition = [&](std::vector<Vec>& block) {
    if (ldl) {
      ldl->solve_many(block, block);
    } else {
      for (auto& v : block)
        for (std::size_t i = 0; i < n; ++i) v[i] *= inv_diag[i];
    }
  };

  std::mt19937_64 rng(opt.seed);
  std::vector<Vec> x(bs), p;
  for (auto& v : x) v = random_vector(n, rng);

  // Orthonormalizes `s` in place (modified Gram-Schmidt, two passes),
  // dropping columns that are numerically dependent.
  auto orthonormalize = [](std::vector<Vec>& s) {
    std::vector<Vec> out;
    for (auto& v : s) {
      const double before = norm2(v);
      if (before == 0.0) continue;
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : out) axpy(v, dotc(b, v), b);
      const double after = norm2(v);
      if (after <= 1e-10 * before) continue;
      scale(v, 1.0 / after);
      out.push_back(std::move(v));
    }
    s = std::move(out);
  };

  // Rayleigh-Ritz on the orthonormal span(s): the lowest `nb` Ritz vectors
  // become X, and their components outside the first `keep` basis vectors
  // (the previous X block) become the search directions P.
  auto rayleigh_ritz = [&](const std::vector<Vec>& s, std::size_t nb, std::size_t keep,
                           std::vector<Vec>& xn, std::vector<Vec>* pn) {
    const std::size_t d = s.size();
    std::vector<Vec> qs(d, Vec(n));
    for (std::size_t j = 0; j < d; ++j) m.multiply(s[j], qs[j]);
    std::vector<cplx> g(d * d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) {
        const cplx v = dotc(s[i], qs[j]);
        g[i * d + j] = v;
        g[j * d + i] = std::conj(v);
      }
    for (std::size_t i = 0; i < d; ++i) g[i * d + i] = g[i * d + i].real();
    const DenseEigen e = hermitian_eigen(std::move(g), d, true);
    xn.assign(nb, Vec(n, 0.0));
    if (pn) pn->assign(nb, Vec(n, 0.0));
    for (std::size_t j = 0; j < nb; ++j) {
      const cplx* c = &e.vectors[j * d];
      for (std::size_t b = 0; b < d; ++b) {
        if (c[b] == cplx{}) continue;
        for (std::size_t i = 0; i < n; ++i) xn[j][i] += c[b] * s[b][i];
        if (pn && b >= keep)
          for (std::size_t i = 0; i < n; ++i) (*pn)[j][i] += c[b] * s[b][i];
      }
    }
    return std::vector<double>(e.values.begin(), e.values.begin() + nb);
  };

  orthonormalize(x);
  std::vector<double> lambda = rayleigh_ritz(std::vector<Vec>(x), x.size(), x.size(), x, nullptr);

  std::vector<double> history;
  SpectrumReport rep;
  rep.method = "lobpcg";
  rep.tolerance = opt.tol;
  bool converged = false;
  bool shifted = false;
  std::vector<Vec> r(x.size(), Vec(n));
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    double worst = 0.0;
    bool done = true;
    std::vector<bool> active(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      m.multiply(x[j], r[j]);
      axpy(r[j], lambda[j], x[j]);
      const double res = norm2(r[j]);
      active[j] = res > opt.tol;
      if (j < k) {
        worst = std::max(worst, res);
        done = done && !active[j];
      }
    }
    history.push_back(worst);
    rep.iterations = it;
    if (done) {
      converged = true;
      break;
    }
    // After a few iterations the lowest Ritz value is a fair estimate; move
    // the preconditioner shift just below it: (Q - sigma I)^{-1} stays positive definite (checked
    // by inertia) and separates the clustered bottom of the spectrum.
    if (ldl && !shifted && it >= 3) {
      shifted = true;
      double sigma = 0.95 * lambda[0];
      for (int attempt = 0; attempt < 4 && sigma > 0.0; ++attempt) {
        try {
          auto f = std::make_shared<BandLdl>(m, sigma, q.pivot_plan());
          if (f->inertia().negative == 0) {
            ldl = std::move(f);
            break;
          }
        } catch (const FactorizationError&) {
        }
        sigma -= lambda[0] - sigma;
      }
    }
    std::vector<Vec> s = x;
    {
      std::vector<Vec> ra;
      for (std::size_t j = 0; j < x.size(); ++j)
        if (active[j]) ra.push_back(r[j]);
      precondition(ra);
      for (auto& v : ra) s.push_back(std::move(v));
    }
    for (auto& v : p) s.push_back(std::move(v));
    const std::size_t nx = x.size();
    orthonormalize(s);
    // The X block is orthonormal already, so it survives as the first columns.
    const std::size_t nb = std::min(nx, s.size());
    lambda = rayleigh_ritz(s, nb, nx, x, &p);
  }
  if (!converged)
    throw ConvergenceError("LOBPCG did not converge within " + std::to_string(opt.max_iter) +
                               " iterations",
                           history);

  for (std::size_t j = 0; j < k; ++j) rep.pairs.push_back(make_pair(q, x[j], lambda[j]));
  sort_pairs(rep.pairs);
  if (opt.use_factorization) {
    const double top = rep.pairs.back().value;
    rep.certified_count = count_below(q, top + std::max(opt.tol, 1e-9 * top));
    rep.certificate = *rep.certified_count == k ? CertificateKind::Certified
                                                : CertificateKind::Uncertified;
  }
  return rep;
}

}  // namespace semidirac
