#pragma once

// Generic approximate Riemann solvers at a single interface: the Roe
// eigendecomposition and the two-wave HLLE solver. Both produce a WaveFan
// (speeds + waves) that the Godunov update consumes.

#include <algorithm>
#include <optional>

#include "gorinn/common.hpp"

namespace gorinn {

/// Eigenvalues of a D x D system matrix, ascending.
struct Eigs {
  int dim = 0;
  std::array<double, 2> lambda{0.0, 0.0};
};

/// Linearized interface data: average state, matrix, and its eigensystem.
/// For all systems here the D=2 matrices have first row [0 1], so the
/// eigenvectors are [1, lambda]^T; we store them anyway to keep the solver
/// generic.
struct RoeData {
  int dim = 0;
  State qbar;
  Mat a;
  std::array<double, 2> lambda{0.0, 0.0};
  std::array<State, 2> r;
};

/// Riemann fan at one interface: M_w waves with speeds. M_w = D for Roe,
/// M_w = 2 for HLLE. Invariant: sum of waves equals q_r - q_l.
struct WaveFan {
  int dim = 0;
  int n_waves = 0;
  std::array<double, 2> s{0.0, 0.0};
  std::array<State, 2> w;

  static WaveFan zero(int dim, int n_waves) {
    WaveFan f;
    f.dim = dim;
    f.n_waves = n_waves;
    for (int p = 0; p < n_waves; ++p) f.w[static_cast<std::size_t>(p)] = State(dim);
    return f;
  }
};

namespace detail {
/// Eigenvalues of [[a00,a01],[a10,a11]], ascending. Returns false when the
/// discriminant is negative beyond roundoff (complex pair); tiny negative
/// discriminants are clamped to zero.
inline bool eig2(const Mat& m, double& lam1, double& lam2, double& disc_out) {
  const double tr = m(0, 0) + m(1, 1);
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  double disc = tr * tr - 4.0 * det;
  disc_out = disc;
  const double scale = tr * tr + 4.0 * std::abs(det);
  if (disc < 0.0) {
    if (disc > -1e-14 * std::max(scale, 1.0)) {
      disc = 0.0;
    } else {
      return false;
    }
  }
  const double root = std::sqrt(disc);
  lam1 = 0.5 * (tr - root);
  lam2 = 0.5 * (tr + root);
  return true;
}
}  // namespace detail

/// Roe solve: project the jump onto the eigenvectors; wave p is
/// alpha_p r_p with speed lambda_p. Returns nullopt when the eigenvector
/// matrix is numerically singular (degenerate eigenvalues) so the caller
/// can fall back to HLLE.
inline std::optional<WaveFan> roe_solve(const RoeData& roe, const State& ql, const State& qr) {
  WaveFan fan = WaveFan::zero(roe.dim, roe.dim);
  const State dq = qr - ql;
  if (roe.dim == 1) {
    fan.s[0] = roe.lambda[0];
    fan.w[0] = dq;
    return fan;
  }
  const double lam1 = roe.lambda[0];
  const double lam2 = roe.lambda[1];
  const double scale = std::max({1.0, std::abs(lam1), std::abs(lam2)});
  if (std::abs(lam2 - lam1) < 1e-12 * scale) return std::nullopt;
  // R = [r1 r2]; alpha = R^{-1} dq, closed form for 2x2.
  const State& r1 = roe.r[0];
  const State& r2 = roe.r[1];
  const double det = r1[0] * r2[1] - r2[0] * r1[1];
  if (det == 0.0) return std::nullopt;
  const double a1 = (r2[1] * dq[0] - r2[0] * dq[1]) / det;
  const double a2 = (-r1[1] * dq[0] + r1[0] * dq[1]) / det;
  fan.s[0] = lam1;
  fan.s[1] = lam2;
  fan.w[0] = a1 * r1;
  fan.w[1] = a2 * r2;
  return fan;
}

/// HLLE solve from precomputed endpoint fluxes and eigenvalues. The two
/// speeds bracket every characteristic; the middle state makes the fan
/// conservative by construction. A degenerate bracket (s1 == s2) only
/// occurs for coincident states and yields a zero fan.
inline WaveFan hlle_solve(const State& ql, const State& qr, const State& fl, const State& fr,
                          const Eigs& eig_l, const Eigs& eig_r, const Eigs& eig_roe) {
  const int dim = ql.size();
  double s1 = eig_l.lambda[0];
  double s2 = eig_r.lambda[0];
  for (int p = 0; p < dim; ++p) {
    s1 = std::min({s1, eig_l.lambda[static_cast<std::size_t>(p)],
                   eig_roe.lambda[static_cast<std::size_t>(p)]});
    s2 = std::max({s2, eig_r.lambda[static_cast<std::size_t>(p)],
                   eig_roe.lambda[static_cast<std::size_t>(p)]});
  }
  WaveFan fan = WaveFan::zero(dim, 2);
  fan.s[0] = s1;
  fan.s[1] = s2;
  if (s1 == s2) return fan;  // coincident states up to tolerance
  const State qm = (1.0 / (s1 - s2)) * (fr - fl - s2 * qr + s1 * ql);
  fan.w[0] = qm - ql;
  fan.w[1] = qr - qm;
  return fan;
}

}  // namespace gorinn
