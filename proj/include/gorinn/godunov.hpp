#pragma once

// High-resolution Godunov-type update: wave-propagation fluctuations,
// flux-limited second-order corrections, CFL monitoring, and operator
// splitting for source terms.

#include <limits>
#include <utility>
#include <vector>

#include "gorinn/grid.hpp"
#include "gorinn/models.hpp"
#include "gorinn/riemann.hpp"

namespace gorinn {

/// None disables the correction entirely, reducing the scheme to the
/// classic first-order Godunov update.
enum class LimiterKind { VanLeer, Minmod, Superbee, None };

enum class SolverKind { Roe, Hlle };

enum class SourceIntegrator { None, ExactRelaxation, ImplicitFallback };

struct StepConfig {
  double dt = 0.0;
  LimiterKind limiter = LimiterKind::VanLeer;
  SolverKind solver = SolverKind::Roe;
  BoundaryKind bc = BoundaryKind::Periodic;
  SourceIntegrator source = SourceIntegrator::None;
};

/// Flux-limiter function phi(theta). All variants satisfy phi(1) = 1 and
/// vanish for theta <= 0.
inline double limiter(LimiterKind kind, double theta) {
  switch (kind) {
    case LimiterKind::VanLeer:
      return (theta + std::abs(theta)) / (1.0 + std::abs(theta));
    case LimiterKind::Minmod:
      return std::max(0.0, std::min(1.0, theta));
    case LimiterKind::Superbee:
      return std::max({0.0, std::min(1.0, 2.0 * theta), std::min(2.0, theta)});
    case LimiterKind::None:
      return 0.0;
  }
  return 0.0;
}

/// Left- and right-going fluctuations A-+ dQ = sum_p (s^p)-+ W^p.
inline std::pair<State, State> fluctuations(const WaveFan& fan) {
  State neg(fan.dim);
  State pos(fan.dim);
  for (int p = 0; p < fan.n_waves; ++p) {
    const double s = fan.s[static_cast<std::size_t>(p)];
    if (s < 0.0)
      neg += s * fan.w[static_cast<std::size_t>(p)];
    else
      pos += s * fan.w[static_cast<std::size_t>(p)];
  }
  return {neg, pos};
}

/// Second-order correction at one interface. Each wave is compared against
/// the same-family wave at the upwind interface (left neighbor for s > 0,
/// right neighbor for s < 0; stationary waves take the positive branch and
/// contribute nothing). theta is the vector projection of the upwind wave
/// onto this one.
inline State hr_correction(const WaveFan& here, const WaveFan& upwind_left,
                           const WaveFan& upwind_right, double dt, double dx, LimiterKind kind) {
  State fbar(here.dim);
  for (int p = 0; p < here.n_waves; ++p) {
    const std::size_t pp = static_cast<std::size_t>(p);
    const double s = here.s[pp];
    const WaveFan& up = (s < 0.0) ? upwind_right : upwind_left;
    const double denom = here.w[pp].dot(here.w[pp]);
    const double theta = denom == 0.0 ? 0.0 : up.w[pp].dot(here.w[pp]) / denom;
    const double phi = limiter(kind, theta);
    const double nu = std::abs(s) * dt / dx;
    fbar += (0.5 * std::abs(s) * (1.0 - nu) * phi) * here.w[pp];
  }
  return fbar;
}

namespace detail {

/// Solves the interface Riemann problem. Roe mode falls back to HLLE when
/// the eigenvector matrix degenerates (coincident eigenvalues).
inline WaveFan interface_fan(const FluxSystem& sys, const State& ql, const State& qr,
                             SolverKind solver) {
  const RoeData roe = sys.roe(ql, qr);
  if (solver == SolverKind::Roe) {
    if (auto fan = roe_solve(roe, ql, qr)) return *fan;
  }
  Eigs eig_roe;
  eig_roe.dim = roe.dim;
  eig_roe.lambda = roe.lambda;
  return hlle_solve(ql, qr, sys.flux(ql), sys.flux(qr), sys.jacobian_eigenvalues(ql),
                    sys.jacobian_eigenvalues(qr), eig_roe);
}

/// Fans at every interface of the ghost-extended field. fans[k] sits
/// between extended rows k and k+1, i.e. logical cells k-2 and k-1.
inline std::vector<WaveFan> interface_fans(const CellField& ext, const FluxSystem& sys,
                                           SolverKind solver) {
  std::vector<WaveFan> fans(static_cast<std::size_t>(ext.n_cells - 1));
  for (int k = 0; k + 1 < ext.n_cells; ++k)
    fans[static_cast<std::size_t>(k)] = interface_fan(sys, ext.state(k), ext.state(k + 1), solver);
  return fans;
}

inline double max_speed(const std::vector<WaveFan>& fans) {
  double s = 0.0;
  for (const WaveFan& f : fans)
    for (int p = 0; p < f.n_waves; ++p) s = std::max(s, std::abs(f.s[static_cast<std::size_t>(p)]));
  return s;
}

}  // namespace detail

/// Courant number max |s^p| dt / dx of the current field under cfg.
inline double cfl_number(const CellField& field, const StepConfig& cfg, const FluxSystem& sys) {
  const CellField ext = fill_ghost(field, cfg.bc);
  const auto fans = detail::interface_fans(ext, sys, cfg.solver);
  return detail::max_speed(fans) * cfg.dt / field.dx;
}

/// One homogeneous update of all cells:
///   Q_i <- Q_i - (dt/dx) (A+ dQ_{i-1/2} + A- dQ_{i+1/2})
///              - (dt/dx) (Fbar_{i+1/2} - Fbar_{i-1/2}).
/// Throws CflError when a wave would cross more than one cell, and fails on
/// non-finite output states.
inline CellField step_homogeneous(const CellField& field, const StepConfig& cfg,
                                  const FluxSystem& sys) {
  const int n = field.n_cells;
  const double dx = field.dx;
  const double nu = cfg.dt / dx;

  const CellField ext = fill_ghost(field, cfg.bc);
  const auto fans = detail::interface_fans(ext, sys, cfg.solver);

  const double cfl = detail::max_speed(fans) * nu;
  if (cfl > 1.0 + 1e-12) throw CflError(cfl);

  // Corrections on the interfaces bordering real cells: fans[1..n+1].
  std::vector<State> fbar(static_cast<std::size_t>(n + 2));
  for (int k = 1; k <= n + 1; ++k)
    fbar[static_cast<std::size_t>(k)] =
        hr_correction(fans[static_cast<std::size_t>(k)], fans[static_cast<std::size_t>(k - 1)],
                      fans[static_cast<std::size_t>(k + 1)], cfg.dt, dx, cfg.limiter);

  CellField out = field;
  out.time = field.time + cfg.dt;
  for (int i = 1; i <= n; ++i) {
    const auto [neg_l, pos_l] = fluctuations(fans[static_cast<std::size_t>(i)]);
    const auto [neg_r, pos_r] = fluctuations(fans[static_cast<std::size_t>(i + 1)]);
    (void)neg_l;
    (void)pos_r;
    State q = ext.state(i + 1);
    q -= nu * (pos_l + neg_r);
    q -= nu * (fbar[static_cast<std::size_t>(i + 1)] - fbar[static_cast<std::size_t>(i)]);
    out.set_state(i - 1, q);
  }
  if (!out.all_finite()) throw ConvergenceError("non-finite state after homogeneous step");
  return out;
}

namespace detail {

/// Backward-Euler step y = q + dt s(y), Newton iteration with a
/// finite-difference source Jacobian.
inline State implicit_source_step(const State& q, double dt, const FluxSystem& sys) {
  const int d = q.size();
  const double tol = 1e-12 * std::max(1.0, q.norm_inf());
  State y = q;
  for (int it = 0; it < 50; ++it) {
    const State r = y - q - dt * sys.source(y);
    if (r.norm_inf() <= tol) return y;
    Mat jr(d);
    const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    for (int j = 0; j < d; ++j) {
      const double h = sqrt_eps * (1.0 + std::abs(y[j]));
      State yp = y;
      yp[j] += h;
      const State sp = sys.source(yp);
      const State s0 = sys.source(y);
      for (int i = 0; i < d; ++i)
        jr(i, j) = (i == j ? 1.0 : 0.0) - dt * (sp[i] - s0[i]) / h;
    }
    State dy(d);
    if (d == 1) {
      if (jr(0, 0) == 0.0) throw ConvergenceError("singular Newton matrix in source step");
      dy[0] = -r[0] / jr(0, 0);
    } else {
      const double det = jr(0, 0) * jr(1, 1) - jr(0, 1) * jr(1, 0);
      if (det == 0.0) throw ConvergenceError("singular Newton matrix in source step");
      dy[0] = (-r[0] * jr(1, 1) + r[1] * jr(0, 1)) / det;
      dy[1] = (-jr(0, 0) * r[1] + jr(1, 0) * r[0]) / det;
    }
    y += dy;
  }
  throw ConvergenceError("source-step Newton iteration did not converge in 50 iterations");
}

}  // namespace detail

/// Integrates du/dt = s(u) cell-by-cell over dt (the inhomogeneous half of
/// the splitting).
inline CellField step_source(const CellField& field, double dt, const FluxSystem& sys,
                             SourceIntegrator integrator) {
  if (integrator == SourceIntegrator::None || !sys.has_source()) return field;
  CellField out = field;
  for (int i = 0; i < field.n_cells; ++i) {
    const State q = field.state(i);
    if (integrator == SourceIntegrator::ExactRelaxation) {
      if (!sys.has_exact_relaxation())
        throw ConfigError("step_source: system has no exact relaxation integrator");
      out.set_state(i, sys.relax_exact(q, dt));
    } else {
      out.set_state(i, detail::implicit_source_step(q, dt, sys));
    }
  }
  if (!out.all_finite()) throw ConvergenceError("non-finite state after source step");
  return out;
}

/// Full Godunov-split step: homogeneous update, then source integration.
inline CellField advance(const CellField& field, const StepConfig& cfg, const FluxSystem& sys) {
  CellField out = step_homogeneous(field, cfg, sys);
  if (sys.has_source() && cfg.source != SourceIntegrator::None)
    out = step_source(out, cfg.dt, sys, cfg.source);
  return out;
}

}  // namespace gorinn
