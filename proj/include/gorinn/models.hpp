#pragma once

// Registry of the four benchmark systems: fluxes, Jacobians, sources,
// closed-form Roe averages and eigenstructure, and the initial-condition
// families used to generate data.
//
// All D=2 matrices here have first row [0 1]; eigenvectors are [1, lambda].

#include <cmath>
#include <memory>
#include <string>

#include "gorinn/common.hpp"
#include "gorinn/grid.hpp"
#include "gorinn/riemann.hpp"

namespace gorinn {

enum class ModelKind { Burgers, Lwr, Sw, Pw };

struct LwrParams {
  double v_max = 0.7;
};

struct SwParams {
  double g = 1.0;
};

/// Optimal-velocity traffic parameters (city scenario defaults): relaxation
/// time tau, desired speed v0, transition width gamma, form factor beta.
/// The pressure constant V0 equals v0 for the OV closure.
struct PwParams {
  double tau = 0.65;
  double v0 = 15.0;
  double gamma = 0.125;
  double beta = 1.5;
};

struct ModelParams {
  LwrParams lwr;
  SwParams sw;
  PwParams pw;
};

// Depths below this are treated as vacuum and rejected when generating data.
inline constexpr double kVacuumDepth = 1e-10;
// Relative density gap under which the Roe average term V-bar switches to
// its analytic limit (avoids catastrophic cancellation in the quotient).
inline constexpr double kCoincidentGap = 1e-8;

// ---------------------------------------------------------------------------
// Fluxes, closures, sources
// ---------------------------------------------------------------------------

inline double flux_burgers(double u) { return 0.5 * u * u; }

inline double velocity_lwr(double rho, double v_max) { return v_max * (1.0 - rho); }

inline double flux_lwr(double rho, double v_max) { return rho * velocity_lwr(rho, v_max); }

inline State flux_sw(double h, double q, double g) {
  if (h <= 0.0) throw std::domain_error("flux_sw: depth must be positive");
  return State::pair(q, q * q / h + 0.5 * g * h * h);
}

inline double pressure_sw(double h, double g) { return 0.5 * g * h * h; }

namespace detail {
// Optimal-velocity function of the spacing s = 1/rho and its derivative.
inline double ov_of_spacing(double s, const PwParams& p) {
  return p.v0 * (std::tanh(p.gamma * s - p.beta) + std::tanh(p.beta)) / (1.0 + std::tanh(p.beta));
}
inline double ov_of_spacing_deriv(double s, const PwParams& p) {
  const double c = std::cosh(p.gamma * s - p.beta);
  return p.v0 * p.gamma / (c * c * (1.0 + std::tanh(p.beta)));
}
}  // namespace detail

/// Equilibrium speed Ve(rho) = V(1/rho) of the optimal-velocity closure.
inline double ov_velocity(double rho, const PwParams& p) {
  if (rho <= 0.0) throw std::domain_error("ov_velocity: density must be positive");
  return detail::ov_of_spacing(1.0 / rho, p);
}

/// Traffic pressure P(rho) = (V0 - Ve(rho)) / (2 tau); zero as rho -> 0.
inline double pressure_pw(double rho, const PwParams& p) {
  return (p.v0 - ov_velocity(rho, p)) / (2.0 * p.tau);
}

inline State flux_pw(double rho, double q, const PwParams& p) {
  if (rho <= 0.0) throw std::domain_error("flux_pw: density must be positive");
  return State::pair(q, q * q / rho + pressure_pw(rho, p));
}

/// Relaxation toward the equilibrium flow rho Ve(rho).
inline State source_pw(double rho, double q, const PwParams& p) {
  if (rho <= 0.0) throw std::domain_error("source_pw: density must be positive");
  return State::pair(0.0, (rho * ov_velocity(rho, p) - q) / p.tau);
}

// ---------------------------------------------------------------------------
// Closed-form Roe data
// ---------------------------------------------------------------------------

inline RoeData roe_scalar_burgers(double ul, double ur) {
  RoeData d;
  d.dim = 1;
  const double abar = 0.5 * (ul + ur);
  d.qbar = State::scalar(abar);
  d.a = Mat::scalar(abar);
  d.lambda[0] = abar;
  d.r[0] = State::scalar(1.0);
  return d;
}

inline RoeData roe_scalar_lwr(double rho_l, double rho_r, double v_max) {
  RoeData d;
  d.dim = 1;
  d.qbar = State::scalar(0.5 * (rho_l + rho_r));
  const double abar = v_max * (1.0 - rho_l - rho_r);
  d.a = Mat::scalar(abar);
  d.lambda[0] = abar;
  d.r[0] = State::scalar(1.0);
  return d;
}

namespace detail {
// Square-root-weighted velocity average; the unique root of the quadratic
// RH condition for the q^2/h part of the flux.
inline double roe_velocity_average(double hl, double ql, double hr, double qr) {
  const double sl = std::sqrt(hl);
  const double sr = std::sqrt(hr);
  return (ql / sl + qr / sr) / (sl + sr);
}

inline RoeData roe_companion(const State& qbar, double c, double ubar, double speed_sq) {
  // Matrix [[0, 1], [c, 2 ubar]] with eigenvalues ubar -/+ sqrt(speed_sq).
  RoeData d;
  d.dim = 2;
  d.qbar = qbar;
  d.a = Mat::mat2(0.0, 1.0, c, 2.0 * ubar);
  const double cs = std::sqrt(speed_sq);
  d.lambda[0] = ubar - cs;
  d.lambda[1] = ubar + cs;
  d.r[0] = State::pair(1.0, d.lambda[0]);
  d.r[1] = State::pair(1.0, d.lambda[1]);
  return d;
}
}  // namespace detail

inline RoeData roe_matrix_sw(const State& l, const State& r, double g) {
  if (l[0] <= 0.0 || r[0] <= 0.0) throw std::domain_error("roe_matrix_sw: depth must be positive");
  const double hbar = 0.5 * (l[0] + r[0]);
  const double ubar = detail::roe_velocity_average(l[0], l[1], r[0], r[1]);
  return detail::roe_companion(State::pair(hbar, hbar * ubar), -ubar * ubar + g * hbar, ubar,
                               g * hbar);
}

/// V-bar term of the traffic Roe matrix: secant of the optimal-velocity
/// function in the spacing variable, with the analytic limit substituted
/// when the densities coincide to relative kCoincidentGap.
inline double pw_vbar(double rho_l, double rho_r, const PwParams& p) {
  const double rbar = 0.5 * (rho_l + rho_r);
  if (std::abs(rho_l - rho_r) < kCoincidentGap * std::abs(rbar)) {
    return -detail::ov_of_spacing_deriv(1.0 / rbar, p) / (2.0 * p.tau * rbar * rbar);
  }
  return (detail::ov_of_spacing(1.0 / rho_l, p) - detail::ov_of_spacing(1.0 / rho_r, p)) /
         (2.0 * p.tau * (rho_l - rho_r));
}

inline RoeData roe_matrix_pw(const State& l, const State& r, const PwParams& p) {
  if (l[0] <= 0.0 || r[0] <= 0.0)
    throw std::domain_error("roe_matrix_pw: density must be positive");
  const double rbar = 0.5 * (l[0] + r[0]);
  const double ubar = detail::roe_velocity_average(l[0], l[1], r[0], r[1]);
  double vbar = pw_vbar(l[0], r[0], p);
  // -vbar >= 0 holds for any positive densities; clamp roundoff noise.
  if (vbar > 0.0 && vbar < 1e-12) vbar = 0.0;
  if (vbar > 0.0) throw HyperbolicityError(-4.0 * vbar, -1, -1);
  return detail::roe_companion(State::pair(rbar, rbar * ubar), -ubar * ubar - vbar, ubar, -vbar);
}

// ---------------------------------------------------------------------------
// System interface driven by the Godunov update
// ---------------------------------------------------------------------------

/// A conservation-law system as seen by the finite-volume stepper: flux,
/// Jacobian, interface linearization, and optionally a source term with an
/// exact relaxation step.
class FluxSystem {
 public:
  virtual ~FluxSystem() = default;

  virtual int dim() const = 0;
  virtual State flux(const State& q) const = 0;
  virtual Mat jacobian(const State& q) const = 0;
  virtual RoeData roe(const State& ql, const State& qr) const = 0;

  /// Eigenvalues of the Jacobian at q, ascending. Throws HyperbolicityError
  /// on a complex pair.
  virtual Eigs jacobian_eigenvalues(const State& q) const {
    const Mat j = jacobian(q);
    Eigs e;
    e.dim = dim();
    if (e.dim == 1) {
      e.lambda[0] = j(0, 0);
      return e;
    }
    double l1 = 0.0, l2 = 0.0, disc = 0.0;
    if (!detail::eig2(j, l1, l2, disc)) throw HyperbolicityError(disc, -1, -1);
    e.lambda[0] = l1;
    e.lambda[1] = l2;
    return e;
  }

  virtual bool has_source() const { return false; }
  virtual State source(const State&) const { return State(dim()); }

  /// Exact integrator for the relaxation ODE du/dt = s(u), when available.
  virtual bool has_exact_relaxation() const { return false; }
  virtual State relax_exact(const State&, double) const {
    throw std::logic_error("relax_exact: no exact relaxation for this system");
  }
};

class BurgersSystem final : public FluxSystem {
 public:
  int dim() const override { return 1; }
  State flux(const State& q) const override { return State::scalar(flux_burgers(q[0])); }
  Mat jacobian(const State& q) const override { return Mat::scalar(q[0]); }
  RoeData roe(const State& ql, const State& qr) const override {
    return roe_scalar_burgers(ql[0], qr[0]);
  }
};

class LwrSystem final : public FluxSystem {
 public:
  explicit LwrSystem(LwrParams p = {}) : p_(p) {}
  int dim() const override { return 1; }
  State flux(const State& q) const override { return State::scalar(flux_lwr(q[0], p_.v_max)); }
  Mat jacobian(const State& q) const override {
    return Mat::scalar(p_.v_max * (1.0 - 2.0 * q[0]));
  }
  RoeData roe(const State& ql, const State& qr) const override {
    return roe_scalar_lwr(ql[0], qr[0], p_.v_max);
  }
  const LwrParams& params() const { return p_; }

 private:
  LwrParams p_;
};

class SwSystem final : public FluxSystem {
 public:
  explicit SwSystem(SwParams p = {}) : p_(p) {}
  int dim() const override { return 2; }
  State flux(const State& q) const override { return flux_sw(q[0], q[1], p_.g); }
  Mat jacobian(const State& q) const override {
    const double u = q[1] / q[0];
    return Mat::mat2(0.0, 1.0, -u * u + p_.g * q[0], 2.0 * u);
  }
  RoeData roe(const State& ql, const State& qr) const override {
    return roe_matrix_sw(ql, qr, p_.g);
  }
  const SwParams& params() const { return p_; }

 private:
  SwParams p_;
};

class PwSystem final : public FluxSystem {
 public:
  explicit PwSystem(PwParams p = {}) : p_(p) {}
  int dim() const override { return 2; }
  State flux(const State& q) const override { return flux_pw(q[0], q[1], p_); }
  Mat jacobian(const State& q) const override {
    const double rho = q[0];
    const double u = q[1] / rho;
    const double dp = detail::ov_of_spacing_deriv(1.0 / rho, p_) / (2.0 * p_.tau * rho * rho);
    return Mat::mat2(0.0, 1.0, -u * u + dp, 2.0 * u);
  }
  RoeData roe(const State& ql, const State& qr) const override {
    return roe_matrix_pw(ql, qr, p_);
  }
  bool has_source() const override { return true; }
  State source(const State& q) const override { return source_pw(q[0], q[1], p_); }
  bool has_exact_relaxation() const override { return true; }
  /// With rho frozen over the split step the momentum ODE is linear:
  /// q(t) = rho Ve + (q0 - rho Ve) exp(-t/tau).
  State relax_exact(const State& q, double dt) const override {
    const double eq = q[0] * ov_velocity(q[0], p_);
    return State::pair(q[0], eq + (q[1] - eq) * std::exp(-dt / p_.tau));
  }
  const PwParams& params() const { return p_; }

 private:
  PwParams p_;
};

inline std::unique_ptr<FluxSystem> make_model(ModelKind kind, const ModelParams& p = {}) {
  switch (kind) {
    case ModelKind::Burgers:
      return std::make_unique<BurgersSystem>();
    case ModelKind::Lwr:
      return std::make_unique<LwrSystem>(p.lwr);
    case ModelKind::Sw:
      return std::make_unique<SwSystem>(p.sw);
    case ModelKind::Pw:
      return std::make_unique<PwSystem>(p.pw);
  }
  throw ConfigError("make_model: unknown model kind");
}

inline std::string model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Burgers:
      return "burgers";
    case ModelKind::Lwr:
      return "lwr";
    case ModelKind::Sw:
      return "sw";
    case ModelKind::Pw:
      return "pw";
  }
  return "?";
}

inline ModelKind parse_model_name(const std::string& name) {
  if (name == "burgers") return ModelKind::Burgers;
  if (name == "lwr") return ModelKind::Lwr;
  if (name == "sw") return ModelKind::Sw;
  if (name == "pw") return ModelKind::Pw;
  throw ConfigError("unknown model name: " + name);
}

// ---------------------------------------------------------------------------
// Initial conditions
// ---------------------------------------------------------------------------

/// Initial-condition families. Gaussian profiles drive the Burgers/LWR/SW
/// runs; the sinusoidal density perturbation drives the traffic ring road.
struct IcSpec {
  enum class Family { Gaussian, Sinusoid };
  Family family = Family::Gaussian;
  double mu = 1.0;         // Gaussian amplitude, or relative sinusoid amplitude
  double sigma = 0.2;      // Gaussian width
  double x0 = 0.0;         // Gaussian center
  double rho_star = 0.1;   // sinusoid base density
  double wavelength = 800.0;
  double momentum = 0.0;   // constant second component for D=2 systems
};

/// Samples the initial profile at cell centers (midpoint initialization).
inline CellField initial_condition(ModelKind model, const IcSpec& ic, const Grid& grid) {
  const bool gaussian = ic.family == IcSpec::Family::Gaussian;
  const bool model_wants_gaussian = model != ModelKind::Pw;
  if (gaussian != model_wants_gaussian)
    throw ConfigError("initial_condition: family does not match model " + model_name(model));

  const int dim = (model == ModelKind::Sw || model == ModelKind::Pw) ? 2 : 1;
  CellField f = CellField::zeros(grid.n_cells, dim, grid.dx, 0.0);
  for (int i = 0; i < grid.n_cells; ++i) {
    const double x = grid.cell_centers[static_cast<std::size_t>(i)];
    switch (model) {
      case ModelKind::Burgers:
      case ModelKind::Lwr: {
        const double dxc = x - ic.x0;
        f.at(i, 0) = ic.mu * std::exp(-dxc * dxc / (2.0 * ic.sigma * ic.sigma));
        break;
      }
      case ModelKind::Sw: {
        const double g = ic.mu * std::exp(-(x - ic.x0) * (x - ic.x0) / (2.0 * ic.sigma * ic.sigma));
        f.at(i, 0) = std::max(g, kVacuumDepth);  // keep the far field off vacuum
        f.at(i, 1) = ic.momentum;
        break;
      }
      case ModelKind::Pw: {
        f.at(i, 0) = ic.rho_star * (1.0 + ic.mu * std::sin(2.0 * M_PI * x / ic.wavelength));
        f.at(i, 1) = ic.momentum;
        break;
      }
    }
  }
  return f;
}

}  // namespace gorinn
