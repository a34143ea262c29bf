#pragma once

// Shallow-network flux closures: the network itself, the composite flux
// f = f_K(u) + f_U(u, N(u)) for each benchmark form, the closure-dependent
// Roe linearization, and the Rankine-Hugoniot residual that the training
// loss penalizes.

#include <string>
#include <vector>

#include "gorinn/godunov.hpp"
#include "gorinn/grid.hpp"
#include "gorinn/models.hpp"
#include "gorinn/riemann.hpp"

namespace gorinn {

// ---------------------------------------------------------------------------
// Shallow network
// ---------------------------------------------------------------------------

/// Single-hidden-layer network with logistic-sigmoid activations and a
/// linear scalar output without bias: N(u) = w_out^T sigma(W u + b).
/// Total parameter count is L (n_inputs + 2).
struct NetworkParams {
  int n_inputs = 0;
  int n_neurons = 0;
  std::vector<double> w_out;  // L
  std::vector<double> w_in;   // L x n_inputs, row-major
  std::vector<double> bias;   // L

  static NetworkParams zeros(int n_inputs, int n_neurons) {
    NetworkParams p;
    p.n_inputs = n_inputs;
    p.n_neurons = n_neurons;
    p.w_out.assign(static_cast<std::size_t>(n_neurons), 0.0);
    p.w_in.assign(static_cast<std::size_t>(n_neurons) * n_inputs, 0.0);
    p.bias.assign(static_cast<std::size_t>(n_neurons), 0.0);
    return p;
  }

  int count() const { return n_neurons * (n_inputs + 2); }

  /// Flattened layout [w_out, W row-major, b].
  std::vector<double> flatten() const {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(count()));
    v.insert(v.end(), w_out.begin(), w_out.end());
    v.insert(v.end(), w_in.begin(), w_in.end());
    v.insert(v.end(), bias.begin(), bias.end());
    return v;
  }
  static NetworkParams unflatten(int n_inputs, int n_neurons, const std::vector<double>& v) {
    NetworkParams p = zeros(n_inputs, n_neurons);
    if (static_cast<int>(v.size()) != p.count())
      throw SchemaError("network parameter vector has wrong length");
    std::size_t k = 0;
    for (auto& x : p.w_out) x = v[k++];
    for (auto& x : p.w_in) x = v[k++];
    for (auto& x : p.bias) x = v[k++];
    return p;
  }
};

namespace detail {
inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
}  // namespace detail

/// Network output at u (u.size() must equal n_inputs).
inline double nn_eval(const State& u, const NetworkParams& p) {
  double out = 0.0;
  for (int i = 0; i < p.n_neurons; ++i) {
    double z = p.bias[static_cast<std::size_t>(i)];
    for (int j = 0; j < p.n_inputs; ++j)
      z += p.w_in[static_cast<std::size_t>(i * p.n_inputs + j)] * u[j];
    out += p.w_out[static_cast<std::size_t>(i)] * detail::sigmoid(z);
  }
  return out;
}

/// Analytic gradient dN/du: W^T diag(sigma') w_out with sigma' = s (1 - s).
inline State nn_grad_u(const State& u, const NetworkParams& p) {
  State g(p.n_inputs);
  for (int i = 0; i < p.n_neurons; ++i) {
    double z = p.bias[static_cast<std::size_t>(i)];
    for (int j = 0; j < p.n_inputs; ++j)
      z += p.w_in[static_cast<std::size_t>(i * p.n_inputs + j)] * u[j];
    const double s = detail::sigmoid(z);
    const double w = p.w_out[static_cast<std::size_t>(i)] * s * (1.0 - s);
    for (int j = 0; j < p.n_inputs; ++j)
      g[j] += w * p.w_in[static_cast<std::size_t>(i * p.n_inputs + j)];
  }
  return g;
}

// ---------------------------------------------------------------------------
// Closure forms
// ---------------------------------------------------------------------------

/// How the network enters the flux of each benchmark.
enum class ClosureForm {
  BurgersFull,        // f = N(u), completely unknown scalar flux
  LwrVelocity,        // f = rho N(rho), unknown velocity closure
  SwPressure2d,       // f = [q, q^2/h + N(h, q)]
  PwPressure2d,       // f = [q, q^2/rho + N(rho, q)] + known relaxation source
  PwPressureRhoOnly,  // f = [q, q^2/rho + N(rho)] + source; exact-RH mode
};

inline int state_dim(ClosureForm f) {
  return (f == ClosureForm::BurgersFull || f == ClosureForm::LwrVelocity) ? 1 : 2;
}

inline int input_dim(ClosureForm f) {
  switch (f) {
    case ClosureForm::SwPressure2d:
    case ClosureForm::PwPressure2d:
      return 2;
    default:
      return 1;
  }
}

/// The slope substitution makes the RH condition exact for the rho-only
/// traffic form; it is the one form excluded from the RH loss.
inline bool rh_loss_active(ClosureForm f) { return f != ClosureForm::PwPressureRhoOnly; }

inline bool form_has_source(ClosureForm f) {
  return f == ClosureForm::PwPressure2d || f == ClosureForm::PwPressureRhoOnly;
}

inline std::string closure_form_name(ClosureForm f) {
  switch (f) {
    case ClosureForm::BurgersFull:
      return "burgers_full";
    case ClosureForm::LwrVelocity:
      return "lwr_velocity";
    case ClosureForm::SwPressure2d:
      return "sw_pressure";
    case ClosureForm::PwPressure2d:
      return "pw_pressure";
    case ClosureForm::PwPressureRhoOnly:
      return "pw_pressure_rho";
  }
  return "?";
}

inline ClosureForm parse_closure_form(const std::string& name) {
  if (name == "burgers_full") return ClosureForm::BurgersFull;
  if (name == "lwr_velocity") return ClosureForm::LwrVelocity;
  if (name == "sw_pressure") return ClosureForm::SwPressure2d;
  if (name == "pw_pressure") return ClosureForm::PwPressure2d;
  if (name == "pw_pressure_rho") return ClosureForm::PwPressureRhoOnly;
  throw ConfigError("unknown closure form: " + name);
}

/// Network input extracted from a state (the rho-only form sees only the
/// first component).
inline State net_input(ClosureForm f, const State& q) {
  if (input_dim(f) == q.size()) return q;
  return State::scalar(q[0]);
}

/// Average state of the linearization. The first component is the
/// arithmetic mean; for the D=2 forms the momentum component comes from
/// the known-flux RH condition (square-root-weighted average).
inline State average_state(ClosureForm form, const State& ql, const State& qr) {
  if (state_dim(form) == 1) return State::scalar(0.5 * (ql[0] + qr[0]));
  if (ql[0] <= 0.0 || qr[0] <= 0.0)
    throw std::domain_error("average_state: first component must be positive");
  const double hbar = 0.5 * (ql[0] + qr[0]);
  const double ubar = detail::roe_velocity_average(ql[0], ql[1], qr[0], qr[1]);
  return State::pair(hbar, hbar * ubar);
}

namespace detail {
/// RoeData for the companion-form matrix [[0,1],[c,t]] with an externally
/// computed discriminant (the expanded forms avoid cancellation). Throws on
/// a genuinely negative discriminant; roundoff-scale negatives collapse to
/// a degenerate pair.
inline RoeData companion_roe_checked(const State& qbar, double c, double t, double disc) {
  if (disc < 0.0) {
    const double scale = std::max(1.0, t * t + 4.0 * std::abs(c));
    if (disc > -1e-14 * scale)
      disc = 0.0;
    else
      throw HyperbolicityError(disc, -1, -1);
  }
  RoeData d;
  d.dim = 2;
  d.qbar = qbar;
  d.a = Mat::mat2(0.0, 1.0, c, t);
  const double root = std::sqrt(disc);
  d.lambda[0] = 0.5 * (t - root);
  d.lambda[1] = 0.5 * (t + root);
  d.r[0] = State::pair(1.0, d.lambda[0]);
  d.r[1] = State::pair(1.0, d.lambda[1]);
  return d;
}
}  // namespace detail

/// Closure-dependent Roe linearization A = d_u f_K + d_u f_U + d_N f_U d_u N
/// at the average state. For the rho-only traffic form the network slope is
/// replaced by its secant, which satisfies the RH identity exactly for any
/// parameters. Throws HyperbolicityError on complex eigenvalues.
inline RoeData gorinn_roe(ClosureForm form, const State& ql, const State& qr,
                          const NetworkParams& p) {
  const State qbar = average_state(form, ql, qr);
  switch (form) {
    case ClosureForm::BurgersFull: {
      const double a = nn_grad_u(qbar, p)[0];
      RoeData d;
      d.dim = 1;
      d.qbar = qbar;
      d.a = Mat::scalar(a);
      d.lambda[0] = a;
      d.r[0] = State::scalar(1.0);
      return d;
    }
    case ClosureForm::LwrVelocity: {
      const double a = nn_eval(qbar, p) + qbar[0] * nn_grad_u(qbar, p)[0];
      RoeData d;
      d.dim = 1;
      d.qbar = qbar;
      d.a = Mat::scalar(a);
      d.lambda[0] = a;
      d.r[0] = State::scalar(1.0);
      return d;
    }
    case ClosureForm::SwPressure2d:
    case ClosureForm::PwPressure2d: {
      const double ubar = qbar[1] / qbar[0];
      const State g = nn_grad_u(qbar, p);
      const double c = -ubar * ubar + g[0];
      const double t = 2.0 * ubar + g[1];
      // t^2 + 4c with the u^2 cancellation removed algebraically.
      const double disc = g[1] * g[1] + 4.0 * ubar * g[1] + 4.0 * g[0];
      return detail::companion_roe_checked(qbar, c, t, disc);
    }
    case ClosureForm::PwPressureRhoOnly: {
      const double ubar = qbar[1] / qbar[0];
      const double drho = qr[0] - ql[0];
      double slope;
      if (std::abs(drho) < kCoincidentGap * std::abs(qbar[0])) {
        slope = nn_grad_u(net_input(form, qbar), p)[0];
      } else {
        slope = (nn_eval(net_input(form, qr), p) - nn_eval(net_input(form, ql), p)) / drho;
      }
      return detail::companion_roe_checked(qbar, -ubar * ubar + slope, 2.0 * ubar, 4.0 * slope);
    }
  }
  throw ConfigError("gorinn_roe: unknown closure form");
}

// ---------------------------------------------------------------------------
// Composite system driven by the Godunov update
// ---------------------------------------------------------------------------

/// f = f_K + f_U(u, N(u)) with the known source where the form has one,
/// wired to the closure-dependent Roe linearization.
class GorinnSystem final : public FluxSystem {
 public:
  GorinnSystem(ClosureForm form, NetworkParams params, PwParams pw = {})
      : form_(form), p_(std::move(params)), pw_(pw) {
    if (p_.n_inputs != input_dim(form))
      throw ConfigError("GorinnSystem: network input dimension does not match closure form");
  }

  int dim() const override { return state_dim(form_); }

  State flux(const State& q) const override {
    switch (form_) {
      case ClosureForm::BurgersFull:
        return State::scalar(nn_eval(q, p_));
      case ClosureForm::LwrVelocity:
        return State::scalar(q[0] * nn_eval(q, p_));
      default: {
        if (q[0] <= 0.0) throw std::domain_error("closure flux: first component must be positive");
        return State::pair(q[1], q[1] * q[1] / q[0] + nn_eval(net_input(form_, q), p_));
      }
    }
  }

  Mat jacobian(const State& q) const override {
    switch (form_) {
      case ClosureForm::BurgersFull:
        return Mat::scalar(nn_grad_u(q, p_)[0]);
      case ClosureForm::LwrVelocity:
        return Mat::scalar(nn_eval(q, p_) + q[0] * nn_grad_u(q, p_)[0]);
      case ClosureForm::SwPressure2d:
      case ClosureForm::PwPressure2d: {
        const double u = q[1] / q[0];
        const State g = nn_grad_u(q, p_);
        return Mat::mat2(0.0, 1.0, -u * u + g[0], 2.0 * u + g[1]);
      }
      case ClosureForm::PwPressureRhoOnly: {
        const double u = q[1] / q[0];
        const double np = nn_grad_u(net_input(form_, q), p_)[0];
        return Mat::mat2(0.0, 1.0, -u * u + np, 2.0 * u);
      }
    }
    throw ConfigError("closure jacobian: unknown form");
  }

  Eigs jacobian_eigenvalues(const State& q) const override {
    if (dim() == 1) {
      Eigs e;
      e.dim = 1;
      e.lambda[0] = jacobian(q)(0, 0);
      return e;
    }
    const double u = q[1] / q[0];
    double t, disc;
    if (form_ == ClosureForm::PwPressureRhoOnly) {
      t = 2.0 * u;
      disc = 4.0 * nn_grad_u(net_input(form_, q), p_)[0];
    } else {
      const State g = nn_grad_u(q, p_);
      t = 2.0 * u + g[1];
      disc = g[1] * g[1] + 4.0 * u * g[1] + 4.0 * g[0];
    }
    if (disc < 0.0) {
      if (disc > -1e-14 * std::max(1.0, t * t)) disc = 0.0;
      else throw HyperbolicityError(disc, -1, -1);
    }
    Eigs e;
    e.dim = 2;
    const double root = std::sqrt(disc);
    e.lambda[0] = 0.5 * (t - root);
    e.lambda[1] = 0.5 * (t + root);
    return e;
  }

  RoeData roe(const State& ql, const State& qr) const override {
    return gorinn_roe(form_, ql, qr, p_);
  }

  bool has_source() const override { return form_has_source(form_); }
  State source(const State& q) const override {
    if (!has_source()) return State(dim());
    return source_pw(q[0], q[1], pw_);
  }
  bool has_exact_relaxation() const override { return has_source(); }
  State relax_exact(const State& q, double dt) const override {
    const double eq = q[0] * ov_velocity(q[0], pw_);
    return State::pair(q[0], eq + (q[1] - eq) * std::exp(-dt / pw_.tau));
  }

  ClosureForm form() const { return form_; }
  const NetworkParams& params() const { return p_; }
  const PwParams& pw_params() const { return pw_; }

 private:
  ClosureForm form_;
  NetworkParams p_;
  PwParams pw_;
};

// ---------------------------------------------------------------------------
// Rankine-Hugoniot residual
// ---------------------------------------------------------------------------

/// Per-cell RH residual of the unknown flux part at the interfaces of Q^n:
///   [d_u f_U + d_N f_U d_u N](qbar_i) (Q_i - Q_{i-1})
///     - [f_U(Q_i, N(Q_i)) - f_U(Q_{i-1}, N(Q_{i-1}))],
/// reduced to its single nontrivial component. Identically zero for the
/// exact-RH rho-only form.
inline std::vector<double> rh_residual(ClosureForm form, const CellField& qn, BoundaryKind bc,
                                       const NetworkParams& p) {
  const int n = qn.n_cells;
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  if (!rh_loss_active(form)) return out;
  const CellField ext = fill_ghost(qn, bc);
  for (int i = 1; i <= n; ++i) {
    const State ql = ext.state(i);      // Q_{i-1}
    const State qr = ext.state(i + 1);  // Q_i
    const State qbar = average_state(form, ql, qr);
    double r = 0.0;
    switch (form) {
      case ClosureForm::BurgersFull:
        r = nn_grad_u(qbar, p)[0] * (qr[0] - ql[0]) - (nn_eval(qr, p) - nn_eval(ql, p));
        break;
      case ClosureForm::LwrVelocity:
        r = (nn_eval(qbar, p) + qbar[0] * nn_grad_u(qbar, p)[0]) * (qr[0] - ql[0]) -
            (qr[0] * nn_eval(qr, p) - ql[0] * nn_eval(ql, p));
        break;
      case ClosureForm::SwPressure2d:
      case ClosureForm::PwPressure2d: {
        const State g = nn_grad_u(qbar, p);
        r = g[0] * (qr[0] - ql[0]) + g[1] * (qr[1] - ql[1]) - (nn_eval(qr, p) - nn_eval(ql, p));
        break;
      }
      case ClosureForm::PwPressureRhoOnly:
        break;
    }
    out[static_cast<std::size_t>(i - 1)] = r;
  }
  return out;
}

/// One update of the learned system: exactly the Godunov-split advance with
/// the composite flux and the closure-dependent linearization.
inline CellField gorinn_update(const CellField& qn, const StepConfig& cfg, ClosureForm form,
                               const NetworkParams& p, const PwParams& pw = {}) {
  const GorinnSystem sys(form, p, pw);
  return advance(qn, cfg, sys);
}

}  // namespace gorinn
