#include <catch2/catch_amalgamated.hpp>

#include "gorinn/closure.hpp"

using namespace gorinn;

namespace {

NetworkParams random_net(int n_inputs, int n_neurons, Rng& rng, double scale = 0.5) {
  NetworkParams p = NetworkParams::zeros(n_inputs, n_neurons);
  for (auto& w : p.w_out) w = scale * rng.normal();
  for (auto& w : p.w_in) w = scale * rng.normal();
  for (auto& b : p.bias) b = scale * rng.normal();
  return p;
}

/// Appends one flat-response neuron realizing an exact constant shift c.
NetworkParams shifted_net(const NetworkParams& p, double c) {
  NetworkParams q = NetworkParams::zeros(p.n_inputs, p.n_neurons + 1);
  std::copy(p.w_out.begin(), p.w_out.end(), q.w_out.begin());
  std::copy(p.bias.begin(), p.bias.end(), q.bias.begin());
  for (int i = 0; i < p.n_neurons; ++i)
    for (int j = 0; j < p.n_inputs; ++j)
      q.w_in[static_cast<std::size_t>(i * p.n_inputs + j)] =
          p.w_in[static_cast<std::size_t>(i * p.n_inputs + j)];
  // Zero input weights: the neuron outputs sigma(b) for every u.
  const double b = 0.3;
  q.bias[static_cast<std::size_t>(p.n_neurons)] = b;
  q.w_out[static_cast<std::size_t>(p.n_neurons)] = c / detail::sigmoid(b);
  return q;
}

State fd_nn_grad(const State& u, const NetworkParams& p) {
  State g(p.n_inputs);
  for (int j = 0; j < p.n_inputs; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(u[j]));
    State up = u, um = u;
    up[j] += h;
    um[j] -= h;
    g[j] = (nn_eval(up, p) - nn_eval(um, p)) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("nn_eval basic identities", "[closure]") {
  Rng rng(61);
  NetworkParams p = random_net(2, 5, rng);

  // Zero output weights kill the network.
  NetworkParams p0 = p;
  std::fill(p0.w_out.begin(), p0.w_out.end(), 0.0);
  CHECK(nn_eval(State::pair(0.3, -1.2), p0) == 0.0);

  // Zero input weights make the output independent of u.
  NetworkParams pc = p;
  std::fill(pc.w_in.begin(), pc.w_in.end(), 0.0);
  const double c = nn_eval(State::pair(0.0, 0.0), pc);
  CHECK(nn_eval(State::pair(5.0, -7.0), pc) == Catch::Approx(c).epsilon(1e-15));

  // Single neuron, unit weights, zero bias: sigma(0) = 1/2.
  NetworkParams one = NetworkParams::zeros(1, 1);
  one.w_out[0] = 1.0;
  one.w_in[0] = 1.0;
  CHECK(nn_eval(State::scalar(0.0), one) == 0.5);
}

TEST_CASE("nn_grad_u is the exact gradient", "[closure]") {
  // sigma'(0) = 1/4 for the single-neuron case.
  NetworkParams one = NetworkParams::zeros(1, 1);
  one.w_out[0] = 1.0;
  one.w_in[0] = 1.0;
  CHECK(nn_grad_u(State::scalar(0.0), one)[0] == 0.25);

  NetworkParams z = NetworkParams::zeros(2, 4);
  CHECK(nn_grad_u(State::pair(1.0, 2.0), z).norm_inf() == 0.0);

  // Central-difference oracle over 100 random draws.
  Rng rng(67);
  for (int k = 0; k < 100; ++k) {
    const int d = 1 + static_cast<int>(rng.below(2));
    const NetworkParams p = random_net(d, 5, rng);
    State u(d);
    for (int j = 0; j < d; ++j) u[j] = rng.uniform(-2.0, 2.0);
    const State ga = nn_grad_u(u, p);
    const State gf = fd_nn_grad(u, p);
    const double rel = (ga - gf).norm_inf() / std::max(ga.norm_inf(), 1e-9);
    CHECK(rel < 1e-6);
  }
}

TEST_CASE("average_state per closure form", "[closure]") {
  CHECK(average_state(ClosureForm::BurgersFull, State::scalar(1), State::scalar(3))[0] == 2.0);

  const State q = State::pair(1.7, -0.4);
  for (auto form : {ClosureForm::SwPressure2d, ClosureForm::PwPressure2d,
                    ClosureForm::PwPressureRhoOnly}) {
    const State avg = average_state(form, q, q);
    CHECK(avg[0] == Catch::Approx(q[0]).epsilon(1e-14));
    CHECK(avg[1] == Catch::Approx(q[1]).epsilon(1e-14));
  }

  const State avg = average_state(ClosureForm::SwPressure2d, State::pair(1, 1), State::pair(4, 8));
  CHECK(avg[0] == Catch::Approx(2.5).epsilon(1e-14));
  CHECK(avg[1] == Catch::Approx(25.0 / 6.0).epsilon(1e-14));

  CHECK_THROWS_AS(average_state(ClosureForm::SwPressure2d, State::pair(-1, 0), State::pair(1, 0)),
                  std::domain_error);
}

TEST_CASE("gorinn_roe is consistent with the composite flux at equal states", "[closure]") {
  Rng rng(71);
  for (auto form : {ClosureForm::BurgersFull, ClosureForm::LwrVelocity, ClosureForm::SwPressure2d,
                    ClosureForm::PwPressure2d, ClosureForm::PwPressureRhoOnly}) {
    const NetworkParams p = random_net(input_dim(form), 5, rng);
    const GorinnSystem sys(form, p);
    for (int k = 0; k < 25; ++k) {
      State q(state_dim(form));
      q[0] = rng.uniform(0.2, 2.0);
      if (state_dim(form) == 2) q[1] = rng.uniform(-0.5, 0.5);
      RoeData roe;
      try {
        roe = gorinn_roe(form, q, q, p);
      } catch (const HyperbolicityError&) {
        continue;  // random draws may be non-hyperbolic; consistency is tested on the rest
      }
      // Finite-difference Jacobian of the composite flux as the oracle.
      for (int c = 0; c < sys.dim(); ++c) {
        const double h = 1e-6 * (1.0 + std::abs(q[c]));
        State qp = q, qm = q;
        qp[c] += h;
        qm[c] -= h;
        const State fp = sys.flux(qp);
        const State fm = sys.flux(qm);
        for (int r = 0; r < sys.dim(); ++r) {
          const double fd = (fp[r] - fm[r]) / (2.0 * h);
          CHECK(std::abs(roe.a(r, c) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
        }
      }
    }
  }
}

TEST_CASE("rho-only traffic closure satisfies RH exactly for arbitrary parameters", "[closure]") {
  Rng rng(73);
  int tested = 0;
  for (int k = 0; k < 1000; ++k) {
    NetworkParams p = random_net(1, 5, rng);
    const State ql = State::pair(rng.uniform(0.05, 0.3), rng.uniform(-0.2, 0.4));
    const State qr = State::pair(rng.uniform(0.05, 0.3), rng.uniform(-0.2, 0.4));
    RoeData roe;
    try {
      roe = gorinn_roe(ClosureForm::PwPressureRhoOnly, ql, qr, p);
    } catch (const HyperbolicityError&) {
      // Flip the network sign (flips the secant slope) and retry once.
      for (auto& w : p.w_out) w = -w;
      try {
        roe = gorinn_roe(ClosureForm::PwPressureRhoOnly, ql, qr, p);
      } catch (const HyperbolicityError&) {
        continue;
      }
    }
    const GorinnSystem sys(ClosureForm::PwPressureRhoOnly, p);
    const State lhs = roe.a.apply(qr - ql);
    const State rhs = sys.flux(qr) - sys.flux(ql);
    const double scale = std::max({1.0, rhs.norm_inf(), roe.a.norm_inf()});
    CHECK((lhs - rhs).norm_inf() <= 1e-12 * scale);
    ++tested;
  }
  CHECK(tested >= 500);
}

namespace {
/// Literal transcription of the per-form RH residual sums, with its own
/// ghost handling, used as an independent oracle.
std::vector<double> rh_oracle(ClosureForm form, const CellField& qn, BoundaryKind bc,
                              const NetworkParams& p) {
  const int n = qn.n_cells;
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  auto at = [&](int i) {  // logical cell index, i in -1..n+2
    int k;
    if (i >= 1 && i <= n) k = i - 1;
    else if (bc == BoundaryKind::Periodic) k = ((i - 1) % n + n) % n;
    else k = i < 1 ? 0 : n - 1;
    return qn.state(k);
  };
  for (int i = 1; i <= n; ++i) {
    const State ql = at(i - 1);
    const State qr = at(i);
    double r = 0.0;
    if (form == ClosureForm::BurgersFull) {
      const State ubar = State::scalar(0.5 * (ql[0] + qr[0]));
      r = nn_grad_u(ubar, p)[0] * (qr[0] - ql[0]) - (nn_eval(qr, p) - nn_eval(ql, p));
    } else if (form == ClosureForm::LwrVelocity) {
      const State rbar = State::scalar(0.5 * (ql[0] + qr[0]));
      r = (nn_eval(rbar, p) + rbar[0] * nn_grad_u(rbar, p)[0]) * (qr[0] - ql[0]) -
          (qr[0] * nn_eval(qr, p) - ql[0] * nn_eval(ql, p));
    } else {
      const double hbar = 0.5 * (ql[0] + qr[0]);
      const double sl = std::sqrt(ql[0]);
      const double sr = std::sqrt(qr[0]);
      const double qbar = hbar * (ql[1] / sl + qr[1] / sr) / (sl + sr);
      const State avg = State::pair(hbar, qbar);
      const State g = nn_grad_u(avg, p);
      r = g[0] * (qr[0] - ql[0]) + g[1] * (qr[1] - ql[1]) - (nn_eval(qr, p) - nn_eval(ql, p));
    }
    out[static_cast<std::size_t>(i - 1)] = r;
  }
  return out;
}

CellField random_positive_field(int n, int d, Rng& rng) {
  CellField f = CellField::zeros(n, d, 0.1);
  for (int i = 0; i < n; ++i) {
    f.at(i, 0) = rng.uniform(0.2, 2.0);
    if (d == 2) f.at(i, 1) = rng.uniform(-0.5, 0.5);
  }
  return f;
}
}  // namespace

TEST_CASE("rh_residual vanishes on constant fields and constant closures", "[closure]") {
  Rng rng(79);
  for (auto form : {ClosureForm::BurgersFull, ClosureForm::LwrVelocity, ClosureForm::SwPressure2d,
                    ClosureForm::PwPressure2d}) {
    const int d = state_dim(form);
    const NetworkParams p = random_net(input_dim(form), 5, rng);

    CellField constant = CellField::zeros(10, d, 0.1);
    for (int i = 0; i < 10; ++i) {
      constant.at(i, 0) = 0.8;
      if (d == 2) constant.at(i, 1) = 0.3;
    }
    for (double r : rh_residual(form, constant, BoundaryKind::Periodic, p))
      CHECK(std::abs(r) < 1e-15);

    // Constant closure: zero input weights.
    NetworkParams pc = p;
    std::fill(pc.w_in.begin(), pc.w_in.end(), 0.0);
    const CellField field = random_positive_field(10, d, rng);
    for (double r : rh_residual(form, field, BoundaryKind::Periodic, pc))
      CHECK(std::abs(r) < 1e-13);
  }
}

TEST_CASE("rh_residual matches an independently coded oracle", "[closure]") {
  Rng rng(83);
  for (auto form : {ClosureForm::BurgersFull, ClosureForm::LwrVelocity, ClosureForm::SwPressure2d,
                    ClosureForm::PwPressure2d}) {
    for (auto bc : {BoundaryKind::Periodic, BoundaryKind::Outflow}) {
      const NetworkParams p = random_net(input_dim(form), 5, rng);
      const CellField field = random_positive_field(12, state_dim(form), rng);
      const auto got = rh_residual(form, field, bc, p);
      const auto want = rh_oracle(form, field, bc, p);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(std::abs(got[i] - want[i]) <= 1e-14 * std::max(1.0, std::abs(want[i])));
    }
  }

  // The exact-RH form is excluded from the loss.
  const NetworkParams p = random_net(1, 5, rng);
  const CellField field = random_positive_field(12, 2, rng);
  for (double r : rh_residual(ClosureForm::PwPressureRhoOnly, field, BoundaryKind::Periodic, p))
    CHECK(r == 0.0);
}

TEST_CASE("rh_residual is invariant under constant closure shifts", "[closure]") {
  // Output biases are omitted because only differences (or exactly linear
  // contributions, for the velocity form) of N enter the RH residual;
  // realize the shift through an extra flat neuron and compare.
  Rng rng(89);
  for (auto form : {ClosureForm::BurgersFull, ClosureForm::LwrVelocity,
                    ClosureForm::SwPressure2d, ClosureForm::PwPressure2d}) {
    const NetworkParams p = random_net(input_dim(form), 5, rng);
    const NetworkParams ps = shifted_net(p, 0.7);
    const CellField field = random_positive_field(12, state_dim(form), rng);
    const auto r0 = rh_residual(form, field, BoundaryKind::Periodic, p);
    const auto r1 = rh_residual(form, field, BoundaryKind::Periodic, ps);
    for (std::size_t i = 0; i < r0.size(); ++i) CHECK(std::abs(r0[i] - r1[i]) < 1e-12);
  }

  // The velocity closure multiplies N by rho, so the shift is visible in the
  // interface linearization (N itself enters): the closure stays fully
  // identifiable through the update residuals.
  const NetworkParams p = random_net(1, 5, rng);
  const NetworkParams ps = shifted_net(p, 0.7);
  const State ql = State::scalar(0.4);
  const State qr = State::scalar(0.9);
  const double a0 = gorinn_roe(ClosureForm::LwrVelocity, ql, qr, p).a(0, 0);
  const double a1 = gorinn_roe(ClosureForm::LwrVelocity, ql, qr, ps).a(0, 0);
  CHECK(std::abs(a1 - a0) == Catch::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("gorinn_update fixed points", "[closure]") {
  Rng rng(97);

  // Constant field, sourceless form: unchanged for any parameters.
  const NetworkParams p = random_net(1, 5, rng);
  StepConfig cfg;
  cfg.dt = 0.005;
  CellField u = CellField::zeros(10, 1, 0.02);
  for (int i = 0; i < 10; ++i) u.at(i, 0) = 1.1;
  const CellField u1 = gorinn_update(u, cfg, ClosureForm::BurgersFull, p);
  for (int i = 0; i < 10; ++i) CHECK(u1.at(i, 0) == 1.1);

  // Constant field, traffic form: the known source relaxes the momentum.
  // A monotone-increasing net keeps the linearization hyperbolic.
  NetworkParams pr = random_net(1, 5, rng);
  for (auto& w : pr.w_out) w = std::abs(w);
  for (auto& w : pr.w_in) w = std::abs(w);
  const PwParams pw;
  StepConfig cfg_pw;
  cfg_pw.dt = 0.5;
  cfg_pw.solver = SolverKind::Hlle;
  cfg_pw.source = SourceIntegrator::ExactRelaxation;
  CellField q = CellField::zeros(10, 2, 8.0);
  for (int i = 0; i < 10; ++i) {
    q.at(i, 0) = 0.1;
    q.at(i, 1) = 0.1;
  }
  const CellField q1 = gorinn_update(q, cfg_pw, ClosureForm::PwPressureRhoOnly, pr, pw);
  const PwSystem ref(pw);
  const State relaxed = ref.relax_exact(State::pair(0.1, 0.1), 0.5);
  for (int i = 0; i < 10; ++i) {
    CHECK(q1.at(i, 0) == 0.1);
    CHECK(q1.at(i, 1) == Catch::Approx(relaxed[1]).epsilon(1e-14));
  }
}

TEST_CASE("net_input slices the density for the rho-only form", "[closure]") {
  const State q = State::pair(0.25, -3.0);
  const State in = net_input(ClosureForm::PwPressureRhoOnly, q);
  CHECK(in.size() == 1);
  CHECK(in[0] == 0.25);
  CHECK(net_input(ClosureForm::SwPressure2d, q).size() == 2);
}
