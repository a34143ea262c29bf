#pragma once

// The inverse-problem solver: one-step update residuals plus the RH
// penalty, a forward-difference Jacobian, Levenberg-Marquardt iteration
// with adaptive damping, hyperbolicity-preserving initialization, and the
// error metrics reported per split.

#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "gorinn/closure.hpp"
#include "gorinn/data_io.hpp"

namespace gorinn {

struct TrainConfig {
  int n_neurons = 5;
  int max_epochs = 500;
  double rel_loss_tol = 1e-9;   // relative change of the objective
  double val_tol = 1e-9;        // validation MSE threshold
  int val_every = 20;           // epochs between validation checks
  int val_patience = 3;         // consecutive checks below val_tol
  double lambda0 = 0.01;
  double rh_weight = 1.0;       // weight of the RH loss (applied as sqrt on residuals)
  std::uint64_t rng_seed = 7;
  int n_threads = 1;
  int max_rejects = 10;         // damping escalations per epoch
  int max_init_redraws = 1000;
};

struct SplitMetrics {
  double max_l1 = 0.0;
  double mean_l1 = 0.0;
  double mse = 0.0;
};

struct EpochLog {
  int epoch = 0;
  double objective = 0.0;
  double lambda = 0.0;
  int rejects = 0;
  bool has_val = false;
  double val_mse = 0.0;
};

struct TrainReport {
  std::vector<EpochLog> epochs;
  std::string stop_reason;
  int init_redraws = 0;
  SplitMetrics train, val, test;
};

// ---------------------------------------------------------------------------
// Residual assembly
// ---------------------------------------------------------------------------

/// Expected residual-vector length: D N n_t update residuals plus N n_t RH
/// residuals when the form carries the RH loss.
inline long residual_length(ClosureForm form, const SnapshotPairSet& data) {
  const long n_pairs = static_cast<long>(data.pairs.size());
  const long per_pair_fvg = static_cast<long>(data.meta.n_cells) * data.meta.n_comp;
  long len = n_pairs * per_pair_fvg;
  if (rh_loss_active(form)) len += n_pairs * data.meta.n_cells;
  return len;
}

/// One-step update residuals Q^{n+1} - FVG(Q^n) for every pair, followed by
/// the RH residuals. Pairs are processed independently into disjoint slots,
/// so the result is bitwise-identical regardless of thread count. Raises
/// HyperbolicityError annotated with the offending (pair, cell) site.
inline std::vector<double> assemble_residuals(const SnapshotPairSet& data, ClosureForm form,
                                              const NetworkParams& p, const TrainConfig& cfg) {
  if (state_dim(form) != data.meta.n_comp)
    throw ConfigError("assemble_residuals: closure form does not match dataset dimension");
  const GorinnSystem sys(form, p, data.meta.params.pw);
  const StepConfig step_cfg = data.meta.step_config();
  const long n_pairs = static_cast<long>(data.pairs.size());
  const long n = data.meta.n_cells;
  const long d = data.meta.n_comp;
  const bool with_rh = rh_loss_active(form);
  const double rh_scale = std::sqrt(cfg.rh_weight);
  const long fvg_len = n_pairs * n * d;

  std::vector<double> out(static_cast<std::size_t>(residual_length(form, data)), 0.0);
  parallel_for(n_pairs, cfg.n_threads, [&](long lo, long hi) {
    for (long k = lo; k < hi; ++k) {
      const CellField qn = data.field_qn(static_cast<std::size_t>(k));
      CellField pred;
      try {
        pred = advance(qn, step_cfg, sys);
      } catch (const HyperbolicityError& e) {
        throw HyperbolicityError(e.disc, k, e.cell_index);
      }
      const SnapshotPair& pair = data.pairs[static_cast<std::size_t>(k)];
      double* slot = out.data() + k * n * d;
      for (long j = 0; j < n * d; ++j)
        slot[j] = pair.qn1[static_cast<std::size_t>(j)] - pred.data[static_cast<std::size_t>(j)];
      if (with_rh) {
        const auto rh = rh_residual(form, qn, step_cfg.bc, p);
        double* rh_slot = out.data() + fvg_len + k * n;
        for (long i = 0; i < n; ++i)
          rh_slot[i] = rh_scale * rh[static_cast<std::size_t>(i)];
      }
    }
  });
  return out;
}

/// Update residuals only, against an arbitrary system (bypass mode: feeding
/// the ground-truth model back into self-generated data must zero these).
inline std::vector<double> assemble_fvg_residuals(const SnapshotPairSet& data,
                                                  const FluxSystem& sys, int n_threads = 1) {
  const StepConfig step_cfg = data.meta.step_config();
  const long n_pairs = static_cast<long>(data.pairs.size());
  const long per_pair = static_cast<long>(data.meta.n_cells) * data.meta.n_comp;
  std::vector<double> out(static_cast<std::size_t>(n_pairs * per_pair), 0.0);
  parallel_for(n_pairs, n_threads, [&](long lo, long hi) {
    for (long k = lo; k < hi; ++k) {
      const CellField pred = advance(data.field_qn(static_cast<std::size_t>(k)), step_cfg, sys);
      const SnapshotPair& pair = data.pairs[static_cast<std::size_t>(k)];
      double* slot = out.data() + k * per_pair;
      for (long j = 0; j < per_pair; ++j)
        slot[j] = pair.qn1[static_cast<std::size_t>(j)] - pred.data[static_cast<std::size_t>(j)];
    }
  });
  return out;
}

inline double sum_of_squares(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// ---------------------------------------------------------------------------
// Finite-difference Jacobian
// ---------------------------------------------------------------------------

using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;

/// Column-major Jacobian of a residual map.
struct FdJacobian {
  long n_rows = 0;
  std::vector<std::vector<double>> cols;
};

/// Forward differences with step sqrt(eps) (1 + |P_j|). When the residual
/// fails at a perturbed point (e.g. hyperbolicity loss) the column retries
/// as a central difference at half step; a second failure propagates.
inline FdJacobian fd_jacobian(const ResidualFn& fn, const std::vector<double>& p0,
                              const std::vector<double>& f0) {
  const std::size_t n_par = p0.size();
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  FdJacobian jac;
  jac.n_rows = static_cast<long>(f0.size());
  jac.cols.resize(n_par);
  for (std::size_t j = 0; j < n_par; ++j) {
    const double h = sqrt_eps * (1.0 + std::abs(p0[j]));
    std::vector<double> pj = p0;
    std::vector<double>& col = jac.cols[j];
    try {
      pj[j] = p0[j] + h;
      const std::vector<double> fp = fn(pj);
      col.resize(f0.size());
      for (std::size_t r = 0; r < f0.size(); ++r) col[r] = (fp[r] - f0[r]) / h;
    } catch (...) {
      pj[j] = p0[j] + 0.5 * h;
      const std::vector<double> fp = fn(pj);
      pj[j] = p0[j] - 0.5 * h;
      const std::vector<double> fm = fn(pj);
      col.resize(f0.size());
      for (std::size_t r = 0; r < f0.size(); ++r) col[r] = (fp[r] - fm[r]) / h;
    }
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Levenberg-Marquardt step
// ---------------------------------------------------------------------------

namespace detail {
/// Gaussian elimination with partial pivoting on an n x n system.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  const double tiny = 1e-14 * std::max(scale, 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
    if (std::abs(a[piv * n + k]) < tiny)
      throw ConvergenceError("singular normal matrix in LM step");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = a[i * n + k] / a[k * n + k];
      if (m == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a[i * n + j] -= m * a[k * n + j];
      b[i] -= m * b[k];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i * n + j] * x[j];
    x[i] = s / a[i * n + i];
  }
  return x;
}
}  // namespace detail

/// Marquardt-scaled damped Gauss-Newton step: solves
/// (J^T J + lambda diag(J^T J)) dP = -J^T F. Zero diagonal entries (dead
/// parameters) are floored so the damping stays effective.
inline std::vector<double> lm_step(const FdJacobian& jac, const std::vector<double>& f,
                                   double lambda) {
  const std::size_t n_par = jac.cols.size();
  std::vector<double> a(n_par * n_par, 0.0);
  std::vector<double> g(n_par, 0.0);
  for (std::size_t i = 0; i < n_par; ++i) {
    for (std::size_t j = i; j < n_par; ++j) {
      double s = 0.0;
      const std::vector<double>& ci = jac.cols[i];
      const std::vector<double>& cj = jac.cols[j];
      for (std::size_t r = 0; r < ci.size(); ++r) s += ci[r] * cj[r];
      a[i * n_par + j] = s;
      a[j * n_par + i] = s;
    }
    double s = 0.0;
    for (std::size_t r = 0; r < jac.cols[i].size(); ++r) s += jac.cols[i][r] * f[r];
    g[i] = -s;
  }
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n_par; ++i) max_diag = std::max(max_diag, a[i * n_par + i]);
  for (std::size_t i = 0; i < n_par; ++i) {
    const double d = std::max(a[i * n_par + i], 1e-12 * std::max(max_diag, 1.0));
    a[i * n_par + i] += lambda * d;
  }
  return detail::solve_dense(std::move(a), std::move(g));
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// One-step prediction errors over a split: max and mean l1 norm of the
/// per-(cell, pair) error vector, and the MSE over all scalar entries.
inline SplitMetrics metrics(const SnapshotPairSet& data, ClosureForm form, const NetworkParams& p,
                            int n_threads = 1) {
  const GorinnSystem sys(form, p, data.meta.params.pw);
  const StepConfig cfg = data.meta.step_config();
  const long n_pairs = static_cast<long>(data.pairs.size());
  const long n = data.meta.n_cells;
  const long d = data.meta.n_comp;

  std::vector<double> pair_max(static_cast<std::size_t>(n_pairs), 0.0);
  std::vector<double> pair_sum_l1(static_cast<std::size_t>(n_pairs), 0.0);
  std::vector<double> pair_sum_sq(static_cast<std::size_t>(n_pairs), 0.0);
  parallel_for(n_pairs, n_threads, [&](long lo, long hi) {
    for (long k = lo; k < hi; ++k) {
      const CellField pred = advance(data.field_qn(static_cast<std::size_t>(k)), cfg, sys);
      const SnapshotPair& pair = data.pairs[static_cast<std::size_t>(k)];
      for (long i = 0; i < n; ++i) {
        double l1 = 0.0;
        for (long c = 0; c < d; ++c) {
          const double e = pred.data[static_cast<std::size_t>(i * d + c)] -
                           pair.qn1[static_cast<std::size_t>(i * d + c)];
          l1 += std::abs(e);
          pair_sum_sq[static_cast<std::size_t>(k)] += e * e;
        }
        pair_max[static_cast<std::size_t>(k)] = std::max(pair_max[static_cast<std::size_t>(k)], l1);
        pair_sum_l1[static_cast<std::size_t>(k)] += l1;
      }
    }
  });
  SplitMetrics m;
  for (long k = 0; k < n_pairs; ++k) {
    m.max_l1 = std::max(m.max_l1, pair_max[static_cast<std::size_t>(k)]);
    m.mean_l1 += pair_sum_l1[static_cast<std::size_t>(k)];
    m.mse += pair_sum_sq[static_cast<std::size_t>(k)];
  }
  const double n_sites = static_cast<double>(n_pairs) * n;
  if (n_sites > 0) {
    m.mean_l1 /= n_sites;
    m.mse /= n_sites * d;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Hyperbolicity-preserving initialization
// ---------------------------------------------------------------------------

namespace detail {
inline NetworkParams draw_params(ClosureForm form, int n_neurons, Rng& rng) {
  NetworkParams p = NetworkParams::zeros(input_dim(form), n_neurons);
  std::vector<double> flat(static_cast<std::size_t>(p.count()));
  for (double& x : flat) x = rng.uniform(-0.5, 0.5);
  return NetworkParams::unflatten(p.n_inputs, p.n_neurons, flat);
}

/// True when every interface linearization over the training pairs has real
/// eigenvalues (and, under HLLE, every endpoint Jacobian as well).
inline bool hyperbolic_on_data(const SnapshotPairSet& data, ClosureForm form,
                               const NetworkParams& p) {
  const GorinnSystem sys(form, p, data.meta.params.pw);
  const bool hlle = data.meta.solver == SolverKind::Hlle;
  for (const SnapshotPair& pair : data.pairs) {
    CellField qn = CellField::zeros(data.meta.n_cells, data.meta.n_comp, data.meta.dx, pair.t);
    qn.data = pair.qn;
    const CellField ext = fill_ghost(qn, data.meta.bc);
    try {
      for (int k = 0; k + 1 < ext.n_cells; ++k) {
        gorinn_roe(form, ext.state(k), ext.state(k + 1), p);
        if (hlle) sys.jacobian_eigenvalues(ext.state(k));
      }
      if (hlle) sys.jacobian_eigenvalues(ext.state(ext.n_cells - 1));
    } catch (const HyperbolicityError&) {
      return false;
    }
  }
  return true;
}
}  // namespace detail

/// Draws parameters from U[-0.5, 0.5] until the interface linearizations at
/// every training pair are hyperbolic. Returns the draw and how many were
/// rejected.
inline std::pair<NetworkParams, int> hyperbolic_init(const SnapshotPairSet& train_set,
                                                     ClosureForm form, const TrainConfig& cfg) {
  if (train_set.pairs.empty()) throw ConfigError("hyperbolic_init: empty training set");
  Rng rng(cfg.rng_seed);
  for (int attempt = 0; attempt <= cfg.max_init_redraws; ++attempt) {
    NetworkParams p = detail::draw_params(form, cfg.n_neurons, rng);
    if (detail::hyperbolic_on_data(train_set, form, p)) return {std::move(p), attempt};
  }
  throw ConvergenceError("hyperbolic_init: no hyperbolic draw within " +
                         std::to_string(cfg.max_init_redraws) + " redraws");
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

/// Levenberg-Marquardt minimization of the stacked residuals with the three
/// stopping criteria: epoch budget, relative objective change, and
/// sustained sub-threshold validation MSE (checked every val_every epochs).
/// Returns the parameters with the best validation MSE seen.
inline std::pair<NetworkParams, TrainReport> train(const std::array<SnapshotPairSet, 3>& splits,
                                                   ClosureForm form, const TrainConfig& cfg) {
  const SnapshotPairSet& train_set = splits[0];
  const SnapshotPairSet& val_set = splits[1];

  TrainReport report;
  auto [params, redraws] = hyperbolic_init(train_set, form, cfg);
  report.init_redraws = redraws;

  const ResidualFn resid = [&](const std::vector<double>& flat) {
    const NetworkParams p = NetworkParams::unflatten(params.n_inputs, params.n_neurons, flat);
    return assemble_residuals(train_set, form, p, cfg);
  };

  std::vector<double> pvec = params.flatten();
  std::vector<double> f = resid(pvec);
  double objective = sum_of_squares(f);
  double lambda = cfg.lambda0;

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> best_pvec = pvec;
  int val_streak = 0;

  auto check_validation = [&](int epoch, EpochLog& log) {
    const NetworkParams p = NetworkParams::unflatten(params.n_inputs, params.n_neurons, pvec);
    const double val_mse = metrics(val_set, form, p, cfg.n_threads).mse;
    log.has_val = true;
    log.val_mse = val_mse;
    if (val_mse < best_val) {
      best_val = val_mse;
      best_pvec = pvec;
    }
    val_streak = val_mse < cfg.val_tol ? val_streak + 1 : 0;
    (void)epoch;
    return val_streak >= cfg.val_patience;
  };

  report.stop_reason = "max_epochs";
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    EpochLog log;
    log.epoch = epoch;

    FdJacobian jac;
    try {
      jac = fd_jacobian(resid, pvec, f);
    } catch (...) {
      report.stop_reason = "fd_failure";
      log.objective = objective;
      log.lambda = lambda;
      report.epochs.push_back(log);
      break;
    }

    bool accepted = false;
    double prev_objective = objective;
    for (int rejects = 0; rejects <= cfg.max_rejects; ++rejects) {
      std::vector<double> dp;
      try {
        dp = lm_step(jac, f, lambda);
      } catch (const ConvergenceError&) {
        lambda *= 10.0;
        log.rejects = rejects + 1;
        continue;
      }
      std::vector<double> trial = pvec;
      for (std::size_t j = 0; j < trial.size(); ++j) trial[j] += dp[j];
      double trial_objective = std::numeric_limits<double>::infinity();
      std::vector<double> trial_f;
      try {
        trial_f = resid(trial);
        trial_objective = sum_of_squares(trial_f);
      } catch (const CflError&) {
      } catch (const HyperbolicityError&) {
      } catch (const ConvergenceError&) {
      } catch (const std::domain_error&) {
      }
      if (trial_objective < objective) {
        pvec = std::move(trial);
        f = std::move(trial_f);
        objective = trial_objective;
        lambda /= 10.0;
        accepted = true;
        log.rejects = rejects;
        break;
      }
      lambda *= 10.0;
      log.rejects = rejects + 1;
    }

    log.objective = objective;
    log.lambda = lambda;
    if (!accepted) {
      report.epochs.push_back(log);
      report.stop_reason = "stalled";
      break;
    }

    bool stop = false;
    if (epoch % cfg.val_every == 0 && check_validation(epoch, log)) {
      report.stop_reason = "val_tol";
      stop = true;
    }
    report.epochs.push_back(log);
    if (stop) break;
    if (prev_objective > 0.0 &&
        std::abs(prev_objective - objective) / prev_objective < cfg.rel_loss_tol) {
      report.stop_reason = "rel_tol";
      break;
    }
  }

  // Final validation check so the best-on-validation choice sees the last P.
  {
    EpochLog log;
    log.epoch = static_cast<int>(report.epochs.size());
    log.objective = objective;
    log.lambda = lambda;
    check_validation(log.epoch, log);
  }

  NetworkParams out = NetworkParams::unflatten(params.n_inputs, params.n_neurons, best_pvec);
  report.train = metrics(splits[0], form, out, cfg.n_threads);
  report.val = metrics(splits[1], form, out, cfg.n_threads);
  report.test = metrics(splits[2], form, out, cfg.n_threads);
  return {std::move(out), std::move(report)};
}

// ---------------------------------------------------------------------------
// Report persistence
// ---------------------------------------------------------------------------

inline json metrics_to_json(const SplitMetrics& m) {
  return json{{"max_l1", m.max_l1}, {"mean_l1", m.mean_l1}, {"mse", m.mse}};
}

inline json report_to_json(const TrainReport& r) {
  json epochs = json::array();
  for (const EpochLog& e : r.epochs) {
    json je{{"epoch", e.epoch}, {"objective", e.objective}, {"lambda", e.lambda},
            {"rejects", e.rejects}};
    if (e.has_val) je["val_mse"] = e.val_mse;
    epochs.push_back(je);
  }
  return json{{"schema", "gorinn-report-v1"},
              {"stop_reason", r.stop_reason},
              {"init_redraws", r.init_redraws},
              {"epochs", epochs},
              {"metrics",
               {{"train", metrics_to_json(r.train)},
                {"val", metrics_to_json(r.val)},
                {"test", metrics_to_json(r.test)}}}};
}

inline void save_report(const std::filesystem::path& path, const TrainReport& r) {
  std::ofstream os(path);
  if (!os) throw SchemaError("cannot open " + path.string() + " for writing");
  os << report_to_json(r).dump(2) << "\n";
}

inline void save_train_log(const std::filesystem::path& path, const TrainReport& r) {
  std::ofstream os(path);
  if (!os) throw SchemaError("cannot open " + path.string() + " for writing");
  os << "# epoch objective lambda val_mse\n";
  for (const EpochLog& e : r.epochs) {
    os << e.epoch << ' ' << detail::fmt17(e.objective) << ' ' << detail::fmt17(e.lambda) << ' ';
    if (e.has_val)
      os << detail::fmt17(e.val_mse);
    else
      os << "-";
    os << "\n";
  }
  os << "# stop_reason " << r.stop_reason << "\n";
}

}  // namespace gorinn
