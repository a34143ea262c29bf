#pragma once

// Dataset generation via forward solves, train/val/test split management,
// and persistence: JSON manifests with CSV payloads (one row per cell,
// decimal text at 17 significant digits so reloads are bit-exact).

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gorinn/closure.hpp"
#include "gorinn/godunov.hpp"
#include "gorinn/grid.hpp"
#include "gorinn/models.hpp"

namespace gorinn {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Formatting / parsing helpers
// ---------------------------------------------------------------------------

namespace detail {
inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline const json& require_key(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(where + ": missing key '" + key + "'");
  return *it;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Snapshot pairs
// ---------------------------------------------------------------------------

/// One (Q^n, Q^{n+1}) full-domain observation. Values are stored row-major
/// (cell x component), matching CellField.
struct SnapshotPair {
  int run = 0;
  int step = 0;
  double t = 0.0;
  std::vector<double> qn;
  std::vector<double> qn1;
};

struct DatasetMeta {
  ModelKind model = ModelKind::Burgers;
  ModelParams params;
  double x_left = 0.0;
  double x_right = 0.0;
  int n_cells = 0;
  int n_comp = 0;
  double dt = 0.0;
  double dx = 0.0;
  BoundaryKind bc = BoundaryKind::Periodic;
  SolverKind solver = SolverKind::Roe;
  LimiterKind limiter = LimiterKind::VanLeer;
  std::uint64_t seed = 0;
  std::string split;

  StepConfig step_config() const {
    StepConfig cfg;
    cfg.dt = dt;
    cfg.bc = bc;
    cfg.solver = solver;
    cfg.limiter = limiter;
    cfg.source = model == ModelKind::Pw ? SourceIntegrator::ExactRelaxation
                                        : SourceIntegrator::None;
    return cfg;
  }
};

struct SnapshotPairSet {
  DatasetMeta meta;
  std::vector<SnapshotPair> pairs;

  CellField field_qn(std::size_t k) const { return to_field(pairs[k].qn, pairs[k].t); }
  CellField field_qn1(std::size_t k) const {
    return to_field(pairs[k].qn1, pairs[k].t + meta.dt);
  }

 private:
  CellField to_field(const std::vector<double>& v, double t) const {
    CellField f = CellField::zeros(meta.n_cells, meta.n_comp, meta.dx, t);
    f.data = v;
    return f;
  }
};

// ---------------------------------------------------------------------------
// Forward trajectories
// ---------------------------------------------------------------------------

struct Trajectory {
  Grid grid;
  std::vector<CellField> snapshots;   // includes t = 0
  std::vector<double> cfl_history;    // per step, when recorded
};

/// Runs n_steps updates from the initial field, keeping every snapshot.
inline Trajectory forward_solve(const FluxSystem& sys, const Grid& grid, const CellField& ic,
                                const StepConfig& cfg, int n_steps, bool record_cfl = false) {
  Trajectory traj;
  traj.grid = grid;
  traj.snapshots.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.snapshots.push_back(ic);
  CellField cur = ic;
  for (int n = 0; n < n_steps; ++n) {
    if (record_cfl) traj.cfl_history.push_back(cfl_number(cur, cfg, sys));
    cur = advance(cur, cfg, sys);
    traj.snapshots.push_back(cur);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Generation plans
// ---------------------------------------------------------------------------

/// Full recipe for building a dataset: model setup, the four initial
/// conditions, horizon, and split ratios.
struct GenerationPlan {
  ModelKind model = ModelKind::Burgers;
  ModelParams params;
  double x_left = -1.0;
  double x_right = 1.0;
  int n_cells = 100;
  BoundaryKind bc = BoundaryKind::Periodic;
  SolverKind solver = SolverKind::Roe;
  LimiterKind limiter = LimiterKind::VanLeer;
  double dt = 0.005;
  double t_end = 3.0;
  std::vector<IcSpec> ics;
  double train_ratio = 0.15;
  double val_ratio = 0.15;
  std::uint64_t seed = 20240901;

  int steps_per_run() const { return static_cast<int>(std::lround(t_end / dt)); }
};

/// The reference setup of each benchmark (domain, resolution, horizon, and
/// the sweep of four initial conditions).
inline GenerationPlan default_plan(ModelKind model) {
  GenerationPlan plan;
  plan.model = model;
  switch (model) {
    case ModelKind::Burgers: {
      plan.x_left = -1.0;
      plan.x_right = 1.0;
      plan.n_cells = 100;
      plan.bc = BoundaryKind::Periodic;
      plan.solver = SolverKind::Roe;
      plan.dt = 0.005;
      plan.t_end = 3.0;
      for (int k = 0; k < 4; ++k) {
        IcSpec ic;
        ic.family = IcSpec::Family::Gaussian;
        ic.mu = 1.0 + k / 3.0;
        ic.sigma = 0.2;
        ic.x0 = 0.0;
        plan.ics.push_back(ic);
      }
      break;
    }
    case ModelKind::Lwr: {
      plan.x_left = -20.0;
      plan.x_right = 20.0;
      plan.n_cells = 100;
      plan.bc = BoundaryKind::Outflow;
      plan.solver = SolverKind::Roe;
      plan.dt = 0.1;
      plan.t_end = 60.0;
      for (int k = 0; k < 4; ++k) {
        IcSpec ic;
        ic.family = IcSpec::Family::Gaussian;
        ic.mu = 1.0;
        ic.sigma = 1.0 + 0.5 * k;
        ic.x0 = -10.0;
        plan.ics.push_back(ic);
      }
      break;
    }
    case ModelKind::Sw: {
      plan.x_left = -5.0;
      plan.x_right = 5.0;
      plan.n_cells = 200;
      plan.bc = BoundaryKind::Periodic;
      plan.solver = SolverKind::Roe;
      plan.dt = 0.01;
      plan.t_end = 3.0;
      for (int k = 0; k < 4; ++k) {
        IcSpec ic;
        ic.family = IcSpec::Family::Gaussian;
        ic.mu = 0.5;
        ic.sigma = 0.2 + 0.2 * k;
        ic.x0 = 0.0;
        ic.momentum = 0.0;
        plan.ics.push_back(ic);
      }
      break;
    }
    case ModelKind::Pw: {
      plan.x_left = 0.0;
      plan.x_right = 800.0;
      plan.n_cells = 100;
      plan.bc = BoundaryKind::Periodic;
      plan.solver = SolverKind::Hlle;
      plan.dt = 0.5;
      plan.t_end = 600.0;
      plan.train_ratio = 0.075;
      plan.val_ratio = 0.075;
      for (int k = 0; k < 4; ++k) {
        IcSpec ic;
        ic.family = IcSpec::Family::Sinusoid;
        ic.mu = 0.1 + 0.1 * k;
        ic.rho_star = 0.1;
        ic.wavelength = 800.0;
        ic.momentum = 0.1;
        plan.ics.push_back(ic);
      }
      break;
    }
  }
  return plan;
}

namespace detail {
inline void check_admissible(ModelKind model, const CellField& f, int run, int step) {
  auto fail = [&](const std::string& what) {
    throw ConvergenceError("inadmissible state in run " + std::to_string(run) + ", step " +
                           std::to_string(step) + ": " + what);
  };
  if (!f.all_finite()) fail("non-finite value");
  for (int i = 0; i < f.n_cells; ++i) {
    switch (model) {
      case ModelKind::Lwr:
        if (f.at(i, 0) < 0.0) fail("negative density");
        break;
      case ModelKind::Sw:
        if (f.at(i, 0) < kVacuumDepth) fail("depth below vacuum floor");
        break;
      case ModelKind::Pw:
        if (f.at(i, 0) <= 0.0) fail("non-positive density");
        break;
      case ModelKind::Burgers:
        break;
    }
  }
}
}  // namespace detail

/// Solves the forward problem for each initial condition, collects all
/// consecutive-step pairs, shuffles whole time levels with the seeded RNG,
/// and assigns train/val/test splits.
inline std::array<SnapshotPairSet, 3> generate(const GenerationPlan& plan) {
  if (plan.ics.empty()) throw ConfigError("generate: plan has no initial conditions");
  if (!(plan.train_ratio > 0.0) || !(plan.val_ratio > 0.0) ||
      !(plan.train_ratio + plan.val_ratio < 1.0))
    throw ConfigError("generate: split ratios must be positive and sum below 1");

  const Grid grid = make_grid(plan.x_left, plan.x_right, plan.n_cells);
  const auto sys = make_model(plan.model, plan.params);
  StepConfig cfg;
  cfg.dt = plan.dt;
  cfg.bc = plan.bc;
  cfg.solver = plan.solver;
  cfg.limiter = plan.limiter;
  cfg.source = plan.model == ModelKind::Pw ? SourceIntegrator::ExactRelaxation
                                           : SourceIntegrator::None;

  std::vector<SnapshotPair> all;
  const int n_steps = plan.steps_per_run();
  for (std::size_t r = 0; r < plan.ics.size(); ++r) {
    const CellField ic = initial_condition(plan.model, plan.ics[r], grid);
    Trajectory traj = forward_solve(*sys, grid, ic, cfg, n_steps);
    for (int n = 0; n < n_steps; ++n) {
      detail::check_admissible(plan.model, traj.snapshots[static_cast<std::size_t>(n + 1)],
                               static_cast<int>(r), n + 1);
      SnapshotPair pair;
      pair.run = static_cast<int>(r);
      pair.step = n;
      pair.t = traj.snapshots[static_cast<std::size_t>(n)].time;
      pair.qn = traj.snapshots[static_cast<std::size_t>(n)].data;
      pair.qn1 = traj.snapshots[static_cast<std::size_t>(n + 1)].data;
      all.push_back(std::move(pair));
    }
  }

  std::vector<std::size_t> order(all.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  Rng rng(plan.seed);
  rng.shuffle(order);

  const std::size_t n_total = all.size();
  const std::size_t n_train = static_cast<std::size_t>(std::lround(plan.train_ratio * n_total));
  const std::size_t n_val = static_cast<std::size_t>(std::lround(plan.val_ratio * n_total));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n_total)
    throw ConfigError("generate: split ratios leave an empty split");

  DatasetMeta meta;
  meta.model = plan.model;
  meta.params = plan.params;
  meta.x_left = plan.x_left;
  meta.x_right = plan.x_right;
  meta.n_cells = plan.n_cells;
  meta.n_comp = (plan.model == ModelKind::Sw || plan.model == ModelKind::Pw) ? 2 : 1;
  meta.dt = plan.dt;
  meta.dx = grid.dx;
  meta.bc = plan.bc;
  meta.solver = plan.solver;
  meta.limiter = plan.limiter;
  meta.seed = plan.seed;

  std::array<SnapshotPairSet, 3> out;
  const char* names[3] = {"train", "val", "test"};
  for (int s = 0; s < 3; ++s) {
    out[static_cast<std::size_t>(s)].meta = meta;
    out[static_cast<std::size_t>(s)].meta.split = names[s];
  }
  for (std::size_t k = 0; k < n_total; ++k) {
    const int s = k < n_train ? 0 : (k < n_train + n_val ? 1 : 2);
    out[static_cast<std::size_t>(s)].pairs.push_back(all[order[k]]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enum <-> string helpers shared by manifests and configs
// ---------------------------------------------------------------------------

inline std::string bc_name(BoundaryKind bc) {
  return bc == BoundaryKind::Periodic ? "periodic" : "outflow";
}
inline BoundaryKind parse_bc(const std::string& s) {
  if (s == "periodic") return BoundaryKind::Periodic;
  if (s == "outflow") return BoundaryKind::Outflow;
  throw ConfigError("unknown boundary kind: " + s);
}
inline std::string solver_name(SolverKind s) { return s == SolverKind::Roe ? "roe" : "hlle"; }
inline SolverKind parse_solver(const std::string& s) {
  if (s == "roe") return SolverKind::Roe;
  if (s == "hlle") return SolverKind::Hlle;
  throw ConfigError("unknown solver kind: " + s);
}
inline std::string limiter_name(LimiterKind k) {
  switch (k) {
    case LimiterKind::VanLeer:
      return "vanleer";
    case LimiterKind::Minmod:
      return "minmod";
    case LimiterKind::Superbee:
      return "superbee";
    case LimiterKind::None:
      return "none";
  }
  return "?";
}
inline LimiterKind parse_limiter(const std::string& s) {
  if (s == "vanleer") return LimiterKind::VanLeer;
  if (s == "minmod") return LimiterKind::Minmod;
  if (s == "superbee") return LimiterKind::Superbee;
  if (s == "none") return LimiterKind::None;
  throw ConfigError("unknown limiter kind: " + s);
}

inline json params_to_json(const ModelParams& p) {
  return json{{"lwr", {{"v_max", p.lwr.v_max}}},
              {"sw", {{"g", p.sw.g}}},
              {"pw",
               {{"tau", p.pw.tau},
                {"v0", p.pw.v0},
                {"gamma", p.pw.gamma},
                {"beta", p.pw.beta}}}};
}

inline ModelParams params_from_json(const json& j) {
  ModelParams p;
  if (j.contains("lwr")) p.lwr.v_max = detail::require_key(j["lwr"], "v_max", "params.lwr");
  if (j.contains("sw")) p.sw.g = detail::require_key(j["sw"], "g", "params.sw");
  if (j.contains("pw")) {
    const json& pw = j["pw"];
    p.pw.tau = detail::require_key(pw, "tau", "params.pw");
    p.pw.v0 = detail::require_key(pw, "v0", "params.pw");
    p.pw.gamma = detail::require_key(pw, "gamma", "params.pw");
    p.pw.beta = detail::require_key(pw, "beta", "params.pw");
  }
  return p;
}

// ---------------------------------------------------------------------------
// Dataset persistence
// ---------------------------------------------------------------------------

namespace detail {
inline void write_pairs_csv(const std::filesystem::path& path, const SnapshotPairSet& set) {
  std::ofstream os(path);
  if (!os) throw SchemaError("cannot open " + path.string() + " for writing");
  const int d = set.meta.n_comp;
  os << "pair,run,step,t,x";
  for (int c = 0; c < d; ++c) os << ",q" << c;
  for (int c = 0; c < d; ++c) os << ",qnext" << c;
  os << "\n";
  for (std::size_t k = 0; k < set.pairs.size(); ++k) {
    const SnapshotPair& p = set.pairs[k];
    for (int i = 0; i < set.meta.n_cells; ++i) {
      const double x = set.meta.x_left + (i + 0.5) * set.meta.dx;
      os << k << ',' << p.run << ',' << p.step << ',' << fmt17(p.t) << ',' << fmt17(x);
      for (int c = 0; c < d; ++c) os << ',' << fmt17(p.qn[static_cast<std::size_t>(i) * d + c]);
      for (int c = 0; c < d; ++c) os << ',' << fmt17(p.qn1[static_cast<std::size_t>(i) * d + c]);
      os << "\n";
    }
  }
}

inline void read_pairs_csv(const std::filesystem::path& path, SnapshotPairSet& set) {
  std::ifstream is(path);
  if (!is) throw SchemaError("cannot open " + path.string());
  const int d = set.meta.n_comp;
  const int n = set.meta.n_cells;
  std::string line;
  if (!std::getline(is, line)) throw SchemaError(path.string() + ": empty file");
  const std::size_t n_cols = 5 + 2 * static_cast<std::size_t>(d);
  long last_pair = -1;
  int row_in_pair = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv_line(line);
    if (cols.size() != n_cols)
      throw SchemaError(path.string() + ": expected " + std::to_string(n_cols) + " columns, got " +
                        std::to_string(cols.size()));
    const long pair_idx = std::stol(cols[0]);
    if (pair_idx != last_pair) {
      if (last_pair >= 0 && row_in_pair != n)
        throw SchemaError(path.string() + ": corrupted pair length");
      SnapshotPair p;
      p.run = std::stoi(cols[1]);
      p.step = std::stoi(cols[2]);
      p.t = std::strtod(cols[3].c_str(), nullptr);
      p.qn.assign(static_cast<std::size_t>(n) * d, 0.0);
      p.qn1.assign(static_cast<std::size_t>(n) * d, 0.0);
      set.pairs.push_back(std::move(p));
      last_pair = pair_idx;
      row_in_pair = 0;
    }
    SnapshotPair& p = set.pairs.back();
    const int i = row_in_pair++;
    if (i >= n) throw SchemaError(path.string() + ": corrupted pair length");
    for (int c = 0; c < d; ++c) {
      p.qn[static_cast<std::size_t>(i) * d + c] =
          std::strtod(cols[5 + static_cast<std::size_t>(c)].c_str(), nullptr);
      p.qn1[static_cast<std::size_t>(i) * d + c] =
          std::strtod(cols[5 + static_cast<std::size_t>(d + c)].c_str(), nullptr);
    }
  }
  if (last_pair >= 0 && row_in_pair != n)
    throw SchemaError(path.string() + ": corrupted pair length");
}
}  // namespace detail

/// Writes manifest.json + train/val/test.csv into dir.
inline void save_dataset(const std::filesystem::path& dir,
                         const std::array<SnapshotPairSet, 3>& sets) {
  std::filesystem::create_directories(dir);
  const DatasetMeta& m = sets[0].meta;
  json manifest{
      {"schema", "gorinn-dataset-v1"},
      {"model", model_name(m.model)},
      {"params", params_to_json(m.params)},
      {"grid", {{"x_left", m.x_left}, {"x_right", m.x_right}, {"n_cells", m.n_cells}}},
      {"bc", bc_name(m.bc)},
      {"solver", solver_name(m.solver)},
      {"limiter", limiter_name(m.limiter)},
      {"dt", m.dt},
      {"dx", m.dx},
      {"n_components", m.n_comp},
      {"seed", m.seed},
      {"splits",
       {{"train", sets[0].pairs.size()}, {"val", sets[1].pairs.size()},
        {"test", sets[2].pairs.size()}}},
  };
  std::ofstream os(dir / "manifest.json");
  os << manifest.dump(2) << "\n";
  detail::write_pairs_csv(dir / "train.csv", sets[0]);
  detail::write_pairs_csv(dir / "val.csv", sets[1]);
  detail::write_pairs_csv(dir / "test.csv", sets[2]);
}

inline std::array<SnapshotPairSet, 3> load_dataset(const std::filesystem::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw SchemaError("cannot open " + (dir / "manifest.json").string());
  json manifest = json::parse(is);
  using detail::require_key;
  const std::string where = "manifest";
  if (require_key(manifest, "schema", where) != "gorinn-dataset-v1")
    throw SchemaError("manifest: unsupported schema version");
  DatasetMeta meta;
  meta.model = parse_model_name(require_key(manifest, "model", where));
  meta.params = params_from_json(require_key(manifest, "params", where));
  const json& grid = require_key(manifest, "grid", where);
  meta.x_left = require_key(grid, "x_left", "manifest.grid");
  meta.x_right = require_key(grid, "x_right", "manifest.grid");
  meta.n_cells = require_key(grid, "n_cells", "manifest.grid");
  meta.bc = parse_bc(require_key(manifest, "bc", where));
  meta.solver = parse_solver(require_key(manifest, "solver", where));
  meta.limiter = parse_limiter(require_key(manifest, "limiter", where));
  meta.dt = require_key(manifest, "dt", where);
  meta.dx = require_key(manifest, "dx", where);
  meta.n_comp = require_key(manifest, "n_components", where);
  meta.seed = require_key(manifest, "seed", where).get<std::uint64_t>();
  const json& splits = require_key(manifest, "splits", where);

  std::array<SnapshotPairSet, 3> out;
  const char* names[3] = {"train", "val", "test"};
  for (int s = 0; s < 3; ++s) {
    out[static_cast<std::size_t>(s)].meta = meta;
    out[static_cast<std::size_t>(s)].meta.split = names[s];
    detail::read_pairs_csv(dir / (std::string(names[s]) + ".csv"), out[static_cast<std::size_t>(s)]);
    const std::size_t expected = require_key(splits, names[s], "manifest.splits");
    if (out[static_cast<std::size_t>(s)].pairs.size() != expected)
      throw SchemaError(std::string("manifest.splits: ") + names[s] + " count mismatch");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Network parameter persistence
// ---------------------------------------------------------------------------

inline void save_params(const std::filesystem::path& path, ClosureForm form,
                        const NetworkParams& p, const PwParams& pw = {}) {
  json j{
      {"schema", "gorinn-params-v1"},
      {"form", closure_form_name(form)},
      {"n_inputs", p.n_inputs},
      {"n_neurons", p.n_neurons},
      {"output_weights", p.w_out},
      {"input_weights", p.w_in},  // row-major L x n_inputs
      {"biases", p.bias},
      {"hyper", {{"activation", "logistic_sigmoid"}, {"output_bias", false}}},
  };
  if (form_has_source(form))
    j["pw_params"] = {{"tau", pw.tau}, {"v0", pw.v0}, {"gamma", pw.gamma}, {"beta", pw.beta}};
  std::ofstream os(path);
  if (!os) throw SchemaError("cannot open " + path.string() + " for writing");
  os << j.dump(2) << "\n";
}

struct LoadedParams {
  ClosureForm form;
  NetworkParams net;
  PwParams pw;
};

inline LoadedParams load_params(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw SchemaError("cannot open " + path.string());
  json j = json::parse(is);
  using detail::require_key;
  if (require_key(j, "schema", "params") != "gorinn-params-v1")
    throw SchemaError("params: unsupported schema version");
  LoadedParams out;
  out.form = parse_closure_form(require_key(j, "form", "params"));
  const int n_in = require_key(j, "n_inputs", "params");
  const int n_hid = require_key(j, "n_neurons", "params");
  out.net = NetworkParams::zeros(n_in, n_hid);
  out.net.w_out = require_key(j, "output_weights", "params").get<std::vector<double>>();
  out.net.w_in = require_key(j, "input_weights", "params").get<std::vector<double>>();
  out.net.bias = require_key(j, "biases", "params").get<std::vector<double>>();
  if (static_cast<int>(out.net.w_out.size()) != n_hid ||
      static_cast<int>(out.net.w_in.size()) != n_hid * n_in ||
      static_cast<int>(out.net.bias.size()) != n_hid)
    throw SchemaError("params: array lengths inconsistent with layer shapes");
  if (j.contains("pw_params")) {
    const json& pw = j["pw_params"];
    out.pw.tau = require_key(pw, "tau", "params.pw_params");
    out.pw.v0 = require_key(pw, "v0", "params.pw_params");
    out.pw.gamma = require_key(pw, "gamma", "params.pw_params");
    out.pw.beta = require_key(pw, "beta", "params.pw_params");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory persistence
// ---------------------------------------------------------------------------

inline void save_solution(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream os(path);
  if (!os) throw SchemaError("cannot open " + path.string() + " for writing");
  const int d = traj.snapshots.front().n_comp;
  os << "step,t,x";
  for (int c = 0; c < d; ++c) os << ",q" << c;
  os << "\n";
  for (std::size_t n = 0; n < traj.snapshots.size(); ++n) {
    const CellField& f = traj.snapshots[n];
    for (int i = 0; i < f.n_cells; ++i) {
      os << n << ',' << detail::fmt17(f.time) << ','
         << detail::fmt17(traj.grid.cell_centers[static_cast<std::size_t>(i)]);
      for (int c = 0; c < d; ++c) os << ',' << detail::fmt17(f.at(i, c));
      os << "\n";
    }
  }
}

inline Trajectory load_solution(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw SchemaError("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw SchemaError(path.string() + ": empty file");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 4 || header[0] != "step" || header[1] != "t" || header[2] != "x")
    throw SchemaError(path.string() + ": unexpected solution header");
  const int d = static_cast<int>(header.size()) - 3;

  std::vector<double> xs;
  std::vector<std::vector<double>> steps;
  std::vector<double> times;
  long last_step = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cols = detail::split_csv_line(line);
    if (cols.size() != header.size()) throw SchemaError(path.string() + ": ragged row");
    const long step = std::stol(cols[0]);
    if (step != last_step) {
      steps.emplace_back();
      times.push_back(std::strtod(cols[1].c_str(), nullptr));
      last_step = step;
    }
    if (steps.size() == 1) xs.push_back(std::strtod(cols[2].c_str(), nullptr));
    for (int c = 0; c < d; ++c)
      steps.back().push_back(std::strtod(cols[3 + static_cast<std::size_t>(c)].c_str(), nullptr));
  }
  if (xs.size() < 2) throw SchemaError(path.string() + ": too few cells");

  Trajectory traj;
  const double dx = xs[1] - xs[0];
  traj.grid = make_grid(xs.front() - 0.5 * dx, xs.back() + 0.5 * dx, static_cast<int>(xs.size()));
  for (std::size_t n = 0; n < steps.size(); ++n) {
    if (steps[n].size() != xs.size() * static_cast<std::size_t>(d))
      throw SchemaError(path.string() + ": incomplete snapshot");
    CellField f = CellField::zeros(static_cast<int>(xs.size()), d, dx, times[n]);
    f.data = steps[n];
    traj.snapshots.push_back(std::move(f));
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Closure sampling
// ---------------------------------------------------------------------------

/// Axis-aligned hull of the network inputs over every state in the set.
inline void input_hull(const SnapshotPairSet& set, ClosureForm form, State& lo, State& hi) {
  const int d_in = input_dim(form);
  lo = State(d_in);
  hi = State(d_in);
  for (int c = 0; c < d_in; ++c) {
    lo[c] = std::numeric_limits<double>::infinity();
    hi[c] = -std::numeric_limits<double>::infinity();
  }
  for (const SnapshotPair& p : set.pairs) {
    for (const std::vector<double>* v : {&p.qn, &p.qn1}) {
      for (std::size_t i = 0; i < v->size(); i += static_cast<std::size_t>(set.meta.n_comp)) {
        for (int c = 0; c < d_in; ++c) {
          const double x = (*v)[i + static_cast<std::size_t>(c)];
          lo[c] = std::min(lo[c], x);
          hi[c] = std::max(hi[c], x);
        }
      }
    }
  }
}

/// Samples N on a regular grid over [lo, hi], with an analytic reference
/// column when one is supplied. 1-D inputs get n_samples points; 2-D inputs
/// an n_samples x n_samples grid.
inline void export_closure_samples(const std::filesystem::path& path, const NetworkParams& net,
                                   const State& lo, const State& hi, int n_samples,
                                   const std::function<double(const State&)>& analytic) {
  std::ofstream os(path);
  if (!os) throw SchemaError("cannot open " + path.string() + " for writing");
  const int d = lo.size();
  os << (d == 1 ? "u0" : "u0,u1") << ",n";
  if (analytic) os << ",analytic";
  os << "\n";
  auto emit = [&](const State& u) {
    os << detail::fmt17(u[0]);
    if (d == 2) os << ',' << detail::fmt17(u[1]);
    os << ',' << detail::fmt17(nn_eval(u, net));
    if (analytic) os << ',' << detail::fmt17(analytic(u));
    os << "\n";
  };
  if (d == 1) {
    for (int k = 0; k < n_samples; ++k) {
      const double a = n_samples == 1 ? 0.0 : static_cast<double>(k) / (n_samples - 1);
      emit(State::scalar(lo[0] + a * (hi[0] - lo[0])));
    }
  } else {
    for (int k0 = 0; k0 < n_samples; ++k0) {
      for (int k1 = 0; k1 < n_samples; ++k1) {
        const double a0 = n_samples == 1 ? 0.0 : static_cast<double>(k0) / (n_samples - 1);
        const double a1 = n_samples == 1 ? 0.0 : static_cast<double>(k1) / (n_samples - 1);
        emit(State::pair(lo[0] + a0 * (hi[0] - lo[0]), lo[1] + a1 * (hi[1] - lo[1])));
      }
    }
  }
}

}  // namespace gorinn
