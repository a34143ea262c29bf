#pragma once

// JSON run configuration shared by the command-line tool. One config file
// describes a run; each subcommand validates the sections it needs before
// any work starts. The schema is documented in the README.

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "gorinn/data_io.hpp"
#include "gorinn/training.hpp"

namespace gorinn {

inline json load_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
}

namespace cfgdetail {
inline const json& need(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(where + ": missing key '" + key + "'");
  return *it;
}
template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  return it->get<T>();
}
}  // namespace cfgdetail

inline ModelKind config_model(const json& cfg) {
  return parse_model_name(cfgdetail::need(cfg, "model", "config"));
}

inline ModelParams config_model_params(const json& cfg) {
  if (!cfg.contains("params")) return ModelParams{};
  return params_from_json(cfg["params"]);
}

inline Grid config_grid(const json& cfg) {
  const json& g = cfgdetail::need(cfg, "grid", "config");
  return make_grid(cfgdetail::need(g, "x_left", "config.grid"),
                   cfgdetail::need(g, "x_right", "config.grid"),
                   cfgdetail::need(g, "n_cells", "config.grid"));
}

inline StepConfig config_step(const json& cfg, ModelKind model) {
  StepConfig s;
  const json& t = cfgdetail::need(cfg, "time", "config");
  s.dt = cfgdetail::need(t, "dt", "config.time");
  if (!(s.dt > 0.0)) throw ConfigError("config.time: dt must be positive");
  s.bc = parse_bc(cfgdetail::need(cfg, "bc", "config"));
  s.solver = parse_solver(cfgdetail::get_or<std::string>(cfg, "solver", "roe"));
  s.limiter = parse_limiter(cfgdetail::get_or<std::string>(cfg, "limiter", "vanleer"));
  s.source =
      model == ModelKind::Pw ? SourceIntegrator::ExactRelaxation : SourceIntegrator::None;
  return s;
}

inline double config_t_end(const json& cfg) {
  const json& t = cfgdetail::need(cfg, "time", "config");
  const double t_end = cfgdetail::need(t, "t_end", "config.time");
  if (!(t_end > 0.0)) throw ConfigError("config.time: t_end must be positive");
  return t_end;
}

inline IcSpec config_ic(const json& j, ModelKind model, const std::string& where) {
  IcSpec ic;
  const std::string family = cfgdetail::need(j, "family", where);
  if (family == "gaussian")
    ic.family = IcSpec::Family::Gaussian;
  else if (family == "sinusoid")
    ic.family = IcSpec::Family::Sinusoid;
  else
    throw ConfigError(where + ": unknown ic family '" + family + "'");
  ic.mu = cfgdetail::need(j, "mu", where);
  ic.sigma = cfgdetail::get_or(j, "sigma", ic.sigma);
  ic.x0 = cfgdetail::get_or(j, "x0", ic.x0);
  ic.rho_star = cfgdetail::get_or(j, "rho_star", ic.rho_star);
  ic.wavelength = cfgdetail::get_or(j, "wavelength", ic.wavelength);
  ic.momentum = cfgdetail::get_or(j, "momentum", model == ModelKind::Pw ? 0.1 : 0.0);
  return ic;
}

/// Generation plan for gen-data: the grid/time/ic sections plus split
/// ratios under "data".
inline GenerationPlan config_plan(const json& cfg) {
  GenerationPlan plan;
  plan.model = config_model(cfg);
  plan.params = config_model_params(cfg);
  const Grid grid = config_grid(cfg);
  plan.x_left = grid.x_left;
  plan.x_right = grid.x_right;
  plan.n_cells = grid.n_cells;
  const StepConfig step = config_step(cfg, plan.model);
  plan.bc = step.bc;
  plan.solver = step.solver;
  plan.limiter = step.limiter;
  plan.dt = step.dt;
  plan.t_end = config_t_end(cfg);

  const json& data = cfgdetail::need(cfg, "data", "config");
  const json& sweep = cfgdetail::need(data, "ic_sweep", "config.data");
  if (!sweep.is_array() || sweep.empty())
    throw ConfigError("config.data.ic_sweep must be a non-empty array");
  for (const json& j : sweep) plan.ics.push_back(config_ic(j, plan.model, "config.data.ic_sweep"));
  if (data.contains("splits")) {
    const json& r = data["splits"];
    if (!r.is_array() || r.size() != 3) throw ConfigError("config.data.splits must have 3 entries");
    plan.train_ratio = r[0];
    plan.val_ratio = r[1];
    const double sum = plan.train_ratio + plan.val_ratio + r[2].get<double>();
    if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("config.data.splits must sum to 1");
  }
  plan.seed = cfgdetail::get_or<std::uint64_t>(cfg, "seed", plan.seed);
  return plan;
}

inline ClosureForm config_closure_form(const json& cfg) {
  const json& c = cfgdetail::need(cfg, "closure", "config");
  return parse_closure_form(cfgdetail::need(c, "form", "config.closure"));
}

inline TrainConfig config_train(const json& cfg) {
  TrainConfig t;
  if (cfg.contains("closure"))
    t.n_neurons = cfgdetail::get_or(cfg["closure"], "n_neurons", t.n_neurons);
  if (!cfg.contains("train")) return t;
  const json& j = cfg["train"];
  t.max_epochs = cfgdetail::get_or(j, "max_epochs", t.max_epochs);
  t.rel_loss_tol = cfgdetail::get_or(j, "rel_loss_tol", t.rel_loss_tol);
  t.val_tol = cfgdetail::get_or(j, "val_tol", t.val_tol);
  t.val_every = cfgdetail::get_or(j, "val_every", t.val_every);
  t.val_patience = cfgdetail::get_or(j, "val_patience", t.val_patience);
  t.lambda0 = cfgdetail::get_or(j, "lambda0", t.lambda0);
  t.rh_weight = cfgdetail::get_or(j, "rh_weight", t.rh_weight);
  t.rng_seed = cfgdetail::get_or(j, "seed", t.rng_seed);
  if (t.max_epochs < 1 || t.val_every < 1 || t.val_patience < 1)
    throw ConfigError("config.train: epoch/validation counts must be positive");
  if (!(t.rel_loss_tol > 0.0) || !(t.val_tol > 0.0) || !(t.lambda0 > 0.0))
    throw ConfigError("config.train: tolerances and lambda0 must be positive");
  return t;
}

/// Analytic closure of the data-generating model on the network-input
/// space, used for reference columns in closure sample exports.
inline std::function<double(const State&)> analytic_closure(ModelKind model,
                                                            const ModelParams& params) {
  switch (model) {
    case ModelKind::Burgers:
      return [](const State& u) { return flux_burgers(u[0]); };
    case ModelKind::Lwr:
      return [v = params.lwr.v_max](const State& u) { return velocity_lwr(u[0], v); };
    case ModelKind::Sw:
      return [g = params.sw.g](const State& u) { return pressure_sw(u[0], g); };
    case ModelKind::Pw:
      return [p = params.pw](const State& u) { return pressure_pw(u[0], p); };
  }
  return {};
}

}  // namespace gorinn
