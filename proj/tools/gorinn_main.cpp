// Command-line front end: forward solves, dataset generation, closure
// training, rollout evaluation, and closure sampling. Every subcommand is
// deterministic given the config file and seed.
//
// Exit codes: 0 success, 2 config/schema error, 3 CFL violation,
// 4 hyperbolicity loss, 5 convergence failure, 1 anything else.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gorinn/config.hpp"

namespace fs = std::filesystem;
using namespace gorinn;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::int64_t seed = -1;  // <0: use config/default
  int threads = 0;         // 0: hardware default
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON run configuration")->required();
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "override the config RNG seed");
  cmd->add_option("--threads", opts.threads, "worker threads (default: all cores)");
}

int effective_threads(const CommonOpts& opts) {
  return opts.threads > 0 ? opts.threads : default_thread_count();
}

json conservation_report(const std::vector<State>& history, const State& initial) {
  double scale = std::max(1e-300, initial.norm_l1());
  json per_comp = json::array();
  for (int c = 0; c < initial.size(); ++c) {
    double max_drift = 0.0;
    for (const State& s : history) max_drift = std::max(max_drift, std::abs(s[c] - initial[c]));
    per_comp.push_back({{"initial", initial[c]},
                        {"final", history.back()[c]},
                        {"max_rel_drift", max_drift / std::max(std::abs(initial[c]), scale)}});
  }
  return per_comp;
}

int run_forward(const CommonOpts& opts) {
  const json cfg = load_config_file(opts.config_path);
  const ModelKind model = config_model(cfg);
  const ModelParams params = config_model_params(cfg);
  const Grid grid = config_grid(cfg);
  const StepConfig step = config_step(cfg, model);
  const double t_end = config_t_end(cfg);
  const IcSpec ic = config_ic(cfgdetail::need(cfg, "ic", "config"), model, "config.ic");
  const auto sys = make_model(model, params);

  const int n_steps = static_cast<int>(std::lround(t_end / step.dt));
  const CellField q0 = initial_condition(model, ic, grid);
  const Trajectory traj = forward_solve(*sys, grid, q0, step, n_steps, /*record_cfl=*/true);

  fs::create_directories(opts.out_dir);
  save_solution(fs::path(opts.out_dir) / "solution.csv", traj);

  std::vector<State> history;
  history.reserve(traj.snapshots.size());
  for (const CellField& f : traj.snapshots) history.push_back(totals(f));
  double cfl_max = 0.0;
  for (double c : traj.cfl_history) cfl_max = std::max(cfl_max, c);
  json report{{"schema", "gorinn-forward-report-v1"},
              {"model", model_name(model)},
              {"n_steps", n_steps},
              {"cfl_max", cfl_max},
              {"cfl_per_step", traj.cfl_history},
              {"conservation", conservation_report(history, history.front())}};
  std::ofstream os(fs::path(opts.out_dir) / "report.json");
  os << report.dump(2) << "\n";
  std::cout << "forward: " << n_steps << " steps, max CFL " << cfl_max << "\n";
  return 0;
}

int run_gen_data(const CommonOpts& opts) {
  const json cfg = load_config_file(opts.config_path);
  GenerationPlan plan = config_plan(cfg);
  if (opts.seed >= 0) plan.seed = static_cast<std::uint64_t>(opts.seed);
  const auto sets = generate(plan);
  save_dataset(opts.out_dir, sets);
  std::cout << "gen-data: " << sets[0].pairs.size() << "/" << sets[1].pairs.size() << "/"
            << sets[2].pairs.size() << " train/val/test pairs in " << opts.out_dir << "\n";
  return 0;
}

int run_train(const CommonOpts& opts) {
  const json cfg = load_config_file(opts.config_path);
  const ClosureForm form = config_closure_form(cfg);
  TrainConfig tc = config_train(cfg);
  if (opts.seed >= 0) tc.rng_seed = static_cast<std::uint64_t>(opts.seed);
  tc.n_threads = effective_threads(opts);

  const json& data = cfgdetail::need(cfg, "data", "config");
  const std::string dir = cfgdetail::need(data, "dir", "config.data");
  const auto splits = load_dataset(dir);

  const auto [params, report] = train(splits, form, tc);

  fs::create_directories(opts.out_dir);
  save_params(fs::path(opts.out_dir) / "params.json", form, params, splits[0].meta.params.pw);
  save_report(fs::path(opts.out_dir) / "report.json", report);
  save_train_log(fs::path(opts.out_dir) / "train.log", report);
  std::cout << "train: stop=" << report.stop_reason << " epochs=" << report.epochs.size()
            << " test max_l1=" << report.test.max_l1 << " mean_l1=" << report.test.mean_l1
            << " mse=" << report.test.mse << "\n";
  return 0;
}

int run_evaluate(const CommonOpts& opts) {
  const json cfg = load_config_file(opts.config_path);
  const json& ev = cfgdetail::need(cfg, "evaluate", "config");
  const LoadedParams lp = load_params(cfgdetail::need(ev, "params", "config.evaluate"));
  const Trajectory ref = load_solution(cfgdetail::need(ev, "reference", "config.evaluate"));
  if (state_dim(lp.form) != ref.snapshots.front().n_comp)
    throw ConfigError("evaluate: closure state dimension does not match the reference");
  if (ref.snapshots.size() < 2) throw ConfigError("evaluate: reference has no steps");

  StepConfig step;
  step.dt = ref.snapshots[1].time - ref.snapshots[0].time;
  step.bc = parse_bc(cfgdetail::need(ev, "bc", "config.evaluate"));
  step.solver = parse_solver(cfgdetail::get_or<std::string>(ev, "solver", "roe"));
  step.limiter = parse_limiter(cfgdetail::get_or<std::string>(ev, "limiter", "vanleer"));
  step.source =
      form_has_source(lp.form) ? SourceIntegrator::ExactRelaxation : SourceIntegrator::None;

  const GorinnSystem sys(lp.form, lp.net, lp.pw);
  const int d = ref.snapshots.front().n_comp;

  fs::create_directories(opts.out_dir);
  std::ofstream os(fs::path(opts.out_dir) / "errors.csv");
  os << "step,t,x";
  for (int c = 0; c < d; ++c) os << ",e" << c;
  os << "\n";

  State max_abs(d);
  State sum_abs(d);
  long n_sites = 0;
  CellField cur = ref.snapshots.front();
  for (std::size_t n = 0; n < ref.snapshots.size(); ++n) {
    const CellField& truth = ref.snapshots[n];
    for (int i = 0; i < truth.n_cells; ++i) {
      os << n << ',' << detail::fmt17(truth.time) << ','
         << detail::fmt17(ref.grid.cell_centers[static_cast<std::size_t>(i)]);
      for (int c = 0; c < d; ++c) {
        const double e = std::abs(cur.at(i, c) - truth.at(i, c));
        max_abs[c] = std::max(max_abs[c], e);
        sum_abs[c] += e;
        os << ',' << detail::fmt17(e);
      }
      ++n_sites;
    }
    if (n + 1 < ref.snapshots.size()) cur = advance(cur, step, sys);
  }

  json summary{{"schema", "gorinn-evaluate-summary-v1"},
               {"n_steps", ref.snapshots.size() - 1},
               {"max_abs_error", json::array()},
               {"mean_abs_error", json::array()}};
  for (int c = 0; c < d; ++c) {
    summary["max_abs_error"].push_back(max_abs[c]);
    summary["mean_abs_error"].push_back(sum_abs[c] / static_cast<double>(n_sites));
  }
  std::ofstream osum(fs::path(opts.out_dir) / "summary.json");
  osum << summary.dump(2) << "\n";
  std::cout << "evaluate: max abs error";
  for (int c = 0; c < d; ++c) std::cout << ' ' << max_abs[c];
  std::cout << "\n";
  return 0;
}

int run_sample_closure(const CommonOpts& opts) {
  const json cfg = load_config_file(opts.config_path);
  const json& sc = cfgdetail::need(cfg, "sample", "config");
  const LoadedParams lp = load_params(cfgdetail::need(sc, "params", "config.sample"));
  const std::string dir = cfgdetail::need(sc, "data_dir", "config.sample");
  const auto splits = load_dataset(dir);

  State lo, hi;
  input_hull(splits[0], lp.form, lo, hi);
  for (int s = 1; s < 3; ++s) {
    State lo2, hi2;
    input_hull(splits[static_cast<std::size_t>(s)], lp.form, lo2, hi2);
    for (int c = 0; c < lo.size(); ++c) {
      lo[c] = std::min(lo[c], lo2[c]);
      hi[c] = std::max(hi[c], hi2[c]);
    }
  }
  const int n_default = input_dim(lp.form) == 1 ? 201 : 41;
  const int n_samples = cfgdetail::get_or(sc, "n_samples", n_default);
  const auto analytic = analytic_closure(splits[0].meta.model, splits[0].meta.params);

  fs::create_directories(opts.out_dir);
  export_closure_samples(fs::path(opts.out_dir) / "closure.csv", lp.net, lo, hi, n_samples,
                         analytic);
  std::cout << "sample-closure: wrote " << (fs::path(opts.out_dir) / "closure.csv").string()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conservation-law toolkit: high-resolution Godunov solvers and "
               "shallow-network flux-closure training"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto* forward = app.add_subcommand("forward", "solve a forward problem, write solution.csv");
  auto* gen = app.add_subcommand("gen-data", "generate a training dataset directory");
  auto* tr = app.add_subcommand("train", "train a flux closure on a dataset");
  auto* ev = app.add_subcommand("evaluate", "roll out a trained closure against a reference");
  auto* sa = app.add_subcommand("sample-closure", "sample a trained closure over the data hull");
  for (auto* cmd : {forward, gen, tr, ev, sa}) add_common(cmd, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (forward->parsed()) return run_forward(opts);
    if (gen->parsed()) return run_gen_data(opts);
    if (tr->parsed()) return run_train(opts);
    if (ev->parsed()) return run_evaluate(opts);
    if (sa->parsed()) return run_sample_closure(opts);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const CflError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const HyperbolicityError& e) {
    std::cerr << e.what() << "\n";
    return 4;
  } catch (const ConvergenceError& e) {
    std::cerr << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
