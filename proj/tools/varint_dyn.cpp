// varint: linear-time variational integration for kinematic trees
// SPDX-License-Identifier: MIT
//
// varint-dyn: benchmark and simulation driver.
//   varint-dyn energy       energy traces, variational vs semi-implicit Euler
//   varint-dyn scaling      step-time vs chain length per solver
//   varint-dyn convergence  per-frame solver iteration statistics
//   varint-dyn simulate     single trajectory to CSV
// Exit codes: 0 success, 2 solver non-convergence, 3 parse or validation
// failure.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "varint/bench.hpp"
#include "varint/scene.hpp"

#ifndef VARINT_GIT_REV
#define VARINT_GIT_REV "unknown"
#endif

namespace {

using namespace varint;

struct Options {
  std::string scene_path;
  int chain = 0;
  double dt = 1e-3;
  int frames = 10000;
  std::string solver = "riqn";
  std::string integrator = "variational";
  std::string guess = "euler";
  double tol = 1e-9;
  int max_iter = 30;
  std::string retraction = "exp";
  std::uint64_t seed = 0;
  std::string out;
  bool emit_gnuplot = false;
};

SolverConfig solver_config(const Options& opt) {
  SolverConfig cfg;
  if (opt.solver == "riqn")
    cfg.method = SolverMethod::Riqn;
  else if (opt.solver == "newton")
    cfg.method = SolverMethod::Newton;
  else if (opt.solver == "broyden")
    cfg.method = SolverMethod::Broyden;
  else
    throw ValidationError("unknown solver '" + opt.solver + "'");
  if (opt.guess == "hold")
    cfg.guess = InitialGuess::Hold;
  else if (opt.guess == "euler")
    cfg.guess = InitialGuess::ExplicitEuler;
  else if (opt.guess == "fd")
    cfg.guess = InitialGuess::ForwardDynamics;
  else
    throw ValidationError("unknown guess '" + opt.guess + "'");
  cfg.tolerance = opt.tol;
  cfg.max_iterations = opt.max_iter;
  return cfg;
}

RetractionKind retraction_kind(const Options& opt) {
  if (opt.retraction == "exp") return RetractionKind::Exponential;
  if (opt.retraction == "cayley") return RetractionKind::Cayley;
  throw ValidationError("unknown retraction '" + opt.retraction + "'");
}

KinematicTree load_tree(const Options& opt, int default_chain) {
  if (!opt.scene_path.empty()) {
    std::ifstream in(opt.scene_path);
    if (!in) throw ValidationError("cannot open scene file " + opt.scene_path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load_scene(buf.str());
  }
  return serial_chain(opt.chain > 0 ? opt.chain : default_chain);
}

BenchSpec bench_spec(const Options& opt, Experiment experiment) {
  BenchSpec spec;
  spec.experiment = experiment;
  if (opt.chain > 0)
    spec.dof_list = {opt.chain};
  else if (experiment == Experiment::Scaling)
    spec.dof_list = {5, 10, 20, 40, 80, 160};
  else
    spec.dof_list = {10};
  spec.dt = opt.dt;
  spec.frames = opt.frames;
  spec.solver = solver_config(opt);
  spec.retraction = retraction_kind(opt);
  spec.rng_seed = opt.seed;
  spec.output_path = opt.out;
  spec.emit_gnuplot = opt.emit_gnuplot;
  spec.git_rev = VARINT_GIT_REV;
  return spec;
}

void emit(const Options& opt, const BenchResult& result) {
  if (opt.out.empty()) std::cout << result.csv;
  for (const auto& [key, value] : result.stats) std::cerr << key << " = " << value << "\n";
}

int run_simulate(const Options& opt) {
  const KinematicTree tree = load_tree(opt, 10);
  const int n = tree.dof();
  SimOptions sim;
  sim.dt = opt.dt;
  sim.frames = opt.frames;
  sim.integrator =
      opt.integrator == "euler" ? IntegratorKind::SemiImplicitEuler : IntegratorKind::Variational;
  if (opt.integrator != "euler" && opt.integrator != "variational")
    throw ValidationError("unknown integrator '" + opt.integrator + "'");
  sim.solver = solver_config(opt);
  sim.retraction = retraction_kind(opt);

  // Seeded release from a perturbed hanging pose.
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> d(-0.3, 0.3);
  VectorXd q0(n);
  for (int i = 0; i < n; ++i) q0(i) = d(rng);

  const Trajectory traj = simulate(tree, q0, VectorXd::Zero(n), sim);

  std::ostringstream csv;
  csv.precision(17);
  csv << "# experiment=simulate rev=" << VARINT_GIT_REV << " dt=" << opt.dt
      << " tol=" << opt.tol << " seed=" << opt.seed << " frames=" << opt.frames << "\n";
  csv << "frame,t,e_total,iterations";
  for (int i = 0; i < n; ++i) csv << ",q" << i;
  csv << "\n";
  for (size_t k = 0; k < traj.times.size(); ++k) {
    csv << k << ',' << traj.times[k] << ',' << traj.energies[k] << ',' << traj.iterations[k];
    for (int i = 0; i < n; ++i) csv << ',' << traj.configs[k](i);
    csv << "\n";
  }
  if (opt.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(opt.out);
    if (!out) throw ValidationError("cannot open output path " + opt.out);
    out << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"varint-dyn: variational integrator benchmarks"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scene", opt.scene_path, "scene document path");
    sub->add_option("--chain", opt.chain, "uniform chain length");
    sub->add_option("--dt", opt.dt, "time step [s]");
    sub->add_option("--frames", opt.frames, "frame count");
    sub->add_option("--solver", opt.solver, "riqn|newton|broyden");
    sub->add_option("--integrator", opt.integrator, "variational|euler");
    sub->add_option("--guess", opt.guess, "hold|euler|fd");
    sub->add_option("--tol", opt.tol, "residual tolerance");
    sub->add_option("--max-iter", opt.max_iter, "iteration budget");
    sub->add_option("--retraction", opt.retraction, "exp|cayley");
    sub->add_option("--seed", opt.seed, "rng seed");
    sub->add_option("--out", opt.out, "output CSV path (default stdout)");
    sub->add_flag("--emit-gnuplot", opt.emit_gnuplot, "also write <out>.gp");
    return sub;
  };
  CLI::App* energy = add_common(app.add_subcommand("energy", "energy conservation experiment"));
  CLI::App* scaling = add_common(app.add_subcommand("scaling", "step-time scaling experiment"));
  CLI::App* convergence =
      add_common(app.add_subcommand("convergence", "solver convergence experiment"));
  CLI::App* simulate_cmd = add_common(app.add_subcommand("simulate", "single trajectory"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (energy->parsed()) {
      emit(opt, run_energy(bench_spec(opt, Experiment::Energy)));
    } else if (scaling->parsed()) {
      emit(opt, run_scaling(bench_spec(opt, Experiment::Scaling)));
    } else if (convergence->parsed()) {
      emit(opt, run_convergence(bench_spec(opt, Experiment::Convergence)));
    } else if (simulate_cmd->parsed()) {
      return run_simulate(opt);
    }
  } catch (const NonConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
