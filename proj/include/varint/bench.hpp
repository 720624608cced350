// varint: linear-time variational integration for kinematic trees
// SPDX-License-Identifier: MIT
//
// Benchmark harness behind the varint-dyn CLI. Three experiments on uniform
// serial chains:
//   energy      - variational vs semi-implicit Euler on one trajectory,
//                 per-frame energy split.
//   scaling     - mean wall time per step vs chain length per solver, with a
//                 log-log slope fit appended.
//   convergence - per-frame iteration counts and residual decay when every
//                 solve starts from the zero configuration.
// Results carry a CSV body plus named summary statistics; CSV content is
// deterministic for a fixed seed apart from wall-time columns.

#ifndef VARINT_BENCH_HPP
#define VARINT_BENCH_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "varint/integrators.hpp"

namespace varint {

enum class Experiment { Energy, Scaling, Convergence };

struct BenchSpec {
  Experiment experiment = Experiment::Energy;
  std::vector<int> dof_list = {10};
  double dt = 1e-3;
  int frames = 10000;
  SolverConfig solver;  // tolerance / budget shared by every method under test
  RetractionKind retraction = RetractionKind::Exponential;
  std::uint64_t rng_seed = 0;
  std::string output_path;  // empty: in-memory only
  bool emit_gnuplot = false;
  std::string git_rev = "unknown";

  void validate() const {
    if (frames < 1) throw ValidationError("bench: frames must be >= 1");
    if (dof_list.empty()) throw ValidationError("bench: dof list must be nonempty");
    for (int n : dof_list)
      if (n < 1) throw ValidationError("bench: dof counts must be positive");
    if (!(dt > 0)) throw ValidationError("bench: dt must be positive");
  }
};

struct BenchResult {
  std::string csv;
  std::map<std::string, double> stats;
};

namespace detail {

inline std::string method_name(SolverMethod m) {
  switch (m) {
    case SolverMethod::Newton: return "newton";
    case SolverMethod::Riqn: return "riqn";
    case SolverMethod::Broyden: return "broyden";
  }
  return "?";
}

inline void metadata_header(std::ostringstream& out, const BenchSpec& spec, const char* name) {
  out.precision(17);
  out << "# experiment=" << name << " rev=" << spec.git_rev << " dt=" << spec.dt
      << " tol=" << spec.solver.tolerance << " seed=" << spec.rng_seed
      << " frames=" << spec.frames << "\n";
}

/// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t k = 0; k < n; ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Horizontal rest pose: first joint rotated a quarter turn, rest straight.
inline VectorXd horizontal_config(int n) {
  VectorXd q = VectorXd::Zero(n);
  q(0) = M_PI / 2;
  return q;
}

inline void maybe_write(const BenchSpec& spec, const BenchResult& result,
                        const std::string& gnuplot) {
  if (spec.output_path.empty()) return;
  std::ofstream out(spec.output_path);
  if (!out) throw ValidationError("bench: cannot open output path " + spec.output_path);
  out << result.csv;
  if (spec.emit_gnuplot) {
    std::ofstream gp(spec.output_path + ".gp");
    if (!gp) throw ValidationError("bench: cannot open gnuplot path " + spec.output_path + ".gp");
    gp << gnuplot;
  }
}

}  // namespace detail

/// Energy experiment: one chain, two integrators, identical start (horizontal,
/// at rest). Drift statistics are normalized by the characteristic energy
/// scale (the work to lift the chain from hanging to horizontal) because the
/// horizontal rest energy itself is zero.
inline BenchResult run_energy(const BenchSpec& spec) {
  spec.validate();
  const int n = spec.dof_list.front();
  const KinematicTree tree = serial_chain(n);
  const VectorXd q0 = detail::horizontal_config(n);
  const VectorXd qd0 = VectorXd::Zero(n);

  BenchResult result;
  std::ostringstream csv;
  detail::metadata_header(csv, spec, "energy");
  csv << "method,frame,t,e_kin,e_pot,e_total\n";

  double e_ref = 0.0;  // lift energy of the hanging chain, per-body depths
  {
    const auto hanging = forward_kinematics(tree, VectorXd::Zero(n));
    for (int i = 0; i < tree.size(); ++i)
      e_ref += tree.body(i).inertia.mass * tree.gravity().norm() *
               std::abs(hanging[i].translation.y());
  }

  for (IntegratorKind kind : {IntegratorKind::Variational, IntegratorKind::SemiImplicitEuler}) {
    SimOptions opts;
    opts.dt = spec.dt;
    opts.frames = spec.frames;
    opts.integrator = kind;
    opts.solver = spec.solver;
    opts.retraction = spec.retraction;
    const Trajectory traj = simulate(tree, q0, qd0, opts);

    const char* name = kind == IntegratorKind::Variational ? "variational" : "euler";
    std::vector<double> frames_x, drift_y;
    const double e0 = traj.energies.front();
    const double scale = std::max(std::abs(e0), e_ref);
    double max_rel_dev = 0.0;
    for (int k = 0; k < static_cast<int>(traj.times.size()); ++k) {
      // Mid-interval evaluation, matching the trajectory energy diagnostic.
      const VectorXd qdot = k == 0 ? qd0
                                   : VectorXd((traj.configs[k] - traj.configs[k - 1]) / spec.dt);
      const VectorXd qe =
          k == 0 ? traj.configs[k] : VectorXd(0.5 * (traj.configs[k] + traj.configs[k - 1]));
      const EnergyBreakdown e = energy_breakdown(tree, qe, qdot);
      csv << name << ',' << k << ',' << traj.times[k] << ',' << e.kinetic << ',' << e.potential
          << ',' << e.total() << '\n';
      frames_x.push_back(k);
      drift_y.push_back((e.total() - e0) / scale);
      max_rel_dev = std::max(max_rel_dev, std::abs(e.total() - e0) / scale);
    }
    const std::string prefix = name;
    result.stats[prefix + "_drift_slope"] = std::abs(detail::ls_slope(frames_x, drift_y));
    result.stats[prefix + "_max_rel_dev"] = max_rel_dev;
  }
  result.stats["e_ref"] = e_ref;
  result.csv = csv.str();

  const std::string gp =
      "set datafile separator ','\nset xlabel 'frame'\nset ylabel 'total energy [J]'\n"
      "plot '" + spec.output_path + "' using 2:6 every ::0 with lines title 'energy'\n";
  detail::maybe_write(spec, result, gp);
  return result;
}

/// Scaling experiment: mean wall time per variational step against chain
/// length for each solver. Three timed repetitions after a warmup; the fitted
/// log-log slope per method is appended as comment rows.
inline BenchResult run_scaling(const BenchSpec& spec) {
  spec.validate();
  BenchResult result;
  std::ostringstream csv;
  detail::metadata_header(csv, spec, "scaling");
  csv << "n,method,mean_step_time,stddev\n";

  constexpr int kWarmupFrames = 100;
  constexpr int kRepetitions = 3;
  const SolverMethod methods[] = {SolverMethod::Riqn, SolverMethod::Newton,
                                  SolverMethod::Broyden};
  std::map<std::string, std::vector<double>> log_n, log_t;

  for (SolverMethod method : methods) {
    for (int n : spec.dof_list) {
      const KinematicTree tree = serial_chain(n);
      SolverConfig cfg = spec.solver;
      cfg.method = method;
      // Mild swing so every step does representative solver work.
      std::mt19937_64 rng(spec.rng_seed + static_cast<std::uint64_t>(n));
      std::uniform_real_distribution<double> d(-0.1, 0.1);
      VectorXd q0(n);
      for (int i = 0; i < n; ++i) q0(i) = d(rng);

      SimState state = make_state(tree, q0, VectorXd::Zero(n), spec.dt);
      for (int k = 0; k < kWarmupFrames; ++k) (void)step_variational(tree, state, spec.dt, cfg);

      std::vector<double> rep_means;
      for (int rep = 0; rep < kRepetitions; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        for (int k = 0; k < spec.frames; ++k) (void)step_variational(tree, state, spec.dt, cfg);
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rep_means.push_back(elapsed / spec.frames);
      }
      const double mean =
          std::accumulate(rep_means.begin(), rep_means.end(), 0.0) / kRepetitions;
      double var = 0;
      for (double m : rep_means) var += (m - mean) * (m - mean);
      const double stddev = std::sqrt(var / kRepetitions);
      std::sort(rep_means.begin(), rep_means.end());

      const std::string name = detail::method_name(method);
      csv << n << ',' << name << ',' << mean << ',' << stddev << '\n';
      result.stats[name + "_median_t_" + std::to_string(n)] = rep_means[kRepetitions / 2];
      result.stats[name + "_mean_t_" + std::to_string(n)] = mean;
      log_n[name].push_back(std::log(double(n)));
      log_t[name].push_back(std::log(mean));
    }
  }
  for (const auto& [name, xs] : log_n) {
    const double slope = detail::ls_slope(xs, log_t[name]);
    csv << "# slope " << name << '=' << slope << '\n';
    result.stats[name + "_slope"] = slope;
  }
  result.csv = csv.str();

  const std::string gp =
      "set datafile separator ','\nset logscale xy\nset xlabel 'bodies'\n"
      "set ylabel 'mean step time [s]'\n"
      "plot '" + spec.output_path + "' using 1:3 with linespoints title 'step time'\n";
  detail::maybe_write(spec, result, gp);
  return result;
}

/// Convergence experiment: along one trajectory, re-solve every step with the
/// zero-displacement starting guess (q_next = q_curr, ignoring the usual
/// predictor) for Newton and the quasi-Newton method, recording iteration
/// counts and the residual decay series.
inline BenchResult run_convergence(const BenchSpec& spec) {
  spec.validate();
  const int n = spec.dof_list.front();
  const KinematicTree tree = serial_chain(n);

  // Seeded release from a tilted pose keeps the chain swinging through
  // configurations far from the zero guess.
  std::mt19937_64 rng(spec.rng_seed);
  std::uniform_real_distribution<double> d(0.2, 0.4);
  VectorXd q0(n);
  for (int i = 0; i < n; ++i) q0(i) = d(rng) * (i % 2 ? -1.0 : 1.0);

  BenchResult result;
  std::ostringstream csv;
  detail::metadata_header(csv, spec, "convergence");
  csv << "frame,method,converged,iterations,residual_norms...\n";

  SimState state = make_state(tree, q0, VectorXd::Zero(n), spec.dt);
  std::map<std::string, std::vector<double>> iteration_counts;

  for (int frame = 2; frame <= spec.frames; ++frame) {
    DiscreteStepContext ctx;
    ctx.tree = &tree;
    ctx.dt = spec.dt;
    ctx.q_prev = state.q_prev;
    ctx.q_curr = state.q_curr;
    ctx.retraction = spec.retraction;

    VectorXd newton_root;
    for (SolverMethod method : {SolverMethod::Newton, SolverMethod::Riqn}) {
      SolverConfig cfg = spec.solver;
      cfg.method = method;
      SolveTrace trace;
      const VectorXd root = solve_step(ctx, cfg, trace, &ctx.q_curr);
      if (method == SolverMethod::Newton) newton_root = root;
      const std::string name = detail::method_name(method);
      csv << frame << ',' << name << ',' << (trace.converged ? 1 : 0) << ','
          << trace.iterations;
      for (double r : trace.residual_norms) csv << ',' << r;
      csv << '\n';
      if (trace.converged) iteration_counts[name].push_back(trace.iterations);
    }

    // Advance along the Newton solution.
    ResidualReport report;
    drnea(ctx, newton_root, report);
    state.q_prev = state.q_curr;
    state.q_curr = newton_root;
    state.velocity = std::move(report.per_body_velocity);
    state.momentum = std::move(report.per_body_momentum);
    state.time += spec.dt;
  }

  for (const auto& [name, counts] : iteration_counts) {
    const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / counts.size();
    double var = 0;
    for (double c : counts) var += (c - mean) * (c - mean);
    result.stats[name + "_mean_iterations"] = mean;
    result.stats[name + "_stddev_iterations"] = std::sqrt(var / counts.size());
    result.stats[name + "_solved_frames"] = double(counts.size());
  }
  result.csv = csv.str();

  const std::string gp =
      "set datafile separator ','\nset xlabel 'frame'\nset ylabel 'iterations'\n"
      "plot '" + spec.output_path + "' using 1:4 with points title 'iterations'\n";
  detail::maybe_write(spec, result, gp);
  return result;
}

}  // namespace varint

#endif
