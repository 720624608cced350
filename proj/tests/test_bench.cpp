// SPDX-License-Identifier: MIT

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "varint/bench.hpp"

using namespace varint;

namespace {

int data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line.find(",") != std::string::npos &&
        (line[0] == '-' || (line[0] >= '0' && line[0] <= '9') ||
         line.find("euler") == 0 || line.find("variational") == 0))
      ++rows;
  return rows;
}

bool has_header_line(const std::string& csv) {
  std::istringstream in(csv);
  std::string first;
  std::getline(in, first);
  return first.rfind("# experiment=", 0) == 0 && first.find("dt=") != std::string::npos &&
         first.find("tol=") != std::string::npos && first.find("seed=") != std::string::npos &&
         first.find("rev=") != std::string::npos;
}

}  // namespace

TEST_CASE("run_energy: row counts and arithmetic identity") {
  BenchSpec spec;
  spec.frames = 50;
  spec.dof_list = {4};
  const BenchResult r = run_energy(spec);
  CHECK(has_header_line(r.csv));
  CHECK(data_rows(r.csv) == 2 * 51);

  // e_total column equals e_kin + e_pot per row.
  std::istringstream in(r.csv);
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    if (line.rfind("variational", 0) != 0 && line.rfind("euler", 0) != 0) continue;
    double t, ek, ep, et;
    int frame;
    char method[32];
    REQUIRE(std::sscanf(line.c_str(), "%31[^,],%d,%lf,%lf,%lf,%lf", method, &frame, &t, &ek, &ep,
                        &et) == 6);
    CHECK(et == doctest::Approx(ek + ep).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked == 2 * 51);
}

TEST_CASE("run_energy: frames=1 emits two rows per method") {
  BenchSpec spec;
  spec.frames = 1;
  spec.dof_list = {2};
  const BenchResult r = run_energy(spec);
  CHECK(data_rows(r.csv) == 4);
}

TEST_CASE("run_energy: variational drift slope far below Euler's") {
  BenchSpec spec;
  spec.frames = 1500;
  spec.dof_list = {6};
  const BenchResult r = run_energy(spec);
  CHECK(r.stats.at("variational_drift_slope") * 100.0 < r.stats.at("euler_drift_slope"));
  CHECK(r.stats.at("variational_max_rel_dev") < 5e-2);
}

TEST_CASE("run_scaling: one row per (n, method) plus slope stats") {
  BenchSpec spec;
  spec.experiment = Experiment::Scaling;
  spec.dof_list = {4, 8};
  spec.frames = 20;
  const BenchResult r = run_scaling(spec);
  CHECK(has_header_line(r.csv));
  CHECK(data_rows(r.csv) == 6);
  for (const char* m : {"riqn", "newton", "broyden"}) {
    CHECK(r.stats.count(std::string(m) + "_slope") == 1);
    CHECK(r.csv.find(std::string("# slope ") + m) != std::string::npos);
  }
}

TEST_CASE("run_scaling: single DOF entry emits one row per method") {
  BenchSpec spec;
  spec.experiment = Experiment::Scaling;
  spec.dof_list = {5};
  spec.frames = 10;
  const BenchResult r = run_scaling(spec);
  CHECK(data_rows(r.csv) == 3);
}

TEST_CASE("run_convergence: iteration statistics and determinism") {
  BenchSpec spec;
  spec.experiment = Experiment::Convergence;
  spec.dof_list = {6};
  spec.frames = 60;
  spec.rng_seed = 42;
  const BenchResult a = run_convergence(spec);
  CHECK(has_header_line(a.csv));
  CHECK(a.stats.at("newton_mean_iterations") > 1.0);
  CHECK(a.stats.at("riqn_mean_iterations") >= a.stats.at("newton_mean_iterations"));

  const BenchResult b = run_convergence(spec);
  CHECK(a.csv == b.csv);  // no wall-time columns here, so fully deterministic

  spec.rng_seed = 43;
  const BenchResult c = run_convergence(spec);
  CHECK(a.csv != c.csv);
}

TEST_CASE("run_convergence: looser tolerance never needs more iterations") {
  BenchSpec spec;
  spec.experiment = Experiment::Convergence;
  spec.dof_list = {5};
  spec.frames = 40;

  auto iterations_per_frame = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::vector<int> iters;
    while (std::getline(in, line)) {
      int frame, conv, it;
      char method[32];
      if (std::sscanf(line.c_str(), "%d,%31[^,],%d,%d", &frame, method, &conv, &it) == 4)
        iters.push_back(it);
    }
    return iters;
  };

  spec.solver.tolerance = 1e-3;
  const auto loose = iterations_per_frame(run_convergence(spec).csv);
  spec.solver.tolerance = 1e-9;
  const auto tight = iterations_per_frame(run_convergence(spec).csv);
  REQUIRE(loose.size() == tight.size());
  REQUIRE(!loose.empty());
  for (size_t k = 0; k < loose.size(); ++k) CHECK(loose[k] <= tight[k]);
}

TEST_CASE("output file and gnuplot script emission") {
  BenchSpec spec;
  spec.frames = 5;
  spec.dof_list = {2};
  spec.output_path = "bench_test_out.csv";
  spec.emit_gnuplot = true;
  const BenchResult r = run_energy(spec);
  std::ifstream csv(spec.output_path);
  REQUIRE(csv.good());
  std::stringstream buf;
  buf << csv.rdbuf();
  CHECK(buf.str() == r.csv);
  std::ifstream gp(spec.output_path + ".gp");
  REQUIRE(gp.good());
  std::stringstream gbuf;
  gbuf << gp.rdbuf();
  CHECK(gbuf.str().find("plot") != std::string::npos);
  std::remove(spec.output_path.c_str());
  std::remove((spec.output_path + ".gp").c_str());
}

TEST_CASE("spec validation") {
  BenchSpec spec;
  spec.frames = 0;
  CHECK_THROWS_AS(run_energy(spec), ValidationError);
  spec.frames = 10;
  spec.dof_list = {};
  CHECK_THROWS_AS(run_scaling(spec), ValidationError);
  spec.dof_list = {0};
  CHECK_THROWS_AS(run_convergence(spec), ValidationError);
}
