#pragma once

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "moran/moran.hpp"

namespace moran::cli {

enum exit_code : int { ok = 0, validation_failure = 1, numerical_failure = 2 };

struct ProcessOptions {
  std::size_t n = 2;
  int N = 10;
  double mu = 0.1;
  std::string landscape = "neutral";
  double r = 2.0;
  double a = 1.0;
  double b = 1.0;
  std::string matrix_file;
  std::string incentive = "replicator";
  double q = 1.0;
  double beta = 1.0;
  double tol = 1e-12;
  std::size_t max_iters = 1'000'000;
  unsigned threads = 1;

  void add_to(CLI::App& app) {
    app.add_option("--n", n, "Number of types")->check(CLI::Range(2, 1 << 20));
    app.add_option("--N", N, "Population size")->check(CLI::PositiveNumber);
    app.add_option("--mu", mu, "Uniform mutation probability")->check(CLI::Range(0.0, 1.0));
    app.add_option("--landscape", landscape, "neutral | moran | hawk-dove | zero-diag | rsp | matrix")
        ->check(CLI::IsMember({"neutral", "moran", "hawk-dove", "zero-diag", "rsp", "matrix"}));
    app.add_option("--r", r, "Relative fitness of type 1 (moran)");
    app.add_option("--a", a, "RSP win payoff");
    app.add_option("--b", b, "RSP loss payoff");
    app.add_option("--matrix", matrix_file, "Game matrix JSON file (landscape=matrix)");
    app.add_option("--incentive", incentive, "replicator | fermi | best-reply | neutral")
        ->check(CLI::IsMember({"replicator", "fermi", "best-reply", "neutral"}));
    app.add_option("--q", q, "Incentive exponent q");
    app.add_option("--beta", beta, "Fermi strength of selection");
    app.add_option("--tol", tol, "Stationary solver tolerance (sup-norm residual)");
    app.add_option("--max-iters", max_iters, "Stationary solver iteration cap");
    app.add_option("--threads", threads, "Kernel construction threads");
  }

  ProcessConfig config() const {
    ProcessConfig c;
    c.n = n;
    c.N = N;
    c.mutation = UniformMutation{mu};
    if (incentive == "replicator") c.incentive = QReplicator{q};
    else if (incentive == "fermi") c.incentive = QFermi{q, beta};
    else if (incentive == "best-reply") c.incentive = BestReply{};
    else c.incentive = Neutral{};
    if (landscape == "neutral") c.landscape = landscape_matrix(landscape::Neutral{n});
    else if (landscape == "moran") c.landscape = landscape_matrix(landscape::MoranR{r});
    else if (landscape == "hawk-dove") c.landscape = landscape_matrix(landscape::HawkDove{});
    else if (landscape == "zero-diag") c.landscape = landscape_matrix(landscape::ZeroDiag{});
    else if (landscape == "rsp") c.landscape = landscape_matrix(landscape::RSP{a, b});
    else {
      if (matrix_file.empty()) throw error(errc::parameter, "--landscape matrix needs --matrix FILE");
      c.landscape = load_game_matrix_file(matrix_file);
    }
    if (c.landscape.size() != n) {
      throw error(errc::invalid_dimension, "landscape has " + std::to_string(c.landscape.size()) +
                                               " types but --n is " + std::to_string(n));
    }
    return c;
  }

  PipelineOptions pipeline() const {
    PipelineOptions p;
    p.solver.tolerance = tol;
    p.solver.max_iterations = max_iters;
    p.threads = threads;
    return p;
  }
};

/// Writes to `path`, or to `fallback` when the path is empty.
template <class Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw error(errc::io, "cannot write " + path);
  fn(file);
  if (!file) throw error(errc::io, "failed writing " + path);
}

/// Entry point shared by the executable and the tests.
inline int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropy rates of incentive (generalized Moran) processes"};
  app.require_subcommand(1);

  // states
  std::size_t states_n = 2;
  int states_N = 10;
  bool states_list = false;
  auto* states = app.add_subcommand("states", "Lattice size (and optionally every state)");
  states->add_option("--n", states_n, "Number of types")->check(CLI::Range(2, 1 << 20));
  states->add_option("--N", states_N, "Population size")->check(CLI::PositiveNumber);
  states->add_flag("--list", states_list, "Print every state as CSV");

  ProcessOptions kernel_opts;
  std::string kernel_out;
  auto* kernel = app.add_subcommand("kernel", "Build the transition kernel and dump it as triplets");
  kernel_opts.add_to(*kernel);
  kernel->add_option("--output", kernel_out, "Output file (default stdout)");

  ProcessOptions stationary_opts;
  std::string stationary_out;
  auto* stationary = app.add_subcommand("stationary", "Solve the stationary distribution and write CSV");
  stationary_opts.add_to(*stationary);
  stationary->add_option("--output", stationary_out, "Output file (default stdout)");

  ProcessOptions rate_opts;
  auto* rate = app.add_subcommand("entropy-rate", "Entropy rate report as JSON");
  rate_opts.add_to(*rate);

  std::string sweep_config;
  unsigned sweep_threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep from a JSON config");
  sweep->add_option("--config", sweep_config, "Sweep config file")->required();
  sweep->add_option("--threads", sweep_threads, "Worker threads (overrides MORAN_THREADS)");

  ProcessOptions sample_opts;
  std::size_t sample_start = 0;
  std::size_t sample_length = 1000;
  std::uint64_t sample_seed = 0;
  std::string sample_out;
  auto* sample = app.add_subcommand("sample", "Simulate a trajectory of state ranks");
  sample_opts.add_to(*sample);
  sample->add_option("--start", sample_start, "Starting state rank");
  sample->add_option("--length", sample_length, "Number of states in the trajectory")->check(CLI::PositiveNumber);
  sample->add_option("--seed", sample_seed, "Generator seed");
  sample->add_option("--output", sample_out, "Output file (default stdout)");

  std::string estimate_in;
  auto* estimate = app.add_subcommand("estimate", "Plug-in entropy rate of a trajectory file");
  estimate->add_option("--input", estimate_in, "Trajectory file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return validation_failure;
  }

  try {
    if (*states) {
      SimplexLattice lattice(states_n, states_N);
      if (states_list) {
        out << "rank";
        for (std::size_t i = 0; i < states_n; ++i) out << ",a" << (i + 1);
        out << '\n';
        std::size_t r = 0;
        for (const PopulationState& s : lattice.states()) {
          out << r++;
          for (int c : s.counts()) out << ',' << c;
          out << '\n';
        }
      } else {
        out << nlohmann::json{{"n", states_n}, {"N", states_N}, {"state_count", lattice.size()}}.dump() << '\n';
      }
    } else if (*kernel) {
      const ProcessConfig c = kernel_opts.config();
      const TransitionKernel k = build_kernel(c.n, c.N, c.incentive, c.landscape, c.mutation, kernel_opts.threads);
      with_output(kernel_out, out, [&](std::ostream& os) { write_kernel(os, k); });
    } else if (*stationary) {
      const ProcessResult result = analyze(stationary_opts.config(), stationary_opts.pipeline());
      with_output(stationary_out, out,
                  [&](std::ostream& os) { write_stationary_csv(os, result.kernel, result.stationary); });
    } else if (*rate) {
      const ProcessResult result = analyze(rate_opts.config(), rate_opts.pipeline());
      out << to_json(result.report).dump() << '\n';
    } else if (*sweep) {
      const SweepSpec spec = load_sweep_spec_file(sweep_config);
      const unsigned workers = sweep_threads > 0 ? sweep_threads : default_worker_count();
      if (spec.output) {
        run_sweep_to_file(spec, workers);
      } else {
        write_sweep_csv(out, run_sweep(spec, workers));
      }
    } else if (*sample) {
      const ProcessConfig c = sample_opts.config();
      const TransitionKernel k = build_kernel(c.n, c.N, c.incentive, c.landscape, c.mutation, sample_opts.threads);
      const TrajectoryConfig tc{StateIndex{sample_start}, sample_length, sample_seed};
      const auto trajectory = sample_trajectory(k, tc);
      with_output(sample_out, out, [&](std::ostream& os) { write_trajectory(os, tc, trajectory); });
    } else if (*estimate) {
      std::ifstream in(estimate_in);
      if (!in) throw error(errc::io, "cannot open trajectory file " + estimate_in);
      const auto trajectory = read_trajectory(in);
      out << nlohmann::json{{"entropy_rate", plug_in_entropy_rate(trajectory)}, {"length", trajectory.size()}}.dump()
          << '\n';
    }
  } catch (const error& e) {
    err << e.what() << '\n';
    return e.is_numerical() ? numerical_failure : validation_failure;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return validation_failure;
  }
  return ok;
}

}  // namespace moran::cli
