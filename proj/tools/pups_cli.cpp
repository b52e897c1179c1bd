// Headless driver: batch runs, scripted preference schedules, UPS/PUPS comparisons and
// the HTTP session service.

#include <CLI11.hpp>
#include <csignal>
#include <pthread.h>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <thread>

#include "pups/batch.hpp"
#include "pups/service.hpp"

namespace {

struct CommonOptions {
  std::string problem = "zdt1";
  std::size_t dimension = 30;
  std::size_t minpopsize = 10;
  std::size_t burstsize = 10;
  std::size_t initial_samples = 100;
  double scale = 0.8;
  double crossover_rate = 0.5;

  pups::OptimizerConfig config(std::uint64_t seed) const {
    pups::OptimizerConfig c;
    c.minpopsize = minpopsize;
    c.burstsize = burstsize;
    c.initial_samples = initial_samples;
    c.de.scale = scale;
    c.de.crossover_rate = crossover_rate;
    c.rng_seed = seed;
    c.validate();
    return c;
  }

  pups::ProblemSpec spec() const {
    if (problem == "zdt1" || problem == "zdt3") return pups::zdt_spec(problem, dimension);
    return pups::load_problem_spec(problem);
  }
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--problem", o.problem, "builtin problem (zdt1, zdt3) or problem JSON file");
  app->add_option("--dimension", o.dimension, "decision dimension for builtin problems")->check(CLI::PositiveNumber);
  app->add_option("--minpopsize", o.minpopsize, "minimum parent pool size");
  app->add_option("--burstsize", o.burstsize, "children per loop pass");
  app->add_option("--initial", o.initial_samples, "initial Latin-hypercube sample size");
  app->add_option("--F", o.scale, "DE scaling factor");
  app->add_option("--CR", o.crossover_rate, "DE crossover probability");
}

pups::PreferenceRanges ranges_or_unbounded(const std::string& text, std::size_t k) {
  return text.empty() ? pups::PreferenceRanges::unbounded(k) : pups::parse_ranges_arg(text);
}

void finish_run(const pups::RunReport& report, const pups::Problem& problem, const std::string& out) {
  if (!out.empty()) pups::export_run(out, report, problem.dimension(), problem.objectives());
  std::cout << pups::report_to_json(report).dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preference-guided unrestricted-population EMO workbench"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  std::size_t run_evals = 1000;
  std::string run_ranges;
  std::uint64_t run_seed = 1;
  std::string run_out;
  auto* run = app.add_subcommand("run", "single run with fixed preference ranges");
  add_common(run, run_opts);
  run->add_option("--evals", run_evals, "total evaluation budget")->check(CLI::PositiveNumber);
  run->add_option("--ranges", run_ranges, "preference ranges \"lo1:hi1,lo2:hi2\" (default unbounded)");
  run->add_option("--seed", run_seed, "random seed");
  run->add_option("--out", run_out, "export directory");

  CommonOptions cmp_opts;
  std::size_t cmp_seeds = 20;
  std::size_t cmp_evals = 1000;
  std::string cmp_ranges;
  std::string cmp_out;
  auto* cmp = app.add_subcommand("compare", "paired UPS-EMO vs PUPS-EMO runs over several seeds");
  add_common(cmp, cmp_opts);
  cmp->add_option("--seeds", cmp_seeds, "number of seeds (1..N)")->check(CLI::Range(2, 100000));
  cmp->add_option("--evals", cmp_evals, "evaluations per run")->check(CLI::PositiveNumber);
  cmp->add_option("--ranges", cmp_ranges, "preference ranges for the PUPS arm")->required();
  cmp->add_option("--out", cmp_out, "write the comparison JSON to this file");

  CommonOptions script_opts;
  std::string script_file;
  std::uint64_t script_seed = 1;
  std::string script_out;
  auto* script = app.add_subcommand("script", "run a phased preference schedule from JSON");
  add_common(script, script_opts);
  script->add_option("--file", script_file, "run script JSON")->required()->check(CLI::ExistingFile);
  script->add_option("--seed", script_seed, "random seed");
  script->add_option("--out", script_out, "export directory");

  CommonOptions serve_opts;
  int serve_port = 8080;
  std::string serve_host = "127.0.0.1";
  std::size_t serve_budget = 1000;
  std::uint64_t serve_seed = 1;
  auto* serve = app.add_subcommand("serve", "run the interactive session service");
  add_common(serve, serve_opts);
  serve->add_option("--port", serve_port, "TCP port (0 picks a free one)");
  serve->add_option("--host", serve_host, "bind address");
  serve->add_option("--budget", serve_budget, "initial evaluation budget");
  serve->add_option("--seed", serve_seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto problem = pups::make_problem(run_opts.spec());
      const auto ranges = ranges_or_unbounded(run_ranges, problem.objectives());
      const auto report =
          pups::run_batch(problem, run_opts.config(run_seed), pups::single_phase(run_evals, ranges), run_seed);
      finish_run(report, problem, run_out);
      return report.error.empty() ? 0 : 2;
    }
    if (script->parsed()) {
      auto problem = pups::make_problem(script_opts.spec());
      std::ifstream in(script_file);
      const auto plan = pups::run_script_from_json(pups::Json::parse(in));
      const auto report = pups::run_batch(problem, script_opts.config(script_seed), plan, script_seed);
      finish_run(report, problem, script_out);
      return report.error.empty() ? 0 : 2;
    }
    if (cmp->parsed()) {
      auto problem = pups::make_problem(cmp_opts.spec());
      std::vector<std::uint64_t> seeds(cmp_seeds);
      std::iota(seeds.begin(), seeds.end(), std::uint64_t{1});
      const auto result = pups::compare(problem, cmp_opts.config(1), pups::parse_ranges_arg(cmp_ranges), cmp_evals,
                                        seeds);
      const auto body = pups::compare_to_json(result).dump(2);
      if (!cmp_out.empty()) std::ofstream(cmp_out) << body << '\n';
      std::cout << body << '\n';
      return 0;
    }
    if (serve->parsed()) {
      // Signals are taken by a dedicated thread; every other thread inherits the mask.
      sigset_t stop_signals;
      sigemptyset(&stop_signals);
      sigaddset(&stop_signals, SIGINT);
      sigaddset(&stop_signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
      pups::Session session(pups::make_problem(serve_opts.spec()), serve_opts.config(serve_seed), serve_budget);
      pups::Service service(session);
      const int port = service.bind(serve_host, serve_port);
      if (port < 0) {
        std::cerr << "cannot bind " << serve_host << ':' << serve_port << '\n';
        return 1;
      }
      std::thread([&service, stop_signals] {
        int sig = 0;
        sigwait(&stop_signals, &sig);
        service.stop();
      }).detach();
      std::cout << "listening on http://" << serve_host << ':' << port << std::endl;
      service.listen();
      session.shutdown();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
