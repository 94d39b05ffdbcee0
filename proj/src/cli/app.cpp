#include "triplesplit/cli/app.hpp"

#include "triplesplit/cli/commands.hpp"
#include "triplesplit/cli/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <ostream>

namespace triplesplit::cli {

namespace {

std::vector<std::string> split_list(const std::string &text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(text.substr(start, comma - start));
    if (comma == std::string::npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

struct SolveFlags {
  std::string problem;
  std::string gamma = "1/L";
  std::string lambda = "1";
  std::size_t max_iters = 10000;
  double tol = 1e-10;
  bool strict = false;
  bool no_oracle = false;
  std::string output;

  void attach(CLI::App &cmd, const std::string &default_output) {
    output = default_output;
    cmd.add_option("--problem,-p", problem,
                   "figure2:n=..,seed=.. | file:<path> | algo5:n=..,L=..")
        ->required();
    cmd.add_option("--gamma,-g", gamma, "step size: number or c/L")
        ->capture_default_str();
    cmd.add_option("--lambda", lambda,
                   "relaxation: number, schedule:decay or "
                   "schedule:max-admissible")
        ->capture_default_str();
    cmd.add_option("--max-iters", max_iters, "iteration budget")
        ->capture_default_str();
    cmd.add_option("--tol", tol, "fixed-point residual tolerance")
        ->capture_default_str();
    cmd.add_flag("--strict", strict,
                 "reject step sizes outside the convergence guarantees");
    cmd.add_flag("--no-oracle", no_oracle,
                 "skip the reference minimizer (empty error columns)");
    cmd.add_option("--output,-o", output, "output path")
        ->capture_default_str();
  }

  RunSpec to_spec() const {
    RunSpec s;
    s.problem = parse_problem(problem);
    s.gamma = parse_gamma(gamma);
    s.lambda = parse_lambda(lambda);
    s.max_iters = max_iters;
    if (!std::isfinite(tol) || tol < 0.0) {
      throw UsageError("tol must be a finite non-negative number");
    }
    s.tol = tol;
    s.strict = strict;
    s.oracle = !no_oracle;
    s.output = output;
    return s;
  }
};

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"Three-operator splitting solver and benchmark driver",
               "triplesplit"};
  app.require_subcommand(1);

  auto *run = app.add_subcommand("run", "solve one problem and write a trace");
  SolveFlags run_flags;
  run_flags.attach(*run, "trace.csv");
  std::string method = "proposed";
  run->add_option("--method,-m", method,
                  "proposed | dys | drs | fbs_variant | multiblock:<m>")
      ->capture_default_str();

  auto *compare = app.add_subcommand(
      "compare", "run the proposed and Davis-Yin iterations side by side");
  SolveFlags cmp_flags;
  cmp_flags.attach(*compare, "compare");
  std::string second_problem;
  compare->add_option("--problem2", second_problem,
                      "second problem spec; must match --problem");

  auto *sweep = app.add_subcommand("sweep", "grid of methods and step sizes");
  SolveFlags sweep_flags;
  sweep_flags.attach(*sweep, "sweep");
  std::string methods = "proposed,dys";
  std::string gammas = "0.3/L,1/L,1.8/L,3/L,20/L,40/L";
  std::size_t jobs = 0;
  sweep->add_option("--methods", methods, "comma-separated methods")
      ->capture_default_str();
  sweep->add_option("--gammas", gammas, "comma-separated step sizes")
      ->capture_default_str();
  sweep->add_option("--jobs,-j", jobs, "concurrent solves (0: all cores)")
      ->capture_default_str();

  auto *verify = app.add_subcommand("verify", "run a property suite");
  std::string suite = "all";
  verify
      ->add_option("suite", suite,
                   "identities | reductions | admm-equivalence | rates | all")
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) {
      RunSpec spec = run_flags.to_spec();
      spec.method = parse_method(method);
      return cmd_run(spec, out);
    }
    if (compare->parsed()) {
      CompareSpec spec;
      spec.base = cmp_flags.to_spec();
      if (!second_problem.empty()) {
        spec.second_problem = parse_problem(second_problem);
      }
      return cmd_compare(spec, out);
    }
    if (sweep->parsed()) {
      SweepSpec spec;
      spec.base = sweep_flags.to_spec();
      for (const auto &m : split_list(methods)) {
        spec.methods.push_back(parse_method(m));
      }
      for (const auto &g : split_list(gammas)) {
        spec.gammas.push_back(parse_gamma(g));
      }
      spec.directory = sweep_flags.output;
      spec.jobs = jobs;
      return cmd_sweep(spec, out);
    }
    if (verify->parsed()) {
      return cmd_verify(suite, out) == 0 ? kExitOk : kExitVerificationFailed;
    }
  } catch (const UsageError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidConfigError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidBoundsError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DimensionMismatchError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InfeasibleInstanceError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitVerificationFailed;
  }
  return kExitUsage;
}

} // namespace triplesplit::cli
