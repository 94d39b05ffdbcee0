#pragma once

#include "triplesplit/cli/run_spec.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace triplesplit::cli {

/// A problem instance resolved from its spec, with everything the
/// drivers need: Lipschitz constant, reference minimizer, objective.
class Instance {
public:
  static Instance load(const ProblemSpec &spec);

  const std::string &label() const noexcept { return label_; }
  Eigen::Index dim() const;
  /// Lipschitz constant of the smooth term (the L of "c/L").
  double lipschitz() const;

  /// Stepper for `method`, plus the minimizer that method targets.
  Stepper stepper(const MethodSpec &method, double gamma) const;
  std::optional<Vector> reference(const MethodSpec &method) const;
  double objective(const Vector &x) const;

private:
  std::string label_;
  std::optional<BoundProjectionInstance> bound_;
  std::optional<CompositeInstance> composite_;
};

struct RunResult {
  Trace trace;
  /// objective(x_B^k) - objective(x*) per record; empty without an oracle
  std::vector<double> objective_gap;
  double gamma = 0.0;
};

/// Runs one solve. Throws UsageError for specs the instance cannot honour.
RunResult execute(const RunSpec &spec, const Instance &instance);

/// iter,residual,error_to_xstar,objective_gap,z_norm
void write_trace_csv(std::ostream &os, const RunResult &result);
std::string status_line(const RunResult &result);

int cmd_run(const RunSpec &spec, std::ostream &out);

struct CompareSpec {
  RunSpec base;
  /// Optional second problem; must denote the same instance.
  std::optional<ProblemSpec> second_problem;
};

/// Writes <output>.csv (iter,err_proposed,err_dys) and <output>.gp.
int cmd_compare(const CompareSpec &spec, std::ostream &out);

/// Emits the gnuplot script for a compare CSV.
void write_plot_script(std::ostream &os, const std::string &csv_path,
                       const std::string &title);

struct SweepSpec {
  RunSpec base;
  std::vector<MethodSpec> methods;
  std::vector<GammaSpec> gammas;
  /// Output directory.
  std::string directory = "sweep";
  std::size_t jobs = 0; // 0: hardware concurrency
};

/// One trace file per (method, gamma) plus summary.csv.
int cmd_sweep(const SweepSpec &spec, std::ostream &out);

} // namespace triplesplit::cli
