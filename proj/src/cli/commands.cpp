#include "triplesplit/cli/commands.hpp"

#include "triplesplit/multiblock.hpp"

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace triplesplit::cli {

namespace fs = std::filesystem;

namespace {

Matrix build_linear_map(const Algo5Spec &s) {
  const auto n = static_cast<Eigen::Index>(s.n);
  switch (s.map) {
  case LinearMapKind::Identity:
    return Matrix::Identity(n, n);
  case LinearMapKind::Scale:
    return s.scale * Matrix::Identity(n, n);
  case LinearMapKind::Gaussian: {
    // separate stream from the one drawing the centers
    NormalStream rng(s.seed ^ 0x9e3779b97f4a7c15ULL);
    Matrix l(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        l(i, j) = rng.next() / std::sqrt(double(n));
      }
    }
    return l;
  }
  }
  return Matrix::Identity(n, n);
}

/// prox of (f + indicator of the affine set): shrink toward u, then project.
MonotoneOperator quadratic_on_affine(const BoundProjectionInstance &inst) {
  auto proj = std::make_shared<const AffineProjector>(
      inst.constraint_matrix(), Vector::Constant(1, inst.b));
  const double alpha = inst.alpha;
  const Vector u = inst.u;
  return MonotoneOperator::custom(
      [proj, alpha, u](double gamma, const Vector &v) -> Vector {
        return proj->project((v + alpha * gamma * u) / (1.0 + alpha * gamma));
      },
      false);
}

/// f + h for the composite instance, again a quadratic.
MonotoneOperator merged_quadratic(const CompositeInstance &inst) {
  const double a = inst.alpha_f + inst.alpha_h;
  return MonotoneOperator::quadratic(
      a, (inst.alpha_f * inst.u_f + inst.alpha_h * inst.u_h) / a);
}

LambdaSchedule make_lambda(const LambdaSpec &spec, double beta, double gamma) {
  switch (spec.kind) {
  case LambdaKind::Constant:
    return constant_lambda(spec.value);
  case LambdaKind::Decay:
    return [](std::size_t k) { return 0.5 + 0.5 / double(k + 1); };
  case LambdaKind::MaxAdmissible: {
    const double top = max_relaxation(beta, gamma);
    if (!(top > 0.0)) {
      throw UsageError(fmt::format(
          "lambda schedule:max-admissible: no admissible relaxation at "
          "gamma = {} (needs gamma < 4 beta = {})",
          gamma, 4.0 * beta));
    }
    return constant_lambda(0.99 * std::min(top, 2.0));
  }
  }
  return constant_lambda(1.0);
}

std::string cell(const std::optional<double> &v) {
  return v ? fmt::format("{:.17g}", *v) : std::string();
}

std::ofstream open_output(const fs::path &path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw UsageError(fmt::format("cannot write output file '{}'",
                                 path.string()));
  }
  return os;
}

std::optional<double> final_error(const Trace &trace) {
  if (trace.records.empty()) {
    return std::nullopt;
  }
  return trace.records.back().error_to_ref;
}

} // namespace

// -- Instance -----------------------------------------------------------------

Instance Instance::load(const ProblemSpec &spec) {
  Instance inst;
  inst.label_ = canonical(spec);
  if (const auto *f2 = std::get_if<Figure2Spec>(&spec)) {
    inst.bound_ = build_figure2_instance(f2->n, f2->seed, f2->options);
  } else if (const auto *file = std::get_if<FileSpec>(&spec)) {
    std::ifstream is(file->path);
    if (!is) {
      throw UsageError(
          fmt::format("cannot open instance file '{}'", file->path));
    }
    try {
      inst.bound_ = read_instance(is);
    } catch (const Error &e) {
      throw UsageError(fmt::format("{}: {}", file->path, e.what()));
    }
  } else {
    const auto &a5 = std::get<Algo5Spec>(spec);
    inst.composite_ = build_algo5_instance(a5.n, build_linear_map(a5), a5.seed);
  }
  return inst;
}

Eigen::Index Instance::dim() const {
  return bound_ ? Eigen::Index(bound_->n) : composite_->dim();
}

double Instance::lipschitz() const {
  return bound_ ? bound_->lipschitz() : composite_->lipschitz();
}

Stepper Instance::stepper(const MethodSpec &method, double gamma) const {
  if (bound_) {
    const auto &b = *bound_;
    SplittingOperators ops = assemble_splitting_operators(b);
    switch (method.kind) {
    case MethodKind::Proposed:
      return bind_proposed(ops.a, ops.b, ops.c);
    case MethodKind::DavisYin:
      return bind_dys(ops.a, ops.b, ops.c);
    case MethodKind::DouglasRachford:
      return bind_drs(ops.a, quadratic_on_affine(b));
    case MethodKind::FbsVariant:
      return bind_fbs_variant(ops.a, ops.c);
    case MethodKind::Multiblock: {
      MultiblockScheme scheme;
      scheme.nonsmooth_first = ops.a;
      scheme.last = ops.b;
      const double share = b.alpha / double(method.blocks - 2);
      for (std::size_t i = 0; i + 2 < method.blocks; ++i) {
        scheme.smooth_chain.push_back(CocoerciveOperator::quadratic(share, b.u));
      }
      scheme.gamma = gamma;
      return bind_multiblock(std::move(scheme));
    }
    }
  }

  const auto &c = *composite_;
  switch (method.kind) {
  case MethodKind::Proposed:
    return bind_composite(c);
  case MethodKind::DavisYin:
    return bind_dys(c.f_operator(), c.h_operator(), c.composite_operator());
  case MethodKind::DouglasRachford:
    return bind_drs(c.composite_operator().as_monotone(), merged_quadratic(c));
  case MethodKind::FbsVariant:
    return bind_fbs_variant(merged_quadratic(c), c.composite_operator());
  case MethodKind::Multiblock: {
    MultiblockScheme scheme;
    scheme.nonsmooth_first = c.f_operator();
    scheme.last = c.h_operator();
    const double share = c.alpha_g / double(method.blocks - 2);
    for (std::size_t i = 0; i + 2 < method.blocks; ++i) {
      scheme.smooth_chain.push_back(
          CocoerciveOperator::linear_composite(c.l, share, c.u_g));
    }
    scheme.gamma = gamma;
    return bind_multiblock(std::move(scheme));
  }
  }
  throw UsageError("unsupported method");
}

std::optional<Vector> Instance::reference(const MethodSpec &method) const {
  if (composite_) {
    return composite_->minimizer();
  }
  if (method.kind == MethodKind::FbsVariant) {
    // the equality constraint is not part of this splitting
    return bound_->u.cwiseMax(bound_->lo).cwiseMin(bound_->hi).eval();
  }
  try {
    return kkt_oracle(*bound_).x_star;
  } catch (const InfeasibleInstanceError &) {
    return std::nullopt;
  }
}

double Instance::objective(const Vector &x) const {
  return bound_ ? bound_->objective(x) : composite_->objective(x);
}

// -- run --------------------------------------------------------------------

RunResult execute(const RunSpec &spec, const Instance &instance) {
  RunResult result;
  const double lip = instance.lipschitz();
  result.gamma = spec.gamma.resolve(lip);
  const double beta = lip > 0.0 ? 1.0 / lip : kInfinity;

  SplitConfig config;
  config.gamma = result.gamma;
  config.lambda = make_lambda(spec.lambda, beta, result.gamma);
  config.max_iters = spec.max_iters;
  config.residual_tol = spec.tol;
  config.strict = spec.strict;
  config.beta = beta;

  const Stepper stepper = instance.stepper(spec.method, result.gamma);
  std::optional<Vector> reference;
  if (spec.oracle) {
    reference = instance.reference(spec.method);
  }

  StepObserver observer;
  if (reference) {
    const double f_star = instance.objective(*reference);
    observer = [&](std::size_t, const StepOutput &step) {
      result.objective_gap.push_back(instance.objective(step.x_b) - f_star);
    };
  }
  result.trace = km_iterate(stepper, config,
                            Vector::Zero(instance.dim()), reference, observer);
  return result;
}

void write_trace_csv(std::ostream &os, const RunResult &result) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf),
                 "iter,residual,error_to_xstar,objective_gap,z_norm\n");
  const auto &recs = result.trace.records;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    std::optional<double> gap;
    if (i < result.objective_gap.size()) {
      gap = result.objective_gap[i];
    }
    fmt::format_to(std::back_inserter(buf), "{},{:.17g},{},{},{:.17g}\n",
                   recs[i].k, recs[i].residual, cell(recs[i].error_to_ref),
                   cell(gap), recs[i].z_norm);
  }
  os.write(buf.data(), std::streamsize(buf.size()));
}

std::string status_line(const RunResult &result) {
  const auto &t = result.trace;
  const double residual =
      t.records.empty() ? kInfinity : t.records.back().residual;
  return fmt::format("status={} iters={} residual={:.6e}", to_string(t.status),
                     t.records.size(), residual);
}

int cmd_run(const RunSpec &spec, std::ostream &out) {
  const Instance instance = Instance::load(spec.problem);
  const RunResult result = execute(spec, instance);
  {
    std::ofstream os = open_output(spec.output);
    write_trace_csv(os, result);
  }
  out << status_line(result) << '\n';
  return 0;
}

// -- compare ----------------------------------------------------------------

void write_plot_script(std::ostream &os, const std::string &csv_path,
                       const std::string &title) {
  const std::string png = fs::path(csv_path).replace_extension(".png").string();
  fmt::print(os,
             "# gnuplot script: error curves of the proposed and Davis-Yin "
             "iterations\n"
             "set terminal pngcairo size 900,600\n"
             "set output '{}'\n"
             "set datafile separator ','\n"
             "set logscale y\n"
             "set format y '10^{{%L}}'\n"
             "set xlabel 'iteration k'\n"
             "set ylabel '||x_B^k - x^*||'\n"
             "set title '{}'\n"
             "set key top right\n"
             "set grid\n"
             "plot '{}' every ::1 using 1:2 with lines lw 2 title 'proposed', \\\n"
             "     '{}' every ::1 using 1:3 with lines lw 2 dt 2 title "
             "'Davis-Yin'\n",
             png, title, csv_path, csv_path);
}

int cmd_compare(const CompareSpec &spec, std::ostream &out) {
  if (spec.second_problem &&
      canonical(*spec.second_problem) != canonical(spec.base.problem)) {
    throw UsageError(fmt::format(
        "compare: both runs must use the same instance, got '{}' and '{}'",
        canonical(spec.base.problem), canonical(*spec.second_problem)));
  }
  if (!spec.base.oracle) {
    throw UsageError("compare: error curves need the reference oracle");
  }
  const Instance instance = Instance::load(spec.base.problem);

  RunSpec proposed = spec.base;
  proposed.method = {MethodKind::Proposed, 3};
  RunSpec dys = spec.base;
  dys.method = {MethodKind::DavisYin, 3};

  auto fut_p = std::async(std::launch::async,
                          [&] { return execute(proposed, instance); });
  auto fut_d =
      std::async(std::launch::async, [&] { return execute(dys, instance); });
  const RunResult rp = fut_p.get();
  const RunResult rd = fut_d.get();
  if (!final_error(rp.trace) && !final_error(rd.trace)) {
    throw UsageError("compare: no reference minimizer for this instance");
  }

  fs::path csv = spec.base.output;
  if (csv.extension() != ".csv") {
    csv += ".csv";
  }
  fs::path gp = csv;
  gp.replace_extension(".gp");

  {
    fmt::memory_buffer buf;
    fmt::format_to(std::back_inserter(buf), "iter,err_proposed,err_dys\n");
    const std::size_t rows =
        std::max(rp.trace.records.size(), rd.trace.records.size());
    auto err = [](const RunResult &r, std::size_t i) -> std::optional<double> {
      if (i < r.trace.records.size()) {
        return r.trace.records[i].error_to_ref;
      }
      return std::nullopt;
    };
    for (std::size_t i = 0; i < rows; ++i) {
      fmt::format_to(std::back_inserter(buf), "{},{},{}\n", i,
                     cell(err(rp, i)), cell(err(rd, i)));
    }
    std::ofstream os = open_output(csv);
    os.write(buf.data(), std::streamsize(buf.size()));
  }
  {
    std::ofstream os = open_output(gp);
    write_plot_script(os, csv.filename().string(),
                      fmt::format("{}  gamma = {}", instance.label(),
                                  canonical(spec.base.gamma)));
  }
  out << "proposed: " << status_line(rp) << '\n';
  out << "dys: " << status_line(rd) << '\n';
  out << "wrote " << csv.string() << " and " << gp.string() << '\n';
  return 0;
}

// -- sweep -------------------------------------------------------------------

int cmd_sweep(const SweepSpec &spec, std::ostream &out) {
  if (spec.methods.empty() || spec.gammas.empty()) {
    throw UsageError("sweep: need at least one method and one gamma");
  }
  const Instance instance = Instance::load(spec.base.problem);

  struct Job {
    RunSpec spec;
    RunResult result;
    std::exception_ptr error;
  };
  std::vector<Job> jobs;
  for (const auto &g : spec.gammas) {
    for (const auto &m : spec.methods) {
      Job j;
      j.spec = spec.base;
      j.spec.method = m;
      j.spec.gamma = g;
      jobs.push_back(std::move(j));
    }
  }

  std::size_t workers = spec.jobs;
  if (workers == 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
  }
  workers = std::min(workers, jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        jobs[i].result = execute(jobs[i].spec, instance);
      } catch (...) {
        jobs[i].error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) {
      pool.emplace_back(work);
    }
    work();
  }
  for (const auto &j : jobs) {
    if (j.error) {
      std::rethrow_exception(j.error);
    }
  }

  const fs::path dir = spec.directory;
  fmt::memory_buffer summary;
  fmt::format_to(std::back_inserter(summary),
                 "gamma,method,status,iters,final_residual,final_error\n");
  for (const auto &j : jobs) {
    std::string gamma_tag = canonical(j.spec.gamma);
    for (auto &ch : gamma_tag) {
      if (ch == '/') ch = '_';
    }
    const fs::path file =
        dir / fmt::format("{}_gamma{}.csv", canonical(j.spec.method), gamma_tag);
    {
      std::ofstream os = open_output(file);
      write_trace_csv(os, j.result);
    }
    const auto &t = j.result.trace;
    fmt::format_to(std::back_inserter(summary), "{},{},{},{},{:.17g},{}\n",
                   canonical(j.spec.gamma), canonical(j.spec.method),
                   to_string(t.status), t.records.size(),
                   t.records.empty() ? kInfinity : t.records.back().residual,
                   cell(final_error(t)));
    out << fmt::format("{:<14} gamma={:<8} {}\n", canonical(j.spec.method),
                       canonical(j.spec.gamma), status_line(j.result));
  }
  {
    std::ofstream os = open_output(dir / "summary.csv");
    os.write(summary.data(), std::streamsize(summary.size()));
  }
  out << "wrote " << (dir / "summary.csv").string() << '\n';
  return 0;
}

} // namespace triplesplit::cli
