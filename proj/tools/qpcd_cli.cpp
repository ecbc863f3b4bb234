#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "qpcd/qpcd.hpp"

namespace fs = std::filesystem;

namespace {

struct SolveOptions {
  std::string instance;
  double vr = std::numeric_limits<double>::quiet_NaN();
  double delta = 1e-6;
  double eta = 0.5;
  double eps = 1e-6;
  std::string cut_mode = "dnn";
  double sdp_tol = 0.0;
  double time_limit = 0.0;
  int max_cuts = 200;
  std::string log;
};

void add_solver_options(CLI::App* cmd, SolveOptions& o) {
  cmd->add_option("--delta", o.delta, "Reference perturbation")->check(CLI::NonNegativeNumber);
  cmd->add_option("--eta", o.eta, "DNN cut scaling in (0,1)")->check(CLI::Range(1e-12, 1.0 - 1e-12));
  cmd->add_option("--cut-mode", o.cut_mode, "dnn or konno")->check(CLI::IsMember({"dnn", "konno"}));
  cmd->add_option("--sdp-tol", o.sdp_tol, "SDP tolerance for every bound")->check(CLI::PositiveNumber);
  cmd->add_option("--time-limit", o.time_limit, "Seconds per solve (0 = none)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-cuts", o.max_cuts, "Cut cap")->check(CLI::NonNegativeNumber);
  cmd->add_option("--log", o.log, "CSV log to append to");
}

qpcd::SolverParams make_params(const SolveOptions& o) {
  qpcd::SolverParams p;
  p.delta = o.delta;
  p.eta = o.eta;
  p.eps_gap = o.eps;
  p.cut_mode = o.cut_mode == "konno" ? qpcd::CutMode::konno : qpcd::CutMode::dnn;
  if (o.sdp_tol > 0.0) {
    p.sdp_tol = o.sdp_tol;
    p.cut_sdp_tol = o.sdp_tol;
  }
  if (o.time_limit > 0.0) p.time_limit_seconds = o.time_limit;
  p.max_cuts = o.max_cuts;
  return p;
}

qpcd::SolveObserver logging_observer() {
  qpcd::SolveObserver obs;
  obs.on_iteration = [](const qpcd::IterationEvent& e) {
    spdlog::debug("iteration {} lower {:.10g} upper {:.10g}", e.iteration, e.lower, e.upper);
  };
  obs.on_cut = [](const qpcd::CutEvent& e) {
    spdlog::debug("{} cut on {} nonbasic variables, target {:.10g}", qpcd::to_string(e.kind), e.theta.size(), e.target);
  };
  return obs;
}

qpcd::SolveReport run_solve(const qpcd::QpInstance& inst, bool reference, double vr, const qpcd::SolverParams& params) {
  const qpcd::SolveObserver obs = logging_observer();
  return reference ? qpcd::solve_reference(inst, vr, params, &obs) : qpcd::solve_global(inst, params, &obs);
}

void print_summary(const std::string& name, const qpcd::SolveReport& r) {
  std::cout << name << ": " << qpcd::to_string(r.status) << "\n"
            << "  lower  " << qpcd::csv_number(r.lower) << "\n"
            << "  upper  " << qpcd::csv_number(r.upper) << "\n"
            << "  relgap " << qpcd::csv_number(r.relgap) << "\n"
            << "  iterations " << r.iterations << ", cuts " << r.cuts_konno << " konno + " << r.cuts_dnn << " dnn"
            << ", lp " << r.lp_calls << ", sdp " << r.sdp_calls << "\n"
            << "  time " << r.wall_seconds << " s\n";
}

std::string instance_name(const qpcd::QpInstance& inst, const std::string& path) {
  return inst.name.empty() ? fs::path(path).stem().string() : inst.name;
}

int cmd_solve(const SolveOptions& o, bool reference) {
  const qpcd::QpInstance inst = qpcd::read_instance(o.instance);
  double vr = o.vr;
  if (reference && std::isnan(vr)) {
    if (!inst.vR) {
      std::cerr << "error: --vr is required when the instance has no vR field\n";
      return 1;
    }
    vr = *inst.vR;
  }
  const std::string name = instance_name(inst, o.instance);
  spdlog::info("solving {} (n={}, m={})", name, inst.n(), inst.m());
  const qpcd::SolveReport rep = run_solve(inst, reference, vr, make_params(o));
  print_summary(name, rep);
  if (!o.log.empty()) {
    qpcd::CsvLog log(o.log);
    log.append(qpcd::make_row(name, rep));
  }
  return 0;
}

int cmd_generate(const std::string& family, qpcd::Index n, int count, std::uint64_t seed, const std::string& out) {
  qpcd::GenSpec spec;
  spec.family = family == "pcqmax" ? qpcd::Family::pcqmax : qpcd::Family::cqmax;
  spec.n = n;
  spec.count = count;
  spec.seed = seed;
  fs::create_directories(out);
  for (const qpcd::QpInstance& inst : qpcd::generate(spec)) {
    const fs::path path = fs::path(out) / (inst.name + ".json");
    qpcd::write_instance(inst, path.string());
    std::cout << path.string() << "\n";
  }
  return 0;
}

int cmd_oracle(const std::string& path) {
  const qpcd::QpInstance inst = qpcd::read_instance(path);
  const qpcd::OracleResult res = qpcd::oracle_optimum(inst);
  std::cout << instance_name(inst, path) << ": optimum " << qpcd::csv_number(res.value) << "\n  vertex";
  for (qpcd::Index i = 0; i < res.vertex.size(); ++i) std::cout << ' ' << qpcd::csv_number(res.vertex(i));
  std::cout << "\n";
  return 0;
}

int cmd_bench(const std::string& dir, const std::string& mode, int workers, const SolveOptions& o) {
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  const bool reference = mode == "ref";
  const qpcd::SolverParams params = make_params(o);
  std::unique_ptr<qpcd::CsvLog> log;
  if (!o.log.empty()) log = std::make_unique<qpcd::CsvLog>(o.log);
  std::atomic<size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex out_mu;
  auto work = [&] {
    for (size_t k = next++; k < files.size(); k = next++) {
      try {
        const qpcd::QpInstance inst = qpcd::read_instance(files[k]);
        if (reference && !inst.vR) throw qpcd::Error(qpcd::ErrorCode::InvalidArgument, files[k] + ": no vR field");
        const qpcd::SolveReport rep = run_solve(inst, reference, reference ? *inst.vR : 0.0, params);
        const qpcd::BenchRow row = qpcd::make_row(instance_name(inst, files[k]), rep);
        if (log) log->append(row);
        std::lock_guard<std::mutex> lock(out_mu);
        std::cout << qpcd::csv_fields(row) << "\n";
      } catch (const std::exception& e) {
        ++failures;
        spdlog::error("{}", e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::max(1, workers); ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return failures > 0 ? 2 : 0;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("qpcd");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("QPCD_LOG_LEVEL")) {
    const std::string level = env;
    if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "info") spdlog::set_level(spdlog::level::info);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Nonconvex QP maximization by cutting planes with DNN bounds"};
  app.require_subcommand(1);

  SolveOptions ref_opts;
  auto* ref = app.add_subcommand("solve-ref", "Decide whether the maximum reaches a reference value");
  ref->add_option("--instance", ref_opts.instance, "Instance JSON")->required()->check(CLI::ExistingFile);
  ref->add_option("--vr", ref_opts.vr, "Reference value (defaults to the instance's vR)");
  add_solver_options(ref, ref_opts);

  SolveOptions glob_opts;
  auto* glob = app.add_subcommand("solve-global", "Maximize to a relative gap");
  glob->add_option("--instance", glob_opts.instance, "Instance JSON")->required()->check(CLI::ExistingFile);
  glob->add_option("--eps", glob_opts.eps, "Relative gap tolerance")->check(CLI::PositiveNumber);
  add_solver_options(glob, glob_opts);

  std::string family = "cqmax", out_dir = ".";
  qpcd::Index gen_n = 10;
  int gen_count = 1;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("generate", "Write random instances");
  gen->add_option("--family", family)->check(CLI::IsMember({"cqmax", "pcqmax"}));
  gen->add_option("--n", gen_n)->required()->check(CLI::Range(4, 100000));
  gen->add_option("--count", gen_count)->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", out_dir);

  std::string oracle_path;
  auto* orc = app.add_subcommand("oracle", "Vertex enumeration optimum for small instances");
  orc->add_option("--instance", oracle_path)->required()->check(CLI::ExistingFile);

  SolveOptions bench_opts;
  std::string bench_dir, bench_mode = "global";
  int workers = 1;
  auto* bench = app.add_subcommand("bench", "Solve every instance in a directory");
  bench->add_option("--dir", bench_dir)->required()->check(CLI::ExistingDirectory);
  bench->add_option("--mode", bench_mode)->check(CLI::IsMember({"ref", "global"}));
  bench->add_option("--workers", workers)->check(CLI::PositiveNumber);
  bench->add_option("--eps", bench_opts.eps, "Relative gap tolerance")->check(CLI::PositiveNumber);
  add_solver_options(bench, bench_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*ref) return cmd_solve(ref_opts, true);
    if (*glob) return cmd_solve(glob_opts, false);
    if (*gen) return cmd_generate(family, gen_n, gen_count, gen_seed, out_dir);
    if (*orc) return cmd_oracle(oracle_path);
    if (*bench) return cmd_bench(bench_dir, bench_mode, workers, bench_opts);
  } catch (const qpcd::Error& e) {
    std::cerr << "error: " << qpcd::to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
