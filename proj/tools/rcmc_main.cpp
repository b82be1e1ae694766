#include "rcmc/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace rcmc;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool svg = false;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key = value config file");
  cmd->add_option("--set", args.overrides, "extra key=value override (repeatable)");
  cmd->add_option("--seed", args.seed, "master seed override");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_flag("--svg", args.svg, "emit SVG charts");
  cmd->add_option("--threads", args.threads, "worker threads for sweeps");
}

RunConfig load_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = parse_config_file(args.config_path);
  for (const std::string& kv : args.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    apply_key_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed) cfg.seed = *args.seed;
  if (args.out_dir) cfg.out_dir = *args.out_dir;
  if (args.svg) cfg.svg = true;
  if (args.threads) cfg.threads = *args.threads;
  cfg.validate();
  return cfg;
}

void ensure_out(const RunConfig& cfg) { fs::create_directories(cfg.out_dir); }

void write_matrix_csv(const std::string& path, const RealMat& part) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  for (Eigen::Index i = 0; i < part.rows(); ++i) {
    for (Eigen::Index j = 0; j < part.cols(); ++j)
      os << format_double(part(i, j)) << (j + 1 < part.cols() ? "," : "");
    os << "\n";
  }
}

void emit_sweep_outputs(const RunConfig& cfg, const SweepOutput& sweep) {
  ensure_out(cfg);
  write_records_csv(cfg.out_dir + "/records.csv", sweep.records);
  std::map<std::string, std::vector<RunRecord>> by_stage;
  for (const RunRecord& r : sweep.records) by_stage[r.stage].push_back(r);
  for (const auto& [stage, rows] : by_stage) write_curves_csv(cfg.out_dir + "/curves_" + stage + ".csv", rows);
  write_markdown(cfg.out_dir + "/summary.md", sweep.records);
  if (cfg.svg) write_charts(cfg.out_dir, "sweep", sweep.records);
}

int cmd_generate(const RunConfig& cfg) {
  ensure_out(cfg);
  GenSpec gs{cfg.kind, cfg.n, cfg.r, cfg.kboost, cfg.weight, cfg.seed};
  GroundTruth truth = gen_truth(gs);
  write_truth(cfg.out_dir + "/truth", truth, gs);
  ExperimentContext ctx = build_context(cfg);
  std::ofstream obs_os(cfg.out_dir + "/observations.csv");
  write_observations_csv(obs_os, ctx.obs);
  std::cout << "generated " << to_string(cfg.kind) << " n=" << cfg.n << " r=" << cfg.r << " m=" << ctx.m
            << " -> " << cfg.out_dir << "\n";
  return 0;
}

int cmd_solve(const RunConfig& cfg, bool dump_x) {
  ensure_out(cfg);
  ExperimentContext ctx = build_context(cfg);
  double rho = cfg.rho_fixed.value_or(0.1 * ctx.rho_scale);
  CorrectionMatrix corr = CorrectionMatrix::none(ctx.basis->space());
  if (cfg.estimator == "rcs") {
    SweepOutput nn = run_sweep(ctx);  // nnpls sweep supplies the initial estimator
    corr = make_correction(ctx, cfg.correction, nn.results[static_cast<size_t>(nn.picked)].X_hat, cfg.gamma);
  }
  RcsProblem prob;
  prob.basis = ctx.basis;
  prob.obs = ctx.obs;
  if (ctx.basis->d1() > 0) prob.fixed_values = ctx.fixed_values;
  prob.correction = corr;
  prob.psd = ctx.psd;
  prob.rho = rho;
  prob.bound_c = cfg.bound_c;
  SolveResult res = solve(prob, cfg.solver);
  OptimalityReport opt = check_optimality(res.X_hat, prob, cfg.solver.tol_primal, cfg.solver.rank_tol);

  std::ofstream os(cfg.out_dir + "/solve_result.csv");
  os << "rho,gamma,objective,iterations,primal_residual,dual_residual,numerical_rank,relerr\n";
  os << format_double(rho) << "," << format_double(corr.gamma) << "," << format_double(res.objective) << ","
     << res.iterations << "," << format_double(res.primal_residual) << ","
     << format_double(res.dual_residual) << "," << res.numerical_rank << ","
     << format_double(relerr(res.X_hat, ctx.truth.Xbar)) << "\n";
  if (dump_x) {
    write_matrix_csv(cfg.out_dir + "/xhat.csv", res.X_hat.real());
    if (res.X_hat.imag().cwiseAbs().maxCoeff() != 0.0)
      write_matrix_csv(cfg.out_dir + "/xhat_im.csv", res.X_hat.imag());
  }
  std::cout << "solve: rho=" << rho << " objective=" << res.objective << " rank=" << res.numerical_rank
            << " relerr=" << relerr(res.X_hat, ctx.truth.Xbar) << " iterations=" << res.iterations
            << (res.converged ? "" : " (iteration limit)") << "\n";
  std::cout << "certificate: stationarity=" << opt.stationarity_residual
            << (ctx.psd ? " multiplier_lmin=" : " subgradient_norm=")
            << (ctx.psd ? opt.multiplier_lambda_min : opt.subgradient_norm)
            << " pass=" << (opt.pass ? "yes" : "no") << "\n";
  return res.converged ? 0 : 3;
}

int cmd_sweep(const RunConfig& cfg) {
  ExperimentContext ctx = build_context(cfg);
  SweepOutput sweep = run_sweep(ctx);
  emit_sweep_outputs(cfg, sweep);
  const RunRecord& picked = sweep.records[static_cast<size_t>(sweep.picked)];
  std::cout << "sweep: " << sweep.records.size() << " rows -> " << cfg.out_dir << "; picked rho=" << picked.rho
            << " (|ratio-q|=" << std::abs(picked.residual_ratio - cfg.q_target) << ")\n";
  return sweep.any_solver_failure ? 3 : 0;
}

int cmd_chain(const RunConfig& cfg) {
  ExperimentContext ctx = build_context(cfg);
  ChainOutput chain = run_chain(ctx);
  ensure_out(cfg);
  write_records_csv(cfg.out_dir + "/chain.csv", chain.records);
  write_markdown(cfg.out_dir + "/chain.md", chain.records);
  if (cfg.svg) write_charts(cfg.out_dir, "chain", chain.records);
  for (const RunRecord& r : chain.records)
    std::cout << r.stage << ": relerr=" << r.relerr << " rank=" << r.rank
              << (std::isnan(r.fidelity) ? "" : " fidelity=" + std::to_string(r.fidelity)) << "\n";
  return chain.any_solver_failure ? 3 : 0;
}

int cmd_bisect(const RunConfig& cfg) {
  ExperimentContext ctx = build_context(cfg);
  SweepOutput nn = run_sweep(ctx);
  CorrectionMatrix corr = make_correction(ctx, cfg.correction, nn.results[static_cast<size_t>(nn.picked)].X_hat,
                                          cfg.gamma);
  BisectOutcome bo = bisect_rho(ctx, "rcs", corr, rho_grid(ctx, cfg.chain_rho_points));
  if (!bo.ok) {
    std::cerr << "bisect: " << bo.error << "\n";
    return 3;
  }
  ensure_out(cfg);
  write_records_csv(cfg.out_dir + "/bisect.csv", {bo.record});
  std::cout << "bisect: rho*=" << bo.rho_star << " plateau_rank=" << bo.plateau_rank
            << " relerr=" << bo.record.relerr << "\n";
  return 0;
}

int cmd_certify(const RunConfig& cfg) {
  ExperimentContext ctx = build_context(cfg);
  CertifyOutput cert = certify(ctx);
  ensure_out(cfg);
  {
    std::ofstream os(cfg.out_dir + "/certify_report.txt");
    write_report(os, cert.report);
  }
  {
    std::ofstream os(cfg.out_dir + "/certify.csv");
    os << "kind,n,r,verdict,certificate_value,nondegenerate,margin\n";
    os << to_string(cfg.kind) << "," << cfg.n << "," << cfg.r << "," << to_string(cert.report.verdict) << ","
       << format_double(cert.report.certificate_value) << ","
       << (cert.report.nondegeneracy.nondegenerate ? "yes" : "no") << ","
       << format_double(cert.report.nondegeneracy.margin) << "\n";
  }
  std::cout << "certify: " << to_string(cert.report.verdict)
            << " certificate_value=" << cert.report.certificate_value
            << " nondegeneracy_margin=" << cert.report.nondegeneracy.margin << "\n";
  if (cfg.expect_consistent && cert.report.verdict != Verdict::Consistent) return 4;
  return 0;
}

int cmd_report(const RunConfig& cfg, const std::string& records_path) {
  std::vector<RunRecord> records = read_records_csv(records_path);
  ensure_out(cfg);
  write_markdown(cfg.out_dir + "/summary.md", records);
  if (cfg.svg) write_charts(cfg.out_dir, "report", records);
  std::cout << "report: " << records.size() << " rows -> " << cfg.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"low-rank matrix completion with fixed basis coefficients: nuclear-norm baseline, "
               "rank-corrected estimator, consistency certificates and experiment harness"};
  app.require_subcommand(1);

  CommonArgs gen_args, solve_args, sweep_args, chain_args, bisect_args, certify_args, report_args;
  bool dump_x = false;
  std::string records_path;
  bool expect_consistent_flag = false;

  add_common(app.add_subcommand("generate", "generate a ground-truth instance and observations"), gen_args);
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve one instance at a fixed rho");
  add_common(solve_cmd, solve_args);
  solve_cmd->add_flag("--dump-x", dump_x, "dump the solution matrix as CSV");
  add_common(app.add_subcommand("sweep", "rho sweep (nnpls, optionally rcs)"), sweep_args);
  add_common(app.add_subcommand("chain", "nnpls followed by iterated rank-correction steps"), chain_args);
  add_common(app.add_subcommand("bisect", "bisection search for the smallest rank-stable rho"), bisect_args);
  CLI::App* certify_cmd = app.add_subcommand("certify", "rank-consistency and nondegeneracy certificates");
  add_common(certify_cmd, certify_args);
  certify_cmd->add_flag("--expect-consistent", expect_consistent_flag, "exit 4 unless the verdict is CONSISTENT");
  CLI::App* report_cmd = app.add_subcommand("report", "re-render markdown/SVG from a records CSV");
  add_common(report_cmd, report_args);
  report_cmd->add_option("--records", records_path, "records CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("generate")) return cmd_generate(load_config(gen_args));
    if (app.got_subcommand("solve")) return cmd_solve(load_config(solve_args), dump_x);
    if (app.got_subcommand("sweep")) return cmd_sweep(load_config(sweep_args));
    if (app.got_subcommand("chain")) return cmd_chain(load_config(chain_args));
    if (app.got_subcommand("bisect")) return cmd_bisect(load_config(bisect_args));
    if (app.got_subcommand("certify")) {
      RunConfig cfg = load_config(certify_args);
      if (expect_consistent_flag) cfg.expect_consistent = true;
      return cmd_certify(cfg);
    }
    if (app.got_subcommand("report")) return cmd_report(load_config(report_args), records_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
