#include "rcmc/harness.hpp"

#include "rcmc/svg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace rcmc {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config: bad boolean value '" + v + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void RunConfig::validate() const {
  GenSpec gs{kind, n, r, kboost, weight, seed};
  gs.validate();
  if (m_override < 0) throw std::invalid_argument("config: m must be nonnegative");
  if (m_override == 0 && !(sample_ratio > 0)) throw std::invalid_argument("config: sample_ratio must be positive");
  if (noise_level < 0) throw std::invalid_argument("config: negative noise level");
  if (depolarize_strength < 0 || depolarize_strength > 1)
    throw std::invalid_argument("config: depolarize strength outside [0,1]");
  if (kind != GenKind::Density && fix_diag > n) throw std::invalid_argument("config: fix_diag exceeds n");
  if (estimator != "nnpls" && estimator != "rcs") throw std::invalid_argument("config: estimator must be nnpls or rcs");
  if (chain_steps < 0) throw std::invalid_argument("config: chain_steps must be nonnegative");
  if (correction != "zero" && correction != "phi" && correction != "known_rank_initial" &&
      correction != "known_rank_truth")
    throw std::invalid_argument("config: unknown correction '" + correction + "'");
  if (!(tau > 0) || !(eps > 0)) throw std::invalid_argument("config: tau and eps must be positive");
  if (gamma < 0) throw std::invalid_argument("config: gamma must be nonnegative");
  if (!(kappa > 1)) throw std::invalid_argument("config: kappa must exceed 1");
  if (rho_points < 1 || chain_rho_points < 1) throw std::invalid_argument("config: empty rho grid");
  if (!(rho_min_factor > 0) || !(rho_max_factor >= rho_min_factor))
    throw std::invalid_argument("config: bad rho grid factors");
  if (threads < 1) throw std::invalid_argument("config: threads must be at least 1");
  solver.validate();
}

void apply_key_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "kind" || key == "experiment") cfg.kind = gen_kind_from_string(value);
  else if (key == "n") cfg.n = std::stoi(value);
  else if (key == "r" || key == "rank") cfg.r = std::stoi(value);
  else if (key == "weight") cfg.weight = std::stod(value);
  else if (key == "k" || key == "kboost") cfg.kboost = std::stoi(value);
  else if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "sample_ratio") cfg.sample_ratio = std::stod(value);
  else if (key == "m") cfg.m_override = std::stoi(value);
  else if (key == "noise_level") cfg.noise_level = std::stod(value);
  else if (key == "noise_kind") {
    if (value == "gaussian") cfg.noise_kind = NoiseKind::Gaussian;
    else throw std::invalid_argument("config: unsupported noise kind '" + value + "'");
  } else if (key == "depolarize") cfg.depolarize_strength = std::stod(value);
  else if (key == "fix_diag") cfg.fix_diag = value == "all" ? -1 : std::stoi(value);
  else if (key == "fix_offdiag") cfg.fix_offdiag = std::stoi(value);
  else if (key == "estimator") cfg.estimator = value;
  else if (key == "chain_steps") cfg.chain_steps = std::stoi(value);
  else if (key == "correction") cfg.correction = value;
  else if (key == "tau") cfg.tau = std::stod(value);
  else if (key == "eps" || key == "epsilon") cfg.eps = std::stod(value);
  else if (key == "gamma") cfg.gamma = std::stod(value);
  else if (key == "kappa") cfg.kappa = std::stod(value);
  else if (key == "rho_points") cfg.rho_points = std::stoi(value);
  else if (key == "rho_min_factor") cfg.rho_min_factor = std::stod(value);
  else if (key == "rho_max_factor") cfg.rho_max_factor = std::stod(value);
  else if (key == "chain_rho_points") cfg.chain_rho_points = std::stoi(value);
  else if (key == "q_target") cfg.q_target = std::stod(value);
  else if (key == "rho") cfg.rho_fixed = std::stod(value);
  else if (key == "bound_c") cfg.bound_c = std::stod(value);
  else if (key == "max_iter") cfg.solver.max_iter = std::stoi(value);
  else if (key == "tol") cfg.solver.tol_primal = cfg.solver.tol_dual = std::stod(value);
  else if (key == "tol_primal") cfg.solver.tol_primal = std::stod(value);
  else if (key == "tol_dual") cfg.solver.tol_dual = std::stod(value);
  else if (key == "sigma") cfg.solver.admm_sigma = std::stod(value);
  else if (key == "sigma_adapt") cfg.solver.sigma_adapt = parse_bool(value);
  else if (key == "rank_tol") cfg.solver.rank_tol = std::stod(value);
  else if (key == "out") cfg.out_dir = value;
  else if (key == "svg") cfg.svg = parse_bool(value);
  else if (key == "threads") cfg.threads = std::stoi(value);
  else if (key == "timing") cfg.timing = parse_bool(value);
  else if (key == "warm_start") cfg.warm_start = parse_bool(value);
  else if (key == "expect_consistent") cfg.expect_consistent = parse_bool(value);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " is not key = value");
    apply_key_value(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

ExperimentContext build_context(const RunConfig& cfg) {
  cfg.validate();
  ExperimentContext ctx;
  ctx.cfg = cfg;
  GenSpec gs{cfg.kind, cfg.n, cfg.r, cfg.kboost, cfg.weight, cfg.seed};
  ctx.truth = gen_truth(gs);

  if (cfg.kind == GenKind::Density) {
    ctx.basis = make_basis(MatrixSpace::hermitian(cfg.n), BasisKind::Pauli, FixedPattern::trace());
  } else {
    int diag_count = cfg.fix_diag < 0 ? cfg.n : cfg.fix_diag;
    FixedPattern pat = pattern_fix(cfg.kind, cfg.n, diag_count, cfg.fix_offdiag, derive_stream(cfg.seed, 101));
    ctx.basis = make_basis(MatrixSpace::real_sym(cfg.n), BasisKind::CorrelationEntrywise, pat);
  }
  ctx.scheme = SamplingScheme::make_uniform(ctx.basis);
  ctx.m = cfg.m_override > 0 ? cfg.m_override
                             : std::max(1, static_cast<int>(std::lround(cfg.sample_ratio * ctx.basis->d2())));
  SampleSet samples = sample_indices(*ctx.scheme, ctx.m, derive_stream(cfg.seed, 1));
  Mat measured = ctx.truth.Xbar;
  if (cfg.kind == GenKind::Density && cfg.depolarize_strength > 0)
    measured = depolarize(measured, cfg.depolarize_strength);
  ctx.obs = observe_with_level(*ctx.basis, measured, samples, cfg.noise_level, cfg.noise_kind,
                               derive_stream(cfg.seed, 2));
  ctx.fixed_values = ctx.basis->coeffs_alpha(ctx.truth.Xbar);
  ctx.rho_scale = spectral_norm(adjoint_sampling(*ctx.basis, ctx.obs.y, samples) / static_cast<double>(ctx.m));
  ctx.ts_truth = tangent_projections(ctx.truth.Xbar, ctx.truth.r, true);
  ctx.psd = true;
  return ctx;
}

std::vector<double> rho_grid(const ExperimentContext& ctx, int points) {
  if (points < 1) throw std::invalid_argument("rho grid must have at least one point");
  const RunConfig& cfg = ctx.cfg;
  std::vector<double> grid(static_cast<size_t>(points));
  if (points == 1) {
    grid[0] = cfg.rho_max_factor * ctx.rho_scale;
    return grid;
  }
  double lo = cfg.rho_min_factor, hi = cfg.rho_max_factor;
  for (int i = 0; i < points; ++i)
    grid[static_cast<size_t>(i)] = ctx.rho_scale * lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
  return grid;
}

CorrectionMatrix make_correction(const ExperimentContext& ctx, const std::string& kind, const Mat& x_tilde,
                                 double gamma) {
  const MatrixSpace& space = ctx.basis->space();
  if (kind == "zero") return CorrectionMatrix::build(space.zero(), x_tilde, gamma);
  if (kind == "phi") {
    RankCorrectionFn fn = RankCorrectionFn::phi_family(ctx.cfg.tau, ctx.cfg.eps);
    return CorrectionMatrix::build(apply_spectral(hermitize(x_tilde), fn, true), x_tilde, gamma);
  }
  if (kind == "known_rank_initial")
    return CorrectionMatrix::build(known_rank_correction(hermitize(x_tilde), ctx.truth.r, true), x_tilde, gamma);
  if (kind == "known_rank_truth")
    return CorrectionMatrix::build(known_rank_correction(ctx.truth.Xbar, ctx.truth.r, true), x_tilde, gamma);
  throw std::invalid_argument("unknown correction kind '" + kind + "'");
}

namespace {

RunRecord make_record(const ExperimentContext& ctx, const std::string& stage, double rho,
                      const CorrectionMatrix& corr, const SolveResult& res, double seconds) {
  RunRecord rec;
  rec.stage = stage;
  rec.rho = rho;
  rec.gamma = corr.gamma;
  rec.solver_ok = res.converged;
  rec.relerr = relerr(res.X_hat, ctx.truth.Xbar);
  rec.rank = res.numerical_rank;
  if (ctx.cfg.kind == GenKind::Density) {
    try {
      rec.fidelity = fidelity(res.X_hat, ctx.truth.Xbar);
    } catch (const std::invalid_argument&) {
      rec.solver_ok = false;  // estimate left the cone beyond the metric's clip band
    }
  }
  AmBm ab = compute_am_bm(*ctx.ts_truth, corr.G);
  rec.am = ab.am;
  rec.bm = ab.bm;
  rec.iterations = res.iterations;
  rec.seconds = ctx.cfg.timing ? seconds : 0.0;
  rec.residual_ratio = res.residual_ratio;
  rec.objective = res.objective;
  return rec;
}

RcsProblem make_problem(const ExperimentContext& ctx, const CorrectionMatrix& corr, bool enforce_alpha) {
  RcsProblem prob;
  prob.basis = ctx.basis;
  prob.obs = ctx.obs;
  if (enforce_alpha && ctx.basis->d1() > 0) prob.fixed_values = ctx.fixed_values;
  prob.correction = corr;
  prob.psd = ctx.psd;
  prob.bound_c = ctx.cfg.bound_c;
  prob.rho = 1.0;  // set per solve
  return prob;
}

}  // namespace

StageOutcome solve_stage(const ExperimentContext& ctx, const std::string& stage, const CorrectionMatrix& corr,
                         const std::vector<double>& grid, bool enforce_alpha) {
  if (grid.empty()) throw std::invalid_argument("solve_stage: empty rho grid");
  const int P = static_cast<int>(grid.size());
  StageOutcome out;
  out.records.resize(static_cast<size_t>(P));
  out.results.resize(static_cast<size_t>(P));

  const int threads = std::max(1, std::min(ctx.cfg.threads, P));
  auto run_chunk = [&](int begin, int end) {  // descending rho over [begin, end)
    RcsProblem prob = make_problem(ctx, corr, enforce_alpha);
    SolveState state;
    for (int t = begin; t < end; ++t) {
      int gi = P - 1 - t;  // solve from the large-rho end
      prob.rho = grid[static_cast<size_t>(gi)];
      auto t0 = std::chrono::steady_clock::now();
      SolveResult res = solve(prob, ctx.cfg.solver, (ctx.cfg.warm_start && state.valid) ? &state : nullptr);
      double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (ctx.cfg.warm_start) state = res.state;
      out.records[static_cast<size_t>(gi)] = make_record(ctx, stage, prob.rho, corr, res, secs);
      res.state = SolveState{};  // keep stored results lean
      out.results[static_cast<size_t>(gi)] = std::move(res);
    }
  };

  if (threads == 1) {
    run_chunk(0, P);
  } else {
    std::vector<std::thread> pool;
    int per = (P + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      int b = w * per, e = std::min(P, b + per);
      if (b >= e) break;
      pool.emplace_back(run_chunk, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

int pick_initial(const std::vector<RunRecord>& rows, double q) {
  if (rows.empty()) throw std::invalid_argument("pick_initial: empty sweep");
  int best = 0;
  double best_val = std::abs(rows[0].residual_ratio - q);
  for (int i = 1; i < static_cast<int>(rows.size()); ++i) {
    double v = std::abs(rows[static_cast<size_t>(i)].residual_ratio - q);
    bool better = v < best_val ||
                  (v == best_val && rows[static_cast<size_t>(i)].rho < rows[static_cast<size_t>(best)].rho);
    if (better) {
      best = i;
      best_val = v;
    }
  }
  return best;
}

double bisect_transition(const std::function<int(double)>& rank_at, double lo, double hi, int plateau_rank,
                         double rel_width) {
  if (!(lo > 0) || !(hi > lo)) throw std::invalid_argument("bisect_transition: bad bracket");
  if (rank_at(hi) != plateau_rank) throw std::invalid_argument("bisect_transition: rank(hi) is not the plateau value");
  if (rank_at(lo) == plateau_rank) throw std::invalid_argument("bisect_transition: rank(lo) already on the plateau");
  while (hi / lo > 1.0 + rel_width) {
    double mid = std::sqrt(lo * hi);
    if (rank_at(mid) == plateau_rank)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

BisectOutcome bisect_rho(const ExperimentContext& ctx, const std::string& stage, const CorrectionMatrix& corr,
                         const std::vector<double>& grid, bool enforce_alpha) {
  BisectOutcome out;
  StageOutcome scan = solve_stage(ctx, stage, corr, grid, enforce_alpha);
  const int P = static_cast<int>(grid.size());
  // maximal runs of constant rank, ascending rho
  struct Run {
    int begin, end, rank;
  };
  std::vector<Run> runs;
  for (int i = 0; i < P; ++i) {
    if (!runs.empty() && scan.records[static_cast<size_t>(i)].rank == runs.back().rank)
      runs.back().end = i;
    else
      runs.push_back({i, i, scan.records[static_cast<size_t>(i)].rank});
  }
  // The plateau is where the rank stabilizes after the descent: the widest
  // (in log rho) constant-rank run that is entered from a different rank.
  // The leading run is the pre-descent regime and does not qualify.
  const int min_run = std::max(2, P / 8);
  const Run* plateau = nullptr;
  double best_width = -1.0;
  for (size_t t = 1; t < runs.size(); ++t) {
    const Run& run = runs[t];
    if (run.end - run.begin + 1 < min_run) continue;
    double width = std::log(grid[static_cast<size_t>(run.end)] / grid[static_cast<size_t>(run.begin)]);
    if (width > best_width) {
      best_width = width;
      plateau = &run;
    }
  }
  if (!plateau) {
    out.error = "no rank plateau found in the scanned rho range";
    return out;
  }
  out.plateau_rank = plateau->rank;

  RcsProblem prob = make_problem(ctx, corr, enforce_alpha);
  SolveState state = SolveState{};
  SolveResult last;
  bool have_last = false;
  auto rank_at = [&](double rho) {
    prob.rho = rho;
    SolveResult res = solve(prob, ctx.cfg.solver, ctx.cfg.warm_start && state.valid ? &state : nullptr);
    if (ctx.cfg.warm_start) state = res.state;
    last = res;
    have_last = true;
    return res.numerical_rank;
  };
  // Warm start the bisection from the plateau edge; rank_at(hi) re-solves
  // there first, which also seeds the state.
  double lo = grid[static_cast<size_t>(plateau->begin - 1)];
  double hi = grid[static_cast<size_t>(plateau->begin)];
  double rho_star;
  try {
    rho_star = bisect_transition(rank_at, lo, hi, plateau->rank);
  } catch (const std::invalid_argument& e) {
    out.error = e.what();
    return out;
  }
  if (!have_last || last.numerical_rank != plateau->rank) rank_at(rho_star);
  out.ok = true;
  out.rho_star = rho_star;
  out.result = last;
  out.record = make_record(ctx, stage, rho_star, corr, last, 0.0);
  return out;
}

namespace {

// Initial-estimator stages are scanned only up to the data scale: beyond it
// the fit is heavily over-regularized and never the pick_initial choice.
ExperimentContext capped_initial_ctx(const ExperimentContext& ctx) {
  ExperimentContext capped = ctx;
  capped.cfg.rho_max_factor = std::min(ctx.cfg.rho_max_factor, 1.0);
  capped.cfg.rho_min_factor = std::min(ctx.cfg.rho_min_factor, capped.cfg.rho_max_factor);
  return capped;
}

}  // namespace

SweepOutput run_sweep(const ExperimentContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  SweepOutput out;
  std::vector<double> grid = rho_grid(ctx, cfg.rho_points);
  CorrectionMatrix none = CorrectionMatrix::none(ctx.basis->space());
  StageOutcome nn = solve_stage(ctx, "nnpls", none,
                                cfg.estimator == "rcs" ? rho_grid(capped_initial_ctx(ctx), cfg.rho_points) : grid);
  int picked = pick_initial(nn.records, cfg.q_target);
  out.records = nn.records;
  out.results = nn.results;
  out.picked = picked;
  if (cfg.estimator == "rcs") {
    Mat x_tilde = nn.results[static_cast<size_t>(picked)].X_hat;
    CorrectionMatrix corr = make_correction(ctx, cfg.correction, x_tilde, cfg.gamma);
    StageOutcome rc = solve_stage(ctx, "rcs", corr, grid);
    out.picked = static_cast<int>(out.records.size()) + pick_initial(rc.records, cfg.q_target);
    out.records.insert(out.records.end(), rc.records.begin(), rc.records.end());
    out.results.insert(out.results.end(), std::make_move_iterator(rc.results.begin()),
                       std::make_move_iterator(rc.results.end()));
  }
  for (const RunRecord& r : out.records)
    if (!r.solver_ok) out.any_solver_failure = true;
  return out;
}

ChainOutput run_chain(const ExperimentContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  ChainOutput out;
  CorrectionMatrix none = CorrectionMatrix::none(ctx.basis->space());
  std::vector<double> grid = rho_grid(capped_initial_ctx(ctx), cfg.rho_points);
  Mat x_tilde;

  if (cfg.kind == GenKind::Density) {
    StageOutcome nn1 = solve_stage(ctx, "nnpls1", none, grid, /*enforce_alpha=*/false);
    int p = pick_initial(nn1.records, cfg.q_target);
    out.records.push_back(nn1.records[static_cast<size_t>(p)]);
    out.estimates.push_back(nn1.results[static_cast<size_t>(p)].X_hat);
    const Mat& X1 = out.estimates.back();
    double tr = X1.real().trace();
    if (!(tr > 0)) {
      out.any_solver_failure = true;
      return out;
    }
    Mat X2 = X1 / tr;
    RunRecord rec2 = out.records.back();
    rec2.stage = "nnpls2";
    rec2.relerr = relerr(X2, ctx.truth.Xbar);
    rec2.fidelity = fidelity(X2, ctx.truth.Xbar);
    rec2.iterations = 0;
    rec2.seconds = 0.0;
    rec2.objective = 0.0;
    out.records.push_back(rec2);
    out.estimates.push_back(X2);
    x_tilde = std::move(X2);
  } else {
    StageOutcome nn = solve_stage(ctx, "nnpls", none, grid);
    int p = pick_initial(nn.records, cfg.q_target);
    out.records.push_back(nn.records[static_cast<size_t>(p)]);
    out.estimates.push_back(nn.results[static_cast<size_t>(p)].X_hat);
    x_tilde = out.estimates.back();
  }

  std::vector<double> coarse = rho_grid(ctx, cfg.chain_rho_points);
  for (int s = 1; s <= cfg.chain_steps; ++s) {
    CorrectionMatrix corr = make_correction(ctx, cfg.correction, x_tilde, cfg.gamma);
    BisectOutcome bo = bisect_rho(ctx, "rcs" + std::to_string(s), corr, coarse);
    if (!bo.ok) {
      out.any_solver_failure = true;
      RunRecord fail;
      fail.stage = "rcs" + std::to_string(s);
      fail.solver_ok = false;
      out.records.push_back(fail);
      return out;
    }
    out.records.push_back(bo.record);
    out.estimates.push_back(bo.result.X_hat);
    x_tilde = bo.result.X_hat;
    if (!bo.record.solver_ok) out.any_solver_failure = true;
  }
  return out;
}

CertifyOutput certify(const ExperimentContext& ctx) {
  CertifyOutput out;
  if (ctx.cfg.correction == "zero")
    out.fn = RankCorrectionFn::zero();
  else if (ctx.cfg.correction == "phi")
    out.fn = RankCorrectionFn::phi_family(ctx.cfg.tau, ctx.cfg.eps);
  else
    out.fn = RankCorrectionFn::known_rank(ctx.truth.r);
  out.report = check_consistency_psd(ctx.truth.Xbar, ctx.truth.r, *ctx.scheme, out.fn);
  return out;
}

void write_records_csv(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "stage,rho,gamma,relerr,rank,fidelity,a_m,b_m,iterations,seconds\n";
  for (const RunRecord& r : records) {
    os << r.stage << "," << format_double(r.rho) << "," << format_double(r.gamma) << ","
       << format_double(r.relerr) << "," << r.rank << ","
       << (std::isnan(r.fidelity) ? std::string() : format_double(r.fidelity)) << "," << format_double(r.am)
       << "," << format_double(r.bm) << "," << r.iterations << "," << format_double(r.seconds) << "\n";
  }
}

std::vector<RunRecord> read_records_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open " + path);
  std::vector<RunRecord> out;
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (trim(line).empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    RunRecord r;
    std::getline(ss, r.stage, ',');
    std::getline(ss, tok, ',');
    r.rho = std::stod(tok);
    std::getline(ss, tok, ',');
    r.gamma = std::stod(tok);
    std::getline(ss, tok, ',');
    r.relerr = std::stod(tok);
    std::getline(ss, tok, ',');
    r.rank = std::stoi(tok);
    std::getline(ss, tok, ',');
    r.fidelity = tok.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(tok);
    std::getline(ss, tok, ',');
    r.am = std::stod(tok);
    std::getline(ss, tok, ',');
    r.bm = std::stod(tok);
    std::getline(ss, tok, ',');
    r.iterations = std::stoi(tok);
    std::getline(ss, tok, ',');
    r.seconds = std::stod(tok);
    out.push_back(std::move(r));
  }
  return out;
}

void write_curves_csv(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "rho,relerr,rank,residual_ratio,objective\n";
  for (const RunRecord& r : records)
    os << format_double(r.rho) << "," << format_double(r.relerr) << "," << r.rank << ","
       << format_double(r.residual_ratio) << "," << format_double(r.objective) << "\n";
}

void write_markdown(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "| stage | rho | gamma | relerr | rank | fidelity | a_m | b_m | iterations | seconds |\n";
  os << "|---|---|---|---|---|---|---|---|---|---|\n";
  char buf[64];
  auto g4 = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return std::string(buf);
  };
  for (const RunRecord& r : records) {
    os << "| " << r.stage << " | " << g4(r.rho) << " | " << g4(r.gamma) << " | " << g4(r.relerr) << " | "
       << r.rank << " | " << (std::isnan(r.fidelity) ? std::string("-") : g4(r.fidelity)) << " | " << g4(r.am)
       << " | " << g4(r.bm) << " | " << r.iterations << " | " << g4(r.seconds) << " |\n";
  }
}

void write_charts(const std::string& out_dir, const std::string& tag, const std::vector<RunRecord>& records) {
  std::vector<std::string> stages;
  for (const RunRecord& r : records)
    if (std::find(stages.begin(), stages.end(), r.stage) == stages.end()) stages.push_back(r.stage);
  const char* colors[] = {"#1f6fb2", "#c23b22", "#2c8c4b", "#8055a5", "#c88c1e", "#3aa6a6"};
  SvgChart err_chart, rank_chart;
  err_chart.title = tag + ": relative error vs rho";
  err_chart.x_label = "rho";
  err_chart.y_label = "relerr";
  err_chart.log_y = true;
  rank_chart.title = tag + ": rank vs rho";
  rank_chart.x_label = "rho";
  rank_chart.y_label = "rank";
  int ci = 0;
  for (const std::string& st : stages) {
    SvgSeries es, rs;
    es.label = rs.label = st;
    es.color = rs.color = colors[ci % 6];
    ++ci;
    for (const RunRecord& r : records)
      if (r.stage == st) {
        es.x.push_back(r.rho);
        es.y.push_back(r.relerr);
        rs.x.push_back(r.rho);
        rs.y.push_back(static_cast<double>(r.rank));
      }
    err_chart.series.push_back(std::move(es));
    rank_chart.series.push_back(std::move(rs));
  }
  err_chart.save(out_dir + "/" + tag + "_relerr.svg");
  rank_chart.save(out_dir + "/" + tag + "_rank.svg");
}

}  // namespace rcmc
