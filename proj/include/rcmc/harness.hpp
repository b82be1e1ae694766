#pragma once

#include "rcmc/datagen.hpp"
#include "rcmc/diagnostics.hpp"
#include "rcmc/sampling.hpp"
#include "rcmc/solver.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rcmc {

/// One experiment description: generator, sampling, noise, estimator chain,
/// rho rule and solver knobs. Parsed from a key=value config file with CLI
/// overrides on top.
struct RunConfig {
  GenKind kind = GenKind::Correlation;
  int n = 100, r = 5, kboost = 1;
  double weight = 5.0;
  std::uint64_t seed = 1;

  double sample_ratio = 0.06;  // m = round(ratio * d2) unless m_override > 0
  int m_override = 0;
  double noise_level = 0.10;
  NoiseKind noise_kind = NoiseKind::Gaussian;
  double depolarize_strength = 0.0;

  int fix_diag = -1;  // -1 = all diagonal entries (correlation/covariance)
  int fix_offdiag = 0;

  std::string estimator = "nnpls";  // sweep: nnpls | rcs
  int chain_steps = 3;
  std::string correction = "phi";  // zero | phi | known_rank_initial | known_rank_truth
  double tau = 2.0, eps = 0.02;
  double gamma = 0.0;
  double kappa = 2.0;

  int rho_points = 40;
  double rho_min_factor = 1e-4, rho_max_factor = 1.0;
  int chain_rho_points = 16;  // coarse scan per chain stage
  double q_target = 0.1;      // pick_initial residual-ratio target
  std::optional<double> rho_fixed;
  std::optional<double> bound_c;

  SolverConfig solver;

  std::string out_dir = "out";
  bool svg = false;
  int threads = 1;
  bool timing = false;      // off by default so output files are bit-reproducible
  bool warm_start = true;
  bool expect_consistent = false;

  void validate() const;
};

RunConfig parse_config_file(const std::string& path);
void apply_key_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// One solve's summary row. `seconds` is zero unless timing was enabled.
struct RunRecord {
  std::string stage;
  double rho = 0.0;
  double gamma = 0.0;
  double relerr = 0.0;
  int rank = 0;
  double fidelity = std::numeric_limits<double>::quiet_NaN();  // density only
  double am = 1.0, bm = 1.0;
  int iterations = 0;
  double seconds = 0.0;
  double residual_ratio = 0.0;
  double objective = 0.0;
  bool solver_ok = true;
};

/// Everything assembled for one experiment instance (one seed).
struct ExperimentContext {
  RunConfig cfg;
  GroundTruth truth;
  BasisPtr basis;
  std::optional<SamplingScheme> scheme;
  ObservationSet obs;
  Vec fixed_values;  // R_alpha(Xbar)
  int m = 0;
  double rho_scale = 0.0;  // ||(1/m) R_Omega^*(y)||
  std::optional<TangentSpace> ts_truth;
  bool psd = true;
};

ExperimentContext build_context(const RunConfig& cfg);

std::vector<double> rho_grid(const ExperimentContext& ctx, int points);

CorrectionMatrix make_correction(const ExperimentContext& ctx, const std::string& kind, const Mat& x_tilde,
                                 double gamma);

struct StageOutcome {
  std::vector<RunRecord> records;     // ascending rho
  std::vector<SolveResult> results;   // parallel to records
};

/// Solve the stage on a rho grid (descending solve order with warm starts,
/// rows emitted ascending). `enforce_alpha` off drops the equality constraint
/// (the trace-free density baseline).
StageOutcome solve_stage(const ExperimentContext& ctx, const std::string& stage, const CorrectionMatrix& corr,
                         const std::vector<double>& grid, bool enforce_alpha = true);

/// Index of the row minimizing |residual_ratio - q|; ties take the smaller rho.
int pick_initial(const std::vector<RunRecord>& rows, double q = 0.1);

/// Smallest rho in [lo, hi] whose rank equals plateau_rank, to relative width
/// rel_width; requires rank(lo) != plateau_rank == rank(hi).
double bisect_transition(const std::function<int(double)>& rank_at, double lo, double hi, int plateau_rank,
                         double rel_width = 1e-2);

struct BisectOutcome {
  bool ok = false;
  std::string error;
  double rho_star = 0.0;
  int plateau_rank = 0;
  RunRecord record;
  SolveResult result;
};

/// Scan a coarse grid for the first (smallest-rho) rank plateau, then bisect
/// for the smallest rho on it.
BisectOutcome bisect_rho(const ExperimentContext& ctx, const std::string& stage, const CorrectionMatrix& corr,
                         const std::vector<double>& grid, bool enforce_alpha = true);

struct SweepOutput {
  std::vector<RunRecord> records;
  std::vector<SolveResult> results;
  int picked = -1;  // pick_initial row of the last estimator stage
  bool any_solver_failure = false;
};

SweepOutput run_sweep(const ExperimentContext& ctx);

struct ChainOutput {
  std::vector<RunRecord> records;  // one row per stage
  std::vector<Mat> estimates;      // parallel
  bool any_solver_failure = false;
};

ChainOutput run_chain(const ExperimentContext& ctx);

struct CertifyOutput {
  ConsistencyReport report;
  RankCorrectionFn fn;
};

CertifyOutput certify(const ExperimentContext& ctx);

/// records CSV (exact column schema), per-stage curve CSVs, optional SVG
/// charts and a markdown summary.
void write_records_csv(const std::string& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records_csv(const std::string& path);
void write_curves_csv(const std::string& path, const std::vector<RunRecord>& records);
void write_markdown(const std::string& path, const std::vector<RunRecord>& records);
void write_charts(const std::string& out_dir, const std::string& tag, const std::vector<RunRecord>& records);

std::string format_double(double v);

}  // namespace rcmc
