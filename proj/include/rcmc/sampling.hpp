#pragma once

#include "rcmc/basis.hpp"
#include "rcmc/rng.hpp"
#include "rcmc/types.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace rcmc {

/// Weighted sampling-with-replacement scheme over the free index set:
/// Pr(omega = k) = 0 on alpha and p_k > 0 on beta, sum p_k = 1.
struct SamplingScheme {
  BasisPtr basis;
  Vec p;           // over global indices
  bool uniform = false;

  SamplingScheme(BasisPtr b, Vec probabilities);
  static SamplingScheme make_uniform(BasisPtr b);

  Mat q_beta(const Mat& X) const;
  Mat q_beta_dagger(const Mat& X) const;
};

/// The sampled index multiset Omega, with per-index multiplicities.
struct SampleSet {
  std::vector<int> omega;         // global basis indices, repetitions kept
  std::vector<int> observed;      // sorted unique indices
  std::vector<int> multiplicity;  // parallel to observed

  int m() const { return static_cast<int>(omega.size()); }
  void rebuild_aggregates();
};

enum class NoiseKind { Gaussian, CustomSubexponential };

std::string to_string(NoiseKind kind);

/// Observations y = R_Omega(Xbar) + nu * xi, stored together with per-index
/// aggregates (multiplicities and observation sums) so that solver gradient
/// steps cost O(d2) instead of O(m).
struct ObservationSet {
  SampleSet samples;
  Vec y;
  double nu = 0.0;
  NoiseKind noise_kind = NoiseKind::Gaussian;
  std::uint64_t seed = 0;

  std::vector<double> sums;  // parallel to samples.observed
  double y_sqsum = 0.0;

  void rebuild_aggregates();
};

/// m i.i.d. draws from the scheme; deterministic for a fixed seed.
SampleSet sample_indices(const SamplingScheme& scheme, int m, std::uint64_t rng_seed);

/// Unit-variance noise generator; receives the Rng and returns one variate.
using NoiseGenerator = std::function<double(Rng&)>;

ObservationSet observe(const BasisSystem& basis, const Mat& Xbar, const SampleSet& samples, double nu,
                       NoiseKind kind, std::uint64_t rng_seed, const NoiseGenerator& custom = nullptr);

/// Observation at a prescribed relative noise level q: nu is calibrated from
/// the realized draw so that ||y - R_Omega(Xbar)||_2 / ||R_Omega(Xbar)||_2 = q.
ObservationSet observe_with_level(const BasisSystem& basis, const Mat& Xbar, const SampleSet& samples,
                                  double level, NoiseKind kind, std::uint64_t rng_seed,
                                  const NoiseGenerator& custom = nullptr);

/// R_Omega(X).
Vec apply_sampling(const BasisSystem& basis, const Mat& X, const SampleSet& samples);

/// R_Omega^*(v) = sum_i v_i Theta_{omega_i}.
Mat adjoint_sampling(const BasisSystem& basis, const Vec& v, const SampleSet& samples);

/// Depolarizing channel (1-p) X + p I/n on a density matrix.
Mat depolarize(const Mat& Xbar, double strength);

/// CSV with columns (sample_index, basis_index, y_value) and a metadata
/// header carrying m, nu, seed and the noise kind.
void write_observations_csv(std::ostream& os, const ObservationSet& obs);
ObservationSet read_observations_csv(std::istream& is);

}  // namespace rcmc
