#include "rcmc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace rcmc {

SamplingScheme::SamplingScheme(BasisPtr b, Vec probabilities) : basis(std::move(b)), p(std::move(probabilities)) {
  if (!basis) throw std::invalid_argument("SamplingScheme: null basis");
  if (basis->d2() == 0) throw std::invalid_argument("SamplingScheme: empty beta set");
  if (p.size() != basis->dim()) throw std::invalid_argument("SamplingScheme: probability length mismatch");
  double sum = 0.0;
  double first = p[basis->d1()];
  uniform = true;
  for (int k = 0; k < basis->dim(); ++k) {
    if (basis->in_alpha(k)) {
      if (p[k] != 0.0) throw std::invalid_argument("SamplingScheme: probability must vanish on alpha");
    } else {
      if (!(p[k] > 0.0)) throw std::invalid_argument("SamplingScheme: nonpositive probability");
      if (p[k] != first) uniform = false;
      sum += p[k];
    }
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("SamplingScheme: probabilities must sum to one");
}

SamplingScheme SamplingScheme::make_uniform(BasisPtr b) {
  if (!b) throw std::invalid_argument("null basis");
  Vec p = Vec::Zero(b->dim());
  const int d2 = b->d2();
  if (d2 == 0) throw std::invalid_argument("empty beta set");
  for (int k = b->d1(); k < b->dim(); ++k) p[k] = 1.0 / d2;
  return SamplingScheme(std::move(b), std::move(p));
}

Mat SamplingScheme::q_beta(const Mat& X) const {
  if (uniform) return basis->project_beta(X) / static_cast<double>(basis->d2());
  return basis->q_beta(p, X, false);
}

Mat SamplingScheme::q_beta_dagger(const Mat& X) const {
  if (uniform) return static_cast<double>(basis->d2()) * basis->project_beta(X);
  return basis->q_beta(p, X, true);
}

void SampleSet::rebuild_aggregates() {
  std::map<int, int> counts;
  for (int k : omega) ++counts[k];
  observed.clear();
  multiplicity.clear();
  observed.reserve(counts.size());
  multiplicity.reserve(counts.size());
  for (auto [k, c] : counts) {
    observed.push_back(k);
    multiplicity.push_back(c);
  }
}

SampleSet sample_indices(const SamplingScheme& scheme, int m, std::uint64_t rng_seed) {
  if (m < 1) throw std::invalid_argument("sample_indices: m must be at least 1");
  const BasisSystem& basis = *scheme.basis;
  const int d = basis.dim();
  const int d1 = basis.d1();
  SampleSet s;
  s.omega.reserve(static_cast<size_t>(m));
  Rng rng(rng_seed);
  if (scheme.uniform) {
    const int d2 = basis.d2();
    for (int i = 0; i < m; ++i) s.omega.push_back(d1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(d2))));
  } else {
    Vec cdf(d - d1);
    double acc = 0.0;
    for (int k = d1; k < d; ++k) {
      acc += scheme.p[k];
      cdf[k - d1] = acc;
    }
    for (int i = 0; i < m; ++i) {
      double u = rng.uniform() * acc;
      const double* begin = cdf.data();
      const double* it = std::lower_bound(begin, begin + cdf.size(), u);
      int idx = static_cast<int>(it - begin);
      if (idx >= cdf.size()) idx = static_cast<int>(cdf.size()) - 1;
      s.omega.push_back(d1 + idx);
    }
  }
  s.rebuild_aggregates();
  return s;
}

void ObservationSet::rebuild_aggregates() {
  samples.rebuild_aggregates();
  sums.assign(samples.observed.size(), 0.0);
  y_sqsum = 0.0;
  for (int i = 0; i < samples.m(); ++i) {
    int k = samples.omega[static_cast<size_t>(i)];
    auto it = std::lower_bound(samples.observed.begin(), samples.observed.end(), k);
    sums[static_cast<size_t>(it - samples.observed.begin())] += y[i];
    y_sqsum += y[i] * y[i];
  }
}

std::string to_string(NoiseKind kind) {
  return kind == NoiseKind::Gaussian ? "gaussian" : "custom-subexponential";
}

ObservationSet observe(const BasisSystem& basis, const Mat& Xbar, const SampleSet& samples, double nu,
                       NoiseKind kind, std::uint64_t rng_seed, const NoiseGenerator& custom) {
  if (nu < 0) throw std::invalid_argument("observe: negative noise magnitude");
  if (kind == NoiseKind::CustomSubexponential && !custom)
    throw std::invalid_argument("observe: custom noise kind requires a generator");
  basis.space().check_member(Xbar);
  ObservationSet obs;
  obs.samples = samples;
  obs.nu = nu;
  obs.noise_kind = kind;
  obs.seed = rng_seed;
  const int m = samples.m();
  obs.y.resize(m);
  Rng rng(rng_seed);
  for (int i = 0; i < m; ++i) {
    double clean = basis.coeff(Xbar, samples.omega[static_cast<size_t>(i)]);
    double xi = nu > 0 ? (kind == NoiseKind::Gaussian ? rng.gaussian() : custom(rng)) : 0.0;
    obs.y[i] = clean + nu * xi;
  }
  obs.rebuild_aggregates();
  return obs;
}

ObservationSet observe_with_level(const BasisSystem& basis, const Mat& Xbar, const SampleSet& samples,
                                  double level, NoiseKind kind, std::uint64_t rng_seed,
                                  const NoiseGenerator& custom) {
  if (level < 0) throw std::invalid_argument("observe_with_level: negative level");
  const int m = samples.m();
  Vec clean(m);
  for (int i = 0; i < m; ++i) clean[i] = basis.coeff(Xbar, samples.omega[static_cast<size_t>(i)]);
  Vec xi(m);
  Rng rng(rng_seed);
  for (int i = 0; i < m; ++i) xi[i] = kind == NoiseKind::Gaussian ? rng.gaussian() : custom(rng);
  double xi_norm = xi.norm();
  double nu = (level > 0 && xi_norm > 0) ? level * clean.norm() / xi_norm : 0.0;
  ObservationSet obs;
  obs.samples = samples;
  obs.nu = nu;
  obs.noise_kind = kind;
  obs.seed = rng_seed;
  obs.y = clean + nu * xi;
  obs.rebuild_aggregates();
  return obs;
}

Vec apply_sampling(const BasisSystem& basis, const Mat& X, const SampleSet& samples) {
  basis.space().check_member(X);
  Vec out(samples.m());
  for (int i = 0; i < samples.m(); ++i) out[i] = basis.coeff(X, samples.omega[static_cast<size_t>(i)]);
  return out;
}

Mat adjoint_sampling(const BasisSystem& basis, const Vec& v, const SampleSet& samples) {
  if (v.size() != samples.m()) throw std::invalid_argument("adjoint_sampling: length mismatch");
  Mat X = basis.space().zero();
  for (int i = 0; i < samples.m(); ++i) basis.axpy(v[i], samples.omega[static_cast<size_t>(i)], X);
  return X;
}

Mat depolarize(const Mat& Xbar, double strength) {
  if (strength < 0 || strength > 1) throw std::invalid_argument("depolarize: strength outside [0,1]");
  if (Xbar.rows() != Xbar.cols()) throw std::invalid_argument("depolarize: matrix must be square");
  const int n = static_cast<int>(Xbar.rows());
  return (1.0 - strength) * Xbar + (strength / n) * Mat::Identity(n, n);
}

void write_observations_csv(std::ostream& os, const ObservationSet& obs) {
  char buf[64];
  os << "# m=" << obs.samples.m() << "\n";
  std::snprintf(buf, sizeof(buf), "%.17g", obs.nu);
  os << "# nu=" << buf << "\n";
  os << "# seed=" << obs.seed << "\n";
  os << "# noise_kind=" << to_string(obs.noise_kind) << "\n";
  os << "sample_index,basis_index,y_value\n";
  for (int i = 0; i < obs.samples.m(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", obs.y[i]);
    os << i << "," << obs.samples.omega[static_cast<size_t>(i)] << "," << buf << "\n";
  }
}

ObservationSet read_observations_csv(std::istream& is) {
  ObservationSet obs;
  std::string line;
  std::vector<int> indices;
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(2, eq - 2);
      std::string val = line.substr(eq + 1);
      if (key == "nu") obs.nu = std::stod(val);
      else if (key == "seed") obs.seed = std::stoull(val);
      else if (key == "noise_kind")
        obs.noise_kind = val == "gaussian" ? NoiseKind::Gaussian : NoiseKind::CustomSubexponential;
      continue;
    }
    if (line.rfind("sample_index", 0) == 0) continue;
    std::istringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');
    std::getline(ss, tok, ',');
    indices.push_back(std::stoi(tok));
    std::getline(ss, tok, ',');
    values.push_back(std::stod(tok));
  }
  obs.samples.omega = std::move(indices);
  obs.y = Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
  obs.rebuild_aggregates();
  return obs;
}

}  // namespace rcmc
