#pragma once

// Heavy-tailed noise samplers and the simulation data-generating process.
//
// Random streams are std::mt19937_64 engines seeded through a SplitMix64 hash
// of (seed, stream tag). All continuous transforms are written out here rather
// than taken from <random>, whose distributions are implementation-defined, so
// that a given seed produces the same draws with any conforming standard library.

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mpca/linalg.hpp"
#include "mpca/model.hpp"

namespace mpca {

/// SplitMix64 finalizer chained over the given words.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> words);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Independent stream for (seed, tag).
  static Rng stream(std::uint64_t seed, std::uint64_t tag) { return Rng(mix_seed({seed, tag})); }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double exponential();
  /// Gamma(shape, scale = 1), Marsaglia–Tsang.
  double gamma(double shape);
  double student_t(double dof);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

struct Gaussian {};
struct StudentT {
  double dof = 3.0;
};
/// Fernández–Steel skewed t: ±|t_v| with sides scaled by skew and 1/skew.
struct SkewedT {
  double dof = 3.0;
  double sigma = 1.0;
  double skew = 1.0;
};
/// Stable law S(alpha, beta; 1) with unit scale and zero location.
struct AlphaStable {
  double alpha = 1.8;
  double beta = 0.0;
};

using NoiseDistribution = std::variant<Gaussian, StudentT, SkewedT, AlphaStable>;

/// Throws InputError on out-of-range parameters.
void validate(const NoiseDistribution& d);

/// Canonical label, e.g. "gaussian", "t3", "skewed-t3", "stable1.8".
std::string to_string(const NoiseDistribution& d);

/// Parses labels produced by to_string plus the aliases
/// "gaussian", "t<v>", "skewed-t<v>[:sigma:skew]", "alpha-stable",
/// "stable<alpha>[:beta]". For "skewed-t<v>" the defaults are the
/// standard deviation of t_v (sigma) and skew = 2.
NoiseDistribution parse_distribution(const std::string& label);

double draw_alpha_stable(double alpha, double beta, Rng& rng);
double draw_skewed_t(double dof, double sigma, double skew, Rng& rng);

std::vector<double> sample_alpha_stable(double alpha, double beta, std::size_t n, Rng& rng);
std::vector<double> sample_skewed_t(double dof, double sigma, double skew, std::size_t n, Rng& rng);

/// Mean and standard deviation of the unstandardized Fernández–Steel law
/// (sigma = 1). The mean needs dof > 1, the deviation dof > 2; otherwise NaN.
std::pair<double, double> skewed_t_moments(double dof, double skew);

/// One noise draw as used by the data-generating process. Skewed t draws are
/// centred and rescaled to standard deviation sigma when those moments exist.
double draw_noise(const NoiseDistribution& d, Rng& rng);

struct NoiseCovariances {
  Matrix omega1;  // p×p: ones on the diagonal, 1/p off it
  Matrix omega2;  // q×q: ones on the diagonal, 1/q off it
  Matrix sqrt1;   // symmetric square roots
  Matrix sqrt2;
};

NoiseCovariances build_noise_covs(Index p, Index q);

/// Symmetric positive semidefinite square root via eigendecomposition.
Matrix symmetric_sqrt(const Matrix& m);

struct SimulationConfig {
  Index p = 20;
  Index q = 20;
  Index p0 = 3;
  Index q0 = 3;
  std::optional<Index> T;       // default ⌊3 (pq)^{1/2}⌋
  double phi = 0.1;             // factor AR(1) coefficient
  double psi = 0.1;             // noise AR(1) coefficient
  double s_e = 1.0;             // noise scale
  NoiseDistribution dist = Gaussian{};
  std::optional<double> gamma;  // default: automatic rule
  bool spherical_noise = false; // Ω₁ = I, Ω₂ = I instead of the default construction
  Index burn_in = 100;
  std::uint64_t seed = 0;

  Index sample_size() const;
};

/// Throws InputError on invalid configurations.
void validate(const SimulationConfig& cfg);

/// (p∧q)^{1/2}, except (pq)^{-1/2} for Student t with dof ≤ 1.
double auto_gamma(const NoiseDistribution& d, Index p, Index q);

struct SimulatedData {
  ObservationSet observations;
  GroundTruth truth;
};

/// X_t = R F_t Cᵀ + E_t with AR(1) factors and noise after a burn-in period.
SimulatedData gen_dataset(const SimulationConfig& cfg);

/// Stream tags used by gen_dataset.
enum class StreamTag : std::uint64_t { loadings = 1, factors = 2, noise = 3 };

}  // namespace mpca
