#include "mpca/sampling.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mpca/error.hpp"

namespace mpca {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& s, const std::string& label) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw InputError("cannot parse number '" + s + "' in distribution '" + label + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double default_skew_sigma(double dof) { return dof > 2.0 ? std::sqrt(dof / (dof - 2.0)) : 1.0; }

void require_count(std::size_t n) {
  if (n > (std::size_t{1} << 40)) throw InputError("sample size too large");
}

}  // namespace

std::uint64_t mix_seed(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6A09E667F3BCC909ULL;
  for (auto w : words) h = splitmix64(h ^ splitmix64(w));
  return h;
}

double Rng::uniform() {
  for (;;) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double Rng::normal() {
  if (spare_normal_) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  // Marsaglia polar method.
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s >= 1.0 || s == 0.0) continue;
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * f;
    return u * f;
  }
}

double Rng::exponential() { return -std::log(uniform()); }

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw InputError("gamma shape must be positive");
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::student_t(double dof) {
  if (!(dof > 0.0)) throw InputError("t degrees of freedom must be positive");
  const double z = normal();
  const double chi2 = 2.0 * gamma(0.5 * dof);
  return z / std::sqrt(chi2 / dof);
}

void validate(const NoiseDistribution& d) {
  std::visit(
      [](const auto& dist) {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, StudentT>) {
          if (!(dist.dof > 0.0)) throw InputError("t: degrees of freedom must be positive");
        } else if constexpr (std::is_same_v<T, SkewedT>) {
          if (!(dist.dof > 0.0)) throw InputError("skewed t: degrees of freedom must be positive");
          if (!(dist.sigma > 0.0)) throw InputError("skewed t: sigma must be positive");
          if (!(dist.skew > 0.0)) throw InputError("skewed t: skew must be positive");
        } else if constexpr (std::is_same_v<T, AlphaStable>) {
          if (!(dist.alpha > 0.0 && dist.alpha <= 2.0)) {
            throw InputError("stable: alpha must lie in (0, 2]");
          }
          if (!(std::abs(dist.beta) <= 1.0)) throw InputError("stable: beta must lie in [-1, 1]");
        }
      },
      d);
}

std::string to_string(const NoiseDistribution& d) {
  return std::visit(
      [](const auto& dist) -> std::string {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return "gaussian";
        } else if constexpr (std::is_same_v<T, StudentT>) {
          return "t" + shortest(dist.dof);
        } else if constexpr (std::is_same_v<T, SkewedT>) {
          std::string s = "skewed-t" + shortest(dist.dof);
          if (dist.sigma != default_skew_sigma(dist.dof) || dist.skew != 2.0) {
            s += ":" + shortest(dist.sigma) + ":" + shortest(dist.skew);
          }
          return s;
        } else {
          std::string s = "stable" + shortest(dist.alpha);
          if (dist.beta != 0.0) s += ":" + shortest(dist.beta);
          return s;
        }
      },
      d);
}

NoiseDistribution parse_distribution(const std::string& label) {
  NoiseDistribution out;
  if (label == "gaussian" || label == "normal") {
    out = Gaussian{};
  } else if (label == "alpha-stable") {
    out = AlphaStable{1.8, 0.0};
  } else if (label.rfind("skewed-t", 0) == 0) {
    auto parts = split(label.substr(8), ':');
    if (parts.size() != 1 && parts.size() != 3) {
      throw InputError("skewed t label must be skewed-t<v> or skewed-t<v>:<sigma>:<skew>");
    }
    SkewedT s;
    s.dof = parse_number(parts[0], label);
    s.sigma = default_skew_sigma(s.dof);
    s.skew = 2.0;
    if (parts.size() == 3) {
      s.sigma = parse_number(parts[1], label);
      s.skew = parse_number(parts[2], label);
    }
    out = s;
  } else if (label.rfind("stable", 0) == 0) {
    auto parts = split(label.substr(6), ':');
    if (parts.size() > 2) throw InputError("stable label must be stable<alpha>[:beta]");
    AlphaStable s;
    s.alpha = parse_number(parts[0], label);
    s.beta = parts.size() == 2 ? parse_number(parts[1], label) : 0.0;
    out = s;
  } else if (label.size() > 1 && label[0] == 't') {
    out = StudentT{parse_number(label.substr(1), label)};
  } else {
    throw InputError("unknown noise distribution '" + label + "'");
  }
  validate(out);
  return out;
}

double draw_alpha_stable(double alpha, double beta, Rng& rng) {
  // Chambers–Mallows–Stuck transform of V ~ U(−π/2, π/2) and W ~ Exp(1).
  const double v = kPi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  if (alpha == 1.0) {
    const double a = 0.5 * kPi + beta * v;
    return (2.0 / kPi) * (a * std::tan(v) - beta * std::log(0.5 * kPi * w * std::cos(v) / a));
  }
  const double zeta = beta * std::tan(0.5 * kPi * alpha);
  const double b = std::atan(zeta) / alpha;
  const double s = std::pow(1.0 + zeta * zeta, 1.0 / (2.0 * alpha));
  const double av = alpha * (v + b);
  return s * std::sin(av) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos(v - av) / w, (1.0 - alpha) / alpha);
}

double draw_skewed_t(double dof, double sigma, double skew, Rng& rng) {
  const double magnitude = std::abs(rng.student_t(dof));
  const double positive_mass = skew * skew / (1.0 + skew * skew);
  const double side = rng.uniform() < positive_mass ? skew : -1.0 / skew;
  return sigma * side * magnitude;
}

std::vector<double> sample_alpha_stable(double alpha, double beta, std::size_t n, Rng& rng) {
  validate(NoiseDistribution{AlphaStable{alpha, beta}});
  require_count(n);
  std::vector<double> out(n);
  for (auto& x : out) x = draw_alpha_stable(alpha, beta, rng);
  return out;
}

std::vector<double> sample_skewed_t(double dof, double sigma, double skew, std::size_t n, Rng& rng) {
  validate(NoiseDistribution{SkewedT{dof, sigma, skew}});
  require_count(n);
  std::vector<double> out(n);
  for (auto& x : out) x = draw_skewed_t(dof, sigma, skew, rng);
  return out;
}

std::pair<double, double> skewed_t_moments(double dof, double skew) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!(dof > 1.0)) return {nan, nan};
  // E|T| for T ~ t_v.
  const double abs_mean = 2.0 * std::sqrt(dof) *
                          std::exp(std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof)) /
                          (std::sqrt(kPi) * (dof - 1.0));
  const double mean = abs_mean * (skew - 1.0 / skew);
  if (!(dof > 2.0)) return {mean, nan};
  const double second = dof / (dof - 2.0) * (skew * skew * skew * skew - skew * skew + 1.0) /
                        (skew * skew);
  return {mean, std::sqrt(second - mean * mean)};
}

double draw_noise(const NoiseDistribution& d, Rng& rng) {
  return std::visit(
      [&rng](const auto& dist) -> double {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return rng.normal();
        } else if constexpr (std::is_same_v<T, StudentT>) {
          return rng.student_t(dist.dof);
        } else if constexpr (std::is_same_v<T, SkewedT>) {
          const auto [mean, sd] = skewed_t_moments(dist.dof, dist.skew);
          double x = draw_skewed_t(dist.dof, 1.0, dist.skew, rng);
          if (std::isfinite(mean)) x -= mean;
          if (std::isfinite(sd)) x /= sd;
          return dist.sigma * x;
        } else {
          return draw_alpha_stable(dist.alpha, dist.beta, rng);
        }
      },
      d);
}

Matrix symmetric_sqrt(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("symmetric_sqrt: matrix is not square");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()));
  if (solver.info() != Eigen::Success) throw DegenerateError("symmetric_sqrt: eigensolver failed");
  if (solver.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, solver.eigenvalues().maxCoeff())) {
    throw InputError("symmetric_sqrt: matrix is not positive semidefinite");
  }
  const Vector root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().transpose();
}

NoiseCovariances build_noise_covs(Index p, Index q) {
  if (p < 1 || q < 1) throw InputError("build_noise_covs: dimensions must be positive");
  auto make = [](Index n) {
    Matrix m = Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
    m.diagonal().setOnes();
    return m;
  };
  NoiseCovariances out;
  out.omega1 = make(p);
  out.omega2 = make(q);
  out.sqrt1 = symmetric_sqrt(out.omega1);
  out.sqrt2 = symmetric_sqrt(out.omega2);
  return out;
}

Index SimulationConfig::sample_size() const {
  if (T) return *T;
  return static_cast<Index>(std::floor(3.0 * std::sqrt(static_cast<double>(p * q))));
}

void validate(const SimulationConfig& cfg) {
  if (cfg.p < 1 || cfg.q < 1) throw InputError("p and q must be positive");
  validate_ranks(Ranks{cfg.p0, cfg.q0}, cfg.p, cfg.q);
  if (cfg.sample_size() < 1) throw InputError("T must be at least 1");
  if (!(cfg.phi >= 0.0 && cfg.phi < 1.0)) throw InputError("phi must lie in [0, 1)");
  if (!(cfg.psi >= 0.0 && cfg.psi < 1.0)) throw InputError("psi must lie in [0, 1)");
  if (!(cfg.s_e >= 0.0) || !std::isfinite(cfg.s_e)) throw InputError("s_E must be nonnegative");
  if (cfg.gamma && !(std::isfinite(*cfg.gamma) && *cfg.gamma > 0.0)) {
    throw InputError("gamma must be positive");
  }
  if (cfg.burn_in < 0) throw InputError("burn-in must be nonnegative");
  validate(cfg.dist);
}

double auto_gamma(const NoiseDistribution& d, Index p, Index q) {
  if (const auto* t = std::get_if<StudentT>(&d); t && t->dof <= 1.0) {
    return 1.0 / std::sqrt(static_cast<double>(p * q));
  }
  return std::sqrt(static_cast<double>(std::min(p, q)));
}

SimulatedData gen_dataset(const SimulationConfig& cfg) {
  validate(cfg);
  const Index p = cfg.p;
  const Index q = cfg.q;
  const Index T = cfg.sample_size();
  const double gamma = cfg.gamma.value_or(auto_gamma(cfg.dist, p, q));

  Rng loading_rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(StreamTag::loadings));
  Rng factor_rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(StreamTag::factors));
  Rng noise_rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(StreamTag::noise));

  auto gaussian_matrix = [](Index rows, Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
  };

  GroundTruth truth;
  truth.r = gaussian_matrix(p, cfg.p0, loading_rng);
  truth.c = gaussian_matrix(q, cfg.q0, loading_rng);

  Matrix sqrt1;
  Matrix sqrt2;
  if (cfg.spherical_noise) {
    sqrt1 = Matrix::Identity(p, p);
    sqrt2 = Matrix::Identity(q, q);
  } else {
    auto covs = build_noise_covs(p, q);
    sqrt1 = std::move(covs.sqrt1);
    sqrt2 = std::move(covs.sqrt2);
  }

  const double noise_scale = cfg.s_e * gamma;
  auto draw_noise_matrix = [&]() {
    Matrix w(p, q);
    for (Index j = 0; j < q; ++j)
      for (Index i = 0; i < p; ++i) w(i, j) = draw_noise(cfg.dist, noise_rng);
    return Matrix(noise_scale * (sqrt1 * w * sqrt2));
  };

  const double f_innov = std::sqrt(1.0 - cfg.phi * cfg.phi);
  const double e_innov = std::sqrt(1.0 - cfg.psi * cfg.psi);

  // Stationary Gaussian start for the factors; the noise starts from one draw.
  Matrix f = gaussian_matrix(cfg.p0, cfg.q0, factor_rng);
  Matrix e = draw_noise_matrix();

  truth.f.reserve(static_cast<std::size_t>(T));
  truth.s.reserve(static_cast<std::size_t>(T));
  truth.e.reserve(static_cast<std::size_t>(T));
  std::vector<Matrix> xs;
  xs.reserve(static_cast<std::size_t>(T));

  for (Index step = 1; step <= cfg.burn_in + T; ++step) {
    f = cfg.phi * f + f_innov * gaussian_matrix(cfg.p0, cfg.q0, factor_rng);
    e = cfg.psi * e + e_innov * draw_noise_matrix();
    if (step <= cfg.burn_in) continue;
    Matrix s = truth.r * f * truth.c.transpose();
    xs.push_back(s + e);
    truth.f.push_back(f);
    truth.s.push_back(std::move(s));
    truth.e.push_back(e);
  }
  for (const auto& x : xs) {
    if (!x.allFinite()) throw InputError("generated observation overflowed to a non-finite value");
  }
  return {ObservationSet(std::move(xs)), std::move(truth)};
}

}  // namespace mpca
