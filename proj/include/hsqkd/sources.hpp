// SPDX-License-Identifier: Apache-2.0
//
// Photon-number statistics of multiplexed heralded single-photon sources.
//
// Covered architectures:
//   WCS    — attenuated laser, Poisson statistics with mean mu
//   IDEAL_SINGLE_PHOTON — exactly one photon per pulse
//   MHPS   — m heralded units, perfect detectors and m-to-1 switch
//   SMHPS  — m units (power of two) in a binary tree of 2-to-1 switches,
//            heralding efficiency eta, per-switch transmittance gamma
//   AMHPS  — m units in an asymmetric chain of 2-to-1 switches
//
// Every unit is pump-compensated so that the post-switch mean photon number
// per selected pulse is mu; the closed forms below are exact for threshold
// heralding detectors and independent per-photon switch losses.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hsqkd/errors.hpp"

namespace hsqkd {

enum class SourceKind { WCS, IdealSinglePhoton, MHPS, SMHPS, AMHPS };

inline const char* source_kind_name(SourceKind k) {
  switch (k) {
    case SourceKind::WCS: return "wcs";
    case SourceKind::IdealSinglePhoton: return "single_photon";
    case SourceKind::MHPS: return "mhps";
    case SourceKind::SMHPS: return "smhps";
    case SourceKind::AMHPS: return "amhps";
  }
  return "?";
}

/// Which source architecture plus its parameters. `mu` is the mean pair
/// number scale (mean photon number for WCS); `m` counts heralded-source
/// units; `eta` and `gamma` describe heralding detectors and 2-to-1 switches
/// and only apply to SMHPS/AMHPS.
struct SourceSpec {
  SourceKind kind = SourceKind::WCS;
  double mu = 0.0;
  int m = 1;
  double eta = 1.0;
  double gamma = 1.0;

  static SourceSpec wcs(double mu) { return {SourceKind::WCS, mu, 1, 1.0, 1.0}; }
  static SourceSpec ideal_single_photon() {
    return {SourceKind::IdealSinglePhoton, 0.0, 1, 1.0, 1.0};
  }
  static SourceSpec mhps(double mu, int m) { return {SourceKind::MHPS, mu, m, 1.0, 1.0}; }
  static SourceSpec smhps(double mu, int m, double eta, double gamma) {
    return {SourceKind::SMHPS, mu, m, eta, gamma};
  }
  static SourceSpec amhps(double mu, int m, double eta, double gamma) {
    return {SourceKind::AMHPS, mu, m, eta, gamma};
  }

  SourceSpec with_mu(double new_mu) const {
    SourceSpec s = *this;
    s.mu = new_mu;
    return s;
  }

  bool heralded() const {
    return kind == SourceKind::SMHPS || kind == SourceKind::AMHPS;
  }

  /// Tree depth log2(m); only meaningful for SMHPS.
  int tree_depth() const {
    int k = 0;
    while ((1 << k) < m) ++k;
    return k;
  }

  /// Number of switches crossed by unit i (1-based); AMHPS chain convention.
  int chain_depth(int i) const { return i <= m - 1 ? i : m - 1; }
};

/// A photon-number distribution truncated at n_max = probs.size() - 1,
/// together with a certified upper bound on the discarded tail mass.
struct PhotonStatistics {
  std::vector<double> probs;
  double tail_mass = 0.0;

  int n_max() const { return static_cast<int>(probs.size()) - 1; }
  double p(int n) const {
    return (n >= 0 && n < static_cast<int>(probs.size())) ? probs[static_cast<size_t>(n)] : 0.0;
  }
  double total() const {
    double s = 0.0;
    for (double v : probs) s += v;
    return s;
  }
};

/// Truncation control for pmf evaluation. The cut starts at
/// max(min_terms, mu + k_sigma*sqrt(mu)) and grows until the certified
/// Poisson-envelope tail drops below tail_tolerance.
struct TruncationPolicy {
  int min_terms = 50;
  double k_sigma = 12.0;
  double tail_tolerance = 1e-12;
  int max_terms = 4096;
};

enum class Branch { Click, NoClick };

inline const SourceSpec& validate(const SourceSpec& spec) {
  auto fail_range = [&](const std::string& what) -> const SourceSpec& {
    throw error(errc::invalid_range, what);
  };
  if (!(spec.mu >= 0.0) || !std::isfinite(spec.mu))
    fail_range("mu must be a finite nonnegative real");
  switch (spec.kind) {
    case SourceKind::WCS:
    case SourceKind::IdealSinglePhoton:
      break;
    case SourceKind::MHPS:
      if (spec.m < 1) throw error(errc::invalid_m, "MHPS requires m >= 1");
      break;
    case SourceKind::SMHPS: {
      if (spec.m < 1 || (spec.m & (spec.m - 1)) != 0)
        throw error(errc::invalid_m, "SMHPS requires m to be a power of 2");
      if (!(spec.eta >= 0.0 && spec.eta <= 1.0)) fail_range("eta must lie in [0,1]");
      if (!(spec.gamma > 0.0 && spec.gamma <= 1.0)) fail_range("gamma must lie in (0,1]");
      break;
    }
    case SourceKind::AMHPS: {
      if (spec.m < 2) throw error(errc::invalid_m, "AMHPS requires m >= 2");
      if (!(spec.eta >= 0.0 && spec.eta <= 1.0)) fail_range("eta must lie in [0,1]");
      if (!(spec.gamma > 0.0 && spec.gamma <= 1.0)) fail_range("gamma must lie in (0,1]");
      break;
    }
  }
  return spec;
}

namespace detail {

// Poisson pmf in log space; exact delta at lambda == 0.
inline double poisson_pmf(double lambda, int n) {
  if (lambda == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(-lambda + n * std::log(lambda) - std::lgamma(double(n) + 1.0));
}

// Certified upper bound on sum_{n > nmax} Poisson(lambda)_n via the
// geometric-ratio bound; returns 1 when the cut is below the mean.
inline double poisson_tail_bound(double lambda, int nmax) {
  if (lambda == 0.0) return 0.0;
  const double next = double(nmax) + 1.0;
  if (next + 1.0 <= lambda) return 1.0;
  const double head = poisson_pmf(lambda, nmax + 1);
  return head * (next + 1.0) / (next + 1.0 - lambda);
}

// (gamma^-j - 1) / (1 - gamma), switching to a second-order series near
// gamma = 1 where the direct quotient loses all precision.
inline double pow_ratio(int j, double gamma) {
  const double eps = 1.0 - gamma;
  if (std::abs(eps) < 1e-6) return double(j) + 0.5 * double(j) * (double(j) + 1.0) * eps;
  return (std::pow(gamma, -double(j)) - 1.0) / eps;
}

// ((2-gamma)*gamma^(1-m) - 1) / (1-gamma) = sum_i gamma^-k_i over the AMHPS
// chain; analytic limit m at gamma = 1.
inline double amhps_exponent_factor(int m, double gamma) {
  const double eps = 1.0 - gamma;
  if (std::abs(eps) < 1e-6)
    return double(m) + 0.5 * (double(m) - 1.0) * (double(m) + 2.0) * eps;
  return ((2.0 - gamma) * std::pow(gamma, 1.0 - double(m)) - 1.0) / eps;
}

// (1-eta)^n * exp(x) for x <= 0, with the n = 0 and eta = 1 corners kept
// exact (0^0 = 1).
inline double damped_term(double eta, int n, double x) {
  if (n == 0) return std::exp(x);
  if (eta >= 1.0) return 0.0;
  return std::exp(double(n) * std::log1p(-eta) + x);
}

struct SmhpsParts {
  double p_nc;         // no detector clicks
  double a;            // eta*mu/gamma^k, per-unit heralding exposure
  double click_ratio;  // (1 - e^{-m a}) / (1 - e^{-a}), limit m at a = 0
};

inline SmhpsParts smhps_parts(const SourceSpec& s) {
  const int k = s.tree_depth();
  const double a = s.eta * s.mu * std::pow(s.gamma, -double(k));
  SmhpsParts parts;
  parts.a = a;
  parts.p_nc = std::exp(-double(s.m) * a);
  parts.click_ratio = a == 0.0 ? double(s.m) : std::expm1(-double(s.m) * a) / std::expm1(-a);
  return parts;
}

struct AmhpsParts {
  double p_nc;
  std::vector<double> weight;    // w_i = P(units 1..i-1 all silent)
  std::vector<double> exposure;  // eta*mu*(gamma^-k_i - 1)
};

inline AmhpsParts amhps_parts(const SourceSpec& s) {
  AmhpsParts parts;
  parts.p_nc = std::exp(-s.eta * s.mu * amhps_exponent_factor(s.m, s.gamma));
  parts.weight.resize(static_cast<size_t>(s.m));
  parts.exposure.resize(static_cast<size_t>(s.m));
  for (int i = 1; i <= s.m; ++i) {
    parts.weight[static_cast<size_t>(i - 1)] =
        std::exp(-s.eta * s.mu * pow_ratio(i - 1, s.gamma));
    parts.exposure[static_cast<size_t>(i - 1)] =
        s.eta * s.mu * std::expm1(-double(s.chain_depth(i)) * std::log(s.gamma));
  }
  return parts;
}

// Sizes the truncation cut against the Poisson output envelope (mean mu for
// every architecture: pump compensation cancels switch thinning at the
// output) and certifies the discarded mass. `envelope` maps a cut to a tail
// bound; grows the cut until the bound meets the policy.
template <class EnvelopeTail>
inline int certified_n_max(double mu, const TruncationPolicy& policy, EnvelopeTail envelope,
                           double* tail_out) {
  int n = std::max(policy.min_terms,
                   static_cast<int>(std::ceil(mu + policy.k_sigma * std::sqrt(mu))));
  double tail = envelope(n);
  while (tail > policy.tail_tolerance && n < policy.max_terms) {
    n = n + n / 2 + 8;
    tail = envelope(n);
  }
  if (tail > policy.tail_tolerance)
    throw error(errc::invalid_range, "truncation tail failed to certify below tolerance");
  *tail_out = tail;
  return n;
}

}  // namespace detail

/// Probability that no heralding detector clicks in a pulse (SMHPS/AMHPS).
inline double p_noclick(const SourceSpec& spec) {
  validate(spec);
  switch (spec.kind) {
    case SourceKind::SMHPS:
      return detail::smhps_parts(spec).p_nc;
    case SourceKind::AMHPS:
      return std::exp(-spec.eta * spec.mu * detail::amhps_exponent_factor(spec.m, spec.gamma));
    default:
      throw error(errc::unsupported_source,
                  std::string(source_kind_name(spec.kind)) + " has no heralding detectors");
  }
}

/// Output photon-number distribution of a validated source.
inline PhotonStatistics pmf(const SourceSpec& spec, const TruncationPolicy& policy = {}) {
  validate(spec);
  PhotonStatistics stats;

  switch (spec.kind) {
    case SourceKind::IdealSinglePhoton:
      stats.probs = {0.0, 1.0};
      stats.tail_mass = 0.0;
      return stats;

    case SourceKind::WCS: {
      const int n_max = detail::certified_n_max(
          spec.mu, policy, [&](int n) { return detail::poisson_tail_bound(spec.mu, n); },
          &stats.tail_mass);
      stats.probs.resize(static_cast<size_t>(n_max) + 1);
      for (int n = 0; n <= n_max; ++n)
        stats.probs[static_cast<size_t>(n)] = detail::poisson_pmf(spec.mu, n);
      return stats;
    }

    case SourceKind::MHPS: {
      if (spec.mu == 0.0) {
        stats.probs = {1.0};
        return stats;
      }
      const double ratio = std::expm1(-double(spec.m) * spec.mu) / std::expm1(-spec.mu);
      const int n_max = detail::certified_n_max(
          spec.mu, policy,
          [&](int n) { return ratio * detail::poisson_tail_bound(spec.mu, n); },
          &stats.tail_mass);
      stats.probs.resize(static_cast<size_t>(n_max) + 1);
      stats.probs[0] = std::exp(-double(spec.m) * spec.mu);
      for (int n = 1; n <= n_max; ++n)
        stats.probs[static_cast<size_t>(n)] = detail::poisson_pmf(spec.mu, n) * ratio;
      return stats;
    }

    case SourceKind::SMHPS: {
      const auto parts = detail::smhps_parts(spec);
      const double mu_nc = spec.mu * (1.0 - spec.eta);
      const double exposure = parts.a - spec.eta * spec.mu;  // eta*mu*(gamma^-k - 1)
      const auto envelope = [&](int n) {
        return parts.p_nc * detail::poisson_tail_bound(mu_nc, n) +
               parts.click_ratio * detail::poisson_tail_bound(spec.mu, n);
      };
      const int n_max = detail::certified_n_max(spec.mu, policy, envelope, &stats.tail_mass);
      stats.probs.resize(static_cast<size_t>(n_max) + 1);
      for (int n = 0; n <= n_max; ++n) {
        const double bracket = 1.0 - detail::damped_term(spec.eta, n, -exposure);
        stats.probs[static_cast<size_t>(n)] =
            parts.p_nc * detail::poisson_pmf(mu_nc, n) +
            detail::poisson_pmf(spec.mu, n) * bracket * parts.click_ratio;
      }
      return stats;
    }

    case SourceKind::AMHPS: {
      const auto parts = detail::amhps_parts(spec);
      const double mu_nc = spec.mu * (1.0 - spec.eta);
      // kernel(n) = sum_i w_i (1 - (1-eta)^n e^{-x_i}) = W - (1-eta)^n V
      double weight_sum = 0.0, damped_sum = 0.0;
      for (int i = 0; i < spec.m; ++i) {
        weight_sum += parts.weight[static_cast<size_t>(i)];
        damped_sum += parts.weight[static_cast<size_t>(i)] *
                      std::exp(-parts.exposure[static_cast<size_t>(i)]);
      }
      const auto envelope = [&](int n) {
        return parts.p_nc * detail::poisson_tail_bound(mu_nc, n) +
               weight_sum * detail::poisson_tail_bound(spec.mu, n);
      };
      const int n_max = detail::certified_n_max(spec.mu, policy, envelope, &stats.tail_mass);
      stats.probs.resize(static_cast<size_t>(n_max) + 1);
      double miss_pow = 1.0;  // (1-eta)^n
      for (int n = 0; n <= n_max; ++n) {
        const double kernel = weight_sum - miss_pow * damped_sum;
        stats.probs[static_cast<size_t>(n)] =
            parts.p_nc * detail::poisson_pmf(mu_nc, n) +
            detail::poisson_pmf(spec.mu, n) * kernel;
        miss_pow *= 1.0 - spec.eta;
      }
      return stats;
    }
  }
  throw error(errc::unsupported_source, "unreachable source kind");
}

/// Output statistics conditioned on the heralding outcome. The no-click
/// branch is Poisson with mean mu*(1-eta) for both architectures (the first
/// unit is routed to the output); the click branch carries the
/// architecture-specific post-selection statistics.
inline PhotonStatistics pmf_conditional(const SourceSpec& spec, Branch branch,
                                        const TruncationPolicy& policy = {}) {
  validate(spec);
  if (!spec.heralded())
    throw error(errc::unsupported_source,
                std::string(source_kind_name(spec.kind)) + " has no heralding detectors");

  const double p_nc = p_noclick(spec);
  const double branch_prob = branch == Branch::NoClick ? p_nc : 1.0 - p_nc;
  if (branch_prob < 1e-300)
    throw error(errc::degenerate_branch, "branch probability below 1e-300");

  PhotonStatistics stats;
  if (branch == Branch::NoClick) {
    const double mu_nc = spec.mu * (1.0 - spec.eta);
    const int n_max = detail::certified_n_max(
        spec.mu, policy, [&](int n) { return detail::poisson_tail_bound(mu_nc, n); },
        &stats.tail_mass);
    stats.probs.resize(static_cast<size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n)
      stats.probs[static_cast<size_t>(n)] = detail::poisson_pmf(mu_nc, n);
    return stats;
  }

  if (spec.kind == SourceKind::SMHPS) {
    const auto parts = detail::smhps_parts(spec);
    const double exposure = parts.a - spec.eta * spec.mu;
    const double denom = -std::expm1(-parts.a);  // 1 - e^{-eta*mu/gamma^k}
    const auto envelope = [&](int n) {
      return detail::poisson_tail_bound(spec.mu, n) / denom;
    };
    const int n_max = detail::certified_n_max(spec.mu, policy, envelope, &stats.tail_mass);
    stats.probs.resize(static_cast<size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
      const double bracket = 1.0 - detail::damped_term(spec.eta, n, -exposure);
      stats.probs[static_cast<size_t>(n)] = detail::poisson_pmf(spec.mu, n) * bracket / denom;
    }
    return stats;
  }

  // AMHPS click branch
  const auto parts = detail::amhps_parts(spec);
  double weight_sum = 0.0, damped_sum = 0.0;
  for (int i = 0; i < spec.m; ++i) {
    weight_sum += parts.weight[static_cast<size_t>(i)];
    damped_sum += parts.weight[static_cast<size_t>(i)] *
                  std::exp(-parts.exposure[static_cast<size_t>(i)]);
  }
  const double denom = 1.0 - parts.p_nc;
  const auto envelope = [&](int n) {
    return weight_sum * detail::poisson_tail_bound(spec.mu, n) / denom;
  };
  const int n_max = detail::certified_n_max(spec.mu, policy, envelope, &stats.tail_mass);
  stats.probs.resize(static_cast<size_t>(n_max) + 1);
  double miss_pow = 1.0;
  for (int n = 0; n <= n_max; ++n) {
    const double kernel = weight_sum - miss_pow * damped_sum;
    stats.probs[static_cast<size_t>(n)] = detail::poisson_pmf(spec.mu, n) * kernel / denom;
    miss_pow *= 1.0 - spec.eta;
  }
  return stats;
}

/// sum_n P_n x^n for x in [0,1]; absolute error bounded by the tail mass.
inline double weighted_survival(const PhotonStatistics& stats, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw error(errc::invalid_range, "x must lie in [0,1]");
  double sum = 0.0;
  double xn = 1.0;
  for (double p : stats.probs) {
    sum += p * xn;
    xn *= x;
  }
  return sum;
}

inline double weighted_survival(const SourceSpec& spec, double x,
                                const TruncationPolicy& policy = {}) {
  return weighted_survival(pmf(spec, policy), x);
}

}  // namespace hsqkd
