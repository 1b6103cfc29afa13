// SPDX-License-Identifier: Apache-2.0
//
// Event-level simulation of the crystal/detector/switch networks. Each trial
// draws per-crystal pair counts, resolves the heralding detectors, applies
// the post-selection rule (leftmost clicked unit, unit 1 as fallback) and
// thins the selected signal through its switch path.
//
// Trials use independent substreams keyed by (seed, trial index), so results
// are bit-identical regardless of execution order or thread count.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "hsqkd/errors.hpp"
#include "hsqkd/sources.hpp"

namespace hsqkd::mc {

namespace detail {

// SplitMix64 (Steele, Lea & Flood); the output finalizer doubles as the
// (seed, trial) keying hash.
class SplitMix64 {
 public:
  SplitMix64(std::uint64_t seed, std::uint64_t stream)
      : state_(finalize(seed ^ finalize(stream * 0xDA942042E4DD58B5ULL))) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return finalize(state_);
  }

  double next_double() { return double(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  std::uint64_t state_;
};

struct SamplerTally {
  std::uint64_t inversion_draws = 0;
  std::uint64_t rejection_draws = 0;
};

// CDF inversion; adequate below the rejection threshold.
inline int poisson_inversion(SplitMix64& rng, double lambda) {
  const double u = rng.next_double();
  double p = std::exp(-lambda);
  double cum = p;
  int k = 0;
  while (u > cum && k < 1000) {
    ++k;
    p *= lambda / double(k);
    cum += p;
  }
  return k;
}

// Hormann's transformed-rejection sampler (PTRS) for large means.
inline int poisson_ptrs(SplitMix64& rng, double lambda) {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.next_double() - 0.5;
    const double v = rng.next_double();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return int(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        kf * loglam - lambda - std::lgamma(kf + 1.0))
      return int(kf);
  }
}

constexpr double kRejectionThreshold = 10.0;

inline int sample_poisson(SplitMix64& rng, double lambda, SamplerTally& tally) {
  if (lambda <= 0.0) return 0;
  if (lambda < kRejectionThreshold) {
    ++tally.inversion_draws;
    return poisson_inversion(rng, lambda);
  }
  ++tally.rejection_draws;
  return poisson_ptrs(rng, lambda);
}

}  // namespace detail

/// Empirical result of a simulation run. Frequencies are derived from the
/// integer tallies, also exposed for exact bookkeeping checks.
struct McResult {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double click_fraction = 0.0;
  std::vector<double> empirical_pmf;
  std::vector<double> empirical_pmf_click;    // conditional on >=1 click
  std::vector<double> empirical_pmf_noclick;  // conditional on no click
  std::vector<std::uint64_t> counts_click;
  std::vector<std::uint64_t> counts_noclick;
  std::uint64_t click_trials = 0;
  std::uint64_t inversion_draws = 0;
  std::uint64_t rejection_draws = 0;
};

/// Simulate `trials` pulses of an MHPS/SMHPS/AMHPS source.
inline McResult simulate(const SourceSpec& spec, std::uint64_t trials, std::uint64_t seed,
                         unsigned threads = 0) {
  validate(spec);
  if (spec.kind != SourceKind::MHPS && !spec.heralded())
    throw error(errc::unsupported_source, "simulation covers MHPS, SMHPS and AMHPS only");
  if (trials < 1) throw error(errc::invalid_trials, "trials must be >= 1");

  // Per-unit pump means and switch-path survival probabilities.
  const int m = spec.m;
  std::vector<double> pump(static_cast<size_t>(m));
  std::vector<double> survival(static_cast<size_t>(m));
  const double eta = spec.kind == SourceKind::MHPS ? 1.0 : spec.eta;
  for (int i = 1; i <= m; ++i) {
    int depth = 0;
    if (spec.kind == SourceKind::SMHPS) depth = spec.tree_depth();
    if (spec.kind == SourceKind::AMHPS) depth = spec.chain_depth(i);
    pump[static_cast<size_t>(i - 1)] = spec.mu * std::pow(spec.gamma, -double(depth));
    survival[static_cast<size_t>(i - 1)] = std::pow(spec.gamma, double(depth));
  }

  // (1-eta)^n lookup for the click decision.
  std::vector<double> miss_pow(64);
  miss_pow[0] = 1.0;
  for (size_t n = 1; n < miss_pow.size(); ++n) miss_pow[n] = miss_pow[n - 1] * (1.0 - eta);
  const auto click_prob = [&](int n) {
    return n < int(miss_pow.size()) ? 1.0 - miss_pow[static_cast<size_t>(n)]
                                    : 1.0 - std::pow(1.0 - eta, double(n));
  };

  struct Tally {
    std::vector<std::uint64_t> click;
    std::vector<std::uint64_t> noclick;
    std::uint64_t click_trials = 0;
    detail::SamplerTally sampler;
    void record(bool clicked, int n) {
      auto& hist = clicked ? click : noclick;
      if (n >= int(hist.size())) hist.resize(static_cast<size_t>(n) + 1, 0);
      ++hist[static_cast<size_t>(n)];
      if (clicked) ++click_trials;
    }
  };

  const auto run_range = [&](std::uint64_t begin, std::uint64_t end, Tally& tally) {
    for (std::uint64_t trial = begin; trial < end; ++trial) {
      detail::SplitMix64 rng(seed, trial);
      bool clicked = false;
      int selected = 0;
      int pairs = 0;
      int first_pairs = 0;
      for (int i = 0; i < m; ++i) {
        const int n_i = detail::sample_poisson(rng, pump[static_cast<size_t>(i)], tally.sampler);
        if (i == 0) first_pairs = n_i;
        if (rng.bernoulli(click_prob(n_i))) {
          clicked = true;
          selected = i;
          pairs = n_i;
          break;
        }
      }
      if (!clicked) {
        selected = 0;
        pairs = first_pairs;
      }
      const double p_survive = survival[static_cast<size_t>(selected)];
      int out = 0;
      if (p_survive >= 1.0) {
        out = pairs;
      } else {
        for (int j = 0; j < pairs; ++j)
          if (rng.bernoulli(p_survive)) ++out;
      }
      tally.record(clicked, out);
    }
  };

  unsigned n_threads = threads ? threads : std::thread::hardware_concurrency();
  n_threads = std::max<unsigned>(1, std::min<std::uint64_t>(n_threads, trials));
  std::vector<Tally> tallies(n_threads);
  if (n_threads == 1) {
    run_range(0, trials, tallies[0]);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    const std::uint64_t chunk = (trials + n_threads - 1) / n_threads;
    for (unsigned t = 0; t < n_threads; ++t) {
      const std::uint64_t begin = std::uint64_t(t) * chunk;
      const std::uint64_t end = std::min(trials, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end, t] { run_range(begin, end, tallies[t]); });
    }
    for (auto& th : pool) th.join();
  }

  McResult res;
  res.trials = trials;
  res.seed = seed;
  for (const auto& tally : tallies) {
    const auto merge = [](std::vector<std::uint64_t>& into,
                          const std::vector<std::uint64_t>& from) {
      if (from.size() > into.size()) into.resize(from.size(), 0);
      for (size_t i = 0; i < from.size(); ++i) into[i] += from[i];
    };
    merge(res.counts_click, tally.click);
    merge(res.counts_noclick, tally.noclick);
    res.click_trials += tally.click_trials;
    res.inversion_draws += tally.sampler.inversion_draws;
    res.rejection_draws += tally.sampler.rejection_draws;
  }

  res.click_fraction = double(res.click_trials) / double(trials);
  const size_t n_bins = std::max(res.counts_click.size(), res.counts_noclick.size());
  res.counts_click.resize(n_bins, 0);
  res.counts_noclick.resize(n_bins, 0);
  res.empirical_pmf.resize(n_bins, 0.0);
  res.empirical_pmf_click.resize(n_bins, 0.0);
  res.empirical_pmf_noclick.resize(n_bins, 0.0);
  const std::uint64_t noclick_trials = trials - res.click_trials;
  for (size_t n = 0; n < n_bins; ++n) {
    res.empirical_pmf[n] =
        double(res.counts_click[n] + res.counts_noclick[n]) / double(trials);
    if (res.click_trials > 0)
      res.empirical_pmf_click[n] = double(res.counts_click[n]) / double(res.click_trials);
    if (noclick_trials > 0)
      res.empirical_pmf_noclick[n] = double(res.counts_noclick[n]) / double(noclick_trials);
  }
  return res;
}

/// Total-variation distance between an empirical pmf and analytic statistics
/// (tail mass counts as unmatched analytic weight).
inline double tv_distance(const std::vector<double>& empirical, const PhotonStatistics& analytic) {
  const size_t n = std::max(empirical.size(), analytic.probs.size());
  double l1 = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double e = i < empirical.size() ? empirical[i] : 0.0;
    const double a = i < analytic.probs.size() ? analytic.probs[i] : 0.0;
    l1 += std::abs(e - a);
  }
  return 0.5 * (l1 + analytic.tail_mass);
}

}  // namespace hsqkd::mc
