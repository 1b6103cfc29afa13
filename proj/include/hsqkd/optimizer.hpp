// SPDX-License-Identifier: Apache-2.0
//
// Pump-parameter optimization and loss sweeps. R(mu) is not assumed
// unimodal: a coarse log-spaced scan brackets the best cell and
// golden-section refinement polishes it, keeping the best value seen
// anywhere.

#pragma once

#include <atomic>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hsqkd/channel.hpp"
#include "hsqkd/protocols.hpp"
#include "hsqkd/sources.hpp"

namespace hsqkd {

enum class Protocol { NoDecoy, ActiveDecoy, PassiveDecoy };

inline const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::NoDecoy: return "no_decoy";
    case Protocol::ActiveDecoy: return "active_decoy";
    case Protocol::PassiveDecoy: return "passive_decoy";
  }
  return "?";
}

struct RateDiagnostics {
  double gain = 0.0;
  double qber = 0.0;
  std::optional<double> delta;      // no-decoy only
  std::optional<double> p_click;    // passive only
  std::optional<double> y0_lower;
  std::optional<double> y1_lower;
  std::optional<double> e1_upper;
};

struct RateEvaluation {
  double rate = 0.0;
  RateDiagnostics diag;
};

/// Key rate of one fully specified configuration (source at a fixed mu).
inline RateEvaluation evaluate_rate(const SourceSpec& source, Protocol protocol,
                                    const ChannelDetectorSpec& channel, double f_ec,
                                    const TruncationPolicy& policy = {}) {
  RateEvaluation ev;
  switch (protocol) {
    case Protocol::NoDecoy: {
      const auto stats = pmf(source, policy);
      const auto in = RateInputs::from_prediction(stats, channel, f_ec);
      ev.rate = rate_no_decoy(in);
      ev.diag.gain = in.observed.gain;
      ev.diag.qber = in.observed.qber;
      ev.diag.delta = in.delta;
      return ev;
    }
    case Protocol::ActiveDecoy: {
      const auto stats = pmf(source, policy);
      const auto in = RateInputs::from_prediction(stats, channel, f_ec);
      ev.rate = rate_active_decoy(in);
      ev.diag.gain = in.observed.gain;
      ev.diag.qber = in.observed.qber;
      return ev;
    }
    case Protocol::PassiveDecoy: {
      const auto res = passive_decoy_analysis(source, channel, f_ec, policy);
      ev.rate = res.rate;
      const double q = res.p_click * res.click.gain + (1.0 - res.p_click) * res.noclick.gain;
      const double eq = res.p_click * res.click.gain * res.click.qber +
                        (1.0 - res.p_click) * res.noclick.gain * res.noclick.qber;
      ev.diag.gain = q;
      ev.diag.qber = q > 0.0 ? eq / q : 0.5;
      ev.diag.p_click = res.p_click;
      ev.diag.y0_lower = res.y0_lower;
      ev.diag.y1_lower = res.y1_lower;
      ev.diag.e1_upper = res.e1_upper;
      return ev;
    }
  }
  throw error(errc::unsupported_source, "unreachable protocol");
}

/// Search interval and refinement control for the pump parameter.
struct MuSearch {
  double mu_lo = 1e-4;
  double mu_hi = 3.0;
  int grid_points = 64;
  double rel_tol = 1e-4;
};

struct OptimizeResult {
  std::optional<double> mu_opt;  // unset when the rate is zero everywhere or mu-independent
  double rate = 0.0;
  RateDiagnostics diag;
};

/// Maximize the key rate over mu. Short-circuits for sources without a pump
/// parameter; returns a zero rate with mu unset when the whole grid is dead.
inline OptimizeResult optimize_mu(const SourceSpec& source_template, Protocol protocol,
                                  const ChannelDetectorSpec& channel, double f_ec,
                                  const MuSearch& search = {},
                                  const TruncationPolicy& policy = {}) {
  OptimizeResult out;
  if (source_template.kind == SourceKind::IdealSinglePhoton) {
    const auto ev = evaluate_rate(source_template, protocol, channel, f_ec, policy);
    out.rate = ev.rate;
    out.diag = ev.diag;
    return out;
  }

  if (!(search.mu_lo > 0.0 && search.mu_lo < search.mu_hi))
    throw error(errc::invalid_range, "mu search interval requires 0 < mu_lo < mu_hi");
  if (search.grid_points < 2)
    throw error(errc::invalid_range, "mu search grid needs at least 2 points");

  const auto rate_at = [&](double mu) {
    return evaluate_rate(source_template.with_mu(mu), protocol, channel, f_ec, policy).rate;
  };

  const double t_lo = std::log(search.mu_lo);
  const double t_hi = std::log(search.mu_hi);
  double best_t = t_lo;
  double best_rate = -1.0;
  for (int i = 0; i < search.grid_points; ++i) {
    const double t = t_lo + (t_hi - t_lo) * double(i) / double(search.grid_points - 1);
    const double r = rate_at(std::exp(t));
    if (r > best_rate) {
      best_rate = r;
      best_t = t;
    }
  }
  if (best_rate <= 0.0) return out;  // dead grid: zero rate, mu unset

  // Golden-section refinement in log space around the best cell.
  const double cell = (t_hi - t_lo) / double(search.grid_points - 1);
  double a = std::max(t_lo, best_t - cell);
  double b = std::min(t_hi, best_t + cell);
  const double tol = std::log1p(search.rel_tol);
  constexpr double kInvGolden = 0.6180339887498949;
  double t1 = b - kInvGolden * (b - a);
  double t2 = a + kInvGolden * (b - a);
  double f1 = rate_at(std::exp(t1));
  double f2 = rate_at(std::exp(t2));
  const auto consider = [&](double t, double f) {
    if (f > best_rate) {
      best_rate = f;
      best_t = t;
    }
  };
  consider(t1, f1);
  consider(t2, f2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = t1;
      t1 = t2;
      f1 = f2;
      t2 = a + kInvGolden * (b - a);
      f2 = rate_at(std::exp(t2));
      consider(t2, f2);
    } else {
      b = t2;
      t2 = t1;
      f2 = f1;
      t1 = b - kInvGolden * (b - a);
      f1 = rate_at(std::exp(t1));
      consider(t1, f1);
    }
  }

  const double mu_opt = std::exp(best_t);
  const auto ev = evaluate_rate(source_template.with_mu(mu_opt), protocol, channel, f_ec, policy);
  out.mu_opt = mu_opt;
  out.rate = ev.rate;
  out.diag = ev.diag;
  return out;
}

/// One row of a loss sweep.
struct SweepRecord {
  double loss_db = 0.0;
  std::optional<double> mu_opt;
  double rate = 0.0;
  double gain = 0.0;
  double qber = 0.0;
  std::optional<double> delta;
  std::optional<double> p_click;
  std::optional<double> y0_lower;
  std::optional<double> y1_lower;
  std::optional<double> e1_upper;
  std::string note;  // nonempty when the point failed and was recorded as zero rate
};

struct SweepConfig {
  SourceSpec source;  // mu field ignored; the optimizer owns it
  Protocol protocol = Protocol::NoDecoy;
  double f_ec = 1.05;
  ChannelDetectorSpec channel;  // loss_db overridden per point
  MuSearch search;
  TruncationPolicy truncation;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Optimize every loss point independently; records come back in input
/// order regardless of scheduling.
inline std::vector<SweepRecord> sweep(const SweepConfig& config,
                                      const std::vector<double>& losses) {
  std::vector<SweepRecord> records(losses.size());
  const auto run_point = [&](size_t idx) {
    SweepRecord& rec = records[idx];
    rec.loss_db = losses[idx];
    try {
      const auto opt = optimize_mu(config.source, config.protocol,
                                   config.channel.with_loss(losses[idx]), config.f_ec,
                                   config.search, config.truncation);
      rec.mu_opt = opt.mu_opt;
      rec.rate = opt.rate;
      rec.gain = opt.diag.gain;
      rec.qber = opt.diag.qber;
      rec.delta = opt.diag.delta;
      rec.p_click = opt.diag.p_click;
      rec.y0_lower = opt.diag.y0_lower;
      rec.y1_lower = opt.diag.y1_lower;
      rec.e1_upper = opt.diag.e1_upper;
    } catch (const error& e) {
      rec = SweepRecord{};
      rec.loss_db = losses[idx];
      rec.note = e.what();
    }
  };

  unsigned n_threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, losses.size()));
  if (n_threads <= 1) {
    for (size_t i = 0; i < losses.size(); ++i) run_point(i);
    return records;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (unsigned t = 0; t < n_threads; ++t)
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < losses.size(); i = next.fetch_add(1)) run_point(i);
    });
  for (auto& th : pool) th.join();
  return records;
}

/// Largest loss with rate above `threshold`, refined to `resolution` dB by a
/// fine scan inside the bracketing coarse cell. Returns nullopt when the
/// rate is dead across the whole range.
inline std::optional<double> find_loss_cutoff(const SweepConfig& config, double loss_lo,
                                              double loss_hi, double coarse_step = 1.0,
                                              double threshold = 1e-12,
                                              double resolution = 0.1) {
  const auto rate_at = [&](double loss) {
    return optimize_mu(config.source, config.protocol, config.channel.with_loss(loss),
                       config.f_ec, config.search, config.truncation)
        .rate;
  };
  std::optional<double> last_alive;
  double probe = loss_lo;
  for (; probe <= loss_hi + 1e-9; probe += coarse_step) {
    if (rate_at(probe) > threshold)
      last_alive = probe;
    else if (last_alive)
      break;
  }
  if (!last_alive) return std::nullopt;
  if (*last_alive >= loss_hi) return loss_hi;
  double cutoff = *last_alive;
  for (double fine = *last_alive + resolution; fine < *last_alive + coarse_step;
       fine += resolution) {
    if (rate_at(fine) > threshold)
      cutoff = fine;
    else
      break;
  }
  return cutoff;
}

}  // namespace hsqkd
