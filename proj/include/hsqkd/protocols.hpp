// SPDX-License-Identifier: Apache-2.0
//
// Asymptotic BB84 secret-key rates: plain (no decoy), active decoy with
// exactly known channel parameters, and passive one-decoy post-selection on
// the heralding outcome. Rates are per post-sifting pulse.

#pragma once

#include <algorithm>
#include <cmath>

#include "hsqkd/channel.hpp"
#include "hsqkd/errors.hpp"
#include "hsqkd/estimation.hpp"
#include "hsqkd/sources.hpp"

namespace hsqkd {

/// Binary Shannon entropy with h(0) = h(1) = 0.
inline double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw error(errc::out_of_domain, "entropy argument outside [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

/// Everything the rate formulas consume. `delta` is the multi-photon rate
/// (1 - p0 - p1)/Q; `y0`, `y1`, `e1` are the vacuum/single-photon channel
/// parameters (exact values for active decoy, bounds for passive).
struct RateInputs {
  double p0 = 0.0;
  double p1 = 0.0;
  double delta = 0.0;
  double y0 = 0.0;
  double y1 = 0.0;
  double e1 = 0.0;
  ObservedChannel observed;
  double f_ec = 1.05;

  static RateInputs from_prediction(const PhotonStatistics& stats,
                                    const ChannelDetectorSpec& channel, double f_ec) {
    RateInputs in;
    in.p0 = stats.p(0);
    in.p1 = stats.p(1);
    in.observed = predict_observation(stats, channel);
    in.delta = in.observed.gain > 0.0
                   ? std::clamp((1.0 - in.p0 - in.p1) / in.observed.gain, 0.0, 1.0)
                   : 1.0;
    in.y0 = predicted_yield(0, channel);
    in.y1 = predicted_yield(1, channel);
    in.e1 = predicted_error(1, channel);
    in.f_ec = f_ec;
    return in;
  }
};

/// BB84 without decoy states. Multi-photon pulses are written off to the
/// eavesdropper; degenerate inputs (delta >= 1, or corrected error rate at
/// or beyond 1/2) abort to zero rate.
inline double rate_no_decoy(const RateInputs& in) {
  const double q = in.observed.gain;
  const double e = in.observed.qber;
  if (in.delta >= 1.0) return 0.0;
  const double e_corr = e / (1.0 - in.delta);
  if (e_corr >= 0.5) return 0.0;
  const double r =
      q * ((1.0 - in.delta) * (1.0 - binary_entropy(e_corr)) - in.f_ec * binary_entropy(e));
  return std::max(r, 0.0);
}

/// BB84 with active decoy states and exactly determined channel parameters.
inline double rate_active_decoy(const RateInputs& in) {
  const double r = in.p0 * in.y0 + in.p1 * in.y1 * (1.0 - binary_entropy(in.e1)) -
                   in.observed.gain * in.f_ec * binary_entropy(in.observed.qber);
  return std::max(r, 0.0);
}

/// Per-branch detail of a passive one-decoy evaluation.
struct PassiveDecoyResult {
  double rate = 0.0;
  double p_click = 0.0;
  double y0_lower = 0.0;
  double y0_upper = 0.0;
  double y1_lower = 0.0;
  double e1_upper = 0.5;
  ObservedChannel click;
  ObservedChannel noclick;
  double rate_click = 0.0;    // clamped branch rates
  double rate_noclick = 0.0;
};

/// Passive one-decoy pipeline: simulate both branch observations, estimate
/// the channel-parameter bounds, and combine the per-branch rates. Branches
/// that would yield no key are discarded (clamped to zero) before mixing.
/// Returns a zero rate when the click branch is too rare to condition on or
/// when the branch statistics do not separate.
inline PassiveDecoyResult passive_decoy_analysis(const SourceSpec& source,
                                                 const ChannelDetectorSpec& channel,
                                                 double f_ec,
                                                 const TruncationPolicy& policy = {}) {
  validate(source);
  if (!source.heralded())
    throw error(errc::unsupported_source, "passive decoy requires SMHPS or AMHPS");

  PassiveDecoyResult res;
  const double p_nc = p_noclick(source);
  res.p_click = 1.0 - p_nc;
  if (res.p_click < 1e-300 || p_nc < 1e-300) return res;  // no heralding information

  BranchObservations obs;
  obs.stats_click = pmf_conditional(source, Branch::Click, policy);
  obs.stats_noclick = pmf_conditional(source, Branch::NoClick, policy);
  obs.click = predict_observation(obs.stats_click, channel);
  obs.noclick = predict_observation(obs.stats_noclick, channel);
  res.click = obs.click;
  res.noclick = obs.noclick;

  double h1 = 1.0;  // 1 - h(e1^U); stays 1 only if the single-photon term survives
  try {
    const Y0Bounds y0 = y0_bounds(obs);
    res.y0_lower = y0.lower;
    res.y0_upper = y0.upper;
    res.y1_lower = y1_lower(obs, y0.upper);
    if (res.y1_lower > 0.0) {
      res.e1_upper = e1_upper(obs, y0.lower, res.y1_lower);
      h1 = 1.0 - binary_entropy(res.e1_upper);
    } else {
      h1 = 0.0;  // single-photon term contributes nothing
    }
  } catch (const error& e) {
    if (e.code() != errc::degenerate_statistics) throw;
    return res;  // branches indistinguishable: no estimate, no key
  }

  const auto branch_rate = [&](const PhotonStatistics& stats, const ObservedChannel& o) {
    const double r = stats.p(0) * res.y0_lower + stats.p(1) * res.y1_lower * h1 -
                     o.gain * f_ec * binary_entropy(o.qber);
    return std::max(r, 0.0);
  };
  res.rate_click = branch_rate(obs.stats_click, obs.click);
  res.rate_noclick = branch_rate(obs.stats_noclick, obs.noclick);
  res.rate = res.p_click * res.rate_click + p_nc * res.rate_noclick;
  return res;
}

inline double rate_passive_decoy(const SourceSpec& source, const ChannelDetectorSpec& channel,
                                 double f_ec, const TruncationPolicy& policy = {}) {
  return passive_decoy_analysis(source, channel, f_ec, policy).rate;
}

}  // namespace hsqkd
