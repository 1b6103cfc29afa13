// SPDX-License-Identifier: Apache-2.0
//
// Passive one-decoy parameter estimation: bounds on Y0, Y1 and e1 from the
// click/no-click branch observations and the known branch statistics.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "hsqkd/channel.hpp"
#include "hsqkd/errors.hpp"
#include "hsqkd/sources.hpp"

namespace hsqkd {

/// Gain/QBER of the two heralding branches together with their photon
/// statistics. Only the first three probabilities of each branch enter the
/// bounds; the full statistics are kept for the sign-structure checks.
struct BranchObservations {
  ObservedChannel click;
  ObservedChannel noclick;
  PhotonStatistics stats_click;
  PhotonStatistics stats_noclick;
};

struct Y0Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

namespace detail {

constexpr double kDegenerateDenominator = 1e-300;
constexpr double kErrorDark = 0.5;  // e0: dark counts are random

inline void require_separating(double denom) {
  if (!(denom > kDegenerateDenominator))
    throw error(errc::degenerate_statistics,
                "click/no-click statistics do not separate (eta = 0?)");
}

}  // namespace detail

/// Lower and upper bounds on the vacuum yield Y0.
inline Y0Bounds y0_bounds(const BranchObservations& obs) {
  const double p0_c = obs.stats_click.p(0);
  const double p1_c = obs.stats_click.p(1);
  const double p0_nc = obs.stats_noclick.p(0);
  const double p1_nc = obs.stats_noclick.p(1);

  const double denom = p1_c * p0_nc - p1_nc * p0_c;
  detail::require_separating(denom);

  Y0Bounds b;
  b.lower = std::max((p1_c * obs.noclick.gain - p1_nc * obs.click.gain) / denom, 0.0);

  const double cand_c = p0_c > 0.0
                            ? obs.click.gain * obs.click.qber / (p0_c * detail::kErrorDark)
                            : std::numeric_limits<double>::infinity();
  const double cand_nc = p0_nc > 0.0
                             ? obs.noclick.gain * obs.noclick.qber / (p0_nc * detail::kErrorDark)
                             : std::numeric_limits<double>::infinity();
  b.upper = std::min(cand_c, cand_nc);
  return b;
}

/// Lower bound on the single-photon yield Y1, given an upper bound on Y0.
inline double y1_lower(const BranchObservations& obs, double y0_upper) {
  const double p0_c = obs.stats_click.p(0);
  const double p1_c = obs.stats_click.p(1);
  const double p2_c = obs.stats_click.p(2);
  const double p0_nc = obs.stats_noclick.p(0);
  const double p1_nc = obs.stats_noclick.p(1);
  const double p2_nc = obs.stats_noclick.p(2);

  const double denom = p2_c * p1_nc - p2_nc * p1_c;
  detail::require_separating(denom);

  const double numer = p2_c * obs.noclick.gain - p2_nc * obs.click.gain -
                       (p2_c * p0_nc - p2_nc * p0_c) * y0_upper;
  return std::max(numer / denom, 0.0);
}

/// Upper bound on the single-photon error rate e1, clamped into [0, 1/2].
inline double e1_upper(const BranchObservations& obs, double y0_lower, double y1_lo) {
  if (!(y1_lo > 0.0))
    throw error(errc::degenerate_bounds, "e1 undefined with Y1 lower bound of zero");

  const double p0_c = obs.stats_click.p(0);
  const double p1_c = obs.stats_click.p(1);
  const double p0_nc = obs.stats_noclick.p(0);
  const double p1_nc = obs.stats_noclick.p(1);
  const double e0 = detail::kErrorDark;

  const double qe_c = obs.click.gain * obs.click.qber;
  const double qe_nc = obs.noclick.gain * obs.noclick.qber;

  const double sep = p0_nc * p1_c - p0_c * p1_nc;
  detail::require_separating(sep);

  const double cand1 = (p0_nc * qe_c - p0_c * qe_nc) / (sep * y1_lo);
  const double cand2 = p1_c > 0.0 ? (qe_c - p0_c * y0_lower * e0) / (p1_c * y1_lo)
                                  : std::numeric_limits<double>::infinity();
  const double cand3 = p1_nc > 0.0 ? (qe_nc - p0_nc * y0_lower * e0) / (p1_nc * y1_lo)
                                   : std::numeric_limits<double>::infinity();

  return std::clamp(std::min({cand1, cand2, cand3}), 0.0, 0.5);
}

}  // namespace hsqkd
