// SPDX-License-Identifier: Apache-2.0
//
// Depolarizing lossy channel with a threshold-detector receiver: closed-form
// gain and QBER predictions for arbitrary source photon statistics.

#pragma once

#include <cmath>

#include "hsqkd/errors.hpp"
#include "hsqkd/sources.hpp"

namespace hsqkd {

/// Channel loss plus receiver optics and detectors. `y0()` is the
/// two-detector dark-count floor, `e_misalign()` the misalignment error
/// probability derived from the visibility.
struct ChannelDetectorSpec {
  double loss_db = 0.0;
  double visibility = 0.99;
  double t_b = 1.0;      // receiver optical transmittance
  double eta_b = 0.25;   // receiver detector quantum efficiency
  double p_dark = 2e-7;  // per-detector dark-count probability
  bool exact_yield = false;  // keep the -Y0*eta_n cross term instead of dropping it

  double transmittance() const;
  double y0() const { return 2.0 * p_dark; }
  double e_misalign() const { return (1.0 - visibility) / 2.0; }

  ChannelDetectorSpec with_loss(double loss) const {
    ChannelDetectorSpec c = *this;
    c.loss_db = loss;
    return c;
  }
};

/// Gain/QBER pair as it would be measured in an experiment.
struct ObservedChannel {
  double gain = 0.0;
  double qber = 0.0;
};

inline double transmittance(double loss_db) {
  if (!(loss_db >= 0.0)) throw error(errc::negative_loss, "loss must be >= 0 dB");
  return std::pow(10.0, -loss_db / 10.0);
}

inline double ChannelDetectorSpec::transmittance() const {
  return hsqkd::transmittance(loss_db);
}

/// Probability that a threshold detector clicks on an n-photon signal.
inline double detection_prob(int n, const ChannelDetectorSpec& spec) {
  const double survival = 1.0 - spec.eta_b * spec.t_b * spec.transmittance();
  return 1.0 - std::pow(survival, double(n));
}

/// Predicted n-photon yield. The default drops the -Y0*eta_n cross term
/// (dark counts and signal clicks treated as additive); the exact form sits
/// behind the spec's `exact_yield` toggle.
inline double predicted_yield(int n, const ChannelDetectorSpec& spec) {
  const double eta_n = detection_prob(n, spec);
  const double y0 = spec.y0();
  return spec.exact_yield ? y0 + eta_n - y0 * eta_n : y0 + eta_n;
}

/// Predicted n-photon error rate: dark counts are random (e0 = 1/2),
/// detected photons err with the misalignment probability.
inline double predicted_error(int n, const ChannelDetectorSpec& spec) {
  const double y_n = predicted_yield(n, spec);
  if (y_n == 0.0)
    throw error(errc::zero_yield, "error rate undefined at zero yield");
  const double eta_n = detection_prob(n, spec);
  return (0.5 * spec.y0() + spec.e_misalign() * eta_n) / y_n;
}

/// Gain and QBER for a source with the given photon statistics. The photon
/// sums collapse to the survival series S = sum_n P_n (1 - eta_B t_B t)^n, so
/// the absolute error is bounded by the statistics' tail mass. The QBER uses
/// the Q*E product form, which avoids the 0/0 corner at n = 0 with no dark
/// counts.
inline ObservedChannel predict_observation(const PhotonStatistics& stats,
                                           const ChannelDetectorSpec& spec) {
  const double survival = 1.0 - spec.eta_b * spec.t_b * spec.transmittance();
  const double s = weighted_survival(stats, survival);
  const double y0 = spec.y0();

  ObservedChannel obs;
  obs.gain = spec.exact_yield ? y0 + (1.0 - y0) * (1.0 - s) : y0 + (1.0 - s);
  const double eq = 0.5 * y0 + spec.e_misalign() * (1.0 - s);
  obs.qber = obs.gain > 0.0 ? eq / obs.gain : 0.5;
  return obs;
}

inline ObservedChannel predict_observation(const SourceSpec& source,
                                           const ChannelDetectorSpec& spec,
                                           const TruncationPolicy& policy = {}) {
  return predict_observation(pmf(source, policy), spec);
}

}  // namespace hsqkd
