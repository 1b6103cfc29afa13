// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "hsqkd/channel.hpp"

using namespace hsqkd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Receiver used throughout the reference experiments.
ChannelDetectorSpec reference_channel(double loss_db) {
  ChannelDetectorSpec c;
  c.loss_db = loss_db;
  c.visibility = 0.99;
  c.t_b = 1.0;
  c.eta_b = 0.25;
  c.p_dark = 2e-7;
  return c;
}

// Term-by-term oracle for the gain and QBER series.
ObservedChannel series_observation(const PhotonStatistics& stats,
                                   const ChannelDetectorSpec& spec) {
  double q = 0.0, eq = 0.0;
  for (int n = 0; n <= stats.n_max(); ++n) {
    const double y_n = predicted_yield(n, spec);
    q += stats.p(n) * y_n;
    eq += stats.p(n) * y_n * predicted_error(n, spec);
  }
  return {q, eq / q};
}

}  // namespace

TEST_CASE("transmittance follows the dB law") {
  CHECK_THAT(transmittance(0.0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(transmittance(10.0), WithinAbs(0.1, 1e-15));
  CHECK_THAT(transmittance(55.0), WithinRel(3.1622776601683794e-6, 1e-12));
  CHECK_THROWS_AS(transmittance(-1.0), error);
}

TEST_CASE("detection probability of an n-photon pulse") {
  const auto c = reference_channel(0.0);
  CHECK(detection_prob(0, c) == 0.0);
  CHECK_THAT(detection_prob(1, c), WithinAbs(0.25, 1e-15));

  ChannelDetectorSpec weak;
  weak.loss_db = 10.0;
  weak.eta_b = 1.0;
  weak.t_b = 1.0;
  CHECK_THAT(detection_prob(2, weak), WithinAbs(0.19, 1e-15));
}

TEST_CASE("predicted yield and error rate") {
  const auto c = reference_channel(0.0);
  CHECK_THAT(predicted_yield(0, c), WithinAbs(4e-7, 1e-20));
  CHECK_THAT(c.e_misalign(), WithinAbs(0.005, 1e-15));

  // Large n saturates the click probability.
  const double e_inf = (0.5 * c.y0() + c.e_misalign()) / (c.y0() + 1.0);
  CHECK_THAT(predicted_error(4000, c), WithinAbs(e_inf, 1e-12));

  ChannelDetectorSpec dark_free = c;
  dark_free.p_dark = 0.0;
  CHECK_THROWS_AS(predicted_error(0, dark_free), error);
}

TEST_CASE("vacuum statistics leave only dark counts") {
  const auto c = reference_channel(20.0);
  PhotonStatistics vacuum;
  vacuum.probs = {1.0};
  const auto obs = predict_observation(vacuum, c);
  CHECK_THAT(obs.gain, WithinAbs(c.y0(), 1e-18));
  CHECK_THAT(obs.qber, WithinAbs(0.5, 1e-12));
}

TEST_CASE("ideal single photon without dark counts") {
  auto c = reference_channel(10.0);
  c.p_dark = 0.0;
  const auto obs = predict_observation(SourceSpec::ideal_single_photon(), c);
  CHECK_THAT(obs.gain, WithinAbs(detection_prob(1, c), 1e-15));
  CHECK_THAT(obs.qber, WithinAbs(c.e_misalign(), 1e-12));
}

TEST_CASE("closed-form observation matches the term-by-term series") {
  const auto specs = {SourceSpec::smhps(0.3, 4, 0.7, 0.5), SourceSpec::amhps(0.5, 8, 0.7, 0.5),
                      SourceSpec::wcs(0.8), SourceSpec::mhps(0.2, 16)};
  for (const auto& source : specs) {
    for (double loss : {0.0, 10.0, 30.0}) {
      CAPTURE(source_kind_name(source.kind), loss);
      const auto c = reference_channel(loss);
      const auto stats = pmf(source);
      const auto closed = predict_observation(stats, c);
      const auto series = series_observation(stats, c);
      CHECK_THAT(closed.gain, WithinAbs(series.gain, stats.tail_mass + 1e-15));
      CHECK_THAT(closed.qber, WithinAbs(series.qber, 1e-12));
    }
  }
}

TEST_CASE("gain decreases and QBER increases with loss") {
  const auto source = SourceSpec::smhps(0.3, 8, 0.7, 0.5);
  const auto stats = pmf(source);
  double prev_gain = 2.0, prev_qber = -1.0;
  for (double loss = 0.0; loss <= 60.0; loss += 5.0) {
    const auto obs = predict_observation(stats, reference_channel(loss));
    CHECK(obs.gain <= prev_gain + 1e-15);
    CHECK(obs.qber >= prev_qber - 1e-15);
    CHECK(obs.gain >= reference_channel(loss).y0() - 1e-18);
    CHECK(obs.gain <= 1.0);
    CHECK(obs.qber <= 0.5 + 1e-12);
    prev_gain = obs.gain;
    prev_qber = obs.qber;
  }
  // Dark counts dominate at extreme loss: the QBER approaches 1/2.
  const auto far = predict_observation(stats, reference_channel(80.0));
  CHECK(far.qber > 0.45);
}

TEST_CASE("exact yield toggle shifts the gain by at most Y0") {
  const auto stats = pmf(SourceSpec::wcs(0.5));
  for (double loss : {0.0, 15.0, 40.0}) {
    auto approx = reference_channel(loss);
    auto exact = approx;
    exact.exact_yield = true;
    const double q_approx = predict_observation(stats, approx).gain;
    const double q_exact = predict_observation(stats, exact).gain;
    CHECK(std::abs(q_exact - q_approx) <= approx.y0() + 1e-18);
    CHECK(q_exact <= q_approx + 1e-18);
  }
}
