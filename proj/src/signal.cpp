/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pausim Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "paus/signal.hpp"

#include <cmath>
#include <numbers>

namespace paus {

double tgc_gain_db(double t, double alpha_db_mhz_cm, double f0, double c_ref) {
  if (t <= 0.0) return 0.0;
  const double depth_cm = c_ref * t / 2.0 * 100.0;
  return alpha_db_mhz_cm * (f0 / 1e6) * depth_cm;
}

RFFrame apply_tgc(const RFFrame& rf, double alpha_db_mhz_cm, double f0, double c_ref) {
  if (alpha_db_mhz_cm < 0.0) throw Error(Errc::NegativeAlpha, "TGC coefficient must be >= 0");
  RFFrame out = rf;
  if (alpha_db_mhz_cm == 0.0) return out;
  for (Index n = 0; n < rf.samples(); ++n) {
    const double g = std::pow(10.0, tgc_gain_db(rf.time(n), alpha_db_mhz_cm, f0, c_ref) / 20.0);
    out.data.col(n) *= static_cast<float>(g);
  }
  return out;
}

NormalizedFrame normalize_channels(const RFFrame& rf) {
  NormalizedFrame out{rf, {}};
  const Index m = rf.samples();
  for (Index c = 0; c < rf.channels(); ++c) {
    double mean = 0.0;
    for (Index n = 0; n < m; ++n) mean += static_cast<double>(rf.data(c, n));
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (Index n = 0; n < m; ++n) {
      const double d = static_cast<double>(rf.data(c, n)) - mean;
      var += d * d;
    }
    var /= static_cast<double>(m);
    if (!(var > 0.0) || std::sqrt(var) <= 1e-30 * std::max(1.0, std::abs(mean))) {
      out.frame.data.row(c).setZero();
      out.flat_channels.push_back(c);
      continue;
    }
    const double inv = 1.0 / std::sqrt(var);
    for (Index n = 0; n < m; ++n) {
      out.frame.data(c, n) = static_cast<float>((static_cast<double>(rf.data(c, n)) - mean) * inv);
    }
  }
  return out;
}

RFFrame add_thermal_noise(const RFFrame& rf, double snr_db, std::uint64_t seed) {
  RFFrame out = rf;
  if (std::isinf(snr_db) && snr_db < 0.0) return out;
  const double rel = std::pow(10.0, snr_db / 20.0);
  for (Index c = 0; c < rf.channels(); ++c) {
    const double ps = rf.data.row(c).cast<double>().square().mean();
    const double sigma = rel * std::sqrt(ps);
    if (sigma == 0.0) continue;
    auto rng = make_rng(seed, 0x7e000000u + static_cast<std::uint64_t>(c));
    std::normal_distribution<double> noise(0.0, sigma);
    for (Index n = 0; n < rf.samples(); ++n) {
      out.data(c, n) = static_cast<float>(static_cast<double>(rf.data(c, n)) + noise(rng));
    }
  }
  return out;
}

double NoiseConfig::draw_snr_db(std::uint64_t record_seed) const {
  if (thermal_snr_lo > thermal_snr_hi) {
    throw Error(Errc::InvalidArgument, "thermal SNR range is inverted");
  }
  auto rng = make_rng(record_seed ^ seed, 0x5a);
  if (thermal_snr_lo == thermal_snr_hi) return thermal_snr_lo;
  return std::uniform_real_distribution<double>(thermal_snr_lo, thermal_snr_hi)(rng);
}

Fieldf harvest_system_noise(const RFFrame& rf) {
  if (rf.samples() < kSystemNoiseSamples) {
    throw Error(Errc::TooShort, "system noise needs at least 50 samples, frame has " +
                                    std::to_string(rf.samples()));
  }
  return rf.data.leftCols(kSystemNoiseSamples);
}

RFFrame add_system_noise(const RFFrame& rf, const std::vector<Fieldf>& bank, std::uint64_t seed,
                         Index* chosen) {
  if (bank.empty()) throw Error(Errc::EmptyBank, "system noise bank is empty");
  auto rng = make_rng(seed, 0x5e);
  const auto pick = static_cast<Index>(
      std::uniform_int_distribution<std::size_t>(0, bank.size() - 1)(rng));
  const Fieldf& t = bank[static_cast<std::size_t>(pick)];
  if (t.rows() != rf.channels()) {
    throw Error(Errc::ShapeMismatch, "noise template has " + std::to_string(t.rows()) +
                                         " channels, frame has " + std::to_string(rf.channels()));
  }
  RFFrame out = rf;
  const Index n = std::min(t.cols(), rf.samples());
  out.data.leftCols(n) += t.leftCols(n);
  if (chosen != nullptr) *chosen = pick;
  return out;
}

std::vector<Fieldf> synthetic_noise_bank(Index channels, Index count, double f0, double fs,
                                         double amplitude, std::uint64_t seed) {
  std::vector<Fieldf> bank;
  auto rng = make_rng(seed, 0x5b);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double sigma_t = 1.0 / f0;  // about two cycles of envelope
  for (Index b = 0; b < count; ++b) {
    Fieldf t = Fieldf::Zero(channels, kSystemNoiseSamples);
    const double centre = (5.0 + 35.0 * u(rng)) / fs;
    for (Index c = 0; c < channels; ++c) {
      const double phase = 2.0 * std::numbers::pi * u(rng);
      const double amp = amplitude * (0.5 + 0.5 * u(rng));
      const double jitter = (u(rng) - 0.5) * 4.0 / fs;
      for (Index n = 0; n < kSystemNoiseSamples; ++n) {
        const double dt = static_cast<double>(n) / fs - centre - jitter;
        t(c, n) = static_cast<float>(amp * std::exp(-0.5 * dt * dt / (sigma_t * sigma_t)) *
                                     std::cos(2.0 * std::numbers::pi * f0 * dt + phase));
      }
    }
    bank.push_back(std::move(t));
  }
  return bank;
}

Fieldf upsample_rf(const Fieldf& rf, RfShape expected, Index channel_factor, Index time_factor) {
  if (rf.rows() != expected.channels || rf.cols() != expected.samples) {
    throw Error(Errc::ShapeMismatch, "RF frame is " + std::to_string(rf.rows()) + "x" +
                                         std::to_string(rf.cols()) + ", expected " +
                                         std::to_string(expected.channels) + "x" +
                                         std::to_string(expected.samples));
  }
  if (channel_factor < 1 || time_factor < 1) {
    throw Error(Errc::InvalidArgument, "upsampling factors must be >= 1");
  }
  const Index nc = rf.rows();
  const Index ns = rf.cols();
  Fieldf out(nc * channel_factor, ns * time_factor);
  for (Index r = 0; r < out.rows(); ++r) {
    const Index c0 = std::min(r / channel_factor, nc - 1);
    const Index c1 = std::min(c0 + 1, nc - 1);
    const double fc = c0 + 1 < nc ? static_cast<double>(r % channel_factor) / channel_factor : 0.0;
    for (Index k = 0; k < out.cols(); ++k) {
      const Index s0 = std::min(k / time_factor, ns - 1);
      const Index s1 = std::min(s0 + 1, ns - 1);
      const double fs = s0 + 1 < ns ? static_cast<double>(k % time_factor) / time_factor : 0.0;
      const double a = (1.0 - fs) * rf(c0, s0) + fs * rf(c0, s1);
      const double b = (1.0 - fs) * rf(c1, s0) + fs * rf(c1, s1);
      out(r, k) = static_cast<float>((1.0 - fc) * a + fc * b);
    }
  }
  return out;
}

}  // namespace paus
