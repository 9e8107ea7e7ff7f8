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

#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "paus/core.hpp"

namespace paus {

/// Gain in dB applied at time t: alpha * f0[MHz] * depth[cm], depth = c_ref t / 2.
double tgc_gain_db(double t, double alpha_db_mhz_cm, double f0, double c_ref);

/// Time-gain compensation. Samples at t <= 0 keep unit gain.
RFFrame apply_tgc(const RFFrame& rf, double alpha_db_mhz_cm = 0.5, double f0 = 7e6,
                  double c_ref = 1540.0);

struct NormalizedFrame {
  RFFrame frame;
  std::vector<Index> flat_channels;  // zero-variance channels, emitted as zeros
};

/// Zero mean, unit population standard deviation per channel.
NormalizedFrame normalize_channels(const RFFrame& rf);

inline constexpr double kNoiseDisabled = -std::numeric_limits<double>::infinity();

/// Adds white Gaussian noise with std 10^(snr_db / 20) * rms(channel) to each
/// channel. Each channel draws from its own stream, so a channel's noise does
/// not depend on the other channels.
RFFrame add_thermal_noise(const RFFrame& rf, double snr_db, std::uint64_t seed);

struct NoiseConfig {
  double thermal_snr_lo = -80.0;
  double thermal_snr_hi = -40.0;
  std::vector<Fieldf> system_noise_templates;
  std::uint64_t seed = 0;

  /// Level drawn uniformly from [thermal_snr_lo, thermal_snr_hi].
  double draw_snr_db(std::uint64_t record_seed) const;
};

inline constexpr Index kSystemNoiseSamples = 50;

/// First 50 samples of every channel.
Fieldf harvest_system_noise(const RFFrame& rf);

/// Adds one seeded template from `bank` to the leading samples of each
/// channel. `chosen`, when given, receives the template index.
RFFrame add_system_noise(const RFFrame& rf, const std::vector<Fieldf>& bank, std::uint64_t seed,
                         Index* chosen = nullptr);

/// Stand-in for measured transmit interference: short bursts at f0 with random
/// phase, delay and amplitude inside the first 50 samples.
std::vector<Fieldf> synthetic_noise_bank(Index channels, Index count, double f0, double fs,
                                         double amplitude, std::uint64_t seed);

struct RfShape {
  Index channels;
  Index samples;
};

inline constexpr RfShape kFullRfShape{128, 1024};

/// Linear interpolation by `channel_factor` across channels and `time_factor`
/// in time. Output index k sits at input position k / factor; positions past
/// the last input sample repeat it. Throws ShapeMismatch unless the input
/// matches `expected`.
Fieldf upsample_rf(const Fieldf& rf, RfShape expected = kFullRfShape, Index channel_factor = 5,
                   Index time_factor = 4);

}  // namespace paus
