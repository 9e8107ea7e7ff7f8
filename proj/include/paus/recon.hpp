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

#include <vector>

#include "paus/core.hpp"
#include "paus/signal.hpp"

namespace paus {

/// Where the receive elements sit in world coordinates.
struct ArrayLayout {
  std::vector<double> element_x;  // element centres, m
  double face_z = 0.0;            // depth of the array face, m
  double pitch = 0.3e-3;
  double center_frequency = 7e6;

  static ArrayLayout from(const TransducerArray& array, const Grid2D& sim_grid);
};

enum class SosSourceKind { uniform, map };

struct SosSource {
  SosSourceKind kind = SosSourceKind::uniform;
  double uniform_c = 1540.0;
  SosMap map;

  static SosSource uniform(double c) { return {SosSourceKind::uniform, c, {}}; }
  static SosSource from_map(SosMap m) { return {SosSourceKind::map, 0.0, std::move(m)}; }
};

struct ReconConfig {
  /// 38.4 mm face by 39.4 mm depth at 0.05 mm.
  Grid2D grid{768, 788, 0.05e-3};
  SosSource sos = SosSource::uniform(1540.0);
  ArrayLayout layout;
  RfShape rf_shape = kFullRfShape;
  Index channel_upsample = 5;
  Index time_upsample = 4;
  double density = 1020.0;
  double cfl = 0.3;
  Index pml_points = 20;
  double pml_alpha = 2.0;
  bool envelope = true;
  double dynamic_range_db = 40.0;
  double f_number = 1.0;
  double zero_top = 2e-3;  // B-mode band under the face set to the floor
};

/// Sound speed on `cfg.grid` for the configured source; maps are resampled
/// bilinearly with edge replication past their extent.
Fieldf recon_sound_speed(const ReconConfig& cfg);

/// Recon-grid face points fed by each upsampled channel, after dropping
/// sensors off the grid and duplicates.
struct VirtualSensors {
  std::vector<Index> channel;     // upsampled channel row
  std::vector<GridIndex> points;  // matching recon-grid point
};

VirtualSensors virtual_sensors(const ReconConfig& cfg, Index upsampled_channels);

/// Time-reversal reconstruction, rectified and peak-normalised to [0, 1].
/// `rf` is either the raw frame (cfg.rf_shape) or already upsampled.
Image2D time_reversal(const RFFrame& rf, const ReconConfig& cfg);

/// Plane-wave delay-and-sum B-mode in dB, clamped to [-dynamic_range_db, 0].
Image2D das_bmode(const RFFrame& rf, double c, const ReconConfig& cfg);

/// One-way delay-and-sum of photoacoustic channel data at a uniform SoS;
/// returns the envelope magnitude (or the signed sum with envelope off).
Image2D das_pa(const RFFrame& rf, double c, const ReconConfig& cfg);

/// sum(I^4) / sum(I^2)^2.
double sharpness(const Image2D& img);

struct AutofocusResult {
  double best_sos = 0.0;
  std::vector<double> candidates;
  std::vector<double> sharpness_curve;
};

/// Sweeps uniform SoS candidates lo, lo + step, ... <= hi with a PA
/// delay-and-sum image and keeps the sharpest (lowest SoS on ties).
AutofocusResult autofocus_sos(const RFFrame& rf_pa, const ReconConfig& cfg, double lo = 1400.0,
                              double hi = 1600.0, double step = 5.0);

}  // namespace paus
