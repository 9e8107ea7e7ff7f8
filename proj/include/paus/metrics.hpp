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

#include <string>

#include "paus/core.hpp"

namespace paus {

struct RegionMask {
  Mask mask;
  std::string label = "Global";

  static RegionMask all(Index nx, Index nz, std::string label = "Global");
};

/// Root mean square difference over the mask (all points when `mask` is null).
double rmse(const Fieldf& pred, const Fieldf& gt, const RegionMask* mask = nullptr);
double rmse(const SosMap& pred, const SosMap& gt, const RegionMask* mask = nullptr);

struct SsimParams {
  Index window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean SSIM over Gaussian windows centred on ROI points whose window lies
/// inside the image.
double local_ssim(const Fieldf& a, const Fieldf& b, const RegionMask& roi, const SsimParams& p = {});
double local_ssim(const Image2D& a, const Image2D& b, const RegionMask& roi, const SsimParams& p = {});

/// Normalised 2D Gaussian window used by local_ssim (window x window).
Fieldd ssim_window(const SsimParams& p);

/// Lateral full width at half maximum (mm) through the brightest local
/// maximum within 1 mm of `seed`.
double lateral_fwhm(const Image2D& img, Vec2 seed, double search_radius = 1e-3);

/// 20 log10(mean(signal) / std(background)); signal is value >= threshold.
double snr_db(const Fieldf& img, double threshold = 0.35);
double snr_db(const Image2D& img, double threshold = 0.35);

/// Square ROI of half-width `half` around `centre`, clipped to the grid.
RegionMask box_roi(const Grid2D& grid, Vec2 centre, double half, std::string label = "ROI");

}  // namespace paus
