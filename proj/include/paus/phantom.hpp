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
#include <random>
#include <string>
#include <vector>

#include "paus/config.hpp"
#include "paus/core.hpp"

namespace paus {

enum class Echogenicity { isoechoic, anechoic, hypoechoic, hyperechoic };

std::string_view echogenicity_name(Echogenicity e) noexcept;

struct EllipseSpec {
  Vec2 center;
  double semi_a = 0.0;  // m
  double semi_b = 0.0;  // m
  double angle = 0.0;   // rad
  double sos_ratio = 1.0;
  Echogenicity echogenicity = Echogenicity::hyperechoic;

  bool contains(Vec2 p) const noexcept;
};

/// How hyperechoic inclusions are made brighter.
enum class HyperechoicMode { sos_increment, speckle_density };

struct PhantomSpec {
  double background_sos = 1540.0;
  std::vector<EllipseSpec> ellipses;
  std::uint64_t speckle_seed = 0;
  double speckle_density = 3.0;      // scatterers per wavelength^2
  double speckle_amp_bound = 0.03;   // multiplicative density perturbation bound
  double hyper_fraction = 0.10;
  double hyper_increment_lo = 0.07;
  double hyper_increment_hi = 0.11;
};

/// Sampling ranges for training phantoms; keys are documented in README.
struct PhantomConfig {
  double extent_x = 38.4e-3;
  double extent_z = 38.4e-3;
  int max_ellipses = 5;
  double background_lo = 1400.0;
  double background_hi = 1600.0;
  double ratio_lo = 1.01;
  double ratio_hi = 1.07;
  double max_semi_a = 38.4e-3 * 0.70710678118654752;
  double max_semi_b = 19.2e-3 * 0.70710678118654752;
  double density = 1020.0;
  double attenuation = 0.5;
  double speckle_density = 3.0;
  double speckle_amp_bound = 0.03;
  double hyper_fraction = 0.10;
  double hyper_increment_lo = 0.07;
  double hyper_increment_hi = 0.11;
  HyperechoicMode hyper_mode = HyperechoicMode::sos_increment;
  double hyper_speckle_factor = 2.0;  // speckle density multiplier for speckle_density mode

  /// Ranges scaled to a medium of the given size (semi-axis bounds follow the extents).
  static PhantomConfig for_extent(double extent_x, double extent_z);

  /// Overrides fields from `phantom.*` keys; unknown `phantom.*` keys throw InvalidConfig.
  void apply(const KeyValueConfig& kv);
};

PhantomSpec sample_training_phantom(std::uint64_t seed, const PhantomConfig& cfg);

/// Region labels on `grid`: 0 for background, k for the k-th ellipse (1-based)
/// that owns the point after later ellipses override earlier ones.
Field<std::int32_t> ellipse_labels(const PhantomSpec& spec, const Grid2D& grid);

Medium rasterize_phantom(const PhantomSpec& spec, const Grid2D& grid, double density = 1020.0,
                         double attenuation = 0.5);

struct SpeckleSite {
  Vec2 pos;
  double perturbation;  // density multiplier is (1 + perturbation)
};

/// Mean scatterer count for the medium: density * area / lambda^2, lambda = mean(c) / f0.
double expected_speckle_count(const Medium& medium, const PhantomSpec& spec, double f0);

/// Number of scatterers `speckle_sites` draws, without drawing the sites.
Index speckle_count(const Medium& medium, const PhantomSpec& spec, double f0);

/// Poisson-distributed scatterer sites, uniform over the medium extent.
std::vector<SpeckleSite> speckle_sites(const Medium& medium, const PhantomSpec& spec, double f0);

/// Perturbs density at each scatterer site. `density_scale`, when non-empty,
/// thins scatterers per point (0 = anechoic, 0.25 = hypoechoic, 1 = isoechoic).
Medium add_speckle(const Medium& medium, const PhantomSpec& spec, double f0,
                   const Fieldf& density_scale = {});

/// Raises the SoS of round(hyper_fraction * |region|) randomly chosen region
/// points to background * (1 + u), u ~ U[hyper_increment_lo, hyper_increment_hi].
Medium apply_hyperechoic(const Medium& medium, const Mask& region, const PhantomSpec& spec,
                         std::uint64_t seed);

enum class EvalPattern { P1_curved_two_layer, P2_straight_layers, P3_inclusions_in_background };

std::string_view eval_pattern_name(EvalPattern p) noexcept;  // "P1", "P2", "P3"
EvalPattern parse_eval_pattern(std::string_view name);

struct SinusoidComponent {
  double amplitude;   // m
  double wavelength;  // m
  double phase;       // rad
};

struct EvalPatternSpec {
  EvalPattern pattern = EvalPattern::P1_curved_two_layer;
  std::vector<double> layer_soses;  // per region label
  double boundary_depth = 0.0;      // P1 mean depth, P2 boundary depth
  std::vector<SinusoidComponent> boundary_terms;  // P1 only
  std::vector<EllipseSpec> inclusions;            // P3 only
  std::vector<Echogenicity> region_echogenicity;  // per region label
  std::vector<Vec2> absorber_coords;
  std::uint64_t seed = 0;

  /// Depth of the layer boundary at lateral position x (P1, P2).
  double boundary_at(double x) const;
  std::vector<std::string> region_names() const;
};

struct EvalPhantom {
  Medium medium;
  EvalPatternSpec spec;
};

/// Region label per grid point: P1/P2 0 = Layer 1 (top), 1 = Layer 2; P3 0 =
/// Background, 1 = Inclusions.
Field<std::int32_t> eval_region_labels(const EvalPatternSpec& spec, const Grid2D& grid);

/// Ground-truth SoS of an evaluation pattern without speckle or increments.
Fieldf eval_sos_map(const EvalPatternSpec& spec, const Grid2D& grid);

EvalPhantom sample_eval_phantom(EvalPattern pattern, std::uint64_t seed, const Grid2D& grid,
                                double f0, const PhantomConfig& cfg = {});

/// Zero field with 1.0 at the grid point nearest each coordinate.
Image2D make_initial_pressure(const std::vector<Vec2>& coords, const Grid2D& grid);

}  // namespace paus
