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

#include "paus/phantom.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>

namespace paus {

std::string_view echogenicity_name(Echogenicity e) noexcept {
  switch (e) {
    case Echogenicity::isoechoic: return "isoechoic";
    case Echogenicity::anechoic: return "anechoic";
    case Echogenicity::hypoechoic: return "hypoechoic";
    case Echogenicity::hyperechoic: return "hyperechoic";
  }
  return "unknown";
}

bool EllipseSpec::contains(Vec2 p) const noexcept {
  const double dx = p.x - center.x;
  const double dz = p.z - center.z;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double u = (dx * c + dz * s) / semi_a;
  const double v = (-dx * s + dz * c) / semi_b;
  return u * u + v * v <= 1.0;
}

PhantomConfig PhantomConfig::for_extent(double extent_x, double extent_z) {
  PhantomConfig cfg;
  cfg.extent_x = extent_x;
  cfg.extent_z = extent_z;
  const double side = std::min(extent_x, extent_z);
  cfg.max_semi_a = side * std::numbers::sqrt2 / 2.0;
  cfg.max_semi_b = 0.5 * side * std::numbers::sqrt2 / 2.0;
  return cfg;
}

void PhantomConfig::apply(const KeyValueConfig& kv) {
  static const std::vector<std::string> known = {
      "phantom.extent_x",          "phantom.extent_z",           "phantom.max_ellipses",
      "phantom.background_lo",     "phantom.background_hi",      "phantom.ratio_lo",
      "phantom.ratio_hi",          "phantom.max_semi_a",         "phantom.max_semi_b",
      "phantom.density",           "phantom.attenuation",        "phantom.speckle_density",
      "phantom.speckle_amp_bound", "phantom.hyper_fraction",     "phantom.hyper_increment_lo",
      "phantom.hyper_increment_hi", "phantom.hyper_mode",        "phantom.hyper_speckle_factor"};
  for (const auto& [key, value] : kv.values()) {
    if (key.rfind("phantom.", 0) == 0 && std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(Errc::InvalidConfig, "unknown key " + key);
    }
  }
  extent_x = kv.get_double("phantom.extent_x", extent_x);
  extent_z = kv.get_double("phantom.extent_z", extent_z);
  max_ellipses = static_cast<int>(kv.get_int("phantom.max_ellipses", max_ellipses));
  background_lo = kv.get_double("phantom.background_lo", background_lo);
  background_hi = kv.get_double("phantom.background_hi", background_hi);
  ratio_lo = kv.get_double("phantom.ratio_lo", ratio_lo);
  ratio_hi = kv.get_double("phantom.ratio_hi", ratio_hi);
  max_semi_a = kv.get_double("phantom.max_semi_a", max_semi_a);
  max_semi_b = kv.get_double("phantom.max_semi_b", max_semi_b);
  density = kv.get_double("phantom.density", density);
  attenuation = kv.get_double("phantom.attenuation", attenuation);
  speckle_density = kv.get_double("phantom.speckle_density", speckle_density);
  speckle_amp_bound = kv.get_double("phantom.speckle_amp_bound", speckle_amp_bound);
  hyper_fraction = kv.get_double("phantom.hyper_fraction", hyper_fraction);
  hyper_increment_lo = kv.get_double("phantom.hyper_increment_lo", hyper_increment_lo);
  hyper_increment_hi = kv.get_double("phantom.hyper_increment_hi", hyper_increment_hi);
  hyper_speckle_factor = kv.get_double("phantom.hyper_speckle_factor", hyper_speckle_factor);
  const auto mode = kv.get_string("phantom.hyper_mode", hyper_mode == HyperechoicMode::sos_increment
                                                            ? "sos_increment"
                                                            : "speckle_density");
  if (mode == "sos_increment") {
    hyper_mode = HyperechoicMode::sos_increment;
  } else if (mode == "speckle_density") {
    hyper_mode = HyperechoicMode::speckle_density;
  } else {
    throw Error(Errc::InvalidConfig, "phantom.hyper_mode must be sos_increment or speckle_density");
  }
  if (max_ellipses < 1 || background_lo > background_hi || ratio_lo > ratio_hi ||
      speckle_density < 0.0 || hyper_fraction < 0.0 || hyper_fraction > 1.0 ||
      hyper_increment_lo > hyper_increment_hi) {
    throw Error(Errc::InvalidConfig, "inconsistent phantom ranges");
  }
}

namespace {

// Uniform on (0, hi].
double uniform_open_low(std::mt19937_64& rng, double hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return hi * (1.0 - u(rng));
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

PhantomSpec sample_training_phantom(std::uint64_t seed, const PhantomConfig& cfg) {
  auto rng = make_rng(seed, 0);
  PhantomSpec spec;
  spec.background_sos = uniform(rng, cfg.background_lo, cfg.background_hi);
  const int count = std::uniform_int_distribution<int>(1, cfg.max_ellipses)(rng);
  spec.ellipses.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(spec.ellipses.size()) < count) {
    EllipseSpec e;
    e.center = {uniform(rng, 0.0, cfg.extent_x), uniform(rng, 0.0, cfg.extent_z)};
    e.semi_a = uniform_open_low(rng, cfg.max_semi_a);
    e.semi_b = uniform_open_low(rng, cfg.max_semi_b);
    e.angle = uniform(rng, 0.0, std::numbers::pi);
    e.sos_ratio = uniform(rng, cfg.ratio_lo, cfg.ratio_hi);
    e.echogenicity = Echogenicity::hyperechoic;
    if (e.center.x < 0.0 || e.center.x >= cfg.extent_x || e.center.z < 0.0 ||
        e.center.z >= cfg.extent_z) {
      continue;
    }
    spec.ellipses.push_back(e);
  }
  spec.speckle_seed = rng();
  spec.speckle_density = cfg.speckle_density;
  spec.speckle_amp_bound = cfg.speckle_amp_bound;
  spec.hyper_fraction = cfg.hyper_fraction;
  spec.hyper_increment_lo = cfg.hyper_increment_lo;
  spec.hyper_increment_hi = cfg.hyper_increment_hi;
  return spec;
}

Field<std::int32_t> ellipse_labels(const PhantomSpec& spec, const Grid2D& grid) {
  Field<std::int32_t> labels = Field<std::int32_t>::Zero(grid.nx(), grid.nz());
  for (std::size_t k = 0; k < spec.ellipses.size(); ++k) {
    const auto& e = spec.ellipses[k];
    // Bounding box keeps large grids cheap.
    const double r = std::max(e.semi_a, e.semi_b);
    const auto i0 = std::max<Index>(0, static_cast<Index>(std::floor((e.center.x - r - grid.origin().x) / grid.dx())));
    const auto i1 = std::min<Index>(grid.nx() - 1, static_cast<Index>(std::ceil((e.center.x + r - grid.origin().x) / grid.dx())));
    const auto j0 = std::max<Index>(0, static_cast<Index>(std::floor((e.center.z - r - grid.origin().z) / grid.dx())));
    const auto j1 = std::min<Index>(grid.nz() - 1, static_cast<Index>(std::ceil((e.center.z + r - grid.origin().z) / grid.dx())));
    for (Index i = i0; i <= i1; ++i) {
      for (Index j = j0; j <= j1; ++j) {
        if (e.contains({grid.x(i), grid.z(j)})) labels(i, j) = static_cast<std::int32_t>(k + 1);
      }
    }
  }
  return labels;
}

Medium rasterize_phantom(const PhantomSpec& spec, const Grid2D& grid, double density,
                         double attenuation) {
  Medium m = Medium::homogeneous(grid, spec.background_sos, density, attenuation);
  m.attenuation_power = 1.0;
  const auto labels = ellipse_labels(spec, grid);
  for (Index i = 0; i < grid.nx(); ++i) {
    for (Index j = 0; j < grid.nz(); ++j) {
      if (const auto k = labels(i, j); k > 0) {
        m.sound_speed(i, j) = static_cast<float>(
            spec.background_sos * spec.ellipses[static_cast<std::size_t>(k - 1)].sos_ratio);
      }
    }
  }
  return m;
}

double expected_speckle_count(const Medium& medium, const PhantomSpec& spec, double f0) {
  const double lambda = static_cast<double>(medium.sound_speed.cast<double>().mean()) / f0;
  return spec.speckle_density * medium.grid.extent_x() * medium.grid.extent_z() /
         (lambda * lambda);
}

namespace {

Index draw_count(std::mt19937_64& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  return static_cast<Index>(std::poisson_distribution<long long>(mean)(rng));
}

}  // namespace

Index speckle_count(const Medium& medium, const PhantomSpec& spec, double f0) {
  auto rng = make_rng(spec.speckle_seed, 1);
  return draw_count(rng, expected_speckle_count(medium, spec, f0));
}

std::vector<SpeckleSite> speckle_sites(const Medium& medium, const PhantomSpec& spec, double f0) {
  auto rng = make_rng(spec.speckle_seed, 1);
  const Index n = draw_count(rng, expected_speckle_count(medium, spec, f0));
  const auto& g = medium.grid;
  std::uniform_real_distribution<double> ux(g.origin().x, g.origin().x + g.extent_x());
  std::uniform_real_distribution<double> uz(g.origin().z, g.origin().z + g.extent_z());
  std::uniform_real_distribution<double> amp(-spec.speckle_amp_bound, spec.speckle_amp_bound);
  std::vector<SpeckleSite> sites;
  sites.reserve(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    SpeckleSite s;
    s.pos.x = ux(rng);
    s.pos.z = uz(rng);
    s.perturbation = amp(rng);
    sites.push_back(s);
  }
  return sites;
}

Medium add_speckle(const Medium& medium, const PhantomSpec& spec, double f0,
                   const Fieldf& density_scale) {
  Medium out = medium;
  if (spec.speckle_density <= 0.0) return out;
  const bool thinning = density_scale.size() != 0;
  if (thinning && (density_scale.rows() != medium.grid.nx() ||
                   density_scale.cols() != medium.grid.nz())) {
    throw Error(Errc::ShapeMismatch, "speckle density scale does not match the grid");
  }
  const auto sites = speckle_sites(medium, spec, f0);
  auto keep_rng = make_rng(spec.speckle_seed, 2);
  std::uniform_real_distribution<double> keep(0.0, 1.0);
  for (const auto& s : sites) {
    const auto idx = world_to_grid(s.pos, medium.grid);
    if (thinning) {
      // Draw unconditionally so the stream does not depend on the scale map.
      const double r = keep(keep_rng);
      if (r >= static_cast<double>(density_scale(idx.i, idx.j))) continue;
    }
    out.density(idx.i, idx.j) *= static_cast<float>(1.0 + s.perturbation);
  }
  return out;
}

Medium apply_hyperechoic(const Medium& medium, const Mask& region, const PhantomSpec& spec,
                         std::uint64_t seed) {
  if (region.rows() != medium.grid.nx() || region.cols() != medium.grid.nz()) {
    throw Error(Errc::ShapeMismatch, "region mask does not match the grid");
  }
  std::vector<Index> points;
  for (Index k = 0; k < region.size(); ++k) {
    if (region.data()[k]) points.push_back(k);
  }
  if (points.empty()) throw Error(Errc::EmptyRegion, "hyperechoic region is empty");
  Medium out = medium;
  const auto n = static_cast<std::size_t>(
      std::llround(spec.hyper_fraction * static_cast<double>(points.size())));
  if (n == 0) return out;
  auto rng = make_rng(seed, 3);
  std::vector<Index> chosen;
  chosen.reserve(n);
  std::sample(points.begin(), points.end(), std::back_inserter(chosen), n, rng);
  std::uniform_real_distribution<double> inc(spec.hyper_increment_lo, spec.hyper_increment_hi);
  for (const Index k : chosen) {
    out.sound_speed.data()[k] = static_cast<float>(spec.background_sos * (1.0 + inc(rng)));
  }
  return out;
}

std::string_view eval_pattern_name(EvalPattern p) noexcept {
  switch (p) {
    case EvalPattern::P1_curved_two_layer: return "P1";
    case EvalPattern::P2_straight_layers: return "P2";
    case EvalPattern::P3_inclusions_in_background: return "P3";
  }
  return "P?";
}

EvalPattern parse_eval_pattern(std::string_view name) {
  if (name == "P1" || name == "1" || name == "eval_pattern1") return EvalPattern::P1_curved_two_layer;
  if (name == "P2" || name == "2" || name == "eval_pattern2") return EvalPattern::P2_straight_layers;
  if (name == "P3" || name == "3" || name == "eval_pattern3") return EvalPattern::P3_inclusions_in_background;
  throw Error(Errc::InvalidArgument, "unknown evaluation pattern " + std::string(name));
}

double EvalPatternSpec::boundary_at(double x) const {
  double z = boundary_depth;
  for (const auto& t : boundary_terms) {
    z += t.amplitude * std::sin(2.0 * std::numbers::pi * x / t.wavelength + t.phase);
  }
  return z;
}

std::vector<std::string> EvalPatternSpec::region_names() const {
  if (pattern == EvalPattern::P3_inclusions_in_background) return {"Background", "Inclusions"};
  return {"Layer 1", "Layer 2"};
}

Field<std::int32_t> eval_region_labels(const EvalPatternSpec& spec, const Grid2D& grid) {
  Field<std::int32_t> labels = Field<std::int32_t>::Zero(grid.nx(), grid.nz());
  for (Index i = 0; i < grid.nx(); ++i) {
    const double x = grid.x(i);
    const double zb = spec.pattern == EvalPattern::P3_inclusions_in_background ? 0.0
                                                                                : spec.boundary_at(x);
    for (Index j = 0; j < grid.nz(); ++j) {
      const Vec2 p{x, grid.z(j)};
      if (spec.pattern == EvalPattern::P3_inclusions_in_background) {
        for (const auto& e : spec.inclusions) {
          if (e.contains(p)) labels(i, j) = 1;
        }
      } else if (p.z >= zb) {
        labels(i, j) = 1;
      }
    }
  }
  return labels;
}

Fieldf eval_sos_map(const EvalPatternSpec& spec, const Grid2D& grid) {
  const auto labels = eval_region_labels(spec, grid);
  Fieldf sos(grid.nx(), grid.nz());
  if (spec.pattern == EvalPattern::P3_inclusions_in_background) {
    sos.setConstant(static_cast<float>(spec.layer_soses.at(0)));
    for (Index i = 0; i < grid.nx(); ++i) {
      for (Index j = 0; j < grid.nz(); ++j) {
        for (const auto& e : spec.inclusions) {
          if (e.contains({grid.x(i), grid.z(j)})) {
            sos(i, j) = static_cast<float>(spec.layer_soses[0] * e.sos_ratio);
          }
        }
      }
    }
    return sos;
  }
  for (Index k = 0; k < labels.size(); ++k) {
    sos.data()[k] = static_cast<float>(spec.layer_soses.at(static_cast<std::size_t>(labels.data()[k])));
  }
  return sos;
}

EvalPhantom sample_eval_phantom(EvalPattern pattern, std::uint64_t seed, const Grid2D& grid,
                                double f0, const PhantomConfig& cfg) {
  auto rng = make_rng(seed, 10 + static_cast<std::uint64_t>(pattern));
  const double width = grid.extent_x();
  const double depth = grid.extent_z();
  // Shapes are specified on the 38.4 mm training medium and scaled to the grid.
  const double scale = std::min(width, depth) / 38.4e-3;
  EvalPatternSpec spec;
  spec.pattern = pattern;
  spec.seed = seed;
  switch (pattern) {
    case EvalPattern::P1_curved_two_layer: {
      spec.layer_soses = {uniform(rng, cfg.background_lo, cfg.background_hi),
                          uniform(rng, cfg.background_lo, cfg.background_hi)};
      spec.boundary_depth = uniform(rng, 0.35, 0.65) * depth;
      const int terms = std::uniform_int_distribution<int>(2, 4)(rng);
      for (int k = 0; k < terms; ++k) {
        spec.boundary_terms.push_back({uniform(rng, 0.25, 1.0) * 4e-3 * scale / terms,
                                       uniform(rng, 10e-3, 40e-3) * scale,
                                       uniform(rng, 0.0, 2.0 * std::numbers::pi)});
      }
      spec.region_echogenicity = {Echogenicity::isoechoic, Echogenicity::isoechoic};
      break;
    }
    case EvalPattern::P2_straight_layers: {
      spec.layer_soses = {uniform(rng, cfg.background_lo, cfg.background_hi),
                          uniform(rng, cfg.background_lo, cfg.background_hi)};
      spec.boundary_depth = uniform(rng, 0.35, 0.65) * depth;
      spec.region_echogenicity = {Echogenicity::isoechoic, Echogenicity::isoechoic};
      break;
    }
    case EvalPattern::P3_inclusions_in_background: {
      const double bg = uniform(rng, cfg.background_lo, cfg.background_hi);
      spec.layer_soses = {bg};
      const int count = std::uniform_int_distribution<int>(1, 3)(rng);
      double mean_ratio = 0.0;
      for (int k = 0; k < count; ++k) {
        EllipseSpec e;
        e.center = {uniform(rng, 0.2, 0.8) * width, uniform(rng, 0.2, 0.8) * depth};
        e.semi_a = uniform(rng, 2e-3, 6e-3) * scale;
        e.semi_b = uniform(rng, 2e-3, 6e-3) * scale;
        e.angle = uniform(rng, 0.0, std::numbers::pi);
        e.sos_ratio = uniform(rng, cfg.background_lo, cfg.background_hi) / bg;
        e.echogenicity = Echogenicity::hypoechoic;
        mean_ratio += e.sos_ratio / count;
        spec.inclusions.push_back(e);
      }
      spec.layer_soses.push_back(bg * mean_ratio);
      spec.region_echogenicity = {Echogenicity::isoechoic, Echogenicity::hypoechoic};
      break;
    }
  }
  for (const double fx : {0.25, 0.5, 0.75}) {
    for (const double fz : {0.15, 0.35, 0.55, 0.75}) {
      spec.absorber_coords.push_back({grid.origin().x + fx * width, grid.origin().z + fz * depth});
    }
  }

  Medium medium = Medium::homogeneous(grid, spec.layer_soses[0], cfg.density, cfg.attenuation);
  medium.sound_speed = eval_sos_map(spec, grid);
  const auto labels = eval_region_labels(spec, grid);
  Fieldf scale_map(grid.nx(), grid.nz());
  for (Index k = 0; k < labels.size(); ++k) {
    const auto echo = spec.region_echogenicity[static_cast<std::size_t>(labels.data()[k])];
    scale_map.data()[k] = echo == Echogenicity::anechoic ? 0.0f
                          : echo == Echogenicity::hypoechoic ? 0.25f
                                                             : 1.0f;
  }
  PhantomSpec speckle;
  speckle.background_sos = spec.layer_soses[0];
  speckle.speckle_seed = rng();
  speckle.speckle_density = cfg.speckle_density;
  speckle.speckle_amp_bound = cfg.speckle_amp_bound;
  speckle.hyper_fraction = cfg.hyper_fraction;
  speckle.hyper_increment_lo = cfg.hyper_increment_lo;
  speckle.hyper_increment_hi = cfg.hyper_increment_hi;
  medium = add_speckle(medium, speckle, f0, scale_map);
  for (std::size_t r = 0; r < spec.region_echogenicity.size(); ++r) {
    if (spec.region_echogenicity[r] != Echogenicity::hyperechoic) continue;
    const Mask region = labels == static_cast<std::int32_t>(r);
    if (!region.any()) continue;
    PhantomSpec layer = speckle;
    layer.background_sos = spec.layer_soses[r];
    medium = apply_hyperechoic(medium, region, layer, speckle.speckle_seed + r);
  }
  return {std::move(medium), std::move(spec)};
}

Image2D make_initial_pressure(const std::vector<Vec2>& coords, const Grid2D& grid) {
  Image2D img{Fieldf::Zero(grid.nx(), grid.nz()), grid, ImageKind::initial_pressure};
  for (const auto& c : coords) {
    const auto idx = world_to_grid(c, grid);
    img.values(idx.i, idx.j) = 1.0f;
  }
  return img;
}

}  // namespace paus
