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

#include "support.hpp"

#include <cmath>
#include <numbers>

#include "paus/phantom.hpp"

using namespace paus;

namespace {

bool same_spec(const PhantomSpec& a, const PhantomSpec& b) {
  if (a.background_sos != b.background_sos || a.ellipses.size() != b.ellipses.size() ||
      a.speckle_seed != b.speckle_seed)
    return false;
  for (std::size_t k = 0; k < a.ellipses.size(); ++k) {
    const auto& x = a.ellipses[k];
    const auto& y = b.ellipses[k];
    if (x.center.x != y.center.x || x.center.z != y.center.z || x.semi_a != y.semi_a ||
        x.semi_b != y.semi_b || x.angle != y.angle || x.sos_ratio != y.sos_ratio ||
        x.echogenicity != y.echogenicity)
      return false;
  }
  return true;
}

const Grid2D kSosGrid(384, 384, 1e-4);

}  // namespace

TEST_CASE("sample_training_phantom is a pure function of the seed") {
  const PhantomConfig cfg;
  CHECK(same_spec(sample_training_phantom(42, cfg), sample_training_phantom(42, cfg)));
  CHECK_FALSE(same_spec(sample_training_phantom(42, cfg), sample_training_phantom(43, cfg)));
}

TEST_CASE("training phantom parameters stay inside their ranges") {
  const PhantomConfig cfg;
  double sum = 0.0;
  const int n = 2000;
  for (int s = 0; s < n; ++s) {
    const auto spec = sample_training_phantom(static_cast<std::uint64_t>(s), cfg);
    CHECK(spec.background_sos >= 1400.0);
    CHECK(spec.background_sos <= 1600.0);
    sum += spec.background_sos;
    CHECK(spec.ellipses.size() >= 1);
    CHECK(spec.ellipses.size() <= 5);
    for (const auto& e : spec.ellipses) {
      CHECK(e.sos_ratio >= 1.01);
      CHECK(e.sos_ratio <= 1.07);
      CHECK(e.semi_a > 0.0);
      CHECK(e.semi_a <= 38.4e-3 * std::numbers::sqrt2 / 2 + 1e-12);
      CHECK(e.semi_b > 0.0);
      CHECK(e.semi_b <= 19.2e-3 * std::numbers::sqrt2 / 2 + 1e-12);
      CHECK(e.center.x >= 0.0);
      CHECK(e.center.x < cfg.extent_x);
      CHECK(e.center.z >= 0.0);
      CHECK(e.center.z < cfg.extent_z);
    }
  }
  // U[1400, 1600] has std 57.7; 5 sigma of the sample mean at n = 2000 is 6.5.
  CHECK(std::abs(sum / n - 1500.0) < 6.5);
}

TEST_CASE("rasterize_phantom without ellipses is constant") {
  PhantomSpec spec;
  spec.background_sos = 1512.5;
  const Medium m = rasterize_phantom(spec, Grid2D(32, 40, 1e-4));
  CHECK((m.sound_speed == 1512.5f).all());
  CHECK((m.density == 1020.0f).all());
  CHECK(m.attenuation_coeff == 0.5);
  CHECK(m.attenuation_power == 1.0);
}

TEST_CASE("rasterize_phantom fills ellipses, later ones winning") {
  PhantomSpec spec;
  spec.background_sos = 1500.0;
  spec.ellipses.push_back({{19.2e-3, 19.2e-3}, 5e-3, 3e-3, 0.0, 1.05});
  const Medium one = rasterize_phantom(spec, kSosGrid);
  const auto c = world_to_grid({19.2e-3, 19.2e-3}, kSosGrid);
  CHECK(one.sound_speed(c.i, c.j) == doctest::Approx(1500.0 * 1.05));
  CHECK(one.sound_speed(0, 0) == doctest::Approx(1500.0));

  spec.ellipses.push_back({{19.2e-3, 19.2e-3}, 1e-3, 1e-3, 0.0, 1.02});
  const Medium two = rasterize_phantom(spec, kSosGrid);
  CHECK(two.sound_speed(c.i, c.j) == doctest::Approx(1500.0 * 1.02));

  const auto labels = ellipse_labels(spec, kSosGrid);
  CHECK(labels(c.i, c.j) == 2);
  CHECK(labels(0, 0) == 0);
}

TEST_CASE("rasterised ellipse area matches pi a b") {
  PhantomSpec spec;
  spec.background_sos = 1500.0;
  const double a = 8e-3;
  const double b = 4.5e-3;
  spec.ellipses.push_back({{18e-3, 20e-3}, a, b, 0.6, 1.03});
  const Medium m = rasterize_phantom(spec, kSosGrid);
  const double inside = (m.sound_speed > 1501.0f).count();
  const double frac = inside / static_cast<double>(kSosGrid.size());
  const double expect = std::numbers::pi * a * b / (kSosGrid.extent_x() * kSosGrid.extent_z());
  CHECK(std::abs(frac / expect - 1.0) < 0.01);
}

TEST_CASE("EllipseSpec containment honours rotation") {
  EllipseSpec e{{0.0, 0.0}, 2.0, 1.0, std::numbers::pi / 2, 1.0};
  CHECK(e.contains({0.0, 1.9}));
  CHECK_FALSE(e.contains({1.9, 0.0}));
}

TEST_CASE("speckle count follows the Poisson mean of density * area / lambda^2") {
  const Medium m = Medium::homogeneous(kSosGrid, 1540.0);
  PhantomSpec spec;
  spec.background_sos = 1540.0;
  const double lambda = 1540.0 / 7e6;
  const double expect = 3.0 * (38.4e-3 / lambda) * (38.4e-3 / lambda);
  CHECK(expected_speckle_count(m, spec, 7e6) == doctest::Approx(expect).epsilon(1e-9));
  CHECK(expect == doctest::Approx(91400).epsilon(0.005));
  for (std::uint64_t s = 0; s < 5; ++s) {
    spec.speckle_seed = s;
    const auto n = static_cast<double>(speckle_count(m, spec, 7e6));
    CHECK(std::abs(n - expect) <= 3.0 * std::sqrt(expect));
  }
}

TEST_CASE("speckle counts have Poisson mean and variance") {
  const Medium m = Medium::homogeneous(Grid2D(64, 64, 1e-4), 1500.0);
  PhantomSpec spec;
  spec.background_sos = 1500.0;
  const double mu = expected_speckle_count(m, spec, 3e6);
  const int n = 4000;
  double s1 = 0.0;
  double s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    spec.speckle_seed = static_cast<std::uint64_t>(k);
    const double c = static_cast<double>(speckle_count(m, spec, 3e6));
    s1 += c;
    s2 += c * c;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::abs(mean - mu) < 5.0 * std::sqrt(mu / n));
  CHECK(std::abs(var / mu - 1.0) < 0.15);
}

TEST_CASE("speckle perturbs density only, within the amplitude bound") {
  const Medium m = Medium::homogeneous(Grid2D(128, 128, 1e-4), 1500.0);
  PhantomSpec spec;
  spec.background_sos = 1500.0;
  spec.speckle_seed = 9;
  const auto sites = speckle_sites(m, spec, 3e6);
  CHECK(static_cast<Index>(sites.size()) == speckle_count(m, spec, 3e6));
  for (const auto& s : sites) {
    CHECK(std::abs(s.perturbation) <= 0.03);
    CHECK(m.grid.contains(s.pos));
  }
  const Medium sp = add_speckle(m, spec, 3e6);
  CHECK((sp.sound_speed == m.sound_speed).all());
  CHECK((sp.density != m.density).any());
  // A point hit by several scatterers compounds the factors, so the bound is per site.
  CHECK(((sp.density / m.density - 1.0f).abs() <= 0.1f).all());

  const Medium again = add_speckle(m, spec, 3e6);
  CHECK((again.density == sp.density).all());
}

TEST_CASE("zero speckle density leaves the medium unchanged") {
  const Medium m = Medium::homogeneous(Grid2D(32, 32, 1e-4), 1500.0);
  PhantomSpec spec;
  spec.speckle_density = 0.0;
  const Medium out = add_speckle(m, spec, 3e6);
  CHECK((out.density == m.density).all());
}

TEST_CASE("density scale of zero removes scatterers") {
  const Medium m = Medium::homogeneous(Grid2D(64, 64, 1e-4), 1500.0);
  PhantomSpec spec;
  spec.speckle_seed = 1;
  const Medium out = add_speckle(m, spec, 3e6, Fieldf::Zero(64, 64));
  CHECK((out.density == m.density).all());
}

TEST_CASE("apply_hyperechoic modifies exactly the requested fraction") {
  const Grid2D g(50, 40, 1e-4);
  const Medium m = Medium::homogeneous(g, 1500.0);
  Mask region = Mask::Constant(50, 40, false);
  region.block(10, 0, 25, 40).setConstant(true);  // 1000 points
  REQUIRE(region.count() == 1000);
  PhantomSpec spec;
  spec.background_sos = 1500.0;
  const Medium out = apply_hyperechoic(m, region, spec, 77);
  const Mask changed = out.sound_speed != m.sound_speed;
  CHECK(changed.count() == 100);
  CHECK((changed && !region).count() == 0);
  for (Index k = 0; k < changed.size(); ++k) {
    if (!changed.data()[k]) continue;
    CHECK(out.sound_speed.data()[k] >= 1.07f * 1500.0f - 1e-3f);
    CHECK(out.sound_speed.data()[k] <= 1.11f * 1500.0f + 1e-3f);
  }
  CHECK((out.density == m.density).all());

  spec.hyper_fraction = 0.0;
  CHECK((apply_hyperechoic(m, region, spec, 77).sound_speed == m.sound_speed).all());
  CHECK_ERRC(apply_hyperechoic(m, Mask::Constant(50, 40, false), spec, 1), Errc::EmptyRegion);
}

TEST_CASE("apply_hyperechoic fraction rounds to nearest") {
  const Grid2D g(16, 16, 1e-4);
  const Medium m = Medium::homogeneous(g, 1450.0);
  PhantomSpec spec;
  spec.background_sos = 1450.0;
  for (Index n : {1, 4, 5, 14, 15, 25, 256}) {
    Mask region = Mask::Constant(16, 16, false);
    for (Index k = 0; k < n; ++k) region.data()[k] = true;
    const Medium out = apply_hyperechoic(m, region, spec, static_cast<std::uint64_t>(n));
    CHECK((out.sound_speed != m.sound_speed).count() == std::lround(0.1 * static_cast<double>(n)));
  }
}

TEST_CASE("evaluation patterns keep layer SoS in range and are deterministic") {
  const Grid2D g(128, 128, 0.3e-3);
  for (auto p : {EvalPattern::P1_curved_two_layer, EvalPattern::P2_straight_layers,
                 EvalPattern::P3_inclusions_in_background}) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto a = sample_eval_phantom(p, s, g, 3e6);
      for (double c : a.spec.layer_soses) {
        CHECK(c >= 1400.0);
        CHECK(c <= 1600.0);
      }
      CHECK(a.medium.sound_speed.minCoeff() >= 1400.0f);
      CHECK(a.medium.sound_speed.maxCoeff() <= 1600.0f);
      CHECK((a.medium.density > 0.0f).all());
      CHECK_FALSE(a.spec.absorber_coords.empty());
      for (const auto& c : a.spec.absorber_coords) CHECK(g.contains(c));
      const auto b = sample_eval_phantom(p, s, g, 3e6);
      CHECK((a.medium.sound_speed == b.medium.sound_speed).all());
      CHECK((a.medium.density == b.medium.density).all());
    }
  }
}

TEST_CASE("P2 layers are constant along rows") {
  const Grid2D g(96, 96, 0.4e-3);
  const auto e = sample_eval_phantom(EvalPattern::P2_straight_layers, 3, g, 3e6);
  for (Index j = 0; j < g.nz(); ++j) {
    CHECK((e.medium.sound_speed.col(j) == e.medium.sound_speed(0, j)).all());
  }
  CHECK(e.spec.region_names() == std::vector<std::string>{"Layer 1", "Layer 2"});
}

TEST_CASE("P1 boundary gives two layers split by a curve") {
  const Grid2D g(96, 96, 0.4e-3);
  const auto e = sample_eval_phantom(EvalPattern::P1_curved_two_layer, 5, g, 3e6);
  const auto labels = eval_region_labels(e.spec, g);
  for (Index i = 0; i < g.nx(); ++i) {
    // labels are monotone in depth: once in layer 2, always layer 2
    bool lower = false;
    for (Index j = 0; j < g.nz(); ++j) {
      if (labels(i, j) == 1) lower = true;
      CHECK(labels(i, j) == (lower ? 1 : 0));
      const float want = static_cast<float>(e.spec.layer_soses[static_cast<std::size_t>(labels(i, j))]);
      CHECK(e.medium.sound_speed(i, j) == doctest::Approx(want));
    }
  }
}

TEST_CASE("P3 background is uniform outside the inclusions") {
  const Grid2D g(96, 96, 0.4e-3);
  const auto e = sample_eval_phantom(EvalPattern::P3_inclusions_in_background, 8, g, 3e6);
  const double bg = e.spec.layer_soses[0];
  for (Index i = 0; i < g.nx(); ++i) {
    for (Index j = 0; j < g.nz(); ++j) {
      const Vec2 p{g.x(i), g.z(j)};
      bool inside = false;
      for (const auto& inc : e.spec.inclusions) inside = inside || inc.contains(p);
      if (!inside) CHECK(e.medium.sound_speed(i, j) == doctest::Approx(bg));
    }
  }
  for (const auto& inc : e.spec.inclusions) CHECK(inc.echogenicity == Echogenicity::hypoechoic);
}

TEST_CASE("parse_eval_pattern") {
  CHECK(parse_eval_pattern("P2") == EvalPattern::P2_straight_layers);
  CHECK(eval_pattern_name(EvalPattern::P3_inclusions_in_background) == "P3");
  CHECK_ERRC(parse_eval_pattern("P9"), Errc::InvalidArgument);
}

TEST_CASE("make_initial_pressure places unit absorbers") {
  const Grid2D g(256, 256, 0.1e-3);
  CHECK((make_initial_pressure({}, g).values == 0.0f).all());
  const auto img = make_initial_pressure({{10e-3, 20e-3}}, g);
  CHECK((img.values != 0.0f).count() == 1);
  CHECK(img.values(100, 200) == 1.0f);
  CHECK(img.kind == ImageKind::initial_pressure);
  CHECK_ERRC(make_initial_pressure({{-1e-3, 0.0}}, g), Errc::OutOfBounds);
}

TEST_CASE("PhantomConfig apply accepts known keys only") {
  PhantomConfig cfg;
  auto kv = KeyValueConfig::parse("phantom.max_ellipses = 2\nphantom.hyper_mode = speckle_density\n");
  cfg.apply(kv);
  CHECK(cfg.max_ellipses == 2);
  CHECK(cfg.hyper_mode == HyperechoicMode::speckle_density);
  for (int s = 0; s < 50; ++s) CHECK(sample_training_phantom(static_cast<std::uint64_t>(s), cfg).ellipses.size() <= 2);
  CHECK_ERRC(cfg.apply(KeyValueConfig::parse("phantom.nope = 1\n")), Errc::InvalidConfig);
}
