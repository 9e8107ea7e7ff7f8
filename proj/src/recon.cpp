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

#include "paus/recon.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "paus/fft.hpp"
#include "paus/wavesim.hpp"

namespace paus {

ArrayLayout ArrayLayout::from(const TransducerArray& array, const Grid2D& sim_grid) {
  ArrayLayout l;
  l.element_x = array.element_centers(sim_grid);
  l.face_z = sim_grid.z(array.face_row);
  l.pitch = array.pitch;
  l.center_frequency = array.center_frequency;
  return l;
}

Fieldf recon_sound_speed(const ReconConfig& cfg) {
  if (cfg.sos.kind == SosSourceKind::uniform) {
    if (!(cfg.sos.uniform_c > 0.0)) throw Error(Errc::InvalidSoS, "sound speed must be positive");
    return Fieldf::Constant(cfg.grid.nx(), cfg.grid.nz(), static_cast<float>(cfg.sos.uniform_c));
  }
  const SosMap& m = cfg.sos.map;
  if (m.values.size() == 0) throw Error(Errc::EmptySource, "SoS map is empty");
  if (!(m.values.minCoeff() > 0.0f) || !m.values.allFinite()) {
    throw Error(Errc::InvalidSoS, "SoS map must be finite and positive");
  }
  return resample_map(m.values, m.grid(), cfg.grid, ResampleMethod::bilinear);
}

VirtualSensors virtual_sensors(const ReconConfig& cfg, Index upsampled_channels) {
  VirtualSensors vs;
  if (cfg.layout.element_x.empty()) throw Error(Errc::GeometryMismatch, "array layout has no elements");
  const Grid2D& g = cfg.grid;
  const double jz = (cfg.layout.face_z - g.origin().z) / g.dx();
  const auto j = static_cast<Index>(std::floor(jz + 0.5));
  if (j < 0 || j >= g.nz()) throw Error(Errc::OutOfBounds, "array face lies outside the recon grid");
  const double step = cfg.layout.pitch / static_cast<double>(cfg.channel_upsample);
  std::vector<char> used(static_cast<std::size_t>(g.nx()), 0);
  for (Index k = 0; k < upsampled_channels; ++k) {
    const double x = cfg.layout.element_x.front() + static_cast<double>(k) * step;
    const double u = (x - g.origin().x) / g.dx();
    const auto i = static_cast<Index>(std::floor(u + 0.5));
    if (i < 0 || i >= g.nx() || used[static_cast<std::size_t>(i)] != 0) continue;
    used[static_cast<std::size_t>(i)] = 1;
    vs.channel.push_back(k);
    vs.points.push_back({i, j});
  }
  return vs;
}

Image2D time_reversal(const RFFrame& rf, const ReconConfig& cfg) {
  const auto n_el = static_cast<Index>(cfg.layout.element_x.size());
  Fieldf data;
  if (rf.channels() == cfg.rf_shape.channels && rf.samples() == cfg.rf_shape.samples) {
    data = upsample_rf(rf.data, cfg.rf_shape, cfg.channel_upsample, cfg.time_upsample);
  } else if (rf.channels() == cfg.rf_shape.channels * cfg.channel_upsample &&
             rf.samples() == cfg.rf_shape.samples * cfg.time_upsample) {
    data = rf.data;
  } else {
    throw Error(Errc::ShapeMismatch, "RF frame is " + std::to_string(rf.channels()) + "x" +
                                         std::to_string(rf.samples()) + ", expected " +
                                         std::to_string(cfg.rf_shape.channels) + "x" +
                                         std::to_string(cfg.rf_shape.samples) + " or its upsampled size");
  }
  if (n_el != cfg.rf_shape.channels) {
    throw Error(Errc::ShapeMismatch, "array layout and RF shape disagree on the channel count");
  }
  const bool pre_upsampled = rf.channels() != cfg.rf_shape.channels ||
                             rf.samples() != cfg.rf_shape.samples;
  const double fs_up = pre_upsampled ? rf.sampling_rate
                                     : rf.sampling_rate * static_cast<double>(cfg.time_upsample);

  Medium medium = Medium::homogeneous(cfg.grid, 1540.0, cfg.density, 0.0);
  medium.sound_speed = recon_sound_speed(cfg);
  SimConfig sim;
  sim.cfl = cfg.cfl;
  sim.pml_points = cfg.pml_points;
  sim.pml_alpha = cfg.pml_alpha;
  sim.record_rate = fs_up;
  const auto ts = stability_dt(medium, sim.cfl, fs_up);
  KSpaceSolver solver(medium, sim, ts.dt);

  const auto vs = virtual_sensors(cfg, data.rows());
  std::vector<Index> points;
  points.reserve(vs.points.size());
  for (const auto& p : vs.points) points.push_back(solver.linear_index(p));
  // Per-sensor traces, reversed in time lookups below.
  const Index m = data.cols();
  std::vector<float> values(points.size());
  WaveState state = solver.zero_state();
  const Index total = (m - 1) * ts.substeps;
  for (Index s = 1; s <= total; ++s) {
    const Index back = total - s;  // remaining substeps until t0
    const Index n0 = back / ts.substeps;
    const double frac = static_cast<double>(back % ts.substeps) / static_cast<double>(ts.substeps);
    const Index n1 = std::min(n0 + 1, m - 1);
    for (std::size_t q = 0; q < points.size(); ++q) {
      const Index row = vs.channel[q];
      values[q] = static_cast<float>((1.0 - frac) * data(row, n0) + frac * data(row, n1));
    }
    solver.step(state, {SourceKind::dirichlet, points, values});
  }

  Image2D img{solver.interior(state.p).max(0.0f), cfg.grid, ImageKind::pa_recon};
  const float peak = img.values.maxCoeff();
  if (peak > 0.0f) img.values /= peak;
  return img;
}

namespace {

// Baseband traces iq(c, n) = analytic(c, n) * exp(-i w0 t_n) for smooth interpolation.
SpectrumField baseband(const RFFrame& rf, double f0) {
  SpectrumField a = analytic_signal_rows(rf.data);
  const double w0 = 2.0 * std::numbers::pi * f0;
  for (Index n = 0; n < rf.samples(); ++n) {
    const auto rot = std::polar(1.0, -w0 * rf.time(n));
    const Complexf r(static_cast<float>(rot.real()), static_cast<float>(rot.imag()));
    a.col(n) *= r;
  }
  return a;
}

enum class DelayModel { plane_wave_two_way, one_way };

Fieldf das_envelope(const RFFrame& rf, double c, const ReconConfig& cfg, DelayModel model,
                    bool aperture_limit, bool signed_output) {
  if (!(c > 0.0)) throw Error(Errc::InvalidSoS, "sound speed must be positive");
  const auto& xs = cfg.layout.element_x;
  if (rf.channels() != static_cast<Index>(xs.size())) {
    throw Error(Errc::ShapeMismatch, "RF channel count differs from the array layout");
  }
  const double f0 = cfg.layout.center_frequency;
  const SpectrumField iq = baseband(rf, f0);
  const double w0 = 2.0 * std::numbers::pi * f0;
  const Grid2D& g = cfg.grid;
  const Index m = rf.samples();
  Fieldf out = Fieldf::Zero(g.nx(), g.nz());
  const double min_half = 0.5 * cfg.layout.pitch;
  for (Index i = 0; i < g.nx(); ++i) {
    const double x = g.x(i);
    for (Index j = 0; j < g.nz(); ++j) {
      const double z = g.z(j) - cfg.layout.face_z;
      if (z <= 0.0) continue;
      const double half = aperture_limit ? std::max(z / (2.0 * cfg.f_number), min_half)
                                         : std::numeric_limits<double>::infinity();
      std::complex<double> acc = 0.0;
      for (std::size_t e = 0; e < xs.size(); ++e) {
        const double dxe = x - xs[e];
        if (std::abs(dxe) > half) continue;
        const double r = std::sqrt(z * z + dxe * dxe);
        const double tau = model == DelayModel::plane_wave_two_way ? (z + r) / c : r / c;
        const double u = (tau - rf.t0) * rf.sampling_rate;
        if (u < 0.0 || u > static_cast<double>(m - 1)) continue;
        const auto n0 = static_cast<Index>(u);
        const Index n1 = std::min(n0 + 1, m - 1);
        const double f = u - static_cast<double>(n0);
        const auto ce = static_cast<Index>(e);
        const std::complex<double> v =
            (1.0 - f) * std::complex<double>(iq(ce, n0)) + f * std::complex<double>(iq(ce, n1));
        acc += v * std::polar(1.0, w0 * tau);
      }
      out(i, j) = static_cast<float>(signed_output ? acc.real() : std::abs(acc));
    }
  }
  return out;
}

}  // namespace

Image2D das_bmode(const RFFrame& rf, double c, const ReconConfig& cfg) {
  const Fieldf env = das_envelope(rf, c, cfg, DelayModel::plane_wave_two_way, true, !cfg.envelope);
  const auto floor_db = static_cast<float>(-cfg.dynamic_range_db);
  Image2D img{Fieldf::Constant(cfg.grid.nx(), cfg.grid.nz(), floor_db), cfg.grid, ImageKind::bmode_db};
  const double peak = static_cast<double>(env.abs().maxCoeff());
  if (!(peak > 0.0)) return img;
  for (Index i = 0; i < env.rows(); ++i) {
    for (Index j = 0; j < env.cols(); ++j) {
      if (cfg.grid.z(j) - cfg.layout.face_z < cfg.zero_top) continue;
      const double a = std::abs(static_cast<double>(env(i, j))) / peak;
      const double db = a > 0.0 ? 20.0 * std::log10(a) : -cfg.dynamic_range_db;
      img.values(i, j) = static_cast<float>(std::clamp(db, -cfg.dynamic_range_db, 0.0));
    }
  }
  return img;
}

Image2D das_pa(const RFFrame& rf, double c, const ReconConfig& cfg) {
  return {das_envelope(rf, c, cfg, DelayModel::one_way, false, !cfg.envelope), cfg.grid,
          ImageKind::pa_recon};
}

double sharpness(const Image2D& img) {
  double s2 = 0.0;
  double s4 = 0.0;
  for (Index k = 0; k < img.values.size(); ++k) {
    const double v = static_cast<double>(img.values.data()[k]);
    const double v2 = v * v;
    s2 += v2;
    s4 += v2 * v2;
  }
  if (!(s2 > 0.0)) throw Error(Errc::ZeroImage, "sharpness of an all-zero image is undefined");
  return s4 / (s2 * s2);
}

AutofocusResult autofocus_sos(const RFFrame& rf_pa, const ReconConfig& cfg, double lo, double hi,
                              double step) {
  if (!(lo < hi) || !(step > 0.0)) {
    throw Error(Errc::EmptyRange, "autofocus range needs lo < hi and step > 0");
  }
  AutofocusResult r;
  const auto n = static_cast<Index>(std::floor((hi - lo) / step + 1e-9)) + 1;
  ReconConfig env_cfg = cfg;
  env_cfg.envelope = true;
  double best = -1.0;
  for (Index k = 0; k < n; ++k) {
    const double c = lo + static_cast<double>(k) * step;
    const double s = sharpness(das_pa(rf_pa, c, env_cfg));
    r.candidates.push_back(c);
    r.sharpness_curve.push_back(s);
    if (s > best) {
      best = s;
      r.best_sos = c;
    }
  }
  return r;
}

}  // namespace paus
