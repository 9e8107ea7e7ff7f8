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

#include "paus/wavesim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace paus {

void SimConfig::validate() const {
  if (!(cfl > 0.0 && cfl <= 0.5)) throw Error(Errc::InvalidArgument, "cfl must lie in (0, 0.5]");
  if (pml_enabled && pml_points < 8) throw Error(Errc::InvalidArgument, "pml_points must be >= 8");
  if (!(record_rate > 0.0)) throw Error(Errc::InvalidArgument, "record_rate must be positive");
  if (record_samples < 1) throw Error(Errc::InvalidArgument, "record_samples must be >= 1");
  if (pml_alpha < 0.0) throw Error(Errc::InvalidArgument, "pml_alpha must be non-negative");
}

void SimConfig::apply(const KeyValueConfig& kv) {
  static const std::vector<std::string> known = {
      "sim.cfl",         "sim.pml_points",     "sim.pml_alpha",      "sim.pml_enabled",
      "sim.record_rate", "sim.record_samples", "sim.smooth_fft_sizes"};
  for (const auto& [key, value] : kv.values()) {
    if (key.rfind("sim.", 0) == 0 && std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(Errc::InvalidConfig, "unknown key " + key);
    }
  }
  cfl = kv.get_double("sim.cfl", cfl);
  pml_points = static_cast<Index>(kv.get_int("sim.pml_points", pml_points));
  pml_alpha = kv.get_double("sim.pml_alpha", pml_alpha);
  pml_enabled = kv.get_bool("sim.pml_enabled", pml_enabled);
  record_rate = kv.get_double("sim.record_rate", record_rate);
  record_samples = static_cast<Index>(kv.get_int("sim.record_samples", record_samples));
  smooth_fft_sizes = kv.get_bool("sim.smooth_fft_sizes", smooth_fft_sizes);
  try {
    validate();
  } catch (const Error& e) {
    throw Error(Errc::InvalidConfig, e.what());
  }
}

Eigen::VectorXd tone_burst(double f0, double cycles, double fs, Envelope envelope) {
  if (cycles < 1.0) throw Error(Errc::InvalidCycles, "tone burst needs at least one cycle");
  if (fs < 4.0 * f0) throw Error(Errc::InvalidArgument, "sampling rate must be >= 4 f0");
  const auto n = static_cast<Index>(std::llround(cycles / f0 * fs));
  const double duration = cycles / f0;
  const double sigma = cycles / (4.0 * f0);
  Eigen::VectorXd s(n);
  for (Index k = 0; k < n; ++k) {
    const double t = (static_cast<double>(k) - 0.5 * static_cast<double>(n - 1)) / fs;
    const double env = envelope == Envelope::gaussian
                           ? std::exp(-0.5 * t * t / (sigma * sigma))
                           : 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * t / duration));
    s(k) = env * std::sin(2.0 * std::numbers::pi * f0 * t);
  }
  return s;
}

TimeStep stability_dt(double dx, double c_max, double cfl, double record_rate) {
  if (!(c_max > 0.0)) throw Error(Errc::InvalidArgument, "sound speed must be positive");
  const double raw = cfl * dx / c_max;
  const double period = 1.0 / record_rate;
  const auto sub = std::max<Index>(1, static_cast<Index>(std::ceil(period / raw - 1e-9)));
  return {period / static_cast<double>(sub), raw, sub};
}

TimeStep stability_dt(const Medium& medium, double cfl, double record_rate) {
  return stability_dt(medium.grid.dx(), static_cast<double>(medium.sound_speed.maxCoeff()), cfl,
                      record_rate);
}

namespace {

// Padded-domain length and low-side PML thickness for one axis.
struct AxisLayout {
  Index total;
  Index lo;
  Index hi;
};

AxisLayout layout_axis(Index n, const SimConfig& cfg) {
  if (!cfg.pml_enabled) return {n, 0, 0};
  const Index base = n + 2 * cfg.pml_points;
  const Index total = cfg.smooth_fft_sizes ? next_smooth_size(base) : base;
  return {total, cfg.pml_points, total - n - cfg.pml_points};
}

// Split-field absorption factor exp(-sigma dt / 2) at fractional position s.
Eigen::ArrayXf pml_profile(const AxisLayout& ax, Index n, double alpha, double c_ref, double dx,
                           double dt, double shift) {
  Eigen::ArrayXf f = Eigen::ArrayXf::Ones(ax.total);
  if (ax.lo == 0 && ax.hi == 0) return f;
  const double first = static_cast<double>(ax.lo);
  const double last = static_cast<double>(ax.lo + n - 1);
  for (Index i = 0; i < ax.total; ++i) {
    const double s = static_cast<double>(i) + shift;
    double frac = 0.0;
    if (s < first) {
      frac = (first - s) / static_cast<double>(ax.lo);
    } else if (s > last) {
      frac = (s - last) / static_cast<double>(ax.hi);
    }
    const double sigma = alpha * (c_ref / dx) * std::pow(frac, 4.0);
    f(i) = static_cast<float>(std::exp(-0.5 * sigma * dt));
  }
  return f;
}

double wavenumber(Index i, Index n, double dx) {
  const Index k = i <= n / 2 ? i : i - n;
  return 2.0 * std::numbers::pi * static_cast<double>(k) / (static_cast<double>(n) * dx);
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// Bits of the padded domain derived from the interior medium by edge replication.
Fieldf pad_replicate(const Fieldf& interior, Index nx, Index nz, Index ox, Index oz) {
  Fieldf out(nx, nz);
  for (Index i = 0; i < nx; ++i) {
    const Index si = std::clamp<Index>(i - ox, 0, interior.rows() - 1);
    for (Index j = 0; j < nz; ++j) {
      const Index sj = std::clamp<Index>(j - oz, 0, interior.cols() - 1);
      out(i, j) = interior(si, sj);
    }
  }
  return out;
}

}  // namespace

KSpaceSolver::KSpaceSolver(const Medium& medium, const SimConfig& cfg, double dt)
    : grid_(medium.grid), dt_(dt), fft_(8, 8) {
  medium.validate();
  cfg.validate();
  const auto ax = layout_axis(grid_.nx(), cfg);
  const auto az = layout_axis(grid_.nz(), cfg);
  nx_ = ax.total;
  nz_ = az.total;
  off_x_ = ax.lo;
  off_z_ = az.lo;
  fft_ = RealFft2(nx_, nz_);

  const double dx = grid_.dx();
  const double c_ref = static_cast<double>(medium.sound_speed.maxCoeff());

  const Fieldf c = pad_replicate(medium.sound_speed, nx_, nz_, off_x_, off_z_);
  rho0_ = pad_replicate(medium.density, nx_, nz_, off_x_, off_z_);
  c2_ = c.square();
  dt_rho0_ = static_cast<float>(dt) * rho0_;

  rho_sgx_.resize(nx_, nz_);
  rho_sgz_.resize(nx_, nz_);
  for (Index i = 0; i < nx_; ++i) {
    const Index ip = std::min(i + 1, nx_ - 1);
    for (Index j = 0; j < nz_; ++j) {
      const Index jp = std::min(j + 1, nz_ - 1);
      rho_sgx_(i, j) = 0.5f * (rho0_(i, j) + rho0_(ip, j));
      rho_sgz_(i, j) = 0.5f * (rho0_(i, j) + rho0_(i, jp));
    }
  }
  dt_over_rho_x_ = static_cast<float>(dt) / rho_sgx_;
  dt_over_rho_z_ = static_cast<float>(dt) / rho_sgz_;

  const auto px = pml_profile(ax, grid_.nx(), cfg.pml_alpha, c_ref, dx, dt, 0.0);
  const auto pxs = pml_profile(ax, grid_.nx(), cfg.pml_alpha, c_ref, dx, dt, 0.5);
  const auto pz = pml_profile(az, grid_.nz(), cfg.pml_alpha, c_ref, dx, dt, 0.0);
  const auto pzs = pml_profile(az, grid_.nz(), cfg.pml_alpha, c_ref, dx, dt, 0.5);
  pml_x_.resize(nx_, nz_);
  pml_x_sg_.resize(nx_, nz_);
  pml_z_.resize(nx_, nz_);
  pml_z_sg_.resize(nx_, nz_);
  for (Index i = 0; i < nx_; ++i) {
    for (Index j = 0; j < nz_; ++j) {
      pml_x_(i, j) = px(i);
      pml_x_sg_(i, j) = pxs(i);
      pml_z_(i, j) = pz(j);
      pml_z_sg_(i, j) = pzs(j);
    }
  }

  // Staggered spectral derivatives with the k-space temporal correction.
  const Index nzs = nz_ / 2 + 1;
  const double norm = 1.0 / (static_cast<double>(nx_) * static_cast<double>(nz_));
  ddx_pos_.resize(nx_, nzs);
  ddx_neg_.resize(nx_, nzs);
  ddz_pos_.resize(nx_, nzs);
  ddz_neg_.resize(nx_, nzs);
  absorbing_ = medium.attenuation_coeff > 0.0;
  if (absorbing_) absorb_op_.resize(nx_, nzs);
  const double y = medium.attenuation_power;
  const double alpha_np = 100.0 * medium.attenuation_coeff / (20.0 * std::log10(std::numbers::e)) /
                          std::pow(2.0 * std::numbers::pi * 1e6, y);
  const double tau = -2.0 * alpha_np * std::pow(c_ref, y - 1.0);
  const std::complex<double> iu(0.0, 1.0);
  for (Index i = 0; i < nx_; ++i) {
    const bool nyq_x = (nx_ % 2 == 0) && i == nx_ / 2;
    const double kx = nyq_x ? 0.0 : wavenumber(i, nx_, dx);
    for (Index j = 0; j < nzs; ++j) {
      const bool nyq_z = (nz_ % 2 == 0) && j == nz_ / 2;
      const double kz = nyq_z ? 0.0 : 2.0 * std::numbers::pi * static_cast<double>(j) /
                                          (static_cast<double>(nz_) * dx);
      const double kxf = wavenumber(i, nx_, dx);
      const double kzf = 2.0 * std::numbers::pi * static_cast<double>(j) / (static_cast<double>(nz_) * dx);
      const double k = std::hypot(kxf, kzf);
      const double kappa = sinc(0.5 * c_ref * dt * k) * norm;
      ddx_pos_(i, j) = Complexf(iu * kx * std::exp(iu * kx * dx * 0.5) * kappa);
      ddx_neg_(i, j) = Complexf(iu * kx * std::exp(-iu * kx * dx * 0.5) * kappa);
      ddz_pos_(i, j) = Complexf(iu * kz * std::exp(iu * kz * dx * 0.5) * kappa);
      ddz_neg_(i, j) = Complexf(iu * kz * std::exp(-iu * kz * dx * 0.5) * kappa);
      if (absorbing_) {
        absorb_op_(i, j) = k == 0.0 ? 0.0f : static_cast<float>(tau * std::pow(k, y - 2.0) * norm);
      }
    }
  }
  spec_a_.resize(nx_, nzs);
  spec_b_.resize(nx_, nzs);
  grad_.resize(nx_, nz_);
  duxdx_.resize(nx_, nz_);
  duzdz_.resize(nx_, nz_);
}

WaveState KSpaceSolver::zero_state() const {
  WaveState s;
  s.p = Fieldf::Zero(nx_, nz_);
  s.p_prev = Fieldf::Zero(nx_, nz_);
  s.rhox = Fieldf::Zero(nx_, nz_);
  s.rhoz = Fieldf::Zero(nx_, nz_);
  s.ux = Fieldf::Zero(nx_, nz_);
  s.uz = Fieldf::Zero(nx_, nz_);
  return s;
}

WaveState KSpaceSolver::initial_pressure_state(const Fieldf& p0) {
  if (p0.rows() != grid_.nx() || p0.cols() != grid_.nz()) {
    throw Error(Errc::GridMismatch, "initial pressure does not match the medium grid");
  }
  WaveState s = zero_state();
  s.p.block(off_x_, off_z_, grid_.nx(), grid_.nz()) = p0;
  s.p_prev = s.p;
  s.rhox = s.p / (2.0f * c2_);
  s.rhoz = s.rhox;
  fft_.forward(s.p, spec_a_);
  spec_b_ = spec_a_ * ddx_pos_;
  fft_.inverse(spec_b_, grad_);
  s.ux = 0.5f * dt_over_rho_x_ * grad_;
  spec_b_ = spec_a_ * ddz_pos_;
  fft_.inverse(spec_b_, grad_);
  s.uz = 0.5f * dt_over_rho_z_ * grad_;
  note_amplitude(static_cast<double>(p0.abs().maxCoeff()));
  return s;
}

void KSpaceSolver::note_amplitude(double a) noexcept {
  if (std::isfinite(a)) amplitude_ref_ = std::max(amplitude_ref_, std::abs(a));
}

void KSpaceSolver::step(WaveState& s, const SourceTerm& source) {
  // Velocity from the pressure gradient.
  fft_.forward(s.p, spec_a_);
  spec_b_ = spec_a_ * ddx_pos_;
  fft_.inverse(spec_b_, grad_);
  s.ux = pml_x_sg_ * (pml_x_sg_ * s.ux - dt_over_rho_x_ * grad_);
  spec_b_ = spec_a_ * ddz_pos_;
  fft_.inverse(spec_b_, grad_);
  s.uz = pml_z_sg_ * (pml_z_sg_ * s.uz - dt_over_rho_z_ * grad_);

  // Density from the velocity divergence.
  fft_.forward(s.ux, spec_a_);
  spec_a_ *= ddx_neg_;
  fft_.inverse(spec_a_, duxdx_);
  fft_.forward(s.uz, spec_a_);
  spec_a_ *= ddz_neg_;
  fft_.inverse(spec_a_, duzdz_);
  s.rhox = pml_x_ * (pml_x_ * s.rhox - dt_rho0_ * duxdx_);
  s.rhoz = pml_z_ * (pml_z_ * s.rhoz - dt_rho0_ * duzdz_);

  const bool broadcast = source.values.size() == 1;
  auto value_at = [&](std::size_t k) { return broadcast ? source.values[0] : source.values[k]; };
  if (source.kind != SourceKind::none && !broadcast && source.values.size() != source.points.size()) {
    throw Error(Errc::InvalidArgument, "source values do not match source points");
  }
  if (source.kind == SourceKind::additive) {
    for (std::size_t k = 0; k < source.points.size(); ++k) {
      const Index idx = source.points[k];
      const float v = value_at(k);
      s.rhox.data()[idx] += v;
      s.rhoz.data()[idx] += v;
    }
  } else if (source.kind == SourceKind::dirichlet) {
    for (std::size_t k = 0; k < source.points.size(); ++k) {
      const Index idx = source.points[k];
      const float half = 0.5f * value_at(k) / c2_.data()[idx];
      s.rhox.data()[idx] = half;
      s.rhoz.data()[idx] = half;
    }
  }

  s.p_prev.swap(s.p);
  if (absorbing_) {
    grad_ = rho0_ * (duxdx_ + duzdz_);
    fft_.forward(grad_, spec_a_);
    spec_a_ *= absorb_op_.cast<Complexf>();
    fft_.inverse(spec_a_, grad_);
    s.p = c2_ * (s.rhox + s.rhoz + grad_);
  } else {
    s.p = c2_ * (s.rhox + s.rhoz);
  }
  if (source.kind == SourceKind::dirichlet) {
    for (std::size_t k = 0; k < source.points.size(); ++k) s.p.data()[source.points[k]] = value_at(k);
  }
  ++s.step;

  if (source.kind != SourceKind::none) {
    double m = 0.0;
    for (std::size_t k = 0; k < source.values.size(); ++k) {
      m = std::max(m, static_cast<double>(std::abs(source.values[k])));
    }
    if (source.kind == SourceKind::additive) {
      // Additive values are densities; express them as pressure.
      m *= static_cast<double>(c2_.maxCoeff()) * 2.0;
    }
    note_amplitude(m);
  }

  const float limit = static_cast<float>(1e6 * amplitude_ref_);
  const float* p = s.p.data();
  const Index n = s.p.size();
  float peak = 0.0f;
  bool finite = true;
  for (Index k = 0; k < n; ++k) {
    const float a = std::abs(p[k]);
    finite = finite && std::isfinite(a);
    peak = std::max(peak, a);
  }
  if (!finite || (amplitude_ref_ > 0.0 && peak > limit)) {
    throw Error(Errc::Diverged, "pressure blew up at step " + std::to_string(s.step) +
                                    " (check cfl and absorbing layer)");
  }
}

double KSpaceSolver::energy(const WaveState& s, bool interior_only) const {
  const Index i0 = interior_only ? off_x_ : 0;
  const Index j0 = interior_only ? off_z_ : 0;
  const Index ni = interior_only ? grid_.nx() : nx_;
  const Index nj = interior_only ? grid_.nz() : nz_;
  double e = 0.0;
  for (Index i = i0; i < i0 + ni; ++i) {
    for (Index j = j0; j < j0 + nj; ++j) {
      const double potential = static_cast<double>(s.p_prev(i, j)) * static_cast<double>(s.p(i, j)) /
                               (static_cast<double>(rho0_(i, j)) * static_cast<double>(c2_(i, j)));
      const double kinetic =
          static_cast<double>(rho_sgx_(i, j)) * static_cast<double>(s.ux(i, j)) * s.ux(i, j) +
          static_cast<double>(rho_sgz_(i, j)) * static_cast<double>(s.uz(i, j)) * s.uz(i, j);
      e += potential + kinetic;
    }
  }
  return 0.5 * e * grid_.dx() * grid_.dx();
}

Fieldf KSpaceSolver::interior(const Fieldf& full) const {
  return full.block(off_x_, off_z_, grid_.nx(), grid_.nz());
}

SensorGroups element_sensor_groups(const KSpaceSolver& solver, const TransducerArray& array) {
  SensorGroups groups;
  for (const auto& pts : array.element_points_on(solver.grid())) {
    std::vector<Index> g;
    g.reserve(pts.size());
    for (const auto& p : pts) g.push_back(solver.linear_index(p));
    groups.push_back(std::move(g));
  }
  return groups;
}

namespace {

void record_sample(const Fieldf& p, const SensorGroups& groups, Fieldf& data, Index n) {
  for (std::size_t c = 0; c < groups.size(); ++c) {
    double acc = 0.0;
    for (const Index idx : groups[c]) acc += static_cast<double>(p.data()[idx]);
    data(static_cast<Index>(c), n) = static_cast<float>(acc / static_cast<double>(groups[c].size()));
  }
}

void apply_impulse_response(Fieldf& data, const std::vector<double>& h) {
  if (h.empty()) return;
  const Fieldf x = data;
  for (Index c = 0; c < data.rows(); ++c) {
    for (Index n = 0; n < data.cols(); ++n) {
      double acc = 0.0;
      for (std::size_t k = 0; k < h.size() && static_cast<Index>(k) <= n; ++k) {
        acc += h[k] * static_cast<double>(x(c, n - static_cast<Index>(k)));
      }
      data(c, n) = static_cast<float>(acc);
    }
  }
}

RFFrame run_pa(const Medium& medium, const Fieldf& p0, const SensorGroups& groups_interior,
               const SimConfig& cfg) {
  const auto ts = stability_dt(medium, cfg.cfl, cfg.record_rate);
  KSpaceSolver solver(medium, cfg, ts.dt);
  SensorGroups groups = groups_interior;
  for (auto& g : groups) {
    for (auto& idx : g) {
      idx = solver.linear_index({idx / medium.grid.nz(), idx % medium.grid.nz()});
    }
  }
  RFFrame rf;
  rf.sampling_rate = cfg.record_rate;
  rf.t0 = 0.0;
  rf.data = Fieldf::Zero(static_cast<Index>(groups.size()), cfg.record_samples);
  WaveState state = solver.initial_pressure_state(p0);
  record_sample(state.p, groups, rf.data, 0);
  for (Index n = 1; n < cfg.record_samples; ++n) {
    for (Index k = 0; k < ts.substeps; ++k) solver.step(state);
    record_sample(state.p, groups, rf.data, n);
  }
  apply_impulse_response(rf.data, cfg.receive_impulse_response);
  return rf;
}

}  // namespace

RFFrame simulate_plane_wave(const Medium& medium, const TransducerArray& array,
                            const ToneBurst& burst, const SimConfig& cfg) {
  medium.validate();
  cfg.validate();
  array.check_grid(medium.grid);
  const auto ts = stability_dt(medium, cfg.cfl, cfg.record_rate);
  KSpaceSolver solver(medium, cfg, ts.dt);
  const auto groups = element_sensor_groups(solver, array);

  std::vector<Index> points;
  std::vector<float> scale;  // additive pressure -> density increment per step per split field
  for (std::size_t e = 0; e < groups.size(); ++e) {
    const auto face = array.element_points_on(medium.grid)[e];
    for (std::size_t k = 0; k < face.size(); ++k) {
      points.push_back(groups[e][k]);
      const double c = static_cast<double>(medium.sound_speed(face[k].i, face[k].j));
      scale.push_back(static_cast<float>(ts.dt / (c * medium.grid.dx())));
    }
  }
  const Eigen::VectorXd signal =
      burst.amplitude * tone_burst(burst.f0, burst.cycles, 1.0 / ts.dt, burst.envelope);
  // Burst sample m enters during the step that produces state index m + 1,
  // so its centre lands on state index (L - 1) / 2 + 1, which is t = 0.
  const Index start = static_cast<Index>(std::llround(0.5 * static_cast<double>(signal.size() - 1))) + 1;
  const Index total = start + (cfg.record_samples - 1) * ts.substeps;

  RFFrame rf;
  rf.sampling_rate = cfg.record_rate;
  rf.t0 = 0.0;
  rf.data = Fieldf::Zero(array.n_elements, cfg.record_samples);
  WaveState state = solver.zero_state();
  std::vector<float> values(points.size());
  for (Index k = 1; k <= total; ++k) {
    const Index m = k - 1;
    if (m < signal.size()) {
      for (std::size_t q = 0; q < points.size(); ++q) {
        values[q] = static_cast<float>(signal(m)) * scale[q];
      }
      solver.step(state, {SourceKind::additive, points, values});
    } else {
      solver.step(state);
    }
    if (k >= start && (k - start) % ts.substeps == 0) {
      record_sample(state.p, groups, rf.data, (k - start) / ts.substeps);
    }
  }
  apply_impulse_response(rf.data, cfg.receive_impulse_response);
  return rf;
}

RFFrame simulate_pa(const Medium& medium, const Image2D& p0, const TransducerArray& array,
                    const SimConfig& cfg) {
  medium.validate();
  cfg.validate();
  if (!(p0.grid == medium.grid)) {
    throw Error(Errc::GridMismatch, "initial pressure grid differs from the medium grid");
  }
  SensorGroups groups;
  for (const auto& pts : array.element_points_on(medium.grid)) {
    std::vector<Index> g;
    for (const auto& p : pts) g.push_back(p.i * medium.grid.nz() + p.j);
    groups.push_back(std::move(g));
  }
  return run_pa(medium, p0.values, groups, cfg);
}

RFFrame simulate_pa_at(const Medium& medium, const Image2D& p0,
                       const std::vector<GridIndex>& sensors, const SimConfig& cfg) {
  medium.validate();
  cfg.validate();
  if (!(p0.grid == medium.grid)) {
    throw Error(Errc::GridMismatch, "initial pressure grid differs from the medium grid");
  }
  SensorGroups groups;
  for (const auto& s : sensors) {
    if (s.i < 0 || s.i >= medium.grid.nx() || s.j < 0 || s.j >= medium.grid.nz()) {
      throw Error(Errc::OutOfBounds, "sensor outside the grid");
    }
    groups.push_back({s.i * medium.grid.nz() + s.j});
  }
  return run_pa(medium, p0.values, groups, cfg);
}

}  // namespace paus
