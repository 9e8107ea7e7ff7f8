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

#include <span>
#include <vector>

#include <Eigen/Core>

#include "paus/config.hpp"
#include "paus/core.hpp"
#include "paus/fft.hpp"

namespace paus {

enum class SourceMode { plane_wave_us, photoacoustic };

struct SimConfig {
  double cfl = 0.3;
  Index pml_points = 20;
  double pml_alpha = 2.0;  // nepers per grid point at the outer edge
  bool pml_enabled = true;
  /// Grows the far-side absorbing layer until every transform length is 7-smooth.
  bool smooth_fft_sizes = true;
  double record_rate = 20e6;
  Index record_samples = 1024;
  SourceMode source_mode = SourceMode::plane_wave_us;
  /// Receive impulse response convolved with every channel; empty means identity.
  std::vector<double> receive_impulse_response;

  void validate() const;
  /// Overrides fields from `sim.*` keys.
  void apply(const KeyValueConfig& kv);
};

enum class Envelope { gaussian, hann };

struct ToneBurst {
  double f0 = 7e6;
  double cycles = 2.0;
  double amplitude = 1.0;
  Envelope envelope = Envelope::gaussian;
};

/// Windowed sine centred on the middle sample; length round(cycles / f0 * fs).
Eigen::VectorXd tone_burst(double f0, double cycles, double fs, Envelope envelope = Envelope::gaussian);

struct TimeStep {
  double dt;        // internal step, an integer divisor of the record period
  double raw_dt;    // cfl * dx / c_max
  Index substeps;   // internal steps per recorded sample
};

TimeStep stability_dt(double dx, double c_max, double cfl, double record_rate);
TimeStep stability_dt(const Medium& medium, double cfl, double record_rate);

/// Fields of the first-order equations on the padded computational domain.
struct WaveState {
  Fieldf p;
  Fieldf p_prev;
  Fieldf rhox;
  Fieldf rhoz;
  Fieldf ux;  // staggered +dx/2 in x
  Fieldf uz;  // staggered +dx/2 in z
  Index step = 0;
};

enum class SourceKind { none, additive, dirichlet };

/// Pressure source for one step. `values` holds one value per point, or a
/// single value broadcast to all points.
struct SourceTerm {
  SourceKind kind = SourceKind::none;
  std::span<const Index> points;  // linear indices on the padded domain
  std::span<const float> values;
};

/// First-order k-space pseudospectral solver for a fixed medium and time step.
class KSpaceSolver {
 public:
  KSpaceSolver(const Medium& medium, const SimConfig& cfg, double dt);

  double dt() const noexcept { return dt_; }
  const Grid2D& grid() const noexcept { return grid_; }
  Index full_nx() const noexcept { return nx_; }
  Index full_nz() const noexcept { return nz_; }
  Index offset_x() const noexcept { return off_x_; }
  Index offset_z() const noexcept { return off_z_; }

  /// Linear index on the padded domain of an interior grid point.
  Index linear_index(GridIndex idx) const noexcept {
    return (idx.i + off_x_) * nz_ + (idx.j + off_z_);
  }

  WaveState zero_state() const;

  /// State with p = p0 at t = 0 and velocities at -dt/2 so the leapfrog starts
  /// symmetrically in time.
  WaveState initial_pressure_state(const Fieldf& p0);

  /// Advances the state by dt. Throws Diverged when |p| exceeds 1e6 times the
  /// largest amplitude seen in sources or initial conditions.
  void step(WaveState& state, const SourceTerm& source = {});

  /// Discrete acoustic energy at the half step the state straddles,
  /// 0.5 * sum(p_prev * p / (rho c^2) + rho |u|^2) * dx^2.
  double energy(const WaveState& state, bool interior_only = false) const;

  /// Interior part of a padded-domain field.
  Fieldf interior(const Fieldf& full) const;

 private:
  void note_amplitude(double a) noexcept;

  Grid2D grid_;
  double dt_;
  Index nx_ = 0;
  Index nz_ = 0;
  Index off_x_ = 0;
  Index off_z_ = 0;
  RealFft2 fft_;

  Fieldf c2_;
  Fieldf rho0_;
  Fieldf dt_rho0_;      // dt * rho0
  Fieldf dt_over_rho_x_;  // dt / rho at x-staggered points
  Fieldf dt_over_rho_z_;
  Fieldf rho_sgx_;
  Fieldf rho_sgz_;
  Fieldf pml_x_;
  Fieldf pml_x_sg_;
  Fieldf pml_z_;
  Fieldf pml_z_sg_;

  SpectrumField ddx_pos_;  // i kx exp(+i kx dx/2) kappa / N
  SpectrumField ddx_neg_;
  SpectrumField ddz_pos_;
  SpectrumField ddz_neg_;
  bool absorbing_ = false;
  Fieldf absorb_op_;  // tau * |k|^(y-2) / N on the spectral grid

  double amplitude_ref_ = 0.0;

  // Scratch buffers reused across steps.
  SpectrumField spec_a_;
  SpectrumField spec_b_;
  Fieldf grad_;
  Fieldf duxdx_;
  Fieldf duzdz_;
};

/// Groups of padded-domain indices averaged into one channel each.
using SensorGroups = std::vector<std::vector<Index>>;

SensorGroups element_sensor_groups(const KSpaceSolver& solver, const TransducerArray& array);

/// 0 degree plane-wave transmit with all elements firing `burst`; the burst
/// centre defines t = 0 of the recording.
RFFrame simulate_plane_wave(const Medium& medium, const TransducerArray& array,
                            const ToneBurst& burst, const SimConfig& cfg);

/// Photoacoustic forward propagation from initial pressure `p0`.
RFFrame simulate_pa(const Medium& medium, const Image2D& p0, const TransducerArray& array,
                    const SimConfig& cfg);

/// Photoacoustic forward propagation recorded at arbitrary interior points
/// (one channel per point).
RFFrame simulate_pa_at(const Medium& medium, const Image2D& p0, const std::vector<GridIndex>& sensors,
                       const SimConfig& cfg);

}  // namespace paus
