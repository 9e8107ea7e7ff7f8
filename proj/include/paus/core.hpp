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

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "paus/error.hpp"

namespace paus {

using Index = Eigen::Index;

/// Dense 2D field. Rows are the lateral (x) or channel axis, columns the
/// axial (z) or time axis; row-major so the second axis is contiguous.
template <typename Scalar>
using Field = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Fieldf = Field<float>;
using Fieldd = Field<double>;
using Mask = Field<bool>;

struct Vec2 {
  double x = 0.0;
  double z = 0.0;
};

struct GridIndex {
  Index i = 0;  // lateral
  Index j = 0;  // axial

  friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

/// Uniform isotropic grid. Point (i, j) sits at origin + (i, j) * dx.
class Grid2D {
 public:
  Grid2D(Index nx, Index nz, double dx, Vec2 origin = {});

  Index nx() const noexcept { return nx_; }
  Index nz() const noexcept { return nz_; }
  Index size() const noexcept { return nx_ * nz_; }
  double dx() const noexcept { return dx_; }
  Vec2 origin() const noexcept { return origin_; }
  double extent_x() const noexcept { return static_cast<double>(nx_) * dx_; }
  double extent_z() const noexcept { return static_cast<double>(nz_) * dx_; }

  double x(Index i) const noexcept { return origin_.x + static_cast<double>(i) * dx_; }
  double z(Index j) const noexcept { return origin_.z + static_cast<double>(j) * dx_; }

  bool contains(Vec2 pos) const noexcept;

  friend bool operator==(const Grid2D& a, const Grid2D& b) noexcept {
    return a.nx_ == b.nx_ && a.nz_ == b.nz_ && a.dx_ == b.dx_ && a.origin_.x == b.origin_.x &&
           a.origin_.z == b.origin_.z;
  }

 private:
  Index nx_;
  Index nz_;
  double dx_;
  Vec2 origin_;
};

/// Deterministic RNG stream derived from (seed, stream id).
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

GridIndex world_to_grid(Vec2 pos, const Grid2D& grid);
Vec2 grid_to_world(GridIndex idx, const Grid2D& grid);

struct Medium {
  Grid2D grid;
  Fieldf sound_speed;  // m/s
  Fieldf density;      // kg/m^3
  double attenuation_coeff = 0.5;  // dB/(MHz^y cm)
  double attenuation_power = 1.0;

  static Medium homogeneous(const Grid2D& grid, double sound_speed, double density = 1020.0,
                            double attenuation_coeff = 0.0);

  /// Throws InvalidArgument when map shapes, densities or alpha are inconsistent.
  void validate() const;
};

/// Linear array whose face lies on one grid row, centred laterally.
struct TransducerArray {
  Index n_elements = 128;
  double pitch = 0.3e-3;
  double center_frequency = 7e6;
  Index element_points = 11;
  Index kerf_points = 1;
  Index face_row = 0;

  double aperture() const noexcept { return static_cast<double>(n_elements) * pitch; }

  /// Checks element_points + kerf_points == round(pitch / dx) and that the
  /// aperture fits on the grid; throws GeometryMismatch otherwise.
  void check_grid(const Grid2D& grid) const;

  /// First lateral column of element 0.
  Index first_column(const Grid2D& grid) const;

  /// Grid points of each element face, grouped per element.
  std::vector<std::vector<GridIndex>> element_points_on(const Grid2D& grid) const;

  /// World lateral positions of element centres for an array placed on `grid`.
  std::vector<double> element_centers(const Grid2D& grid) const;
};

struct RFFrame {
  Fieldf data;  // channels x samples
  double sampling_rate = 20e6;
  double t0 = 0.0;

  Index channels() const noexcept { return data.rows(); }
  Index samples() const noexcept { return data.cols(); }
  double time(Index n) const noexcept { return t0 + static_cast<double>(n) / sampling_rate; }
};

struct SosMap {
  Fieldf values;  // nx x nz, m/s
  double resolution = 1e-4;
  Vec2 origin{};

  Grid2D grid() const { return Grid2D(values.rows(), values.cols(), resolution, origin); }
};

enum class ImageKind { initial_pressure, bmode_db, pa_recon };

std::string_view image_kind_name(ImageKind kind) noexcept;

struct Image2D {
  Fieldf values;
  Grid2D grid;
  ImageKind kind = ImageKind::pa_recon;
};

enum class ResampleMethod { nearest, bilinear };

/// Bilinear sample of `src` at fractional index (u, v); coordinates outside
/// the map are clamped, which replicates edge values.
template <typename Derived>
double bilinear_at(const Eigen::DenseBase<Derived>& src, double u, double v) {
  const Index nu = src.rows();
  const Index nv = src.cols();
  u = std::clamp(u, 0.0, static_cast<double>(nu - 1));
  v = std::clamp(v, 0.0, static_cast<double>(nv - 1));
  const Index i0 = std::min(static_cast<Index>(std::floor(u)), nu - 1);
  const Index j0 = std::min(static_cast<Index>(std::floor(v)), nv - 1);
  const Index i1 = std::min(i0 + 1, nu - 1);
  const Index j1 = std::min(j0 + 1, nv - 1);
  const double fu = u - static_cast<double>(i0);
  const double fv = v - static_cast<double>(j0);
  const double a = static_cast<double>(src(i0, j0));
  const double b = static_cast<double>(src(i1, j0));
  const double c = static_cast<double>(src(i0, j1));
  const double d = static_cast<double>(src(i1, j1));
  return (1.0 - fu) * (1.0 - fv) * a + fu * (1.0 - fv) * b + (1.0 - fu) * fv * c + fu * fv * d;
}

/// Resamples a map defined on `src_grid` onto `dst_grid`. Destination points
/// beyond the source extent take the nearest edge value.
Fieldf resample_map(const Fieldf& src, const Grid2D& src_grid, const Grid2D& dst_grid,
                    ResampleMethod method = ResampleMethod::bilinear);

}  // namespace paus
