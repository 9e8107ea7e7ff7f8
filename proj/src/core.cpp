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

#include "paus/core.hpp"

#include <string>

namespace paus {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::EmptySource: return "EmptySource";
    case Errc::EmptyRegion: return "EmptyRegion";
    case Errc::GeometryMismatch: return "GeometryMismatch";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::Diverged: return "Diverged";
    case Errc::InvalidCycles: return "InvalidCycles";
    case Errc::NegativeAlpha: return "NegativeAlpha";
    case Errc::TooShort: return "TooShort";
    case Errc::EmptyBank: return "EmptyBank";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::InvalidSoS: return "InvalidSoS";
    case Errc::EmptyRange: return "EmptyRange";
    case Errc::ZeroImage: return "ZeroImage";
    case Errc::EmptyMask: return "EmptyMask";
    case Errc::NoPeak: return "NoPeak";
    case Errc::OpenProfile: return "OpenProfile";
    case Errc::DegenerateClasses: return "DegenerateClasses";
    case Errc::IoError: return "IoError";
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::ShapeError: return "ShapeError";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::EmptyDir: return "EmptyDir";
    case Errc::MissingPair: return "MissingPair";
    case Errc::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

std::string_view image_kind_name(ImageKind kind) noexcept {
  switch (kind) {
    case ImageKind::initial_pressure: return "initial_pressure";
    case ImageKind::bmode_db: return "bmode_db";
    case ImageKind::pa_recon: return "pa_recon";
  }
  return "unknown";
}

Grid2D::Grid2D(Index nx, Index nz, double dx, Vec2 origin)
    : nx_(nx), nz_(nz), dx_(dx), origin_(origin) {
  if (nx < 8 || nz < 8) {
    throw Error(Errc::InvalidArgument,
                "grid needs at least 8 points per axis, got " + std::to_string(nx) + "x" +
                    std::to_string(nz));
  }
  if (!(dx > 0.0) || !std::isfinite(dx)) {
    throw Error(Errc::InvalidArgument, "grid spacing must be positive");
  }
}

bool Grid2D::contains(Vec2 pos) const noexcept {
  return pos.x >= origin_.x && pos.x < origin_.x + extent_x() && pos.z >= origin_.z &&
         pos.z < origin_.z + extent_z();
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

GridIndex world_to_grid(Vec2 pos, const Grid2D& grid) {
  if (!grid.contains(pos)) {
    throw Error(Errc::OutOfBounds, "position (" + std::to_string(pos.x) + ", " +
                                       std::to_string(pos.z) + ") m is outside the grid");
  }
  // Round half up; the last half cell maps back onto the final point.
  auto snap = [](double u, Index n) {
    const auto k = static_cast<Index>(std::floor(u + 0.5));
    return std::clamp<Index>(k, 0, n - 1);
  };
  return {snap((pos.x - grid.origin().x) / grid.dx(), grid.nx()),
          snap((pos.z - grid.origin().z) / grid.dx(), grid.nz())};
}

Vec2 grid_to_world(GridIndex idx, const Grid2D& grid) { return {grid.x(idx.i), grid.z(idx.j)}; }

Medium Medium::homogeneous(const Grid2D& grid, double sound_speed, double density,
                           double attenuation_coeff) {
  return Medium{grid,
                Fieldf::Constant(grid.nx(), grid.nz(), static_cast<float>(sound_speed)),
                Fieldf::Constant(grid.nx(), grid.nz(), static_cast<float>(density)),
                attenuation_coeff, 1.0};
}

void Medium::validate() const {
  if (sound_speed.rows() != grid.nx() || sound_speed.cols() != grid.nz() ||
      density.rows() != grid.nx() || density.cols() != grid.nz()) {
    throw Error(Errc::InvalidArgument, "medium maps do not match the grid");
  }
  if (!sound_speed.allFinite() || (sound_speed <= 0.0f).any()) {
    throw Error(Errc::InvalidArgument, "sound speed must be finite and positive");
  }
  if (!density.allFinite() || (density <= 0.0f).any()) {
    throw Error(Errc::InvalidArgument, "density must be finite and positive");
  }
  if (attenuation_coeff < 0.0) {
    throw Error(Errc::InvalidArgument, "attenuation coefficient must be non-negative");
  }
}

void TransducerArray::check_grid(const Grid2D& grid) const {
  const double ratio = pitch / grid.dx();
  const auto per_pitch = static_cast<Index>(std::lround(ratio));
  if (std::abs(ratio - static_cast<double>(per_pitch)) > 1e-6 * ratio) {
    throw Error(Errc::GeometryMismatch, "pitch is not an integer multiple of the grid spacing");
  }
  if (element_points + kerf_points != per_pitch) {
    throw Error(Errc::GeometryMismatch,
                "element_points + kerf_points = " + std::to_string(element_points + kerf_points) +
                    " but pitch spans " + std::to_string(per_pitch) + " grid points");
  }
  if (element_points < 1 || n_elements < 1) {
    throw Error(Errc::GeometryMismatch, "array needs at least one element point");
  }
  if (n_elements * per_pitch - kerf_points > grid.nx()) {
    throw Error(Errc::GeometryMismatch, "aperture is wider than the grid");
  }
  if (face_row < 0 || face_row >= grid.nz()) {
    throw Error(Errc::GeometryMismatch, "face row outside the grid");
  }
}

Index TransducerArray::first_column(const Grid2D& grid) const {
  const Index used = n_elements * (element_points + kerf_points);
  return std::max<Index>(0, (grid.nx() - used) / 2);
}

std::vector<std::vector<GridIndex>> TransducerArray::element_points_on(const Grid2D& grid) const {
  check_grid(grid);
  const Index start = first_column(grid);
  const Index step = element_points + kerf_points;
  std::vector<std::vector<GridIndex>> out(static_cast<std::size_t>(n_elements));
  for (Index e = 0; e < n_elements; ++e) {
    auto& pts = out[static_cast<std::size_t>(e)];
    pts.reserve(static_cast<std::size_t>(element_points));
    for (Index k = 0; k < element_points; ++k) pts.push_back({start + e * step + k, face_row});
  }
  return out;
}

std::vector<double> TransducerArray::element_centers(const Grid2D& grid) const {
  check_grid(grid);
  const Index start = first_column(grid);
  const Index step = element_points + kerf_points;
  std::vector<double> xs(static_cast<std::size_t>(n_elements));
  for (Index e = 0; e < n_elements; ++e) {
    const double col = static_cast<double>(start + e * step) +
                       0.5 * static_cast<double>(element_points - 1);
    xs[static_cast<std::size_t>(e)] = grid.origin().x + col * grid.dx();
  }
  return xs;
}

Fieldf resample_map(const Fieldf& src, const Grid2D& src_grid, const Grid2D& dst_grid,
                    ResampleMethod method) {
  if (src.size() == 0) throw Error(Errc::EmptySource, "source map has zero area");
  if (src.rows() != src_grid.nx() || src.cols() != src_grid.nz()) {
    throw Error(Errc::ShapeMismatch, "source map does not match its grid");
  }
  Fieldf dst(dst_grid.nx(), dst_grid.nz());
  const double inv = 1.0 / src_grid.dx();
  for (Index i = 0; i < dst_grid.nx(); ++i) {
    const double u = (dst_grid.x(i) - src_grid.origin().x) * inv;
    for (Index j = 0; j < dst_grid.nz(); ++j) {
      const double v = (dst_grid.z(j) - src_grid.origin().z) * inv;
      if (method == ResampleMethod::bilinear) {
        dst(i, j) = static_cast<float>(bilinear_at(src, u, v));
      } else {
        const auto ii = std::clamp<Index>(static_cast<Index>(std::floor(u + 0.5)), 0, src.rows() - 1);
        const auto jj = std::clamp<Index>(static_cast<Index>(std::floor(v + 0.5)), 0, src.cols() - 1);
        dst(i, j) = src(ii, jj);
      }
    }
  }
  return dst;
}

}  // namespace paus
