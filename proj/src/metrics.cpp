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

#include "paus/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace paus {

RegionMask RegionMask::all(Index nx, Index nz, std::string label) {
  return {Mask::Constant(nx, nz, true), std::move(label)};
}

double rmse(const Fieldf& pred, const Fieldf& gt, const RegionMask* mask) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
    throw Error(Errc::ShapeMismatch, "rmse operands differ in shape");
  }
  if (mask != nullptr && (mask->mask.rows() != gt.rows() || mask->mask.cols() != gt.cols())) {
    throw Error(Errc::ShapeMismatch, "rmse mask differs in shape");
  }
  double acc = 0.0;
  Index n = 0;
  for (Index k = 0; k < gt.size(); ++k) {
    if (mask != nullptr && !mask->mask.data()[k]) continue;
    const double d = static_cast<double>(pred.data()[k]) - static_cast<double>(gt.data()[k]);
    acc += d * d;
    ++n;
  }
  if (n == 0) throw Error(Errc::EmptyMask, "rmse mask selects no points");
  return std::sqrt(acc / static_cast<double>(n));
}

double rmse(const SosMap& pred, const SosMap& gt, const RegionMask* mask) {
  return rmse(pred.values, gt.values, mask);
}

Fieldd ssim_window(const SsimParams& p) {
  if (p.window < 1 || p.window % 2 == 0) throw Error(Errc::InvalidArgument, "SSIM window must be odd");
  const Index h = p.window / 2;
  Fieldd w(p.window, p.window);
  for (Index u = 0; u < p.window; ++u) {
    for (Index v = 0; v < p.window; ++v) {
      const double du = static_cast<double>(u - h);
      const double dv = static_cast<double>(v - h);
      w(u, v) = std::exp(-(du * du + dv * dv) / (2.0 * p.sigma * p.sigma));
    }
  }
  return w / w.sum();
}

namespace {

// Separable correlation with a 1D kernel; only fully supported outputs are valid.
Fieldd filter_valid(const Fieldd& x, const std::vector<double>& k) {
  const auto n = static_cast<Index>(k.size());
  const Index rows = x.rows() - n + 1;
  const Index cols = x.cols() - n + 1;
  Fieldd tmp = Fieldd::Zero(rows, x.cols());
  for (Index i = 0; i < rows; ++i) {
    for (Index t = 0; t < n; ++t) tmp.row(i) += k[static_cast<std::size_t>(t)] * x.row(i + t);
  }
  Fieldd out = Fieldd::Zero(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index t = 0; t < n; ++t) out.col(j) += k[static_cast<std::size_t>(t)] * tmp.col(j + t);
  }
  return out;
}

}  // namespace

double local_ssim(const Fieldf& a, const Fieldf& b, const RegionMask& roi, const SsimParams& p) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || roi.mask.rows() != a.rows() ||
      roi.mask.cols() != a.cols()) {
    throw Error(Errc::ShapeMismatch, "SSIM operands differ in shape");
  }
  if (p.window < 1 || p.window % 2 == 0) throw Error(Errc::InvalidArgument, "SSIM window must be odd");
  const Index h = p.window / 2;
  std::vector<double> k(static_cast<std::size_t>(p.window));
  double ks = 0.0;
  for (Index t = 0; t < p.window; ++t) {
    const double d = static_cast<double>(t - h);
    k[static_cast<std::size_t>(t)] = std::exp(-d * d / (2.0 * p.sigma * p.sigma));
    ks += k[static_cast<std::size_t>(t)];
  }
  for (auto& v : k) v /= ks;
  if (a.rows() < p.window || a.cols() < p.window) {
    throw Error(Errc::EmptyMask, "image is smaller than the SSIM window");
  }
  const Fieldd x = a.cast<double>();
  const Fieldd y = b.cast<double>();
  const Fieldd mx = filter_valid(x, k);
  const Fieldd my = filter_valid(y, k);
  const Fieldd sxx = filter_valid(x * x, k) - mx * mx;
  const Fieldd syy = filter_valid(y * y, k) - my * my;
  const Fieldd sxy = filter_valid(x * y, k) - mx * my;
  const double c1 = std::pow(p.k1 * p.dynamic_range, 2.0);
  const double c2 = std::pow(p.k2 * p.dynamic_range, 2.0);
  double acc = 0.0;
  Index n = 0;
  for (Index i = 0; i < mx.rows(); ++i) {
    for (Index j = 0; j < mx.cols(); ++j) {
      if (!roi.mask(i + h, j + h)) continue;
      const double num = (2.0 * mx(i, j) * my(i, j) + c1) * (2.0 * sxy(i, j) + c2);
      const double den = (mx(i, j) * mx(i, j) + my(i, j) * my(i, j) + c1) * (sxx(i, j) + syy(i, j) + c2);
      acc += num / den;
      ++n;
    }
  }
  if (n == 0) throw Error(Errc::EmptyMask, "no SSIM window centre lies in the ROI");
  return acc / static_cast<double>(n);
}

double local_ssim(const Image2D& a, const Image2D& b, const RegionMask& roi, const SsimParams& p) {
  return local_ssim(a.values, b.values, roi, p);
}

double lateral_fwhm(const Image2D& img, Vec2 seed, double search_radius) {
  const Grid2D& g = img.grid;
  const Fieldf& v = img.values;
  const double r2 = search_radius * search_radius;
  Index bi = -1;
  Index bj = -1;
  float best = -std::numeric_limits<float>::infinity();
  for (Index i = 0; i < g.nx(); ++i) {
    const double dx = g.x(i) - seed.x;
    if (dx * dx > r2) continue;
    for (Index j = 0; j < g.nz(); ++j) {
      const double dz = g.z(j) - seed.z;
      if (dx * dx + dz * dz > r2) continue;
      if (v(i, j) > best) {
        best = v(i, j);
        bi = i;
        bj = j;
      }
    }
  }
  if (bi < 0 || !(best > 0.0f) || best <= v.minCoeff()) {
    throw Error(Errc::NoPeak, "no maximum within the search radius");
  }
  const double half = 0.5 * static_cast<double>(best);
  auto crossing = [&](Index dir) {
    for (Index i = bi; i + dir >= 0 && i + dir < g.nx(); i += dir) {
      const double a = v(i, bj);
      const double b = v(i + dir, bj);
      if (b < half) {
        const double t = (a - half) / (a - b);
        return static_cast<double>(i) + static_cast<double>(dir) * t;
      }
    }
    throw Error(Errc::OpenProfile, "half-maximum crossing not found inside the image");
  };
  const double left = crossing(-1);
  const double right = crossing(+1);
  return (right - left) * g.dx() * 1e3;
}

double snr_db(const Fieldf& img, double threshold) {
  const float thr = static_cast<float>(threshold);  // compare at pixel precision
  double sum_sig = 0.0;
  Index n_sig = 0;
  double sum_bg = 0.0;
  Index n_bg = 0;
  for (Index k = 0; k < img.size(); ++k) {
    const double x = static_cast<double>(img.data()[k]);
    if (img.data()[k] >= thr) {
      sum_sig += x;
      ++n_sig;
    } else {
      sum_bg += x;
      ++n_bg;
    }
  }
  if (n_sig == 0 || n_bg == 0) throw Error(Errc::DegenerateClasses, "signal or background class is empty");
  const double mean_bg = sum_bg / static_cast<double>(n_bg);
  double var = 0.0;
  for (Index k = 0; k < img.size(); ++k) {
    const double x = static_cast<double>(img.data()[k]);
    if (img.data()[k] < thr) var += (x - mean_bg) * (x - mean_bg);
  }
  const double sd = std::sqrt(var / static_cast<double>(n_bg));
  if (!(sd > 0.0)) throw Error(Errc::DegenerateClasses, "background has zero spread");
  return 20.0 * std::log10((sum_sig / static_cast<double>(n_sig)) / sd);
}

double snr_db(const Image2D& img, double threshold) { return snr_db(img.values, threshold); }

RegionMask box_roi(const Grid2D& grid, Vec2 centre, double half, std::string label) {
  RegionMask roi{Mask::Constant(grid.nx(), grid.nz(), false), std::move(label)};
  for (Index i = 0; i < grid.nx(); ++i) {
    if (std::abs(grid.x(i) - centre.x) > half + 1e-12) continue;
    for (Index j = 0; j < grid.nz(); ++j) {
      if (std::abs(grid.z(j) - centre.z) <= half + 1e-12) roi.mask(i, j) = true;
    }
  }
  return roi;
}

}  // namespace paus
