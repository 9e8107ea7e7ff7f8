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

#include "paus/metrics.hpp"

using namespace paus;

namespace {

double brute_rmse(const Fieldf& a, const Fieldf& b, const Mask* m) {
  double s = 0.0;
  long n = 0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) {
      if (m && !(*m)(i, j)) continue;
      const double d = static_cast<double>(a(i, j)) - static_cast<double>(b(i, j));
      s += d * d;
      ++n;
    }
  return std::sqrt(s / static_cast<double>(n));
}

// SSIM evaluated window by window with its own Gaussian weights.
double brute_ssim(const Fieldf& a, const Fieldf& b, const Mask& roi) {
  const int w = 11;
  const int r = 5;
  double wt[11][11];
  double total = 0.0;
  for (int u = 0; u < w; ++u)
    for (int v = 0; v < w; ++v) {
      wt[u][v] = std::exp(-((u - r) * (u - r) + (v - r) * (v - r)) / (2 * 1.5 * 1.5));
      total += wt[u][v];
    }
  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  double sum = 0.0;
  int count = 0;
  for (Index i = r; i + r < a.rows(); ++i) {
    for (Index j = r; j + r < a.cols(); ++j) {
      if (!roi(i, j)) continue;
      double ma = 0, mb = 0;
      for (int u = 0; u < w; ++u)
        for (int v = 0; v < w; ++v) {
          ma += wt[u][v] / total * a(i - r + u, j - r + v);
          mb += wt[u][v] / total * b(i - r + u, j - r + v);
        }
      double va = 0, vb = 0, cov = 0;
      for (int u = 0; u < w; ++u)
        for (int v = 0; v < w; ++v) {
          const double da = a(i - r + u, j - r + v) - ma;
          const double db = b(i - r + u, j - r + v) - mb;
          va += wt[u][v] / total * da * da;
          vb += wt[u][v] / total * db * db;
          cov += wt[u][v] / total * da * db;
        }
      sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return sum / count;
}

Image2D gaussian_image(const Grid2D& g, Vec2 c, double sigma, double amp = 1.0) {
  Image2D img{Fieldf(g.nx(), g.nz()), g, ImageKind::pa_recon};
  for (Index i = 0; i < g.nx(); ++i)
    for (Index j = 0; j < g.nz(); ++j) {
      const double dx = g.x(i) - c.x;
      const double dz = g.z(j) - c.z;
      img.values(i, j) = static_cast<float>(amp * std::exp(-(dx * dx + dz * dz) / (2 * sigma * sigma)));
    }
  return img;
}

}  // namespace

TEST_CASE("rmse identity and constant offset") {
  const Fieldf gt = testing::random_field(32, 32, 1, 1400, 1600);
  CHECK(rmse(gt, gt) == 0.0);
  CHECK(rmse(Fieldf(gt + 10.0f), gt) == doctest::Approx(10.0).epsilon(1e-5));
  SosMap a{gt, 1e-4, {}};
  SosMap b{Fieldf(gt + 15.0f), 1e-4, {}};
  CHECK(rmse(b, a) == doctest::Approx(15.0).epsilon(1e-5));
}

TEST_CASE("rmse matches a direct summation") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Fieldf a = testing::random_field(8, 8, s);
    const Fieldf b = testing::random_field(8, 8, s + 100);
    CHECK(std::abs(rmse(a, b) - brute_rmse(a, b, nullptr)) < 1e-9);
    const Fieldf c = testing::random_field(16, 16, s);
    const Fieldf d = testing::random_field(16, 16, s + 50);
    RegionMask m{testing::random_field(16, 16, s + 7) > 0.5f, "half"};
    CHECK(std::abs(rmse(c, d, &m) - brute_rmse(c, d, &m.mask)) < 1e-6);
  }
}

TEST_CASE("rmse behaves as a metric") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Fieldf a = testing::random_field(12, 12, s);
    const Fieldf b = testing::random_field(12, 12, s + 20);
    const Fieldf c = testing::random_field(12, 12, s + 40);
    CHECK(rmse(a, b) > 0.0);
    CHECK(rmse(a, b) == doctest::Approx(rmse(b, a)));
    CHECK(rmse(a, c) <= rmse(a, b) + rmse(b, c) + 1e-9);
  }
}

TEST_CASE("rmse errors") {
  const Fieldf a = Fieldf::Zero(4, 4);
  CHECK_ERRC(rmse(a, Fieldf::Zero(4, 5)), Errc::ShapeMismatch);
  RegionMask empty{Mask::Constant(4, 4, false), "none"};
  CHECK_ERRC(rmse(a, a, &empty), Errc::EmptyMask);
}

TEST_CASE("local SSIM matches the per-window oracle") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Fieldf a = testing::random_field(16, 16, s);
    const Fieldf b = testing::random_field(16, 16, s + 9);
    const auto all = RegionMask::all(16, 16);
    CHECK(std::abs(local_ssim(a, b, all) - brute_ssim(a, b, all.mask)) < 1e-6);
    RegionMask part{testing::random_field(16, 16, s + 3) > 0.4f, "part"};
    if ((part.mask.block(5, 5, 6, 6)).any())
      CHECK(std::abs(local_ssim(a, b, part) - brute_ssim(a, b, part.mask)) < 1e-6);
  }
}

TEST_CASE("local SSIM identity, anti-correlation and range") {
  const Fieldf a = testing::random_field(24, 24, 3);
  const auto all = RegionMask::all(24, 24);
  CHECK(local_ssim(a, a, all) == doctest::Approx(1.0).epsilon(1e-9));
  const Fieldf inv = 1.0f - a;
  CHECK(local_ssim(a, inv, all) < 1.0);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const double v = local_ssim(testing::random_field(24, 24, s), testing::random_field(24, 24, s + 1), all);
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
  CHECK_ERRC(local_ssim(a, Fieldf::Zero(24, 23), all), Errc::ShapeMismatch);
  CHECK_ERRC(local_ssim(a, a, RegionMask{Mask::Constant(24, 24, false), "none"}), Errc::EmptyMask);
}

TEST_CASE("ssim window is a normalised Gaussian") {
  const Fieldd w = ssim_window({});
  CHECK(w.rows() == 11);
  CHECK(w.sum() == doctest::Approx(1.0));
  CHECK(w(5, 5) == w.maxCoeff());
  CHECK(w(5, 6) / w(5, 5) == doctest::Approx(std::exp(-1.0 / (2 * 2.25))));
}

TEST_CASE("lateral FWHM of a Gaussian blob") {
  const Grid2D g(200, 200, 0.05e-3);
  const Vec2 c{5e-3, 5e-3};
  const auto img = gaussian_image(g, c, 0.5e-3);
  const double f = lateral_fwhm(img, c);
  CHECK(std::abs(f - 2.3548 * 0.5) <= 0.05);
  CHECK(lateral_fwhm(gaussian_image(g, c, 0.5e-3, 37.0), c) == doctest::Approx(f));
  // seed within 1 mm of the peak still finds it
  CHECK(lateral_fwhm(img, {5.6e-3, 4.5e-3}) == doctest::Approx(f));
}

TEST_CASE("lateral FWHM of a delta and degenerate inputs") {
  const Grid2D g(64, 64, 0.05e-3);
  Image2D delta{Fieldf::Zero(64, 64), g, ImageKind::pa_recon};
  delta.values(30, 30) = 1.0f;
  CHECK(lateral_fwhm(delta, {1.5e-3, 1.5e-3}) <= 0.1 + 1e-12);
  Image2D flat{Fieldf::Constant(64, 64, 0.5f), g, ImageKind::pa_recon};
  CHECK_ERRC(lateral_fwhm(flat, {1.5e-3, 1.5e-3}), Errc::NoPeak);
  const auto wide = gaussian_image(g, {1.6e-3, 1.6e-3}, 5e-3);
  CHECK_ERRC(lateral_fwhm(wide, {1.6e-3, 1.6e-3}), Errc::OpenProfile);
}

TEST_CASE("snr_db formula cases") {
  Fieldf img(20, 20);
  for (Index k = 0; k < img.size(); ++k) img.data()[k] = (k % 2 == 0) ? 0.0f : 0.2f;  // std 0.1
  img.block(0, 0, 4, 4).setConstant(1.0f);
  // the block covers an even number of each background value, so the rest stays balanced
  CHECK(snr_db(img) == doctest::Approx(20.0).epsilon(1e-5));
  for (Index k = 0; k < img.size(); ++k) img.data()[k] = (k % 2 == 0) ? 0.1f : 0.12f;  // std 0.01
  img.block(0, 0, 4, 4).setConstant(1.0f);
  CHECK(snr_db(img) == doctest::Approx(40.0).epsilon(1e-4));
  CHECK_ERRC(snr_db(Fieldf::Constant(8, 8, 0.2f)), Errc::DegenerateClasses);
  CHECK_ERRC(snr_db(Fieldf::Constant(8, 8, 0.9f)), Errc::DegenerateClasses);
  Fieldf flat_bg = Fieldf::Constant(8, 8, 0.1f);
  flat_bg(0, 0) = 1.0f;
  CHECK_ERRC(snr_db(flat_bg), Errc::DegenerateClasses);
}

TEST_CASE("snr_db threshold is inclusive and rises as noise falls") {
  Fieldf img(10, 10);
  for (Index k = 0; k < img.size(); ++k) img.data()[k] = (k % 2 == 0) ? 0.0f : 0.2f;
  img(0, 0) = 0.35f;
  img(0, 1) = 0.35f;
  // inclusive: signal mean is 0.35 over two pixels
  const double v = snr_db(img);
  double prev = v;
  for (float spread : {0.15f, 0.1f, 0.05f}) {
    Fieldf q = img;
    for (Index k = 2; k < q.size(); ++k) q.data()[k] = (k % 2 == 0) ? 0.1f - spread / 2 : 0.1f + spread / 2;
    const double s = snr_db(q);
    CHECK(s > prev);
    prev = s;
  }
}

TEST_CASE("box_roi clips to the grid") {
  const Grid2D g(40, 40, 0.1e-3);
  const auto roi = box_roi(g, {2e-3, 2e-3}, 0.5e-3);
  CHECK(roi.mask.count() == 11 * 11);
  const auto edge = box_roi(g, {0.0, 0.0}, 0.5e-3);
  CHECK(edge.mask.count() == 6 * 6);
}
