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

#include "paus/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <utility>

namespace paus {
namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int& planner_threads() {
  static int n = 1;
  return n;
}

void ensure_threads_initialised() {
  static const bool ok = fftwf_init_threads() != 0;
  (void)ok;
}

constexpr unsigned kPlanFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

}  // namespace

void set_fft_threads(int threads) {
  std::lock_guard lock(planner_mutex());
  ensure_threads_initialised();
  planner_threads() = std::max(1, threads);
}

RealFft2::RealFft2(Index nx, Index nz) : nx_(nx), nz_(nz) {
  std::lock_guard lock(planner_mutex());
  ensure_threads_initialised();
  fftwf_plan_with_nthreads(planner_threads());
  const auto n = static_cast<std::size_t>(nx * nz);
  const auto ns = static_cast<std::size_t>(nx * (nz / 2 + 1));
  auto* real = fftwf_alloc_real(n);
  auto* spec = fftwf_alloc_complex(ns);
  forward_plan_ = fftwf_plan_dft_r2c_2d(static_cast<int>(nx), static_cast<int>(nz), real, spec,
                                        kPlanFlags);
  inverse_plan_ = fftwf_plan_dft_c2r_2d(static_cast<int>(nx), static_cast<int>(nz), spec, real,
                                        kPlanFlags);
  fftwf_free(real);
  fftwf_free(spec);
  if (forward_plan_ == nullptr || inverse_plan_ == nullptr) {
    throw Error(Errc::InvalidArgument, "FFT planning failed");
  }
}

RealFft2::~RealFft2() {
  std::lock_guard lock(planner_mutex());
  if (forward_plan_ != nullptr) fftwf_destroy_plan(static_cast<fftwf_plan>(forward_plan_));
  if (inverse_plan_ != nullptr) fftwf_destroy_plan(static_cast<fftwf_plan>(inverse_plan_));
}

RealFft2::RealFft2(RealFft2&& other) noexcept
    : nx_(other.nx_),
      nz_(other.nz_),
      forward_plan_(std::exchange(other.forward_plan_, nullptr)),
      inverse_plan_(std::exchange(other.inverse_plan_, nullptr)) {}

RealFft2& RealFft2::operator=(RealFft2&& other) noexcept {
  std::swap(nx_, other.nx_);
  std::swap(nz_, other.nz_);
  std::swap(forward_plan_, other.forward_plan_);
  std::swap(inverse_plan_, other.inverse_plan_);
  return *this;
}

void RealFft2::forward(const Fieldf& in, SpectrumField& out) const {
  out.resize(nx_, spectral_nz());
  fftwf_execute_dft_r2c(static_cast<fftwf_plan>(forward_plan_), const_cast<float*>(in.data()),
                        reinterpret_cast<fftwf_complex*>(out.data()));
}

void RealFft2::inverse(SpectrumField& in, Fieldf& out) const {
  out.resize(nx_, nz_);
  fftwf_execute_dft_c2r(static_cast<fftwf_plan>(inverse_plan_),
                        reinterpret_cast<fftwf_complex*>(in.data()), out.data());
}

SpectrumField analytic_signal_rows(const Fieldf& x) {
  const Index rows = x.rows();
  const Index n = x.cols();
  SpectrumField out(rows, n);
  if (rows == 0 || n == 0) return out;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < n; ++c) out(r, c) = Complexf(x(r, c), 0.0f);
  }
  fftwf_plan fwd = nullptr;
  fftwf_plan inv = nullptr;
  {
    std::lock_guard lock(planner_mutex());
    ensure_threads_initialised();
    fftwf_plan_with_nthreads(planner_threads());
    int dims[] = {static_cast<int>(n)};
    auto* buf = reinterpret_cast<fftwf_complex*>(out.data());
    fwd = fftwf_plan_many_dft(1, dims, static_cast<int>(rows), buf, nullptr, 1, static_cast<int>(n),
                              buf, nullptr, 1, static_cast<int>(n), FFTW_FORWARD, kPlanFlags);
    inv = fftwf_plan_many_dft(1, dims, static_cast<int>(rows), buf, nullptr, 1, static_cast<int>(n),
                              buf, nullptr, 1, static_cast<int>(n), FFTW_BACKWARD, kPlanFlags);
  }
  fftwf_execute(fwd);
  // One-sided spectrum: keep DC and Nyquist, double positive frequencies.
  const float inv_n = 1.0f / static_cast<float>(n);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < n; ++c) {
      float w = 0.0f;
      if (c == 0 || (n % 2 == 0 && c == n / 2)) {
        w = 1.0f;
      } else if (c < (n + 1) / 2) {
        w = 2.0f;
      }
      out(r, c) *= w * inv_n;
    }
  }
  fftwf_execute(inv);
  {
    std::lock_guard lock(planner_mutex());
    fftwf_destroy_plan(fwd);
    fftwf_destroy_plan(inv);
  }
  return out;
}

Index next_smooth_size(Index n) {
  for (Index m = std::max<Index>(n, 1);; ++m) {
    Index r = m;
    for (const Index p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

}  // namespace paus
