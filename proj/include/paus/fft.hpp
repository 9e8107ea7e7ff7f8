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

#include <complex>

#include "paus/core.hpp"

namespace paus {

using Complexf = std::complex<float>;
using SpectrumField = Field<Complexf>;

/// Sets the thread count used by subsequently created FFT plans.
void set_fft_threads(int threads);

/// Real-to-complex 2D transform pair over a row-major nx x nz array.
/// The inverse is unnormalised and clobbers its input.
class RealFft2 {
 public:
  RealFft2(Index nx, Index nz);
  ~RealFft2();
  RealFft2(const RealFft2&) = delete;
  RealFft2& operator=(const RealFft2&) = delete;
  RealFft2(RealFft2&& other) noexcept;
  RealFft2& operator=(RealFft2&& other) noexcept;

  Index nx() const noexcept { return nx_; }
  Index nz() const noexcept { return nz_; }
  Index spectral_nz() const noexcept { return nz_ / 2 + 1; }

  void forward(const Fieldf& in, SpectrumField& out) const;
  void inverse(SpectrumField& in, Fieldf& out) const;

 private:
  Index nx_ = 0;
  Index nz_ = 0;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

/// Analytic signal of each row (Hilbert transform along the second axis).
SpectrumField analytic_signal_rows(const Fieldf& x);

/// Smallest integer >= n whose prime factors are all <= 7.
Index next_smooth_size(Index n);

}  // namespace paus
