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

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

#include "paus/core.hpp"

#define CHECK_ERRC(expr, errc)                         \
  do {                                                 \
    bool thrown_ = false;                              \
    try {                                              \
      (void)(expr);                                    \
    } catch (const paus::Error& e_) {                  \
      thrown_ = true;                                  \
      CHECK_MESSAGE(e_.code() == (errc), e_.what());   \
    }                                                  \
    CHECK_MESSAGE(thrown_, "expected " #errc);         \
  } while (0)

namespace testing {

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("pausim_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline paus::Fieldf random_field(paus::Index r, paus::Index c, std::uint64_t seed, float lo = 0.f,
                                 float hi = 1.f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(lo, hi);
  paus::Fieldf f(r, c);
  for (paus::Index i = 0; i < r; ++i)
    for (paus::Index j = 0; j < c; ++j) f(i, j) = u(rng);
  return f;
}

}  // namespace testing
