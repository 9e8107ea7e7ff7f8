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

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "paus/core.hpp"

namespace paus {

/// Binary 16-bit PGM, width = lateral, height = depth; values mapped
/// linearly from [lo, hi] to [0, 65535]. Writes a `<name>.txt` sidecar with
/// the grid and value mapping.
void write_pgm16(const std::filesystem::path& path, const Image2D& img, double lo, double hi);

/// Reads back the 16-bit samples of a PGM written by write_pgm16 (nx x nz).
Field<std::uint16_t> read_pgm16(const std::filesystem::path& path);

/// Float image in the PAUS container as tensor "image" plus grid metadata.
void write_image_file(const std::filesystem::path& path, const Image2D& img,
                      const nlohmann::json& meta = nlohmann::json::object());
Image2D read_image_file(const std::filesystem::path& path);

void write_noise_bank(const std::filesystem::path& path, const std::vector<Fieldf>& bank);
std::vector<Fieldf> read_noise_bank(const std::filesystem::path& path);

}  // namespace paus
