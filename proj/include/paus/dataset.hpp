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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "paus/core.hpp"

namespace paus {

inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr const char* kPipelineVersion = "pausim-1";

enum class DType : std::uint8_t { f32 = 0, json = 1 };

/// One named block of a container file.
struct Tensor {
  std::string name;
  DType dtype = DType::f32;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;  // f32 payload
  std::string text;           // json payload
};

/// Reads and writes the raw block sequence; no schema checks beyond framing.
void write_container(const std::filesystem::path& path, const std::vector<Tensor>& tensors);
std::vector<Tensor> read_container(const std::filesystem::path& path);

struct RecordMeta {
  std::uint64_t seed = 0;
  std::string phantom_kind = "training";
  double background_sos = 0.0;
  double snr_db = 0.0;
  std::string pipeline_version = kPipelineVersion;
  /// Any further keys (grids, sampling rate, region names ...).
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
  static RecordMeta from_json(const nlohmann::json& j);
};

struct DatasetRecord {
  RFFrame rf;
  SosMap sos;
  std::optional<Image2D> p0;
  std::optional<RFFrame> rf_pa;    // photoacoustic channel data
  std::optional<Fieldf> labels;    // region label per SoS pixel
  RecordMeta meta;
};

struct TensorShape {
  Index rows;
  Index cols;
};

struct RecordShapes {
  TensorShape rf{128, 1024};
  TensorShape sos{384, 384};
};

void write_record(const DatasetRecord& record, const std::filesystem::path& path);

/// Throws BadMagic, UnsupportedVersion, ShapeError or TruncatedFile. When
/// `expected` is given, rf and sos must have exactly those shapes.
DatasetRecord read_record(const std::filesystem::path& path,
                          const std::optional<RecordShapes>& expected = std::nullopt);

/// Seeded train/valid assignment of n items: a shuffle whose first
/// floor(fraction * n) entries are training. Returns true for train.
std::vector<bool> split_assignment(std::size_t n, std::uint64_t seed, double train_fraction = 0.9);

/// Lists every *.paus file of `dir` (sorted by name) in manifest.json.
/// Returns the manifest path. Throws EmptyDir.
std::filesystem::path write_manifest(const std::filesystem::path& dir, std::uint64_t seed,
                                     double train_fraction = 0.9);

nlohmann::json read_manifest(const std::filesystem::path& path);

/// A bare SoS map file ("sos" block plus meta), the format predictions use.
void write_sos_file(const SosMap& sos, const std::filesystem::path& path,
                    const nlohmann::json& meta = nlohmann::json::object());
SosMap read_sos_file(const std::filesystem::path& path);

}  // namespace paus
