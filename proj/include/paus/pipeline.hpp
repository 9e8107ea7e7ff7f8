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
#include <string_view>
#include <vector>

#include "paus/config.hpp"
#include "paus/dataset.hpp"
#include "paus/phantom.hpp"
#include "paus/recon.hpp"
#include "paus/signal.hpp"
#include "paus/wavesim.hpp"

namespace paus {

/// Complete geometry and processing setup for one scale of the study.
struct Preset {
  std::string name;
  Grid2D sim_grid;
  TransducerArray array;
  ToneBurst burst;
  SimConfig sim;
  Grid2D recon_grid;
  Grid2D sos_grid;
  PhantomConfig phantom;
  NoiseConfig noise;
  double tgc_alpha = 0.5;
  double tgc_c_ref = 1540.0;
  double recon_cfl = 0.3;

  RfShape rf_shape() const { return {array.n_elements, sim.record_samples}; }
  RecordShapes record_shapes() const;
  ArrayLayout layout() const { return ArrayLayout::from(array, sim_grid); }
  ReconConfig recon_config(SosSource sos) const;

  /// Overrides from `sim.*`, `phantom.*`, `noise.*` and `tgc.*` keys.
  void apply(const KeyValueConfig& kv);
};

/// 256 x 320 grid at 0.1 mm, 64 elements at 0.4 mm, 3 MHz, 640 samples.
Preset desk_preset();
/// 1536 x 1536 grid at 0.025 mm, 128 elements at 0.3 mm, 7 MHz, 1024 samples.
Preset paper_preset();
/// 128 x 128 grid at 0.1 mm, 32 elements, 256 samples; for smoke tests.
Preset smoke_preset();
Preset preset_by_name(std::string_view name);

enum class RecordKind { training, eval_p1, eval_p2, eval_p3 };

std::string_view record_kind_name(RecordKind k) noexcept;
/// Accepts training, eval1..3, eval_pattern1..3, P1..P3.
RecordKind parse_record_kind(std::string_view s);

/// Training medium for ultrasound: rasterised ellipses, speckle and the
/// hyperechoic treatment. `clean_sos` receives the SoS before increments.
Medium training_medium(const PhantomSpec& spec, const Preset& preset, Fieldf* clean_sos = nullptr);

/// simulate -> TGC -> normalise -> thermal noise -> system noise.
struct ProcessedRf {
  RFFrame rf;
  double snr_db = 0.0;
  Index template_index = -1;
  std::vector<Index> flat_channels;
};

ProcessedRf process_rf(const RFFrame& raw, const Preset& preset, std::uint64_t seed,
                       const std::vector<Fieldf>& noise_bank);

/// Synthetic transmit-interference bank sized for the preset.
std::vector<Fieldf> default_noise_bank(const Preset& preset, std::uint64_t seed);

/// Builds one dataset record. Evaluation records also carry p0, rf_pa and
/// region labels.
DatasetRecord generate_record(const Preset& preset, RecordKind kind, std::uint64_t seed,
                              const std::vector<Fieldf>& noise_bank);

struct EvalRow {
  std::string record_id;
  std::string region_label;
  double rmse = 0.0;
  std::optional<double> ssim;
  std::optional<double> fwhm_mm;
  std::optional<double> snr_db;
};

struct ReconMetrics {
  double ssim = 0.0;     // mean local SSIM over 3 x 3 mm boxes around absorbers
  double fwhm_mm = 0.0;  // mean lateral FWHM over absorbers with a closed profile
  double snr_db = 0.0;
};

/// Time-reversal reconstruction of the record's PA data under `sos`, scored
/// against its initial pressure. Needs rf_pa, p0 and absorber coordinates.
ReconMetrics score_reconstruction(const DatasetRecord& rec, const SosMap& sos, const Preset& preset);

/// Per-region RMSE rows (regions from the label map, then Global). With
/// `recon` the Global row also carries SSIM, FWHM and SNR.
std::vector<EvalRow> evaluate_record(const DatasetRecord& rec, const SosMap& pred,
                                     const std::string& record_id, const Preset& preset, bool recon);

/// Prediction file for a record id: `<id>.paus` or `<id>.sos.paus` in `dir`.
/// Throws MissingPair naming the id.
std::filesystem::path find_prediction(const std::filesystem::path& dir, const std::string& record_id);

/// CSV with per-record rows followed by mean and std rows per region label.
void write_eval_csv(const std::vector<EvalRow>& rows, const std::filesystem::path& path);

}  // namespace paus
