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

#include "paus/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "paus/metrics.hpp"

namespace paus {

RecordShapes Preset::record_shapes() const {
  return {{array.n_elements, sim.record_samples}, {sos_grid.nx(), sos_grid.nz()}};
}

ReconConfig Preset::recon_config(SosSource sos) const {
  ReconConfig rc;
  rc.grid = recon_grid;
  rc.sos = std::move(sos);
  rc.layout = layout();
  rc.rf_shape = rf_shape();
  rc.cfl = recon_cfl;
  rc.density = phantom.density;
  return rc;
}

void Preset::apply(const KeyValueConfig& kv) {
  sim.apply(kv);
  phantom.apply(kv);
  noise.thermal_snr_lo = kv.get_double("noise.thermal_snr_lo", noise.thermal_snr_lo);
  noise.thermal_snr_hi = kv.get_double("noise.thermal_snr_hi", noise.thermal_snr_hi);
  if (noise.thermal_snr_lo > noise.thermal_snr_hi) {
    throw Error(Errc::InvalidConfig, "noise.thermal_snr_lo exceeds noise.thermal_snr_hi");
  }
  tgc_alpha = kv.get_double("tgc.alpha", tgc_alpha);
  tgc_c_ref = kv.get_double("tgc.c_ref", tgc_c_ref);
  recon_cfl = kv.get_double("recon.cfl", recon_cfl);
  burst.cycles = kv.get_double("burst.cycles", burst.cycles);
  if (tgc_alpha < 0.0) throw Error(Errc::InvalidConfig, "tgc.alpha must be >= 0");
  if (!(recon_cfl > 0.0 && recon_cfl <= 0.5)) throw Error(Errc::InvalidConfig, "recon.cfl must lie in (0, 0.5]");
}

Preset desk_preset() {
  Preset p{"desk",
           Grid2D(256, 320, 0.1e-3),
           TransducerArray{64, 0.4e-3, 3e6, 3, 1, 0},
           ToneBurst{3e6, 2.0, 1.0, Envelope::gaussian},
           SimConfig{},
           Grid2D(512, 660, 0.05e-3),
           Grid2D(256, 320, 0.1e-3),
           PhantomConfig::for_extent(25.6e-3, 32e-3),
           NoiseConfig{}};
  p.sim.record_samples = 640;
  return p;
}

Preset paper_preset() {
  Preset p{"paper",
           Grid2D(1536, 1536, 0.025e-3),
           TransducerArray{},
           ToneBurst{},
           SimConfig{},
           Grid2D(768, 788, 0.05e-3),
           Grid2D(384, 384, 0.1e-3),
           PhantomConfig{},
           NoiseConfig{}};
  return p;
}

Preset smoke_preset() {
  Preset p{"smoke",
           Grid2D(128, 128, 0.1e-3),
           TransducerArray{32, 0.4e-3, 3e6, 3, 1, 0},
           ToneBurst{3e6, 2.0, 1.0, Envelope::gaussian},
           SimConfig{},
           Grid2D(256, 256, 0.05e-3),
           Grid2D(128, 128, 0.1e-3),
           PhantomConfig::for_extent(12.8e-3, 12.8e-3),
           NoiseConfig{}};
  p.sim.record_samples = 256;
  return p;
}

Preset preset_by_name(std::string_view name) {
  if (name == "desk") return desk_preset();
  if (name == "paper") return paper_preset();
  if (name == "smoke") return smoke_preset();
  throw Error(Errc::InvalidConfig, "unknown preset '" + std::string(name) + "' (desk, paper or smoke)");
}

std::string_view record_kind_name(RecordKind k) noexcept {
  switch (k) {
    case RecordKind::training: return "training";
    case RecordKind::eval_p1: return "P1";
    case RecordKind::eval_p2: return "P2";
    case RecordKind::eval_p3: return "P3";
  }
  return "?";
}

RecordKind parse_record_kind(std::string_view s) {
  if (s == "training") return RecordKind::training;
  if (s == "eval1" || s == "eval_pattern1" || s == "P1") return RecordKind::eval_p1;
  if (s == "eval2" || s == "eval_pattern2" || s == "P2") return RecordKind::eval_p2;
  if (s == "eval3" || s == "eval_pattern3" || s == "P3") return RecordKind::eval_p3;
  throw Error(Errc::InvalidConfig, "unknown record kind '" + std::string(s) + "'");
}

Medium training_medium(const PhantomSpec& spec, const Preset& preset, Fieldf* clean_sos) {
  const auto& cfg = preset.phantom;
  const Grid2D& g = preset.sim_grid;
  const double f0 = preset.burst.f0;
  Medium medium = rasterize_phantom(spec, g, cfg.density, cfg.attenuation);
  if (clean_sos != nullptr) *clean_sos = medium.sound_speed;
  const auto labels = ellipse_labels(spec, g);
  auto hyper_region = [&](std::size_t k) -> Mask {
    return labels == static_cast<std::int32_t>(k + 1);
  };
  if (cfg.hyper_mode == HyperechoicMode::speckle_density) {
    // Denser scatterers inside hyperechoic ellipses, thinned back elsewhere.
    PhantomSpec dense = spec;
    dense.speckle_density *= cfg.hyper_speckle_factor;
    Fieldf scale = Fieldf::Constant(g.nx(), g.nz(), static_cast<float>(1.0 / cfg.hyper_speckle_factor));
    for (std::size_t k = 0; k < spec.ellipses.size(); ++k) {
      if (spec.ellipses[k].echogenicity != Echogenicity::hyperechoic) continue;
      scale = hyper_region(k).select(Fieldf::Ones(g.nx(), g.nz()), scale);
    }
    return add_speckle(medium, dense, f0, scale);
  }
  medium = add_speckle(medium, spec, f0);
  for (std::size_t k = 0; k < spec.ellipses.size(); ++k) {
    if (spec.ellipses[k].echogenicity != Echogenicity::hyperechoic) continue;
    const Mask region = hyper_region(k);
    if (!region.any()) continue;
    medium = apply_hyperechoic(medium, region, spec, spec.speckle_seed + k + 1);
  }
  return medium;
}

ProcessedRf process_rf(const RFFrame& raw, const Preset& preset, std::uint64_t seed,
                       const std::vector<Fieldf>& noise_bank) {
  ProcessedRf out;
  const RFFrame tgc = apply_tgc(raw, preset.tgc_alpha, preset.burst.f0, preset.tgc_c_ref);
  auto norm = normalize_channels(tgc);
  out.flat_channels = std::move(norm.flat_channels);
  out.snr_db = preset.noise.draw_snr_db(seed);
  out.rf = add_thermal_noise(norm.frame, out.snr_db, seed);
  if (!noise_bank.empty()) out.rf = add_system_noise(out.rf, noise_bank, seed, &out.template_index);
  return out;
}

std::vector<Fieldf> default_noise_bank(const Preset& preset, std::uint64_t seed) {
  return synthetic_noise_bank(preset.array.n_elements, 8, preset.burst.f0, preset.sim.record_rate,
                              0.5, seed);
}

namespace {

Fieldf to_sos_grid(const Fieldf& sim_map, const Preset& p, ResampleMethod method) {
  if (p.sim_grid == p.sos_grid) return sim_map;
  return resample_map(sim_map, p.sim_grid, p.sos_grid, method);
}

EvalPattern eval_pattern_of(RecordKind k) {
  switch (k) {
    case RecordKind::eval_p1: return EvalPattern::P1_curved_two_layer;
    case RecordKind::eval_p2: return EvalPattern::P2_straight_layers;
    default: return EvalPattern::P3_inclusions_in_background;
  }
}

}  // namespace

DatasetRecord generate_record(const Preset& preset, RecordKind kind, std::uint64_t seed,
                              const std::vector<Fieldf>& noise_bank) {
  DatasetRecord rec;
  rec.meta.seed = seed;
  rec.meta.phantom_kind = std::string(record_kind_name(kind));
  rec.meta.extra["preset"] = preset.name;
  rec.sos.resolution = preset.sos_grid.dx();
  rec.sos.origin = preset.sos_grid.origin();
  if (kind == RecordKind::training) {
    const PhantomSpec spec = sample_training_phantom(seed, preset.phantom);
    Fieldf clean;
    const Medium medium = training_medium(spec, preset, &clean);
    const RFFrame raw = simulate_plane_wave(medium, preset.array, preset.burst, preset.sim);
    auto processed = process_rf(raw, preset, seed, noise_bank);
    rec.rf = std::move(processed.rf);
    rec.sos.values = to_sos_grid(clean, preset, ResampleMethod::bilinear);
    rec.meta.background_sos = spec.background_sos;
    rec.meta.snr_db = processed.snr_db;
    rec.meta.extra["n_ellipses"] = spec.ellipses.size();
    rec.meta.extra["noise_template"] = processed.template_index;
    rec.meta.extra["flat_channels"] = processed.flat_channels;
    return rec;
  }
  const EvalPhantom ev = sample_eval_phantom(eval_pattern_of(kind), seed, preset.sim_grid,
                                             preset.burst.f0, preset.phantom);
  const RFFrame raw = simulate_plane_wave(ev.medium, preset.array, preset.burst, preset.sim);
  auto processed = process_rf(raw, preset, seed, noise_bank);
  rec.rf = std::move(processed.rf);
  const Image2D p0 = make_initial_pressure(ev.spec.absorber_coords, preset.sim_grid);
  rec.rf_pa = simulate_pa(ev.medium, p0, preset.array, preset.sim);
  rec.p0 = p0;
  rec.sos.values = to_sos_grid(eval_sos_map(ev.spec, preset.sim_grid), preset, ResampleMethod::bilinear);
  const Field<std::int32_t> labels = eval_region_labels(ev.spec, preset.sim_grid);
  rec.labels = to_sos_grid(labels.cast<float>(), preset, ResampleMethod::nearest);
  rec.meta.background_sos = ev.spec.layer_soses.front();
  rec.meta.snr_db = processed.snr_db;
  rec.meta.extra["layer_soses"] = ev.spec.layer_soses;
  rec.meta.extra["region_names"] = ev.spec.region_names();
  std::vector<std::string> echo;
  for (const auto e : ev.spec.region_echogenicity) echo.emplace_back(echogenicity_name(e));
  rec.meta.extra["region_echogenicity"] = echo;
  nlohmann::json coords = nlohmann::json::array();
  for (const auto& c : ev.spec.absorber_coords) coords.push_back({c.x, c.z});
  rec.meta.extra["absorbers"] = coords;
  rec.meta.extra["noise_template"] = processed.template_index;
  return rec;
}

ReconMetrics score_reconstruction(const DatasetRecord& rec, const SosMap& sos, const Preset& preset) {
  if (!rec.rf_pa || !rec.p0) throw Error(Errc::InvalidArgument, "record has no photoacoustic data");
  const auto& extra = rec.meta.extra;
  if (!extra.contains("absorbers")) throw Error(Errc::InvalidArgument, "record lists no absorbers");
  std::vector<Vec2> coords;
  for (const auto& c : extra["absorbers"]) coords.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
  const ReconConfig rc = preset.recon_config(SosSource::from_map(sos));
  const Image2D img = time_reversal(*rec.rf_pa, rc);
  const Image2D ref = make_initial_pressure(coords, rc.grid);
  ReconMetrics m;
  double ssim_sum = 0.0;
  Index ssim_n = 0;
  double fwhm_sum = 0.0;
  Index fwhm_n = 0;
  for (const auto& c : coords) {
    try {
      ssim_sum += local_ssim(img, ref, box_roi(rc.grid, c, 1.5e-3));
      ++ssim_n;
    } catch (const Error&) {
    }
    try {
      fwhm_sum += lateral_fwhm(img, c);
      ++fwhm_n;
    } catch (const Error&) {
    }
  }
  m.ssim = ssim_n > 0 ? ssim_sum / static_cast<double>(ssim_n) : std::nan("");
  m.fwhm_mm = fwhm_n > 0 ? fwhm_sum / static_cast<double>(fwhm_n) : std::nan("");
  try {
    m.snr_db = snr_db(img);
  } catch (const Error&) {
    m.snr_db = std::nan("");
  }
  return m;
}

std::vector<EvalRow> evaluate_record(const DatasetRecord& rec, const SosMap& pred,
                                     const std::string& record_id, const Preset& preset, bool recon) {
  if (pred.values.rows() != rec.sos.values.rows() || pred.values.cols() != rec.sos.values.cols()) {
    throw Error(Errc::ShapeMismatch, "prediction for " + record_id + " has the wrong shape");
  }
  std::vector<EvalRow> rows;
  if (rec.labels) {
    std::vector<std::string> names;
    if (rec.meta.extra.contains("region_names")) names = rec.meta.extra["region_names"].get<std::vector<std::string>>();
    const auto top = static_cast<int>(std::lround(rec.labels->maxCoeff()));
    for (int r = 0; r <= top; ++r) {
      RegionMask mask{(*rec.labels == static_cast<float>(r)), r < static_cast<int>(names.size())
                                                                 ? names[static_cast<std::size_t>(r)]
                                                                 : "Region " + std::to_string(r)};
      if (!mask.mask.any()) continue;
      rows.push_back({record_id, mask.label, rmse(pred, rec.sos, &mask), {}, {}, {}});
    }
  }
  EvalRow global{record_id, "Global", rmse(pred, rec.sos), {}, {}, {}};
  if (recon) {
    const auto m = score_reconstruction(rec, pred, preset);
    global.ssim = m.ssim;
    global.fwhm_mm = m.fwhm_mm;
    global.snr_db = m.snr_db;
  }
  rows.push_back(global);
  return rows;
}

std::filesystem::path find_prediction(const std::filesystem::path& dir, const std::string& record_id) {
  for (const auto& name : {record_id + ".paus", record_id + ".sos.paus"}) {
    const auto p = dir / name;
    if (std::filesystem::is_regular_file(p)) return p;
  }
  throw Error(Errc::MissingPair, "no prediction for record " + record_id + " in " + dir.string());
}

namespace {

std::string fmt(const std::optional<double>& v) {
  if (!v || std::isnan(*v)) return "";
  std::ostringstream s;
  s << std::setprecision(10) << *v;
  return s.str();
}

}  // namespace

void write_eval_csv(const std::vector<EvalRow>& rows, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(Errc::IoError, "cannot write " + path.string());
  f << "record_id,region_label,rmse,ssim,fwhm_mm,snr_db\n";
  std::vector<std::string> order;
  std::map<std::string, std::vector<const EvalRow*>> by_region;
  for (const auto& r : rows) {
    f << r.record_id << ',' << r.region_label << ',' << fmt(r.rmse) << ',' << fmt(r.ssim) << ','
      << fmt(r.fwhm_mm) << ',' << fmt(r.snr_db) << '\n';
    if (by_region.find(r.region_label) == by_region.end()) order.push_back(r.region_label);
    by_region[r.region_label].push_back(&r);
  }
  auto stats = [](const std::vector<std::optional<double>>& xs) -> std::pair<std::optional<double>, std::optional<double>> {
    double s = 0.0;
    Index n = 0;
    for (const auto& x : xs) {
      if (x && !std::isnan(*x)) {
        s += *x;
        ++n;
      }
    }
    if (n == 0) return {std::nullopt, std::nullopt};
    const double mean = s / static_cast<double>(n);
    double v = 0.0;
    for (const auto& x : xs) {
      if (x && !std::isnan(*x)) v += (*x - mean) * (*x - mean);
    }
    return {mean, std::sqrt(v / static_cast<double>(n))};
  };
  for (const auto& label : order) {
    const auto& rs = by_region[label];
    std::vector<std::optional<double>> cols[4];
    for (const auto* r : rs) {
      cols[0].push_back(r->rmse);
      cols[1].push_back(r->ssim);
      cols[2].push_back(r->fwhm_mm);
      cols[3].push_back(r->snr_db);
    }
    std::pair<std::optional<double>, std::optional<double>> st[4];
    for (int c = 0; c < 4; ++c) st[c] = stats(cols[c]);
    f << "mean," << label;
    for (int c = 0; c < 4; ++c) f << ',' << fmt(st[c].first);
    f << "\nstd," << label;
    for (int c = 0; c < 4; ++c) f << ',' << fmt(st[c].second);
    f << '\n';
  }
  f.close();
  if (!f) throw Error(Errc::IoError, "write failed for " + path.string());
}

}  // namespace paus
