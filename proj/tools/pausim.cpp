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

// pausim: batch front end for dataset generation, reconstruction and scoring.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "paus/dataset.hpp"
#include "paus/fft.hpp"
#include "paus/io.hpp"
#include "paus/metrics.hpp"
#include "paus/pipeline.hpp"
#include "paus/recon.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::mutex log_mutex;

void log_line(const std::string& s) {
  std::lock_guard lock(log_mutex);
  std::cerr << s << std::endl;
}

/// Settings resolved with precedence: command-line flag, then config file, then default.
class Settings {
 public:
  void load(const std::string& path) {
    if (!path.empty()) file_ = paus::KeyValueConfig::load(path);
  }

  template <typename T>
  T resolve(const CLI::App& app, const std::string& flag, const std::string& key, T flag_value) {
    T v = flag_value;
    if (app.count(flag) == 0 && file_.has(key)) {
      if constexpr (std::is_same_v<T, std::string>) {
        v = file_.get_string(key, flag_value);
      } else if constexpr (std::is_same_v<T, bool>) {
        v = file_.get_bool(key, flag_value);
      } else if constexpr (std::is_integral_v<T>) {
        v = static_cast<T>(file_.get_int(key, static_cast<long long>(flag_value)));
      } else {
        v = static_cast<T>(file_.get_double(key, flag_value));
      }
    }
    resolved_[key] = v;
    return v;
  }

  /// File keys overlaid with `--set key=value` pairs, for preset overrides.
  paus::KeyValueConfig overrides(const std::vector<std::string>& sets) const {
    paus::KeyValueConfig kv = file_;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw paus::Error(paus::Errc::InvalidConfig, "--set expects key=value, got " + s);
      kv.set(s.substr(0, eq), s.substr(eq + 1));
    }
    return kv;
  }

  json& resolved() { return resolved_; }

 private:
  paus::KeyValueConfig file_;
  json resolved_ = json::object();
};

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out = "out";
  std::string preset;
  std::string config;
  std::vector<std::string> sets;
};

json preset_json(const paus::Preset& p) {
  return {{"name", p.name},
          {"sim_grid", {p.sim_grid.nx(), p.sim_grid.nz(), p.sim_grid.dx()}},
          {"recon_grid", {p.recon_grid.nx(), p.recon_grid.nz(), p.recon_grid.dx()}},
          {"sos_grid", {p.sos_grid.nx(), p.sos_grid.nz(), p.sos_grid.dx()}},
          {"n_elements", p.array.n_elements},
          {"pitch", p.array.pitch},
          {"f0", p.burst.f0},
          {"cycles", p.burst.cycles},
          {"cfl", p.sim.cfl},
          {"pml_points", p.sim.pml_points},
          {"pml_alpha", p.sim.pml_alpha},
          {"record_rate", p.sim.record_rate},
          {"record_samples", p.sim.record_samples},
          {"thermal_snr_db", {p.noise.thermal_snr_lo, p.noise.thermal_snr_hi}},
          {"tgc_alpha", p.tgc_alpha},
          {"recon_cfl", p.recon_cfl}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw paus::Error(paus::Errc::IoError, "cannot write " + path.string());
  f << j.dump(2) << '\n';
}

paus::Preset make_preset(const std::string& name, const paus::KeyValueConfig& kv) {
  paus::Preset p = paus::preset_by_name(name);
  p.apply(kv);
  return p;
}

std::string record_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "record_%05zu.paus", i);
  return buf;
}

std::vector<paus::Fieldf> load_bank(const std::string& path, const paus::Preset& p, std::uint64_t seed) {
  if (!path.empty()) return paus::read_noise_bank(path);
  return paus::default_noise_bank(p, seed);
}

/// Parsed --sos argument.
struct SosChoice {
  enum class Mode { uniform, map, autofocus } mode = Mode::uniform;
  double c = 1540.0;
  std::string file;
};

SosChoice parse_sos(const std::string& s) {
  SosChoice r;
  if (s == "autofocus") {
    r.mode = SosChoice::Mode::autofocus;
  } else if (s.rfind("uniform:", 0) == 0) {
    r.c = std::stod(s.substr(8));
  } else if (s.rfind("map:", 0) == 0) {
    r.mode = SosChoice::Mode::map;
    r.file = s.substr(4);
  } else {
    throw paus::Error(paus::Errc::InvalidConfig, "--sos must be uniform:<c>, map:<file> or autofocus");
  }
  return r;
}

/// PA channel data of a record, or its ultrasound frame when it has none.
paus::RFFrame pa_frame(const paus::DatasetRecord& rec) { return rec.rf_pa ? *rec.rf_pa : rec.rf; }

std::string preset_of(const paus::DatasetRecord& rec, const std::string& chosen) {
  if (!chosen.empty()) return chosen;
  return rec.meta.extra.value("preset", std::string("paper"));
}

void write_autofocus(const fs::path& out, const paus::AutofocusResult& af, double lo, double hi, double step) {
  std::ofstream csv(out / "sharpness.csv", std::ios::trunc);
  if (!csv) throw paus::Error(paus::Errc::IoError, "cannot write sharpness.csv");
  csv << "candidate_sos,sharpness\n" << std::setprecision(12);
  for (std::size_t k = 0; k < af.candidates.size(); ++k) {
    csv << af.candidates[k] << ',' << af.sharpness_curve[k] << '\n';
  }
  write_json(out / "autofocus.json", {{"best_sos", af.best_sos}, {"lo", lo}, {"hi", hi}, {"step", step}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photoacoustic / ultrasound simulation and reconstruction"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Base seed");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--preset", g.preset, "smoke, desk or paper");
  app.add_option("--config", g.config, "key = value settings file")->check(CLI::ExistingFile);
  app.add_option("--set", g.sets, "Override a setting as key=value (repeatable)");

  auto* gen = app.add_subcommand("generate", "Write n records and a manifest");
  std::size_t n = 1;
  std::string kind = "training";
  std::string bank_path;
  gen->add_option("--n", n, "Record count")->check(CLI::PositiveNumber);
  gen->add_option("--kind", kind, "training, eval_pattern1..3");
  gen->add_option("--noise-bank", bank_path, "Noise bank file")->check(CLI::ExistingFile);

  auto* sim = app.add_subcommand("simulate", "Write one record and its B-mode image");
  sim->add_option("--kind", kind, "training, eval_pattern1..3");
  sim->add_option("--noise-bank", bank_path, "Noise bank file")->check(CLI::ExistingFile);

  std::string input;
  std::string sos_arg = "uniform:1540";
  double af_lo = 1400.0;
  double af_hi = 1600.0;
  double af_step = 5.0;
  auto* rec = app.add_subcommand("reconstruct", "Time-reversal PA reconstruction of a record");
  rec->add_option("input", input, "Record or RF file")->required()->check(CLI::ExistingFile);
  rec->add_option("--sos", sos_arg, "uniform:<c>, map:<file> or autofocus");
  rec->add_option("--sos-lo", af_lo, "Autofocus sweep start");
  rec->add_option("--sos-hi", af_hi, "Autofocus sweep end");
  rec->add_option("--sos-step", af_step, "Autofocus sweep step");

  auto* af = app.add_subcommand("autofocus", "Sharpness sweep over uniform SoS");
  af->add_option("input", input, "Record or RF file")->required()->check(CLI::ExistingFile);
  af->add_option("--sos-lo", af_lo, "Sweep start");
  af->add_option("--sos-hi", af_hi, "Sweep end");
  af->add_option("--sos-step", af_step, "Sweep step");

  std::string pred_dir;
  std::string data_dir;
  bool with_recon = false;
  auto* ev = app.add_subcommand("evaluate", "Score predicted SoS maps against a dataset");
  ev->add_option("--pred", pred_dir, "Prediction directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  ev->add_flag("--recon", with_recon, "Also reconstruct PA data with each prediction");

  std::vector<std::string> harvest_inputs;
  std::size_t synthetic = 0;
  auto* nh = app.add_subcommand("noise-harvest", "Build a system-noise bank");
  nh->add_option("inputs", harvest_inputs, "Records whose leading samples hold noise only");
  nh->add_option("--synthetic", synthetic, "Synthesise this many templates instead");

  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  try {
    Settings st;
    st.load(g.config);
    const auto seed = st.resolve<std::uint64_t>(app, "--seed", "seed", g.seed);
    const int threads = std::max(1, st.resolve<int>(app, "--threads", "threads", g.threads));
    const fs::path out = st.resolve<std::string>(app, "--out", "out", g.out);
    const auto kv = st.overrides(g.sets);
    fs::create_directories(out);
    json& res = st.resolved();
    res["command"] = app.get_subcommands().front()->get_name();

    if (gen->parsed() || sim->parsed()) {
      CLI::App& sub = gen->parsed() ? *gen : *sim;
      const auto preset_name = st.resolve<std::string>(app, "--preset", "preset", g.preset.empty() ? "paper" : g.preset);
      const auto kind_s = st.resolve<std::string>(sub, "--kind", "kind", kind);
      const auto bank_s = st.resolve<std::string>(sub, "--noise-bank", "noise_bank", bank_path);
      const std::size_t count = gen->parsed() ? st.resolve<std::size_t>(*gen, "--n", "n", n) : 1;
      if (count < 1) throw paus::Error(paus::Errc::InvalidConfig, "n must be at least 1");
      const paus::Preset preset = make_preset(preset_name, kv);
      const paus::RecordKind rk = paus::parse_record_kind(kind_s);
      res["preset_values"] = preset_json(preset);
      res["overrides"] = kv.values();
      write_json(out / "resolved.json", res);
      const auto bank = load_bank(bank_s, preset, seed);

      const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), count));
      paus::set_fft_threads(std::max(1, threads / workers));
      std::atomic<std::size_t> next{0};
      std::atomic<std::size_t> done{0};
      std::atomic<int> failed{0};
      auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
          const std::string name = sim->parsed() ? "record.paus" : record_name(i);
          try {
            const auto record = paus::generate_record(preset, rk, seed + i, bank);
            paus::write_record(record, out / name);
            if (sim->parsed()) {
              auto rc = preset.recon_config(paus::SosSource::uniform(preset.tgc_c_ref));
              const auto img = paus::das_bmode(record.rf, preset.tgc_c_ref, rc);
              paus::write_pgm16(out / "bmode.pgm", img, -rc.dynamic_range_db, 0.0);
            }
            log_line("[" + std::to_string(++done) + "/" + std::to_string(count) + "] " + name);
          } catch (const std::exception& e) {
            ++failed;
            log_line("record " + name + " failed: " + e.what());
          }
        }
      };
      std::vector<std::thread> pool;
      for (int w = 1; w < workers; ++w) pool.emplace_back(work);
      work();
      for (auto& t : pool) t.join();
      failures += failed;
      if (gen->parsed() && static_cast<std::size_t>(failed) < count) paus::write_manifest(out, seed);
    } else if (rec->parsed() || af->parsed()) {
      paus::set_fft_threads(threads);
      CLI::App& sub = rec->parsed() ? *rec : *af;
      const auto record = paus::read_record(input);
      const auto preset_name = st.resolve<std::string>(app, "--preset", "preset", preset_of(record, g.preset));
      const paus::Preset preset = make_preset(preset_name, kv);
      const double lo = st.resolve<double>(sub, "--sos-lo", "sos_lo", af_lo);
      const double hi = st.resolve<double>(sub, "--sos-hi", "sos_hi", af_hi);
      const double step = st.resolve<double>(sub, "--sos-step", "sos_step", af_step);
      res["input"] = input;
      res["preset_values"] = preset_json(preset);
      const paus::RFFrame rf = pa_frame(record);
      SosChoice choice;
      if (rec->parsed()) {
        choice = parse_sos(st.resolve<std::string>(*rec, "--sos", "sos", sos_arg));
      } else {
        choice.mode = SosChoice::Mode::autofocus;
      }
      write_json(out / "resolved.json", res);

      paus::SosSource source = paus::SosSource::uniform(choice.c);
      json meta = {{"input", input}};
      if (choice.mode == SosChoice::Mode::autofocus) {
        const auto result = paus::autofocus_sos(rf, preset.recon_config(source), lo, hi, step);
        write_autofocus(out, result, lo, hi, step);
        std::cout << "best_sos " << result.best_sos << std::endl;
        source = paus::SosSource::uniform(result.best_sos);
        meta["sos"] = "autofocus";
        meta["sos_value"] = result.best_sos;
      } else if (choice.mode == SosChoice::Mode::map) {
        source = paus::SosSource::from_map(paus::read_sos_file(choice.file));
        meta["sos"] = "map";
        meta["sos_file"] = choice.file;
      } else {
        meta["sos"] = "uniform";
        meta["sos_value"] = choice.c;
      }
      if (rec->parsed()) {
        const auto img = paus::time_reversal(rf, preset.recon_config(source));
        paus::write_pgm16(out / "recon.pgm", img, 0.0, 1.0);
        paus::write_image_file(out / "recon.paus", img, meta);
      }
    } else if (ev->parsed()) {
      paus::set_fft_threads(threads);
      res["pred"] = pred_dir;
      res["data"] = data_dir;
      res["recon"] = with_recon;
      write_json(out / "resolved.json", res);
      std::vector<fs::path> records;
      for (const auto& e : fs::directory_iterator(data_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".paus") records.push_back(e.path());
      }
      std::sort(records.begin(), records.end());
      std::vector<paus::EvalRow> rows;
      for (const auto& path : records) {
        const std::string id = path.stem().string();
        try {
          const auto pred_path = paus::find_prediction(pred_dir, id);
          const auto record = paus::read_record(path);
          const auto pred = paus::read_sos_file(pred_path);
          const paus::Preset preset = make_preset(preset_of(record, g.preset), kv);
          auto r = paus::evaluate_record(record, pred, id, preset, with_recon);
          rows.insert(rows.end(), r.begin(), r.end());
          log_line("scored " + id);
        } catch (const std::exception& e) {
          ++failures;
          log_line("record " + id + " failed: " + e.what());
        }
      }
      paus::write_eval_csv(rows, out / "report.csv");
    } else if (nh->parsed()) {
      std::vector<paus::Fieldf> bank;
      if (synthetic > 0) {
        const auto preset_name = st.resolve<std::string>(app, "--preset", "preset", g.preset.empty() ? "paper" : g.preset);
        const paus::Preset preset = make_preset(preset_name, kv);
        bank = paus::synthetic_noise_bank(preset.array.n_elements, static_cast<paus::Index>(synthetic),
                                          preset.burst.f0, preset.sim.record_rate, 0.5, seed);
      }
      for (const auto& in : harvest_inputs) {
        try {
          bank.push_back(paus::harvest_system_noise(paus::read_record(in).rf));
        } catch (const std::exception& e) {
          ++failures;
          log_line("input " + in + " failed: " + e.what());
        }
      }
      res["inputs"] = harvest_inputs;
      res["synthetic"] = synthetic;
      write_json(out / "resolved.json", res);
      if (bank.empty()) throw paus::Error(paus::Errc::EmptyBank, "no templates harvested");
      paus::write_noise_bank(out / "noise_bank.paus", bank);
      std::cout << "templates " << bank.size() << std::endl;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  if (failures > 0) std::cerr << failures << " record(s) failed" << std::endl;
  return failures > 0 ? 1 : 0;
}
