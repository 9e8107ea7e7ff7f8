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

#include "paus/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <random>

namespace paus {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'P', 'A', 'U', 'S'};

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xff));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
 public:
  explicit Reader(std::string bytes) : b_(std::move(bytes)) {}

  bool done() const noexcept { return pos_ == b_.size(); }
  std::size_t remaining() const noexcept { return b_.size() - pos_; }

  const char* take(std::size_t n) {
    if (remaining() < n) throw Error(Errc::TruncatedFile, "file ends inside a block");
    const char* p = b_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(*take(1)); }
  std::uint16_t u16() {
    const auto* p = reinterpret_cast<const unsigned char*>(take(2));
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  std::uint32_t u32() {
    const auto* p = reinterpret_cast<const unsigned char*>(take(4));
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }

 private:
  std::string b_;
  std::size_t pos_ = 0;
};

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::IoError, "read failed for " + path.string());
  return bytes;
}

Tensor tensor_from(const std::string& name, const Fieldf& f) {
  Tensor t;
  t.name = name;
  t.dims = {static_cast<std::uint32_t>(f.rows()), static_cast<std::uint32_t>(f.cols())};
  t.values.assign(f.data(), f.data() + f.size());
  return t;
}

Fieldf field_from(const Tensor& t) {
  if (t.dtype != DType::f32 || t.dims.size() != 2) {
    throw Error(Errc::ShapeError, "tensor '" + t.name + "' must be a rank-2 float tensor");
  }
  Fieldf f(static_cast<Index>(t.dims[0]), static_cast<Index>(t.dims[1]));
  std::copy(t.values.begin(), t.values.end(), f.data());
  return f;
}

const Tensor* find(const std::vector<Tensor>& ts, std::string_view name) {
  for (const auto& t : ts) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

json grid_json(const Grid2D& g) {
  return {{"nx", g.nx()}, {"nz", g.nz()}, {"dx", g.dx()}, {"origin", {g.origin().x, g.origin().z}}};
}

Grid2D grid_from(const json& j) {
  return Grid2D(j.at("nx").get<Index>(), j.at("nz").get<Index>(), j.at("dx").get<double>(),
                {j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()});
}

void check_shape(const Fieldf& f, const TensorShape& s, const char* name) {
  if (f.rows() != s.rows || f.cols() != s.cols) {
    throw Error(Errc::ShapeError, std::string("tensor '") + name + "' is " + std::to_string(f.rows()) +
                                      "x" + std::to_string(f.cols()) + ", expected " +
                                      std::to_string(s.rows) + "x" + std::to_string(s.cols));
  }
}

}  // namespace

void write_container(const fs::path& path, const std::vector<Tensor>& tensors) {
  std::string out(kMagic, 4);
  put_u32(out, kContainerVersion);
  for (const auto& t : tensors) {
    if (t.name.size() > 0xffff) throw Error(Errc::InvalidArgument, "tensor name too long");
    put_u16(out, static_cast<std::uint16_t>(t.name.size()));
    out += t.name;
    out.push_back(static_cast<char>(t.dtype));
    if (t.dtype == DType::json) {
      out.push_back(1);
      put_u32(out, static_cast<std::uint32_t>(t.text.size()));
      out += t.text;
      continue;
    }
    std::uint64_t count = 1;
    for (const auto d : t.dims) count *= d;
    if (count != t.values.size()) {
      throw Error(Errc::ShapeError, "tensor '" + t.name + "' dims do not match its payload");
    }
    out.push_back(static_cast<char>(t.dims.size()));
    for (const auto d : t.dims) put_u32(out, d);
    out.reserve(out.size() + 4 * t.values.size());
    for (const float v : t.values) put_f32(out, v);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::IoError, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  f.close();
  if (!f) throw Error(Errc::IoError, "write failed for " + path.string());
}

std::vector<Tensor> read_container(const fs::path& path) {
  Reader r(read_bytes(path));
  if (r.remaining() < 4) throw Error(Errc::TruncatedFile, "file shorter than its header");
  if (std::memcmp(r.take(4), kMagic, 4) != 0) throw Error(Errc::BadMagic, "not a PAUS container");
  const std::uint32_t version = r.u32();
  if (version != kContainerVersion) {
    throw Error(Errc::UnsupportedVersion, "container version " + std::to_string(version));
  }
  std::vector<Tensor> out;
  while (!r.done()) {
    Tensor t;
    const std::uint16_t len = r.u16();
    t.name.assign(r.take(len), len);
    const std::uint8_t code = r.u8();
    if (code > 1) throw Error(Errc::ShapeError, "unknown dtype code " + std::to_string(code));
    t.dtype = static_cast<DType>(code);
    const std::uint8_t rank = r.u8();
    std::uint64_t count = 1;
    for (std::uint8_t k = 0; k < rank; ++k) {
      t.dims.push_back(r.u32());
      count *= t.dims.back();
    }
    if (t.dtype == DType::json) {
      if (rank != 1) throw Error(Errc::ShapeError, "JSON block must have rank 1");
      if (r.remaining() < count) throw Error(Errc::TruncatedFile, "JSON block truncated");
      t.text.assign(r.take(count), count);
    } else {
      if (r.remaining() / 4 < count) throw Error(Errc::TruncatedFile, "tensor '" + t.name + "' truncated");
      const char* p = r.take(4 * count);
      t.values.resize(count);
      for (std::uint64_t k = 0; k < count; ++k) {
        const auto* b = reinterpret_cast<const unsigned char*>(p + 4 * k);
        const std::uint32_t u = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                                (static_cast<std::uint32_t>(b[2]) << 16) |
                                (static_cast<std::uint32_t>(b[3]) << 24);
        t.values[k] = std::bit_cast<float>(u);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

json RecordMeta::to_json() const {
  json j = extra.is_object() ? extra : json::object();
  j["seed"] = seed;
  j["phantom_kind"] = phantom_kind;
  j["background_sos"] = background_sos;
  j["snr_db"] = snr_db;
  j["pipeline_version"] = pipeline_version;
  return j;
}

RecordMeta RecordMeta::from_json(const json& j) {
  RecordMeta m;
  m.seed = j.value("seed", std::uint64_t{0});
  m.phantom_kind = j.value("phantom_kind", std::string("training"));
  m.background_sos = j.value("background_sos", 0.0);
  m.snr_db = j.contains("snr_db") && j["snr_db"].is_number() ? j["snr_db"].get<double>() : 0.0;
  m.pipeline_version = j.value("pipeline_version", std::string(kPipelineVersion));
  m.extra = j;
  for (const char* k : {"seed", "phantom_kind", "background_sos", "snr_db", "pipeline_version"}) {
    m.extra.erase(k);
  }
  return m;
}

void write_record(const DatasetRecord& rec, const fs::path& path) {
  std::vector<Tensor> ts;
  ts.push_back(tensor_from("rf", rec.rf.data));
  ts.push_back(tensor_from("sos", rec.sos.values));
  json meta = rec.meta.to_json();
  meta["rf_sampling_rate"] = rec.rf.sampling_rate;
  meta["rf_t0"] = rec.rf.t0;
  meta["sos_resolution"] = rec.sos.resolution;
  meta["sos_origin"] = {rec.sos.origin.x, rec.sos.origin.z};
  if (rec.p0) {
    ts.push_back(tensor_from("p0", rec.p0->values));
    meta["p0_grid"] = grid_json(rec.p0->grid);
  }
  if (rec.rf_pa) {
    ts.push_back(tensor_from("rf_pa", rec.rf_pa->data));
    meta["rf_pa_sampling_rate"] = rec.rf_pa->sampling_rate;
    meta["rf_pa_t0"] = rec.rf_pa->t0;
  }
  if (rec.labels) ts.push_back(tensor_from("labels", *rec.labels));
  Tensor m;
  m.name = "meta";
  m.dtype = DType::json;
  m.text = meta.dump();
  m.dims = {static_cast<std::uint32_t>(m.text.size())};
  ts.push_back(std::move(m));
  write_container(path, ts);
}

DatasetRecord read_record(const fs::path& path, const std::optional<RecordShapes>& expected) {
  const auto ts = read_container(path);
  const Tensor* rf = find(ts, "rf");
  const Tensor* sos = find(ts, "sos");
  if (rf == nullptr || sos == nullptr) throw Error(Errc::ShapeError, "record lacks rf or sos");
  json meta = json::object();
  if (const Tensor* m = find(ts, "meta")) {
    if (m->dtype != DType::json) throw Error(Errc::ShapeError, "meta block must be JSON");
    try {
      meta = json::parse(m->text);
    } catch (const json::exception& e) {
      throw Error(Errc::ShapeError, std::string("meta block is not valid JSON: ") + e.what());
    }
  }
  DatasetRecord rec;
  rec.rf.data = field_from(*rf);
  rec.rf.sampling_rate = meta.value("rf_sampling_rate", 20e6);
  rec.rf.t0 = meta.value("rf_t0", 0.0);
  rec.sos.values = field_from(*sos);
  rec.sos.resolution = meta.value("sos_resolution", 1e-4);
  if (meta.contains("sos_origin")) {
    rec.sos.origin = {meta["sos_origin"].at(0).get<double>(), meta["sos_origin"].at(1).get<double>()};
  }
  if (expected) {
    check_shape(rec.rf.data, expected->rf, "rf");
    check_shape(rec.sos.values, expected->sos, "sos");
  }
  if (const Tensor* p0 = find(ts, "p0")) {
    Fieldf v = field_from(*p0);
    const Grid2D g = meta.contains("p0_grid") ? grid_from(meta["p0_grid"])
                                              : Grid2D(v.rows(), v.cols(), rec.sos.resolution);
    if (g.nx() != v.rows() || g.nz() != v.cols()) throw Error(Errc::ShapeError, "p0 grid mismatch");
    rec.p0 = Image2D{std::move(v), g, ImageKind::initial_pressure};
  }
  if (const Tensor* pa = find(ts, "rf_pa")) {
    RFFrame f;
    f.data = field_from(*pa);
    f.sampling_rate = meta.value("rf_pa_sampling_rate", 20e6);
    f.t0 = meta.value("rf_pa_t0", 0.0);
    rec.rf_pa = std::move(f);
  }
  if (const Tensor* lb = find(ts, "labels")) {
    rec.labels = field_from(*lb);
    if (rec.labels->rows() != rec.sos.values.rows() || rec.labels->cols() != rec.sos.values.cols()) {
      throw Error(Errc::ShapeError, "labels must match the SoS map");
    }
  }
  for (const char* k : {"rf_sampling_rate", "rf_t0", "sos_resolution", "sos_origin", "p0_grid",
                        "rf_pa_sampling_rate", "rf_pa_t0"}) {
    meta.erase(k);
  }
  rec.meta = RecordMeta::from_json(meta);
  return rec;
}

std::vector<bool> split_assignment(std::size_t n, std::uint64_t seed, double train_fraction) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    throw Error(Errc::InvalidArgument, "train fraction must lie in [0, 1]");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  // Explicit Fisher-Yates over mt19937_64 keeps the partition portable.
  auto rng = make_rng(seed, 0x5917);
  for (std::size_t k = n; k > 1; --k) {
    const std::size_t j = static_cast<std::size_t>(rng() % k);
    std::swap(order[k - 1], order[j]);
  }
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));
  std::vector<bool> train(n, false);
  for (std::size_t k = 0; k < n_train; ++k) train[order[k]] = true;
  return train;
}

fs::path write_manifest(const fs::path& dir, std::uint64_t seed, double train_fraction) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (e.is_regular_file() && e.path().extension() == ".paus") files.push_back(e.path());
  }
  if (ec) throw Error(Errc::IoError, "cannot list " + dir.string());
  if (files.empty()) throw Error(Errc::EmptyDir, "no records in " + dir.string());
  std::sort(files.begin(), files.end());
  const auto train = split_assignment(files.size(), seed, train_fraction);
  json records = json::array();
  for (std::size_t k = 0; k < files.size(); ++k) {
    const auto ts = read_container(files[k]);
    json meta = json::object();
    if (const Tensor* m = find(ts, "meta")) meta = json::parse(m->text);
    records.push_back({{"file", files[k].filename().string()},
                       {"meta", meta},
                       {"split", train[k] ? "train" : "valid"}});
  }
  const json manifest = {{"version", kContainerVersion}, {"seed", seed}, {"records", records}};
  const fs::path out = dir / "manifest.json";
  std::ofstream f(out, std::ios::trunc);
  if (!f) throw Error(Errc::IoError, "cannot write " + out.string());
  f << manifest.dump(2) << '\n';
  f.close();
  if (!f) throw Error(Errc::IoError, "write failed for " + out.string());
  return out;
}

json read_manifest(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::IoError, "cannot open " + path.string());
  return json::parse(f);
}

void write_sos_file(const SosMap& sos, const fs::path& path, const json& meta) {
  json m = meta.is_object() ? meta : json::object();
  m["sos_resolution"] = sos.resolution;
  m["sos_origin"] = {sos.origin.x, sos.origin.z};
  std::vector<Tensor> ts{tensor_from("sos", sos.values)};
  Tensor t;
  t.name = "meta";
  t.dtype = DType::json;
  t.text = m.dump();
  t.dims = {static_cast<std::uint32_t>(t.text.size())};
  ts.push_back(std::move(t));
  write_container(path, ts);
}

SosMap read_sos_file(const fs::path& path) {
  const auto ts = read_container(path);
  const Tensor* sos = find(ts, "sos");
  if (sos == nullptr) throw Error(Errc::ShapeError, "file has no sos tensor");
  SosMap m;
  m.values = field_from(*sos);
  if (const Tensor* t = find(ts, "meta")) {
    const json j = json::parse(t->text);
    m.resolution = j.value("sos_resolution", 1e-4);
    if (j.contains("sos_origin")) m.origin = {j["sos_origin"].at(0).get<double>(), j["sos_origin"].at(1).get<double>()};
  }
  return m;
}

}  // namespace paus
