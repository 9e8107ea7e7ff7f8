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

#include "paus/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "paus/dataset.hpp"

namespace paus {
namespace fs = std::filesystem;

void write_pgm16(const fs::path& path, const Image2D& img, double lo, double hi) {
  if (!(hi > lo)) throw Error(Errc::InvalidArgument, "PGM value range is empty");
  const Index w = img.values.rows();
  const Index h = img.values.cols();
  std::string bytes = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n65535\n";
  bytes.reserve(bytes.size() + static_cast<std::size_t>(2 * w * h));
  for (Index j = 0; j < h; ++j) {
    for (Index i = 0; i < w; ++i) {
      const double t = std::clamp((static_cast<double>(img.values(i, j)) - lo) / (hi - lo), 0.0, 1.0);
      const auto v = static_cast<std::uint16_t>(std::lround(t * 65535.0));
      bytes.push_back(static_cast<char>(v >> 8));
      bytes.push_back(static_cast<char>(v & 0xff));
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::IoError, "cannot write " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  f.close();
  if (!f) throw Error(Errc::IoError, "write failed for " + path.string());

  fs::path side = path;
  side.replace_extension(".txt");
  std::ofstream s(side, std::ios::trunc);
  if (!s) throw Error(Errc::IoError, "cannot write " + side.string());
  s << std::setprecision(17);
  s << "kind " << image_kind_name(img.kind) << '\n'
    << "nx " << img.grid.nx() << '\n'
    << "nz " << img.grid.nz() << '\n'
    << "dx_m " << img.grid.dx() << '\n'
    << "origin_x_m " << img.grid.origin().x << '\n'
    << "origin_z_m " << img.grid.origin().z << '\n'
    << "value_at_0 " << lo << '\n'
    << "value_at_65535 " << hi << '\n'
    << "layout width=lateral height=depth big-endian\n";
}

Field<std::uint16_t> read_pgm16(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::IoError, "cannot open " + path.string());
  std::string magic;
  Index w = 0;
  Index h = 0;
  int maxval = 0;
  f >> magic >> w >> h >> maxval;
  f.get();
  if (magic != "P5" || maxval != 65535 || w <= 0 || h <= 0) {
    throw Error(Errc::BadMagic, "not a 16-bit binary PGM: " + path.string());
  }
  Field<std::uint16_t> out(w, h);
  for (Index j = 0; j < h; ++j) {
    for (Index i = 0; i < w; ++i) {
      const int hi = f.get();
      const int lo = f.get();
      if (!f) throw Error(Errc::TruncatedFile, "PGM ends early: " + path.string());
      out(i, j) = static_cast<std::uint16_t>((hi << 8) | lo);
    }
  }
  return out;
}

void write_image_file(const fs::path& path, const Image2D& img, const nlohmann::json& meta) {
  nlohmann::json m = meta.is_object() ? meta : nlohmann::json::object();
  m["kind"] = std::string(image_kind_name(img.kind));
  m["grid"] = {{"nx", img.grid.nx()},
               {"nz", img.grid.nz()},
               {"dx", img.grid.dx()},
               {"origin", {img.grid.origin().x, img.grid.origin().z}}};
  Tensor t;
  t.name = "image";
  t.dims = {static_cast<std::uint32_t>(img.values.rows()), static_cast<std::uint32_t>(img.values.cols())};
  t.values.assign(img.values.data(), img.values.data() + img.values.size());
  Tensor j;
  j.name = "meta";
  j.dtype = DType::json;
  j.text = m.dump();
  j.dims = {static_cast<std::uint32_t>(j.text.size())};
  write_container(path, {t, j});
}

Image2D read_image_file(const fs::path& path) {
  const auto ts = read_container(path);
  const Tensor* img = nullptr;
  nlohmann::json meta = nlohmann::json::object();
  for (const auto& t : ts) {
    if (t.name == "image") img = &t;
    if (t.name == "meta") meta = nlohmann::json::parse(t.text);
  }
  if (img == nullptr || img->dims.size() != 2) throw Error(Errc::ShapeError, "file has no image tensor");
  Fieldf v(static_cast<Index>(img->dims[0]), static_cast<Index>(img->dims[1]));
  std::copy(img->values.begin(), img->values.end(), v.data());
  const auto& g = meta.at("grid");
  Grid2D grid(g.at("nx").get<Index>(), g.at("nz").get<Index>(), g.at("dx").get<double>(),
              {g.at("origin").at(0).get<double>(), g.at("origin").at(1).get<double>()});
  const std::string kind = meta.value("kind", std::string("pa_recon"));
  const ImageKind k = kind == "bmode_db"           ? ImageKind::bmode_db
                      : kind == "initial_pressure" ? ImageKind::initial_pressure
                                                   : ImageKind::pa_recon;
  return {std::move(v), grid, k};
}

void write_noise_bank(const fs::path& path, const std::vector<Fieldf>& bank) {
  std::vector<Tensor> ts;
  for (std::size_t k = 0; k < bank.size(); ++k) {
    std::ostringstream name;
    name << "template_" << std::setw(4) << std::setfill('0') << k;
    Tensor t;
    t.name = name.str();
    t.dims = {static_cast<std::uint32_t>(bank[k].rows()), static_cast<std::uint32_t>(bank[k].cols())};
    t.values.assign(bank[k].data(), bank[k].data() + bank[k].size());
    ts.push_back(std::move(t));
  }
  write_container(path, ts);
}

std::vector<Fieldf> read_noise_bank(const fs::path& path) {
  std::vector<Fieldf> bank;
  for (const auto& t : read_container(path)) {
    if (t.name.rfind("template_", 0) != 0 || t.dtype != DType::f32 || t.dims.size() != 2) continue;
    Fieldf f(static_cast<Index>(t.dims[0]), static_cast<Index>(t.dims[1]));
    std::copy(t.values.begin(), t.values.end(), f.data());
    bank.push_back(std::move(f));
  }
  if (bank.empty()) throw Error(Errc::EmptyBank, "no templates in " + path.string());
  return bank;
}

}  // namespace paus
