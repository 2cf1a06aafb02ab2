// SPDX-License-Identifier: Apache-2.0
#pragma once

// Label map export.
//
//  * PNG: 16-bit single-channel, one sample per pixel holding the label
//    (only when k <= 65536).
//  * Raw: little-endian u32 width, u32 height, then width*height u32 labels,
//    row-major.
//
// Both are accompanied by a sidecar `<file>.meta` of `key=value` lines
// recording k and the segmentation parameters (and, when known, the
// selection ratio/seed/count).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sgm/core.hpp"
#include "sgm/error.hpp"
#include "sgm/image_io.hpp"

namespace sgm {

struct LabelMetadata {
  std::size_t superpixel_count = 0;
  int width = 0;
  int height = 0;
  std::string grid_type = "slic";
  int superpixels = 0;
  double compactness = 0.0;
  int iterations = 0;
  double min_region_fraction = 0.0;
  std::optional<double> ratio;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> selected;
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& labels) {
  return std::filesystem::path(labels.string() + ".meta");
}

inline std::string format_metadata(const LabelMetadata& m) {
  std::ostringstream os;
  os.precision(17);
  os << "format=sgm-labels\n"
     << "width=" << m.width << "\n"
     << "height=" << m.height << "\n"
     << "k=" << m.superpixel_count << "\n"
     << "grid_type=" << m.grid_type << "\n"
     << "superpixels=" << m.superpixels << "\n"
     << "compactness=" << m.compactness << "\n"
     << "iterations=" << m.iterations << "\n"
     << "min_region_fraction=" << m.min_region_fraction << "\n";
  if (m.ratio) os << "ratio=" << *m.ratio << "\n";
  if (m.seed) os << "seed=" << *m.seed << "\n";
  if (m.selected) os << "selected=" << *m.selected << "\n";
  return os.str();
}

inline LabelMetadata parse_metadata(const std::string& text, const std::string& name) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DecodeError(name + ": malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (kv["format"] != "sgm-labels") throw DecodeError(name + ": not a label sidecar");
  LabelMetadata m;
  try {
    m.width = std::stoi(kv.at("width"));
    m.height = std::stoi(kv.at("height"));
    m.superpixel_count = std::stoull(kv.at("k"));
    m.grid_type = kv.at("grid_type");
    m.superpixels = std::stoi(kv.at("superpixels"));
    m.compactness = std::stod(kv.at("compactness"));
    m.iterations = std::stoi(kv.at("iterations"));
    m.min_region_fraction = std::stod(kv.at("min_region_fraction"));
    if (kv.count("ratio")) m.ratio = std::stod(kv["ratio"]);
    if (kv.count("seed")) m.seed = std::stoull(kv["seed"]);
    if (kv.count("selected")) m.selected = std::stoull(kv["selected"]);
  } catch (const std::exception&) {
    throw DecodeError(name + ": missing or malformed sidecar field");
  }
  return m;
}

inline std::vector<std::uint8_t> encode_labels_raw(const SuperpixelGrid& grid) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + 4 * grid.pixel_count());
  const auto put = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
  };
  put(std::uint32_t(grid.width()));
  put(std::uint32_t(grid.height()));
  for (Label l : grid.labels()) put(l);
  return out;
}

inline SuperpixelGrid decode_labels_raw(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  const auto get = [&](std::size_t off) {
    return std::uint32_t(bytes[off]) | (std::uint32_t(bytes[off + 1]) << 8) | (std::uint32_t(bytes[off + 2]) << 16) |
           (std::uint32_t(bytes[off + 3]) << 24);
  };
  if (bytes.size() < 8) throw DecodeError(name + ": raw label map shorter than its header");
  const std::uint64_t w = get(0);
  const std::uint64_t h = get(4);
  if (w == 0 || h == 0 || bytes.size() != 8 + 4 * w * h)
    throw DecodeError(name + ": raw label map size does not match its header");
  std::vector<Label> labels(w * h);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = get(8 + 4 * i);
  try {
    return SuperpixelGrid(int(w), int(h), std::move(labels));
  } catch (const Error& e) {
    throw DecodeError(name + ": " + e.what());
  }
}

inline std::vector<std::uint8_t> encode_labels_png(const SuperpixelGrid& grid) {
  if (grid.superpixel_count() > 65536) throw ParameterError("16-bit PNG label maps hold at most 65536 labels");
  std::vector<std::uint8_t> rows(2 * grid.pixel_count());
  auto labels = grid.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    rows[2 * i] = std::uint8_t(labels[i] >> 8);
    rows[2 * i + 1] = std::uint8_t(labels[i] & 0xFF);
  }
  return detail::png_encode(grid.width(), grid.height(), 1, 16, rows.data());
}

inline SuperpixelGrid decode_labels_png(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  detail::PngDecoded dec;
  if (auto msg = detail::png_decode(bytes, false, dec); !msg.empty()) throw DecodeError(name + ": " + msg);
  if (dec.info.channels != 1 || dec.bit_depth != 16) throw DecodeError(name + ": label PNG must be 16-bit gray");
  std::vector<Label> labels(std::size_t(dec.info.width) * std::size_t(dec.info.height));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = (Label(dec.rows[2 * i]) << 8) | dec.rows[2 * i + 1];
  try {
    return SuperpixelGrid(dec.info.width, dec.info.height, std::move(labels));
  } catch (const Error& e) {
    throw DecodeError(name + ": " + e.what());
  }
}

/// Writes `grid` as a 16-bit PNG when the path ends in .png, raw otherwise,
/// followed by the sidecar.
inline void save_label_map(const SuperpixelGrid& grid, const LabelMetadata& meta, const std::filesystem::path& path) {
  const bool png = path.extension() == ".png";
  write_file_bytes(path, png ? encode_labels_png(grid) : encode_labels_raw(grid));
  const std::string text = format_metadata(meta);
  write_file_bytes(sidecar_path(path), std::vector<std::uint8_t>(text.begin(), text.end()));
}

struct LoadedLabels {
  SuperpixelGrid grid;
  std::optional<LabelMetadata> meta;
};

/// Reads a label map (format sniffed from content) and its sidecar if present.
inline LoadedLabels load_label_map(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  LoadedLabels out;
  out.grid = sniff_format(bytes) == ImageFormat::Png ? decode_labels_png(bytes, path.string())
                                                     : decode_labels_raw(bytes, path.string());
  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    const auto sb = read_file_bytes(side);
    out.meta = parse_metadata(std::string(sb.begin(), sb.end()), side.string());
  }
  return out;
}

}  // namespace sgm
