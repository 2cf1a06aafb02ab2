// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sgm/augment.hpp"
#include "sgm/core.hpp"
#include "sgm/error.hpp"
#include "sgm/image_io.hpp"
#include "sgm/worker_pool.hpp"

namespace sgm {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Counting
// ---------------------------------------------------------------------------

struct AugmentationCount {
  std::uint64_t total = 0;      ///< originals plus every ordered mix pair: N + N(N-1)
  std::uint64_t augmented = 0;  ///< N(N-1)
};

constexpr AugmentationCount augmentation_count(std::uint64_t n) noexcept {
  const std::uint64_t augmented = n == 0 ? 0 : n * (n - 1);
  return {n + augmented, augmented};
}

// ---------------------------------------------------------------------------
// Dataset index
// ---------------------------------------------------------------------------

struct DatasetEntry {
  fs::path path;            ///< where to read the image from
  std::string id;           ///< canonical source identifier (stable across machines)
  std::string class_label;
  int width = 0;
  int height = 0;
  int channels = 0;
};

/// A source that could not be probed; carried into the manifest as an error.
struct DatasetFailure {
  std::string id;
  std::string class_label;
  std::string message;
};

struct DatasetIndex {
  std::vector<DatasetEntry> entries;
  std::vector<DatasetFailure> failures;

  std::size_t size() const noexcept { return entries.size(); }

  void add(fs::path path, std::string id, std::string class_label) {
    for (const auto& e : entries)
      if (e.id == id) throw ParameterError("duplicate dataset entry " + id);
    try {
      const ImageInfo info = probe_image(path);
      entries.push_back({std::move(path), std::move(id), std::move(class_label), info.width, info.height, info.channels});
    } catch (const DecodeError& e) {
      failures.push_back({std::move(id), std::move(class_label), e.what()});
    }
  }

  /// `root/<class>/<image>`; classes and files visited in lexicographic order.
  /// Source ids are the root-relative paths `<class>/<file>`.
  static DatasetIndex scan_directory(const fs::path& root) {
    if (!fs::is_directory(root)) throw DecodeError(root.string() + " is not a directory");
    std::vector<fs::path> classes;
    for (const auto& d : fs::directory_iterator(root))
      if (d.is_directory()) classes.push_back(d.path());
    std::sort(classes.begin(), classes.end());
    DatasetIndex index;
    for (const auto& cls : classes) {
      std::vector<fs::path> files;
      for (const auto& f : fs::directory_iterator(cls))
        if (f.is_regular_file() && is_image_extension(f.path())) files.push_back(f.path());
      std::sort(files.begin(), files.end());
      const std::string label = cls.filename().string();
      for (const auto& f : files) index.add(f, label + "/" + f.filename().string(), label);
    }
    return index;
  }

  /// One `path<TAB>class` line per image; relative paths resolve against the
  /// index file's directory. Blank lines and `#` comments are ignored.
  static DatasetIndex read_index_file(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DecodeError("cannot open index file " + file.string());
    DatasetIndex index;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
        throw DecodeError(file.string() + ":" + std::to_string(lineno) + ": expected 'path<TAB>class'");
      std::string id = line.substr(0, tab);
      std::string label = line.substr(tab + 1);
      fs::path p(id);
      if (p.is_relative()) p = file.parent_path() / p;
      index.add(p, std::move(id), std::move(label));
    }
    return index;
  }

  static DatasetIndex load(const fs::path& source) {
    return fs::is_directory(source) ? scan_directory(source) : read_index_file(source);
  }

  static bool is_image_extension(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
  }
};

// ---------------------------------------------------------------------------
// Mix pairing
// ---------------------------------------------------------------------------

struct MixPair {
  std::size_t first;   ///< index of I (the segmented image)
  std::size_t second;  ///< index of J (the partner)
  friend bool operator==(const MixPair&, const MixPair&) = default;
};

struct PairingReport {
  std::vector<MixPair> pairs;
  std::vector<std::size_t> skipped;  ///< entries with no eligible partner
};

/// Pairs each entry with the nearest later entry of the same class that is at
/// least as wide and as tall (and has the same channel count).
inline PairingReport pair_consecutive(const DatasetIndex& index) {
  PairingReport report;
  const auto& e = index.entries;
  for (std::size_t i = 0; i < e.size(); ++i) {
    std::optional<std::size_t> partner;
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      if (e[j].class_label != e[i].class_label) continue;
      if (e[j].width >= e[i].width && e[j].height >= e[i].height && e[j].channels == e[i].channels) {
        partner = j;
        break;
      }
    }
    if (partner)
      report.pairs.push_back({i, *partner});
    else
      report.skipped.push_back(i);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Seeds
// ---------------------------------------------------------------------------

/// Per-image seed: FNV-1a 64 over (global seed as 8 little-endian bytes,
/// source id bytes, one 0x00 byte, operator name bytes), then passed through
/// the SplitMix64 finalizer.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view source_id, std::string_view op_tag) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  const auto eat = [&](std::uint8_t b) {
    h ^= b;
    h *= 0x100000001B3ULL;
  };
  for (int i = 0; i < 8; ++i) eat(std::uint8_t(global_seed >> (8 * i)));
  for (char c : source_id) eat(std::uint8_t(c));
  eat(0);
  for (char c : op_tag) eat(std::uint8_t(c));
  return CounterRng::mix64(h);
}

inline std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view source_id, Operator op) {
  return derive_seed(global_seed, source_id, to_string(op));
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

struct ManifestRecord {
  std::string output;  ///< path relative to the output directory, '/' separated; empty on error
  std::string op;      ///< cut | mean | mix | original
  std::vector<std::string> sources;
  std::string class_label;
  AugmentConfig config;  ///< config.seed holds the effective per-image seed
  std::size_t k = 0;
  std::size_t selected = 0;
  double masked_ratio = 0.0;
  std::string status = "ok";  ///< ok | error
  std::string error;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

/// Field names of one manifest line. Stable; documented in the README.
inline nlohmann::json to_json(const ManifestRecord& r) {
  nlohmann::json j;
  j["output"] = r.output.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.output);
  j["operator"] = r.op;
  j["sources"] = r.sources;
  j["class"] = r.class_label;
  j["status"] = r.status;
  if (r.status == "ok" && r.op != "original") {
    j["config"] = {{"t", std::string(to_string(r.config.grid_type))},
                   {"s", r.config.seed},
                   {"q", r.config.superpixels},
                   {"r", r.config.ratio},
                   {"compactness", r.config.compactness},
                   {"iterations", r.config.iterations},
                   {"min_region_fraction", r.config.min_region_fraction}};
    j["k"] = r.k;
    j["selected"] = r.selected;
    j["masked_ratio"] = r.masked_ratio;
  }
  if (r.status != "ok") j["error"] = r.error;
  return j;
}

inline ManifestRecord record_from_json(const nlohmann::json& j) {
  ManifestRecord r;
  r.output = j.at("output").is_null() ? std::string{} : j.at("output").get<std::string>();
  r.op = j.at("operator").get<std::string>();
  r.sources = j.at("sources").get<std::vector<std::string>>();
  r.class_label = j.at("class").get<std::string>();
  r.status = j.at("status").get<std::string>();
  if (j.contains("config")) {
    const auto& c = j["config"];
    r.config.grid_type = parse_grid_type(c.at("t").get<std::string>()).value_or(GridType::Slic);
    r.config.seed = c.at("s").get<std::uint64_t>();
    r.config.superpixels = c.at("q").get<int>();
    r.config.ratio = c.at("r").get<double>();
    r.config.compactness = c.at("compactness").get<double>();
    r.config.iterations = c.at("iterations").get<int>();
    r.config.min_region_fraction = c.at("min_region_fraction").get<double>();
    r.k = j.at("k").get<std::size_t>();
    r.selected = j.at("selected").get<std::size_t>();
    r.masked_ratio = j.at("masked_ratio").get<double>();
  }
  if (j.contains("error")) r.error = j["error"].get<std::string>();
  return r;
}

inline std::string format_manifest(const std::vector<ManifestRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

inline std::vector<ManifestRecord> parse_manifest(const std::string& text) {
  std::vector<ManifestRecord> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DecodeError(std::string("malformed manifest line: ") + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Batch
// ---------------------------------------------------------------------------

inline constexpr std::string_view kManifestName = "manifest.jsonl";

struct BatchOptions {
  std::size_t workers = 1;
  bool include_originals = false;
};

struct BatchResult {
  std::vector<ManifestRecord> records;  ///< sorted by output path, errors last
  std::vector<std::string> skipped;     ///< mix sources without an eligible partner
  fs::path manifest_path;

  std::size_t written() const {
    return std::size_t(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.status == "ok"; }));
  }
};

namespace detail {

inline std::string sanitize_component(std::string_view s) {
  std::string out;
  for (unsigned char c : s) out += (std::isalnum(c) || c == '.' || c == '-' || c == '_' || c == '+') ? char(c) : '_';
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

/// `<class>/<file name>` for each entry, made unique by a `~n` suffix in index order.
inline std::vector<std::string> output_stems(const DatasetIndex& index) {
  std::vector<std::string> stems;
  std::map<std::string, int> seen;
  for (const auto& e : index.entries) {
    std::string stem = sanitize_component(e.class_label) + "/" + sanitize_component(fs::path(e.id).filename().string());
    const int n = ++seen[stem];
    if (n > 1) stem += "~" + std::to_string(n);
    stems.push_back(std::move(stem));
  }
  return stems;
}

}  // namespace detail

/// Augments every source (cut / mean) or every consecutive same-class pair
/// (mix), writes PNG outputs plus `manifest.jsonl` under `out_dir`.
///
/// Unreadable sources become error records; failure to write is fatal
/// (IoError). Outputs and manifest do not depend on `options.workers`.
inline BatchResult batch_augment(const DatasetIndex& index, Operator op, const AugmentConfig& config,
                                 const fs::path& out_dir, const BatchOptions& options = {}) {
  config.validate();
  if (options.workers < 1) throw ParameterError("workers must be >= 1");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir.string());

  const auto stems = detail::output_stems(index);
  struct Task {
    std::size_t primary;
    std::optional<std::size_t> partner;
    std::string output;
  };
  std::vector<Task> tasks;
  BatchResult result;
  const std::string op_name(to_string(op));
  if (op == Operator::Mix) {
    const auto pairing = pair_consecutive(index);
    for (const auto& p : pairing.pairs) {
      const std::string partner_name = stems[p.second].substr(stems[p.second].find('/') + 1);
      tasks.push_back({p.first, p.second, stems[p.first] + "+" + partner_name + ".mix.png"});
    }
    for (auto s : pairing.skipped) result.skipped.push_back(index.entries[s].id);
  } else {
    for (std::size_t i = 0; i < index.entries.size(); ++i) tasks.push_back({i, std::nullopt, stems[i] + "." + op_name + ".png"});
  }

  std::set<std::string> dirs;
  for (const auto& s : stems) dirs.insert(s.substr(0, s.find('/')));
  for (const auto& d : dirs) {
    fs::create_directories(out_dir / d, ec);
    if (ec) throw IoError("cannot create " + (out_dir / d).string());
  }

  std::vector<ManifestRecord> records(tasks.size());
  parallel_for_index(tasks.size(), options.workers, [&](std::size_t t) {
    const Task& task = tasks[t];
    const DatasetEntry& src = index.entries[task.primary];
    ManifestRecord& rec = records[t];
    rec.op = op_name;
    rec.class_label = src.class_label;
    rec.sources.push_back(src.id);
    if (task.partner) rec.sources.push_back(index.entries[*task.partner].id);

    AugmentConfig cfg = config;
    cfg.seed = derive_seed(config.seed, src.id, op);
    rec.config = cfg;

    AugmentOutcome outcome;
    try {
      const Image image = load_image(src.path);
      if (task.partner) {
        const Image partner = load_image(index.entries[*task.partner].path);
        outcome = augment_one(image, op, cfg, &partner, index.entries[*task.partner].id);
      } else {
        outcome = augment_one(image, op, cfg);
      }
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      rec.status = "error";
      rec.error = e.what();
      return;
    }
    save_image(outcome.image, out_dir / task.output);
    rec.output = task.output;
    rec.k = outcome.grid.superpixel_count();
    rec.selected = outcome.selection.selected_count();
    rec.masked_ratio = masked_ratio(pixel_mask(outcome.grid, outcome.selection));
  });

  if (options.include_originals) {
    for (std::size_t i = 0; i < index.entries.size(); ++i) {
      const auto& e = index.entries[i];
      std::string ext = e.path.extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
      ManifestRecord rec;
      rec.output = stems[i] + ".orig" + ext;
      rec.op = "original";
      rec.sources = {e.id};
      rec.class_label = e.class_label;
      fs::copy_file(e.path, out_dir / rec.output, fs::copy_options::overwrite_existing, ec);
      if (ec) throw IoError("cannot copy " + e.path.string() + ": " + ec.message());
      records.push_back(std::move(rec));
    }
  }

  for (const auto& f : index.failures) {
    ManifestRecord rec;
    rec.op = op_name;
    rec.sources = {f.id};
    rec.class_label = f.class_label;
    rec.status = "error";
    rec.error = f.message;
    records.push_back(std::move(rec));
  }

  std::sort(records.begin(), records.end(), [](const ManifestRecord& a, const ManifestRecord& b) {
    const bool ae = a.output.empty();
    const bool be = b.output.empty();
    if (ae != be) return be;  // successful records first
    if (a.output != b.output) return a.output < b.output;
    return a.sources < b.sources;
  });

  result.records = std::move(records);
  result.manifest_path = out_dir / kManifestName;
  const std::string text = format_manifest(result.records);
  write_file_bytes(result.manifest_path, std::vector<std::uint8_t>(text.begin(), text.end()));
  return result;
}

}  // namespace sgm
