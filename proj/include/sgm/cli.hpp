// SPDX-License-Identifier: Apache-2.0
#pragma once

// Command-line front end. Exit codes:
//   0  success
//   1  usage error (unknown flag, missing argument, out-of-range value)
//   2  data error (undecodable input, unreadable or unwritable file)
//   3  constraint violation (mix partner too small, q larger than the image, shape mismatch)

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgm/augment.hpp"
#include "sgm/core.hpp"
#include "sgm/error.hpp"
#include "sgm/image_io.hpp"
#include "sgm/label_io.hpp"
#include "sgm/pipeline.hpp"
#include "sgm/slic.hpp"

namespace sgm::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kConstraint = 3 };

inline int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Decode:
    case ErrorKind::Io: return kData;
    case ErrorKind::Dimension:
    case ErrorKind::Parameter:
    case ErrorKind::SizeConstraint: return kConstraint;
  }
  return kData;
}

/// Thrown for malformed config files; maps to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Pulls `--config FILE` out of `args` and appends `--key=value` for every
/// config entry whose flag is not already on the command line.
inline std::vector<std::string> apply_config_file(std::vector<std::string> args) {
  std::optional<std::string> file;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config requires a file argument");
      file = args[i + 1];
      args.erase(args.begin() + std::ptrdiff_t(i), args.begin() + std::ptrdiff_t(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      args.erase(args.begin() + std::ptrdiff_t(i));
      break;
    }
  }
  if (!file) return args;

  std::ifstream in(*file);
  if (!in) throw UsageError("cannot open config file " + *file);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(*file + ":" + std::to_string(lineno) + ": expected key=value");
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
    if (present) continue;
    if (key == "include-originals") {
      if (value == "true" || value == "1" || value == "yes") args.push_back(flag);
      continue;
    }
    args.push_back(flag + "=" + value);
  }
  return args;
}

struct SegmentOptions {
  int superpixels = 200;
  double compactness = 10.0;
  int iterations = 10;
  double min_region_fraction = 0.25;

  void attach(CLI::App* app) {
    app->add_option("--superpixels,-q", superpixels, "requested number of superpixels q")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--compactness,-m", compactness, "SLIC compactness m")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--iterations", iterations, "SLIC k-means rounds")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--min-region-fraction", min_region_fraction, "connectivity cleanup threshold, fraction of W*H/q")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
  }

  SlicParams slic() const { return {superpixels, compactness, iterations, min_region_fraction}; }
};

struct SelectOptions {
  double ratio = 0.4;
  std::uint64_t seed = 0;

  void attach(CLI::App* app) {
    app->add_option("--ratio,-r", ratio, "ratio r of processed superpixels")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    app->add_option("--seed,-s", seed, "random seed s")->envname("SGM_SEED")->capture_default_str();
  }
};

inline AugmentConfig make_config(const SegmentOptions& seg, const SelectOptions& sel) {
  AugmentConfig c;
  c.superpixels = seg.superpixels;
  c.compactness = seg.compactness;
  c.iterations = seg.iterations;
  c.min_region_fraction = seg.min_region_fraction;
  c.ratio = sel.ratio;
  c.seed = sel.seed;
  return c;
}

inline LabelMetadata metadata_for(const SuperpixelGrid& grid, const SlicParams& p) {
  LabelMetadata m;
  m.width = grid.width();
  m.height = grid.height();
  m.superpixel_count = grid.superpixel_count();
  m.superpixels = p.superpixels;
  m.compactness = p.compactness;
  m.iterations = p.iterations;
  m.min_region_fraction = p.min_region_fraction;
  return m;
}

/// Horizontal strip of panels separated by a 4-pixel white gap.
inline Image make_strip(const std::vector<Image>& panels) {
  constexpr int gap = 4;
  int width = 0;
  int height = 0;
  int channels = 1;
  for (const auto& p : panels) {
    width += p.width();
    height = std::max(height, p.height());
    channels = std::max(channels, p.channels());
  }
  width += gap * int(panels.size() - 1);
  Image strip(width, height, channels, 255);
  int x0 = 0;
  for (const auto& raw : panels) {
    const Image p = channels == 3 ? to_rgb(raw) : raw;
    const auto row = std::size_t(p.width()) * std::size_t(channels);
    for (int y = 0; y < p.height(); ++y) std::copy_n(p.pixel(0, y), row, strip.pixel(x0, y));
    x0 += p.width() + gap;
  }
  return strip;
}

inline bool looks_like_label_map(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  switch (sniff_format(bytes)) {
    case ImageFormat::Jpeg: return false;
    case ImageFormat::Unknown: return true;
    case ImageFormat::Png: {
      sgm::detail::PngDecoded dec;
      if (!sgm::detail::png_decode(bytes, true, dec).empty()) return false;
      return dec.bit_depth == 16 && dec.info.channels == 1;
    }
  }
  return false;
}

}  // namespace detail

/// Parses and executes one invocation. `args[0]` is the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Superpixel grid masks: cut / mean / mix data augmentation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sgm 1.0.0");
  app.footer("Exit codes: 0 ok, 1 usage, 2 data/decode, 3 constraint violation.\n"
             "Flags may also come from --config FILE (key=value lines named after the flags).");

  detail::SegmentOptions seg;
  detail::SelectOptions sel;
  std::string input;
  std::string partner;
  std::string output;
  std::string labels_out;
  std::string op_name;
  std::size_t workers = 1;
  bool include_originals = false;

  auto* segment = app.add_subcommand("segment", "write the SLIC label map of an image");
  segment->add_option("input", input, "input image")->required();
  segment->add_option("--out,-o", output, "label map (.png = 16-bit PNG, otherwise raw u32)")->required();
  seg.attach(segment);

  std::map<std::string, CLI::App*> single;
  for (const char* name : {"cut", "mean", "mix"}) {
    const std::string desc = std::string(name) == "cut"   ? "blacken a random sample of superpixels"
                             : std::string(name) == "mean" ? "fill a random sample of superpixels with their mean colour"
                                                           : "copy a random sample of superpixels from a partner image";
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("input", input, "input image")->required();
    if (std::string(name) == "mix") sub->add_option("partner", partner, "partner image (same class, at least as large)")->required();
    sub->add_option("--out,-o", output, "output PNG")->required();
    sub->add_option("--labels", labels_out, "also write the label map and selection sidecar here");
    seg.attach(sub);
    sel.attach(sub);
    single[name] = sub;
  }

  auto* batch = app.add_subcommand("batch", "augment a dataset directory or index file");
  batch->add_option("root", input, "dataset root (root/<class>/<image>) or index file (path<TAB>class lines)")->required();
  batch->add_option("--op", op_name, "operator")->required()->check(CLI::IsMember({"cut", "mean", "mix"}));
  batch->add_option("--workers,-j", workers, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  batch->add_option("--out,-o", output, "output directory")->required();
  batch->add_flag("--include-originals", include_originals, "copy the source images next to the augmented ones");
  seg.attach(batch);
  sel.attach(batch);

  auto* stats = app.add_subcommand("stats", "print k, k', masked ratio and size dispersion");
  stats->add_option("input", input, "label map (with optional .meta sidecar) or image to segment")->required();
  seg.attach(stats);
  sel.attach(stats);

  auto* gallery = app.add_subcommand("gallery", "write the original / cut / mean / partner / mix comparison panels");
  gallery->add_option("input", input, "input image")->required();
  gallery->add_option("partner", partner, "optional mix partner");
  gallery->add_option("--out,-o", output, "output directory")->required();
  seg.attach(gallery);
  sel.attach(gallery);

  std::vector<std::string> expanded;
  try {
    expanded = detail::apply_config_file(std::move(args));
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  std::vector<char*> argv;
  for (auto& a : expanded) argv.push_back(a.data());

  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (segment->parsed()) {
      const Image image = load_image(input);
      const SlicParams params = seg.slic();
      const SuperpixelGrid grid = slic_segment(image, params);
      save_label_map(grid, detail::metadata_for(grid, params), output);
      out << "k=" << grid.superpixel_count() << "\n";
      return kOk;
    }

    for (const auto& [name, sub] : single) {
      if (!sub->parsed()) continue;
      const Operator op = *parse_operator(name);
      const Image image = load_image(input);
      std::optional<Image> partner_image;
      if (op == Operator::Mix) partner_image = load_image(partner);
      const AugmentConfig config = detail::make_config(seg, sel);
      const AugmentOutcome outcome =
          augment_one(image, op, config, partner_image ? &*partner_image : nullptr,
                      op == Operator::Mix ? std::optional<std::string>(partner) : std::nullopt);
      save_image(outcome.image, output);
      if (!labels_out.empty()) {
        LabelMetadata meta = detail::metadata_for(outcome.grid, SlicParams::from(config));
        meta.ratio = config.ratio;
        meta.seed = config.seed;
        meta.selected = outcome.selection.selected_count();
        save_label_map(outcome.grid, meta, labels_out);
      }
      out << "k=" << outcome.grid.superpixel_count() << " selected=" << outcome.selection.selected_count() << "\n";
      return kOk;
    }

    if (batch->parsed()) {
      const DatasetIndex index = DatasetIndex::load(input);
      const AugmentConfig config = detail::make_config(seg, sel);
      const BatchResult result =
          batch_augment(index, *parse_operator(op_name), config, output, {workers, include_originals});
      for (const auto& r : result.records) {
        if (r.status == "ok")
          out << r.output << "\n";
        else
          err << "error: " << (r.sources.empty() ? std::string{} : r.sources.front()) << ": " << r.error << "\n";
      }
      for (const auto& s : result.skipped) err << "skipped (no eligible mix partner): " << s << "\n";
      out << "wrote " << result.written() << " files, manifest " << result.manifest_path.string() << "\n";
      return kOk;
    }

    if (stats->parsed()) {
      SuperpixelGrid grid;
      std::optional<double> ratio;
      std::optional<std::uint64_t> seed;
      if (detail::looks_like_label_map(input)) {
        auto loaded = load_label_map(input);
        grid = std::move(loaded.grid);
        if (loaded.meta) {
          ratio = loaded.meta->ratio;
          seed = loaded.meta->seed;
        }
        if (stats->count("--ratio")) ratio = sel.ratio;
        if (stats->count("--seed") || (!seed && ratio)) seed = sel.seed;
      } else {
        grid = slic_segment(load_image(input), seg.slic());
        ratio = sel.ratio;
        seed = sel.seed;
      }
      out << "k=" << grid.superpixel_count() << "\n";
      if (ratio && seed) {
        const SelectionMask selection = select_superpixels(grid, *ratio, *seed);
        out << "selected=" << selection.selected_count() << "\n";
        out << "masked_ratio=" << masked_ratio(pixel_mask(grid, selection)) << "\n";
      }
      out << "dispersion=" << relative_size_dispersion(grid) << "\n";
      return kOk;
    }

    if (gallery->parsed()) {
      const Image image = load_image(input);
      const AugmentConfig config = detail::make_config(seg, sel);
      const SuperpixelGrid grid = slic_segment(image, SlicParams::from(config));
      const SelectionMask selection = select_superpixels(grid, config.ratio, config.seed);
      std::filesystem::create_directories(output);
      const std::filesystem::path dir(output);
      std::vector<Image> panels{image, grid_cut(image, grid, selection), grid_mean(image, grid, selection)};
      save_image(panels[0], dir / "original.png");
      save_image(panels[1], dir / "cut.png");
      save_image(panels[2], dir / "mean.png");
      if (!partner.empty()) {
        const Image partner_image = load_image(partner);
        const Image mixed = grid_mix(image, partner_image, grid, selection);
        const Image shown = crop_top_left(partner_image, image.width(), image.height());
        save_image(shown, dir / "partner.png");
        save_image(mixed, dir / "mix.png");
        panels.push_back(shown);
        panels.push_back(mixed);
      }
      save_image(detail::make_strip(panels), dir / "strip.png");
      out << "k=" << grid.superpixel_count() << " selected=" << selection.selected_count() << "\n";
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace sgm::cli
