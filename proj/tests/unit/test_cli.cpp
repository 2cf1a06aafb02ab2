// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "sgm/cli.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"

namespace sgm {
namespace {

namespace fs = std::filesystem;

const fs::path kFixtures = SGM_FIXTURE_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "sgm");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

/// Runs the installed binary through the shell; returns its exit status.
int run_binary(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " '" SGM_CLI_PATH "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string value_of(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  return {};
}

TEST(Cli, CutIsDeterministic) {
  test::TempDir dir("cli");
  const auto in = (kFixtures / "scene.png").string();
  const std::vector<std::string> base = {"cut", in, "-q", "200", "-r", "0.4", "-s", "7", "-o"};
  auto a = base;
  a.push_back((dir / "a.png").string());
  auto b = base;
  b.push_back((dir / "b.png").string());
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  EXPECT_EQ(read_file_bytes(dir / "a.png"), read_file_bytes(dir / "b.png"));
}

TEST(Cli, CutMatchesReferenceOnSavedLabels) {
  test::TempDir dir("cli");
  const auto in = kFixtures / "scene.png";
  const auto r = run({"cut", in.string(), "-q", "150", "-r", "0.5", "-s", "3", "-o", (dir / "out.png").string(),
                      "--labels", (dir / "labels.png").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto loaded = load_label_map(dir / "labels.png");
  EXPECT_EQ(load_image(dir / "out.png"), test::naive_cut(load_image(in), loaded.grid, 0.5, 3));
  ASSERT_TRUE(loaded.meta);
  EXPECT_EQ(r.out, "k=" + std::to_string(loaded.grid.superpixel_count()) +
                       " selected=" + std::to_string(*loaded.meta->selected) + "\n");
}

TEST(Cli, MixWithSmallerPartnerIsSizeError) {
  test::TempDir dir("cli");
  save_image(test::scene_image(20, 20, 1), dir / "big.png");
  save_image(test::scene_image(10, 10, 2), dir / "small.png");
  const auto r = run({"mix", (dir / "big.png").string(), (dir / "small.png").string(), "-q", "4", "-o",
                      (dir / "o.png").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_FALSE(fs::exists(dir / "o.png"));
  EXPECT_EQ(run({"mix", (dir / "small.png").string(), (dir / "big.png").string(), "-q", "4", "-o",
                 (dir / "o.png").string()})
                .code,
            0);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"cut", "x.png"}).code, 1);                           // missing --out
  EXPECT_EQ(run({"cut", "x.png", "-o", "y.png", "-r", "1.5"}).code, 1);  // out of range
  EXPECT_EQ(run({"batch", "d", "--op", "blur", "-o", "o"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, DataAndParameterErrors) {
  test::TempDir dir("cli");
  EXPECT_EQ(run({"cut", (kFixtures / "truncated.png").string(), "-o", (dir / "o.png").string()}).code, 2);
  EXPECT_EQ(run({"cut", (dir / "missing.png").string(), "-o", (dir / "o.png").string()}).code, 2);
  // More superpixels than pixels.
  EXPECT_EQ(run({"segment", (kFixtures / "rgb_2x1.png").string(), "-q", "5", "-o", (dir / "l.bin").string()}).code, 3);
}

TEST(Cli, SegmentWritesRawAndPngLabelMaps) {
  test::TempDir dir("cli");
  const auto in = kFixtures / "scene_small.png";
  for (const char* name : {"labels.bin", "labels.png"}) {
    const auto r = run({"segment", in.string(), "-q", "100", "-o", (dir / name).string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto loaded = load_label_map(dir / name);
    SlicParams p;
    p.superpixels = 100;
    EXPECT_EQ(loaded.grid, slic_segment(load_image(in), p));
    EXPECT_EQ(r.out, "k=" + std::to_string(loaded.grid.superpixel_count()) + "\n");
    ASSERT_TRUE(loaded.meta);
    EXPECT_EQ(loaded.meta->superpixels, 100);
  }
}

TEST(Cli, StatsReproducesMaskedRatio) {
  test::TempDir dir("cli");
  const auto in = kFixtures / "scene.png";
  ASSERT_EQ(run({"mean", in.string(), "-q", "300", "-r", "0.3", "-s", "11", "-o", (dir / "o.png").string(), "--labels",
                 (dir / "l.bin").string()})
                .code,
            0);
  const auto r = run({"stats", (dir / "l.bin").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto grid = load_label_map(dir / "l.bin").grid;
  const auto sel = select_superpixels(grid, 0.3, 11);
  EXPECT_EQ(value_of(r.out, "k"), std::to_string(grid.superpixel_count()));
  EXPECT_EQ(value_of(r.out, "selected"), std::to_string(sel.selected_count()));
  EXPECT_NEAR(std::stod(value_of(r.out, "masked_ratio")), masked_ratio(pixel_mask(grid, sel)), 1e-5);
  EXPECT_NEAR(std::stod(value_of(r.out, "dispersion")), relative_size_dispersion(grid), 1e-5);

  // Image input is segmented with the given flags.
  const auto direct = run({"stats", in.string(), "-q", "300", "-r", "0.3", "-s", "11"});
  ASSERT_EQ(direct.code, 0);
  EXPECT_EQ(direct.out, r.out);
}

TEST(Cli, ConfigFileSuppliesDefaultsAndFlagsOverride) {
  test::TempDir dir("cli");
  const auto in = (kFixtures / "scene_small.png").string();
  std::ofstream(dir / "cfg.ini") << "# sample\nsuperpixels = 60\nratio=0.5\nseed=9\n";
  ASSERT_EQ(run({"cut", in, "--config", (dir / "cfg.ini").string(), "-o", (dir / "a.png").string()}).code, 0);
  ASSERT_EQ(run({"cut", in, "-q", "60", "-r", "0.5", "-s", "9", "-o", (dir / "b.png").string()}).code, 0);
  EXPECT_EQ(read_file_bytes(dir / "a.png"), read_file_bytes(dir / "b.png"));
  ASSERT_EQ(run({"cut", in, "--config", (dir / "cfg.ini").string(), "--seed", "10", "-o", (dir / "c.png").string()})
                .code,
            0);
  ASSERT_EQ(run({"cut", in, "-q", "60", "-r", "0.5", "-s", "10", "-o", (dir / "d.png").string()}).code, 0);
  EXPECT_EQ(read_file_bytes(dir / "c.png"), read_file_bytes(dir / "d.png"));

  std::ofstream(dir / "bad.ini") << "superpixels\n";
  EXPECT_EQ(run({"cut", in, "--config", (dir / "bad.ini").string(), "-o", (dir / "e.png").string()}).code, 1);
  EXPECT_EQ(run({"cut", in, "--config", (dir / "none.ini").string(), "-o", (dir / "e.png").string()}).code, 1);
}

TEST(Cli, GalleryPanels) {
  test::TempDir dir("cli");
  const auto in = kFixtures / "scene_small.png";
  ASSERT_EQ(run({"gallery", in.string(), "-q", "50", "-o", (dir / "g3").string()}).code, 0);
  ASSERT_EQ(run({"gallery", in.string(), (kFixtures / "scene.png").string(), "-q", "50", "-o", (dir / "g5").string()})
                .code,
            0);
  const Image original = load_image(in);
  const Image strip3 = load_image(dir / "g3" / "strip.png");
  const Image strip5 = load_image(dir / "g5" / "strip.png");
  EXPECT_EQ(strip3.width(), 3 * 160 + 2 * 4);
  EXPECT_EQ(strip5.width(), 5 * 160 + 4 * 4);
  EXPECT_EQ(strip5.height(), 120);
  EXPECT_EQ(crop_top_left(strip5, 160, 120), original);
  EXPECT_EQ(strip5.at(160, 0, 0), 255);  // white separator
  for (const char* f : {"original.png", "cut.png", "mean.png", "partner.png", "mix.png"})
    EXPECT_TRUE(fs::exists(dir / "g5" / f)) << f;
  EXPECT_FALSE(fs::exists(dir / "g3" / "mix.png"));
}

TEST(Cli, BatchWritesManifest) {
  test::TempDir src("clisrc");
  test::TempDir out("cliout");
  fs::create_directories(src / "k");
  for (int i = 0; i < 3; ++i) save_image(test::scene_image(48, 40, std::uint64_t(i)), src / "k" / ("i" + std::to_string(i) + ".png"));
  const auto r = run({"batch", src.path().string(), "--op", "mix", "-q", "30", "-j", "2", "-o", out.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("k/i2.png"), std::string::npos);
  EXPECT_EQ(parse_manifest([&] {
              const auto b = read_file_bytes(out / "manifest.jsonl");
              return std::string(b.begin(), b.end());
            }())
                .size(),
            2u);
}

// ---------------------------------------------------------------- binary

TEST(CliBinary, ExitCodesAndSeedFromEnvironment) {
  test::TempDir dir("clibin");
  const std::string in = "'" + (kFixtures / "scene_small.png").string() + "'";
  const std::string out = [&](const char* n) { return "'" + (dir / n).string() + "'"; }("a.png");
  EXPECT_EQ(run_binary("cut " + in + " -q 80 -o " + out, "SGM_SEED=21"), 0);
  EXPECT_EQ(run_binary("cut " + in + " -q 80 -s 21 -o '" + (dir / "b.png").string() + "'"), 0);
  EXPECT_EQ(read_file_bytes(dir / "a.png"), read_file_bytes(dir / "b.png"));
  EXPECT_EQ(run_binary("cut " + in + " -q 80 -s 22 -o '" + (dir / "c.png").string() + "'"), 0);
  EXPECT_NE(read_file_bytes(dir / "a.png"), read_file_bytes(dir / "c.png"));

  EXPECT_EQ(run_binary("--bogus"), 1);
  EXPECT_EQ(run_binary("cut '" + (kFixtures / "not_an_image.png").string() + "' -o " + out), 2);
  save_image(test::scene_image(20, 20, 1), dir / "big.png");
  save_image(test::scene_image(10, 10, 2), dir / "small.png");
  EXPECT_EQ(run_binary("mix '" + (dir / "big.png").string() + "' '" + (dir / "small.png").string() + "' -q 4 -o " + out),
            3);
}

}  // namespace
}  // namespace sgm
