#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "attnbn/eval/upsample.hpp"
#include "attnbn/model/checkpoint.hpp"
#include "attnbn/scene/dataset.hpp"
#include "cli.hpp"
#include "images.hpp"
#include "temp_dir.hpp"

namespace attnbn::cli {
namespace {

using testing::read_bytes;
using testing::TempDir;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "attnbn");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

class CliTest : public ::testing::Test {
 protected:
  // Small shared corpus; every test writes its outputs under its own directory.
  static void SetUpTestSuite() {
    dir_ = new TempDir();
    ASSERT_EQ(invoke({"generate", "--count", "6", "--seed", "3", "--out", (*dir_ / "data.abds").string()}).code, 0);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::string data() { return (*dir_ / "data.abds").string(); }

  TempDir local_;
  static TempDir* dir_;
};

TempDir* CliTest::dir_ = nullptr;

TEST_F(CliTest, GenerateZeroCountWritesAnEmptyDataset) {
  const auto path = local_ / "empty.abds";
  const auto r = invoke({"generate", "--count", "0", "--out", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(scene::DatasetReader(path).size(), 0u);
  EXPECT_TRUE(std::filesystem::exists(path.string() + ".manifest.txt"));
}

TEST_F(CliTest, GenerateIsDeterministic) {
  const auto a = local_ / "a.abds", b = local_ / "b.abds";
  ASSERT_EQ(invoke({"generate", "--count", "4", "--seed", "9", "--out", a.string()}).code, 0);
  ASSERT_EQ(invoke({"generate", "--count", "4", "--seed", "9", "--out", b.string()}).code, 0);
  EXPECT_EQ(read_bytes(a), read_bytes(b));
}

TEST_F(CliTest, GenerateHonorsAForcedKindMix) {
  const auto path = local_ / "signs.abds";
  ASSERT_EQ(invoke({"generate", "--count", "5", "--kind-mix", "stop_sign=1", "--out", path.string()}).code, 0);
  for (const auto& ex : scene::read_dataset(path)) EXPECT_EQ(ex.kind, scene::ScenarioKind::kStopSign);
}

TEST_F(CliTest, ArgumentErrorsMapToExitTwo) {
  EXPECT_EQ(invoke({"generate", "--kind-mix", "bogus=1", "--out", (local_ / "x.abds").string()}).code,
            kExitInvalidArgument);
  EXPECT_EQ(invoke({"train"}).code, kExitInvalidArgument);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitInvalidArgument);
  EXPECT_EQ(invoke({"train", "--data", data(), "--variant", "attention=none,pe=on", "--out-dir",
                    (local_ / "t").string()}).code,
            kExitUnsupportedVariant);
}

TEST_F(CliTest, MissingDatasetIsAnIoError) {
  const auto r = invoke({"train", "--data", (local_ / "absent.abds").string(), "--out-dir", (local_ / "t").string()});
  EXPECT_EQ(r.code, kExitIo);
  EXPECT_NE(r.code, kExitDivergence);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, TrainIsDeterministic) {
  for (const char* sub : {"r1", "r2"}) {
    const auto r = invoke({"train", "--data", data(), "--steps", "2", "--batch", "2", "--seed", "4", "--out-dir",
                           (local_ / sub).string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(read_bytes(local_ / "r1" / "final.abck"), read_bytes(local_ / "r2" / "final.abck"));
  EXPECT_EQ(read_bytes(local_ / "r1" / "train_log.csv"), read_bytes(local_ / "r2" / "train_log.csv"));
}

TEST_F(CliTest, AblateLeavesEntropyEmptyWithoutAttention) {
  const auto out = local_ / "abl";
  const auto r = invoke({"ablate", "--grid", "A", "--grid", "B", "--train-data", data(), "--test-data", data(),
                         "--steps", "1", "--batch", "2", "--out-dir", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = read_lines(out / "metrics.csv");
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[1].rfind("A,", 0), 0u);
  EXPECT_NE(lines[1].find(",,"), std::string::npos);
  EXPECT_EQ(lines[2].rfind("B,", 0), 0u);
  EXPECT_EQ(lines[2].find(",,"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(out / "attention_histogram.csv"));
}

TEST_F(CliTest, ExplainRejectsModelA) {
  model::Network net(model::model_a(), model::ModelConfig{}, 1);
  const auto ck = local_ / "a.abck";
  model::save_checkpoint(net, {}, ck);
  const auto r = invoke({"explain", "--checkpoint", ck.string(), "--data", data(), "--out-dir", (local_ / "x").string()});
  EXPECT_EQ(r.code, kExitUnsupportedVariant);
}

TEST_F(CliTest, ExplainWritesOneImagePairPerExample) {
  model::Network net(model::full_bottleneck(), model::ModelConfig{}, 1);
  const auto ck = local_ / "f.abck";
  model::save_checkpoint(net, {}, ck);
  const auto out = local_ / "x";
  const auto r = invoke({"explain", "--checkpoint", ck.string(), "--data", data(), "--first", "1", "--limit", "2",
                         "--out-dir", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(out / "attention_0001.pgm"));
  EXPECT_TRUE(std::filesystem::exists(out / "overlay_0002.ppm"));
  EXPECT_FALSE(std::filesystem::exists(out / "attention_0000.pgm"));
  const auto pgm = read_bytes(out / "attention_0001.pgm");
  const std::string header = "P5\n64 64\n255\n";
  ASSERT_EQ(pgm.size(), header.size() + 64 * 64);
  EXPECT_EQ(std::string(pgm.begin(), pgm.begin() + static_cast<long>(header.size())), header);
}

TEST(Heatmap, OneHotAttentionPeaksOnItsPixelBlock) {
  std::vector<double> alpha(256, 0.0);
  alpha[3 * 16 + 12] = 1.0;
  const auto gray = heatmap_gray(eval::upsample_pyramid(alpha, 16, 16, 64, 64));
  const auto peak = static_cast<std::size_t>(std::max_element(gray.begin(), gray.end()) - gray.begin());
  EXPECT_EQ(gray[peak], 255);
  EXPECT_EQ(peak / 64 / 4, 3u);
  EXPECT_EQ(peak % 64 / 4, 12u);
  EXPECT_EQ(gray[63 * 64], 0);
}

TEST_F(CliTest, IdentityCounterfactualReportsZeros) {
  model::Network net(model::full_bottleneck(), model::ModelConfig{}, 1);
  const auto ck = local_ / "f.abck";
  model::save_checkpoint(net, {}, ck);
  const auto r = invoke({"counterfactual", "--checkpoint", ck.string(), "--kind", "lead_vehicle_brake", "--seed",
                         "2", "--out-dir", (local_ / "cf").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("trajectory_ade=0"), std::string::npos) << r.out;
  const auto delta = read_bytes(local_ / "cf" / "delta_attention.pgm");
  const std::size_t header = std::string("P5\n64 64\n255\n").size();
  for (std::size_t i = header; i < delta.size(); ++i) ASSERT_EQ(static_cast<unsigned char>(delta[i]), 128);
}

TEST_F(CliTest, InapplicableMutationIsAnArgumentError) {
  model::Network net(model::full_bottleneck(), model::ModelConfig{}, 1);
  const auto ck = local_ / "f.abck";
  model::save_checkpoint(net, {}, ck);
  const auto r = invoke({"counterfactual", "--checkpoint", ck.string(), "--kind", "straight", "--mutation",
                         "remove_objects", "--out-dir", (local_ / "cf").string()});
  EXPECT_EQ(r.code, kExitInvalidArgument);
}

}  // namespace
}  // namespace attnbn::cli
