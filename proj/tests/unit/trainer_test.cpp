#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include "attnbn/error.hpp"
#include "attnbn/model/checkpoint.hpp"
#include "attnbn/scene/corpus.hpp"
#include "attnbn/scene/generator.hpp"
#include "attnbn/train/trainer.hpp"
#include "temp_dir.hpp"

namespace attnbn::train {
namespace {

const scene::GridConfig kGrid{16.0, 64};

class TrainerTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { examples_ = new auto(scene::generate_examples(scene::KindMix::uniform(), 8, 31, kGrid)); }
  static void TearDownTestSuite() { delete examples_; }
  static std::vector<scene::Example>* examples_;

  TrainConfig small(std::size_t steps) const {
    TrainConfig c;
    c.steps = steps;
    c.batch_size = 2;
    c.seed = 17;
    return c;
  }
};
std::vector<scene::Example>* TrainerTest::examples_ = nullptr;

TEST_F(TrainerTest, ZeroStepsReturnsTheInitialization) {
  const auto result = train(small(0), *examples_);
  const model::Network init(result.network.variant(), result.network.config(), init_seed_for(17));
  EXPECT_TRUE(num::bitwise_equal(result.network.parameters(), init.parameters()));
  EXPECT_TRUE(result.log.empty());
  EXPECT_EQ(result.lineage.steps, 0u);
}

TEST_F(TrainerTest, SameConfigTwiceIsBitIdentical) {
  testing::TempDir dir;
  TrainConfig a = small(4);
  a.out_dir = dir / "a";
  TrainConfig b = a;
  b.out_dir = dir / "b";
  const auto ra = train(a, *examples_);
  const auto rb = train(b, *examples_);
  EXPECT_TRUE(num::bitwise_equal(ra.network.parameters(), rb.network.parameters()));
  EXPECT_EQ(testing::read_bytes(dir / "a/final.abck"), testing::read_bytes(dir / "b/final.abck"));
  EXPECT_EQ(testing::read_bytes(dir / "a/train_log.csv"), testing::read_bytes(dir / "b/train_log.csv"));
}

TEST_F(TrainerTest, DifferentSeedsDiverge) {
  TrainConfig b = small(2);
  b.seed = 18;
  EXPECT_FALSE(num::bitwise_equal(train(small(2), *examples_).network.parameters(),
                                  train(b, *examples_).network.parameters()));
}

TEST_F(TrainerTest, WritesPeriodicCheckpointsAndLog) {
  testing::TempDir dir;
  TrainConfig c = small(4);
  c.checkpoint_every = 2;
  c.out_dir = dir.path();
  const auto result = train(c, *examples_);
  EXPECT_TRUE(std::filesystem::exists(dir / "checkpoint_step2.abck"));
  EXPECT_TRUE(std::filesystem::exists(dir / "checkpoint_step4.abck"));
  const auto loaded = model::load_checkpoint(dir / "final.abck");
  EXPECT_TRUE(num::bitwise_equal(loaded.network.parameters(), result.network.parameters()));
  EXPECT_EQ(loaded.lineage.steps, 4u);
  std::ifstream log(dir / "train_log.csv");
  std::string header;
  std::getline(log, header);
  EXPECT_EQ(header, "step,lr,position,heading,box,occupancy,total");
  int rows = 0;
  for (std::string line; std::getline(log, line);) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST_F(TrainerTest, LossFallsOnATinyDataset) {
  TrainConfig c = small(40);
  c.batch_size = 8;
  c.learning_rate = 3e-3;
  const auto before = evaluate_loss(train(small(0), *examples_).network, *examples_);
  const auto after = evaluate_loss(train(c, *examples_).network, *examples_);
  EXPECT_LT(after.total, before.total);
  EXPECT_LT(after.position, before.position);
}

TEST_F(TrainerTest, NonFiniteInputIsDivergenceNamingTheStep) {
  auto broken = *examples_;
  for (auto& ex : broken) ex.raster.channels[0][100] = std::numeric_limits<float>::quiet_NaN();
  try {
    (void)train(small(3), broken);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivergence);
    EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos) << e.what();
  }
}

TEST_F(TrainerTest, ObjectBranchLossIsFiniteWithoutObjects) {
  TrainConfig c = small(1);
  c.variant.object_branch = true;
  const std::vector<scene::Example> empty_road = {scene::make_example(scene::straight_road_scene(4.0, 4.0), kGrid)};
  const auto result = train(c, empty_road);
  ASSERT_EQ(result.log.size(), 1u);
  EXPECT_TRUE(std::isfinite(result.log[0].loss.occupancy));
  EXPECT_GT(result.log[0].loss.occupancy, 0.0);
}

TEST(TrainConfigTest, InvalidSettingsAreRejected) {
  TrainConfig c;
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), Error);
  TrainConfig d;
  d.learning_rate = -1.0;
  EXPECT_THROW(d.validate(), Error);
  TrainConfig e;
  e.steps = 3;
  EXPECT_THROW((void)train(e, {}), Error);
}

}  // namespace
}  // namespace attnbn::train
