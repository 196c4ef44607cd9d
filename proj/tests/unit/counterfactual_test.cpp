#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "attnbn/error.hpp"
#include "attnbn/eval/counterfactual.hpp"
#include "attnbn/eval/metrics.hpp"
#include "attnbn/scene/generator.hpp"

namespace attnbn::eval {
namespace {

const scene::GridConfig kGrid{16.0, 64};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIo;
}

TEST(Mutation, ParseRoundTrip) {
  for (const char* text : {"identity", "remove_objects", "remove_object:101", "set_light:30=green", "remove_sign",
                           "remove_sign:10"}) {
    EXPECT_EQ(Mutation::parse(text).to_string(), text);
  }
  EXPECT_THROW((void)Mutation::parse("explode"), Error);
  EXPECT_THROW((void)Mutation::parse("set_light:30"), Error);
  EXPECT_THROW((void)Mutation::parse("remove_object:abc"), Error);
}

TEST(Mutation, ApplyEditsTheSceneAndTheExpert) {
  int changed = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = scene::generate_scenario(scene::ScenarioKind::kStopSign, seed);
    const auto m = apply_mutation(s, Mutation::parse("remove_sign"));
    EXPECT_TRUE(m.stop_signs.empty());
    changed += m.expert_future != s.expert_future;  // no longer stopping
  }
  EXPECT_GE(changed, 8);
  const auto lead = scene::generate_scenario(scene::ScenarioKind::kLeadVehicleBrake, 2);
  EXPECT_TRUE(apply_mutation(lead, Mutation::parse("remove_objects")).objects.empty());
}

TEST(Mutation, InapplicableMutationsAreInvalid) {
  const auto empty = scene::generate_scenario(scene::ScenarioKind::kStraight, 1);
  EXPECT_EQ(code_of([&] { (void)apply_mutation(empty, Mutation::parse("remove_objects")); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { (void)apply_mutation(empty, Mutation::parse("set_light:30=red")); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { (void)apply_mutation(empty, Mutation::parse("remove_sign")); }),
            ErrorCode::kInvalidArgument);
}

TEST(Mutation, RegionCoversTheRemovedEntity) {
  const auto s = scene::generate_scenario(scene::ScenarioKind::kLeadVehicleBrake, 3);
  const auto region = mutation_region(s, Mutation::parse("remove_objects"));
  ASSERT_EQ(region.size(), 1u);
  const scene::AgentFrame frame(s.agent_pose);
  const auto center = frame.to_agent(s.objects[0].current().pose.position);
  EXPECT_NEAR(region[0].pose.position.x, center.x, 1e-9);
  EXPECT_NEAR(region[0].pose.position.y, center.y, 1e-9);
  EXPECT_TRUE(mutation_region(s, Mutation{}).empty());
}

TEST(Counterfactual, IdentityChangesNothing) {
  const model::Network net(model::full_bottleneck(), model::ModelConfig{}, 4);
  const auto s = scene::generate_scenario(scene::ScenarioKind::kLeadVehicleBrake, 5);
  const auto r = counterfactual(net, s, Mutation{}, kGrid);
  for (double d : r.delta_alpha) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(r.trajectory_ade, 0.0);
  EXPECT_EQ(r.mass_original, r.mass_mutated);
}

TEST(Counterfactual, SameLightStateIsANoOp) {
  const model::Network net(model::model_b(), model::ModelConfig{}, 4);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = scene::generate_scenario(scene::ScenarioKind::kTrafficLight, seed);
    if (s.traffic_lights[0].states.back() != scene::LightState::kRed) continue;
    if (s.traffic_lights[0].states.front() != scene::LightState::kRed) continue;
    const auto r = counterfactual(net, s, Mutation::parse("set_light:30=red"), kGrid);
    for (double d : r.delta_alpha) EXPECT_EQ(d, 0.0);
    EXPECT_EQ(r.trajectory_ade, 0.0);
    return;
  }
  FAIL() << "no all-red light scene in the first seeds";
}

TEST(Counterfactual, RemovingContentChangesTheInput) {
  const model::Network net(model::full_bottleneck(), model::ModelConfig{}, 4);
  const auto s = scene::generate_scenario(scene::ScenarioKind::kLeadVehicleBrake, 6);
  const auto r = counterfactual(net, s, Mutation::parse("remove_objects"), kGrid);
  double change = 0;
  for (double d : r.delta_alpha) change += std::abs(d);
  EXPECT_GT(change, 0.0);
  EXPECT_GT(r.mass_original, 0.0);
}

TEST(Counterfactual, ModelAIsUnsupported) {
  const model::Network net(model::model_a(), model::ModelConfig{}, 4);
  const auto s = scene::generate_scenario(scene::ScenarioKind::kLeadVehicleBrake, 5);
  EXPECT_EQ(code_of([&] { (void)counterfactual(net, s, Mutation{}, kGrid); }), ErrorCode::kUnsupportedVariant);
}

}  // namespace
}  // namespace attnbn::eval
