#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rsearch/env/features.hpp"
#include "rsearch/env/layout.hpp"

namespace rsearch::env {

enum class Action : int { Up = 0, Down, Left, Right, Stay, Interact };
constexpr int kNumActions = 6;

enum class Item : int { None = 0, Onion, Dish, Soup };

constexpr int kCookTicks = 20;
constexpr int kPotCapacity = 3;
constexpr double kDeliveryReward = 20.0;

struct AgentPose {
  int row = 0;
  int col = 0;
  Direction facing = Direction::Up;
  bool operator==(const AgentPose&) const = default;
};

struct PotState {
  int onions = 0;  // 0..3
  int timer = 0;   // >0 only while cooking (onions == 3); 0 with 3 onions == ready
  bool cooking() const { return onions == kPotCapacity && timer > 0; }
  bool ready() const { return onions == kPotCapacity && timer == 0; }
  bool operator==(const PotState&) const = default;
};

struct EnvState {
  std::vector<AgentPose> poses;
  std::vector<Item> held;
  std::vector<PotState> pots;
  // Items resting on counter cells, keyed by flattened cell index.
  std::map<int, Item> counter_items;
  int tick = 0;
  int deliveries = 0;
  bool operator==(const EnvState&) const = default;
};

struct StepOutcome {
  EnvState next_state;
  double sparse_reward = 0.0;
  FeatureVector features;
  bool done = false;
};

// Deterministic initial state: agents at declared starts, empty hands, empty
// pots, tick 0. The seed parameter is part of the interface contract; the
// reset itself is seed-independent.
EnvState reset(const Layout& layout, std::uint64_t seed = 0);

// Advances one simultaneous-move step. Pure function of (layout, state,
// actions). Throws EpisodeFinishedError when the episode is over.
StepOutcome step(const Layout& layout, const EnvState& state,
                 const std::vector<Action>& joint_action);

// Local observation for one agent; fixed length per layout.
std::vector<double> observe(const Layout& layout, const EnvState& state, int agent);

// Centralized-critic input: both agents' observation blocks plus one copy of
// the shared global block.
std::vector<double> global_state(const Layout& layout, const EnvState& state);

// ASCII frame for terminal rollouts.
std::string render_ascii(const Layout& layout, const EnvState& state);

const char* action_name(Action a);
Action action_from_index(int idx);

}  // namespace rsearch::env
