#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <queue>
#include <set>

#include "rsearch/common/errors.hpp"
#include "rsearch/common/rng.hpp"
#include "rsearch/env/sim.hpp"

using namespace rsearch;
using namespace rsearch::env;

namespace {

// Floor cells reachable by walking from (r, c).
std::set<std::pair<int, int>> reachable_floor(const Layout& layout, int r, int c) {
  std::set<std::pair<int, int>> seen;
  std::queue<std::pair<int, int>> frontier;
  frontier.push({r, c});
  seen.insert({r, c});
  while (!frontier.empty()) {
    auto [cr, cc] = frontier.front();
    frontier.pop();
    const int dr[] = {-1, 1, 0, 0};
    const int dc[] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      int nr = cr + dr[k], nc = cc + dc[k];
      if (!layout.in_bounds(nr, nc) || layout.cell(nr, nc) != CellKind::Floor) continue;
      if (seen.insert({nr, nc}).second) frontier.push({nr, nc});
    }
  }
  return seen;
}

EnvState state_with(const Layout& layout, std::vector<AgentPose> poses,
                    std::vector<Item> held = {}) {
  EnvState s = reset(layout);
  s.poses = std::move(poses);
  if (!held.empty()) s.held = std::move(held);
  return s;
}

}  // namespace

TEST_CASE("built-in layouts load and expose declared entities") {
  auto names = Layout::builtin_names();
  CHECK(names.size() == 4);
  for (const auto& name : names) {
    Layout layout = Layout::builtin(name);
    CHECK(layout.horizon() == 200);
    CHECK(layout.n_agents() == 2);
    CHECK(!layout.pots().empty());
    CHECK(!layout.onion_dispensers().empty());
    CHECK(!layout.dish_dispensers().empty());
    CHECK(!layout.serve_windows().empty());
  }
  CHECK(Layout::builtin("cramped_room").pots().size() == 1);
}

TEST_CASE("cramped_room is a single shared room") {
  Layout layout = Layout::builtin("cramped_room");
  auto reach = reachable_floor(layout, layout.starts()[0].row, layout.starts()[0].col);
  CHECK(reach.count({layout.starts()[1].row, layout.starts()[1].col}) == 1);
}

TEST_CASE("forced_coordination splits the agents across a divider") {
  Layout layout = Layout::builtin("forced_coordination");
  auto reach = reachable_floor(layout, layout.starts()[0].row, layout.starts()[0].col);
  CHECK(reach.count({layout.starts()[1].row, layout.starts()[1].col}) == 0);
}

TEST_CASE("coordination_ring floor forms a cycle around a central block") {
  Layout layout = Layout::builtin("coordination_ring");
  // Every floor cell on the ring has exactly two floor neighbours.
  auto reach = reachable_floor(layout, layout.starts()[0].row, layout.starts()[0].col);
  CHECK(reach.size() == 8);
  for (auto [r, c] : reach) {
    int neighbours = 0;
    const int dr[] = {-1, 1, 0, 0};
    const int dc[] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      int nr = r + dr[k], nc = c + dc[k];
      if (layout.in_bounds(nr, nc) && layout.cell(nr, nc) == CellKind::Floor) ++neighbours;
    }
    CHECK(neighbours == 2);
  }
}

TEST_CASE("malformed and vacuous layouts are rejected") {
  CHECK_THROWS_AS(Layout::from_text("...\n...\n...\n"), MissingEntityError);
  CHECK_THROWS_AS(Layout::from_text("..\n...\n"), MalformedGridError);
  CHECK_THROWS_AS(Layout::from_text("..Q\n...\n"), MalformedGridError);
  CHECK_THROWS_AS(Layout::from_text("1.2\n.P.\nO.D\n"), MissingEntityError);  // no serve window
}

TEST_CASE("layout text round-trips through parse and serialize") {
  const std::string custom =
      "XXPPXX\n"
      "O.1..S\n"
      "X....X\n"
      "O..2.S\n"
      "X....X\n"
      "XXDDXX\n";
  Layout layout = Layout::from_text(custom);
  CHECK(layout.rows() == 6);
  CHECK(layout.cols() == 6);
  CHECK(layout.to_text() == custom);
  for (const auto& name : Layout::builtin_names()) {
    Layout original = Layout::builtin(name);
    Layout reparsed = Layout::from_text(original.to_text(), name);
    CHECK(reparsed.to_text() == original.to_text());
    CHECK(reparsed.rows() == original.rows());
    CHECK(reparsed.pots().size() == original.pots().size());
  }
}

TEST_CASE("reset is deterministic and starts clean") {
  Layout layout = Layout::builtin("cramped_room");
  EnvState a = reset(layout, 0);
  EnvState b = reset(layout, 0);
  CHECK(a == b);
  CHECK(a == reset(layout, 12345));  // seed does not perturb the initial state
  CHECK(a.tick == 0);
  CHECK(a.deliveries == 0);
  for (int i = 0; i < layout.n_agents(); ++i) {
    CHECK(a.poses[i].row == layout.starts()[i].row);
    CHECK(a.poses[i].col == layout.starts()[i].col);
    CHECK(a.held[i] == Item::None);
  }
  for (const auto& pot : a.pots) CHECK(pot.onions == 0);
}

TEST_CASE("delivery at the serve window pays the sparse reward") {
  Layout layout = Layout::builtin("cramped_room");
  // Serve window is at (3,3); stand above it facing down with a soup.
  EnvState s = state_with(layout, {{2, 3, Direction::Down}, {1, 1, Direction::Up}},
                          {Item::Soup, Item::None});
  StepOutcome out = step(layout, s, {Action::Interact, Action::Stay});
  CHECK(out.sparse_reward == doctest::Approx(20.0));
  CHECK(out.features.get("delivery", 0) == 1.0);
  CHECK(out.features.get("delivery", 1) == 0.0);
  CHECK(out.next_state.held[0] == Item::None);
  CHECK(out.next_state.deliveries == 1);
  CHECK(out.features.get("deliveries_cum") == 1.0);
}

TEST_CASE("invalid delivery consumes the item with zero reward") {
  Layout layout = Layout::builtin("cramped_room");
  EnvState s = state_with(layout, {{2, 3, Direction::Down}, {1, 1, Direction::Up}},
                          {Item::Onion, Item::None});
  StepOutcome out = step(layout, s, {Action::Interact, Action::Stay});
  CHECK(out.sparse_reward == 0.0);
  CHECK(out.features.get("invalid_delivery", 0) == 1.0);
  CHECK(out.features.get("useful_interact", 0) == 0.0);
  CHECK(out.next_state.held[0] == Item::None);
}

TEST_CASE("double stay changes only the tick and cook timers") {
  Layout layout = Layout::builtin("cramped_room");
  EnvState s = reset(layout);
  StepOutcome out = step(layout, s, {Action::Stay, Action::Stay});
  EnvState expect = s;
  expect.tick = 1;
  CHECK(out.next_state == expect);
  CHECK(out.sparse_reward == 0.0);

  s.pots[0] = PotState{3, 5};
  out = step(layout, s, {Action::Stay, Action::Stay});
  expect = s;
  expect.tick = s.tick + 1;
  expect.pots[0].timer = 4;
  CHECK(out.next_state == expect);
}

// The two-agent move-conflict table, enumerated by hand. In cramped_room the
// row r=1 cells (1,1)..(1,3) are open floor.
TEST_CASE("movement conflicts cancel both moves and flag both agents") {
  Layout layout = Layout::builtin("cramped_room");

  SUBCASE("both agents target the same free cell") {
    EnvState s = state_with(layout, {{1, 1, Direction::Up}, {1, 3, Direction::Up}});
    StepOutcome out = step(layout, s, {Action::Right, Action::Left});
    CHECK(out.next_state.poses[0].row == 1);
    CHECK(out.next_state.poses[0].col == 1);
    CHECK(out.next_state.poses[1].col == 3);
    CHECK(out.features.get("collision", 0) == 1.0);
    CHECK(out.features.get("collision", 1) == 1.0);
    // Facing still updates toward the attempted direction.
    CHECK(out.next_state.poses[0].facing == Direction::Right);
    CHECK(out.next_state.poses[1].facing == Direction::Left);
  }

  SUBCASE("swap attempt") {
    EnvState s = state_with(layout, {{1, 1, Direction::Up}, {1, 2, Direction::Up}});
    StepOutcome out = step(layout, s, {Action::Right, Action::Left});
    CHECK(out.next_state.poses[0].col == 1);
    CHECK(out.next_state.poses[1].col == 2);
    CHECK(out.features.get("collision", 0) == 1.0);
    CHECK(out.features.get("collision", 1) == 1.0);
  }

  SUBCASE("moving onto a partner that stays put") {
    EnvState s = state_with(layout, {{1, 1, Direction::Up}, {1, 2, Direction::Up}});
    StepOutcome out = step(layout, s, {Action::Right, Action::Stay});
    CHECK(out.next_state.poses[0].col == 1);
    CHECK(out.features.get("collision", 0) == 1.0);
    CHECK(out.features.get("collision", 1) == 1.0);
  }

  SUBCASE("moving onto a partner blocked by a wall") {
    // Agent 2's move up from (1,2) hits the pot cell, so it stays in place.
    EnvState s = state_with(layout, {{1, 1, Direction::Up}, {1, 2, Direction::Up}});
    StepOutcome out = step(layout, s, {Action::Right, Action::Up});
    CHECK(out.next_state.poses[0].col == 1);
    CHECK(out.next_state.poses[1].col == 2);
    CHECK(out.features.get("collision", 0) == 1.0);
    CHECK(out.features.get("collision", 1) == 1.0);
  }

  SUBCASE("following a vacating partner is not a conflict") {
    EnvState s = state_with(layout, {{1, 1, Direction::Up}, {1, 2, Direction::Up}});
    StepOutcome out = step(layout, s, {Action::Right, Action::Right});
    CHECK(out.next_state.poses[0].col == 2);
    CHECK(out.next_state.poses[1].col == 3);
    CHECK(out.features.get("collision", 0) == 0.0);
    CHECK(out.features.get("collision", 1) == 0.0);
  }
}

TEST_CASE("full soup cycle: pot three onions, cook, plate, deliver") {
  Layout layout = Layout::builtin("cramped_room");
  EnvState s = reset(layout);
  double total_reward = 0.0;
  double onion_pickups = 0.0, pottings = 0.0, dish_pickups = 0.0, soup_pickups = 0.0,
         deliveries = 0.0;

  auto run = [&](Action a0) {
    StepOutcome out = step(layout, s, {a0, Action::Stay});
    total_reward += out.sparse_reward;
    onion_pickups += out.features.get("onion_pickup", 0);
    pottings += out.features.get("onion_potted", 0);
    dish_pickups += out.features.get("dish_pickup", 0);
    soup_pickups += out.features.get("soup_pickup", 0);
    deliveries += out.features.get("delivery", 0);
    s = out.next_state;
    return out;
  };

  // Agent 1 starts at (2,1); onion dispenser left of (1,1), pot above (1,2).
  for (int round = 0; round < 3; ++round) {
    run(Action::Up);        // to/at (1,1)
    run(Action::Left);      // face dispenser
    run(Action::Interact);  // take onion
    run(Action::Right);     // to (1,2)
    run(Action::Up);        // face pot
    run(Action::Interact);  // pot onion
    CHECK(s.pots[0].onions == round + 1);
    run(Action::Left);  // back to (1,1)
  }
  CHECK(s.pots[0].cooking());

  // Fetch a dish while the soup cooks; dish dispenser is below (2,1).
  run(Action::Down);      // to (2,1)
  run(Action::Down);      // face dish dispenser
  run(Action::Interact);  // take dish
  CHECK(s.held[0] == Item::Dish);

  // A dish interact on a still-cooking pot is a no-op.
  run(Action::Up);  // to (1,1)
  run(Action::Right);
  run(Action::Up);  // at (1,2) facing pot
  if (s.pots[0].cooking()) {
    StepOutcome out = step(layout, s, {Action::Interact, Action::Stay});
    CHECK(out.next_state.held[0] == Item::Dish);
    s = out.next_state;
  }
  while (!s.pots[0].ready()) run(Action::Stay);
  run(Action::Interact);  // collect soup
  CHECK(s.held[0] == Item::Soup);
  CHECK(s.pots[0].onions == 0);

  // Deliver at (3,3), reached from (2,3).
  run(Action::Down);      // to (2,2)
  run(Action::Right);     // to (2,3)
  run(Action::Down);      // face serve window
  run(Action::Interact);  // deliver

  CHECK(total_reward == doctest::Approx(20.0));
  CHECK(s.deliveries == 1);
  CHECK(onion_pickups == 3.0);
  CHECK(pottings == 3.0);
  CHECK(dish_pickups == 1.0);
  CHECK(soup_pickups == 1.0);
  CHECK(deliveries == 1.0);
  CHECK(total_reward == doctest::Approx(20.0 * s.deliveries));
}

TEST_CASE("pot holds at most three onions") {
  Layout layout = Layout::builtin("cramped_room");
  EnvState s = state_with(layout, {{1, 2, Direction::Up}, {2, 3, Direction::Up}},
                          {Item::Onion, Item::None});
  s.pots[0] = PotState{3, 10};
  StepOutcome out = step(layout, s, {Action::Interact, Action::Stay});
  CHECK(out.next_state.pots[0].onions == 3);
  CHECK(out.next_state.held[0] == Item::Onion);  // onion was not consumed
  CHECK(out.features.get("onion_potted", 0) == 0.0);
}

TEST_CASE("counter handoff moves an item across the forced_coordination divider") {
  Layout layout = Layout::builtin("forced_coordination");
  // Agent 2 (index 1) works the left room at (2,1); agent 1 (index 0) at (1,3).
  EnvState s = reset(layout);
  auto run = [&](Action a0, Action a1) {
    StepOutcome out = step(layout, s, {a0, a1});
    s = out.next_state;
    return out;
  };

  run(Action::Stay, Action::Left);      // face onion dispenser at (2,0)
  run(Action::Stay, Action::Interact);  // take onion
  CHECK(s.held[1] == Item::Onion);
  run(Action::Stay, Action::Right);  // blocked by divider; now faces it
  CHECK(s.poses[1].col == 1);
  StepOutcome placed = run(Action::Stay, Action::Interact);  // put onion on counter (2,2)
  CHECK(s.held[1] == Item::None);
  CHECK(s.counter_items.at(layout.cell_index(2, 2)) == Item::Onion);
  CHECK(placed.features.get("useful_interact", 1) == 1.0);

  run(Action::Down, Action::Stay);      // agent 1 from (1,3) to (2,3)
  run(Action::Left, Action::Stay);      // blocked by divider; faces it
  run(Action::Interact, Action::Stay);  // take the onion off the counter
  CHECK(s.held[0] == Item::Onion);
  CHECK(s.counter_items.empty());

  // Placing onto an occupied counter is a no-op.
  s.counter_items[layout.cell_index(2, 2)] = Item::Dish;
  StepOutcome out = step(layout, s, {Action::Interact, Action::Stay});
  CHECK(out.next_state.held[0] == Item::Onion);
  CHECK(out.next_state.counter_items.at(layout.cell_index(2, 2)) == Item::Dish);
}

TEST_CASE("stepping a finished episode throws") {
  Layout layout = Layout::from_text("P.S\nO1D\n.2.\n", "tiny", 3);
  EnvState s = reset(layout);
  for (int t = 0; t < 3; ++t) {
    StepOutcome out = step(layout, s, {Action::Stay, Action::Stay});
    s = out.next_state;
    CHECK(out.done == (t == 2));
  }
  CHECK_THROWS_AS(step(layout, s, {Action::Stay, Action::Stay}), EpisodeFinishedError);
}

TEST_CASE("observation encoding has the published length and structure") {
  for (const auto& name : Layout::builtin_names()) {
    Layout layout = Layout::builtin(name);
    EnvState s = reset(layout);
    auto obs0 = observe(layout, s, 0);
    auto obs1 = observe(layout, s, 1);
    CHECK(static_cast<int>(obs0.size()) == layout.observation_length());
    CHECK(obs0 == observe(layout, s, 0));  // deterministic
    CHECK(obs0 != obs1);

    auto global = global_state(layout, s);
    CHECK(static_cast<int>(global.size()) == layout.global_state_length());

    // global state = both agent blocks + one shared global block.
    std::size_t own = obs0.size() - (2 * layout.pots().size() + 1);
    std::vector<double> expected(obs0.begin(), obs0.begin() + own);
    expected.insert(expected.end(), obs1.begin(), obs1.begin() + own);
    expected.insert(expected.end(), obs0.begin() + own, obs0.end());
    CHECK(global == expected);
    // The shared global block is identical in both observations.
    CHECK(std::vector<double>(obs0.begin() + own, obs0.end()) ==
          std::vector<double>(obs1.begin() + own, obs1.end()));
    // Agent index flag is the last entry of the agent block.
    CHECK(obs0[own - 1] == 0.0);
    CHECK(obs1[own - 1] == 1.0);
  }
}

TEST_CASE("random-action fuzz upholds the safety invariants") {
  Rng rng(2024);
  for (const auto& name : Layout::builtin_names()) {
    Layout layout = Layout::builtin(name);
    EnvState s = reset(layout);
    double episode_reward = 0.0;
    for (int t = 0; t < 5000; ++t) {
      std::vector<Action> actions;
      for (int i = 0; i < layout.n_agents(); ++i)
        actions.push_back(action_from_index(static_cast<int>(rng.uniform_int(kNumActions))));
      StepOutcome out = step(layout, s, actions);
      episode_reward += out.sparse_reward;

      CHECK(!(out.next_state.poses[0].row == out.next_state.poses[1].row &&
              out.next_state.poses[0].col == out.next_state.poses[1].col));
      for (const auto& pot : out.next_state.pots) {
        CHECK(pot.onions >= 0);
        CHECK(pot.onions <= 3);
        if (pot.timer > 0) CHECK(pot.onions == 3);
      }
      CHECK(out.features.get("collision", 0) == out.features.get("collision", 1));
      CHECK(out.features.get("dist_to_nearest_pot", 0) >= 0.0);
      CHECK(out.features.get("dist_to_nearest_serve", 1) >= 0.0);

      if (out.done) {
        CHECK(episode_reward == doctest::Approx(20.0 * out.next_state.deliveries));
        s = reset(layout);
        episode_reward = 0.0;
      } else {
        s = out.next_state;
      }
    }
  }
}

TEST_CASE("step is a pure function of its inputs") {
  Layout layout = Layout::builtin("coordination_ring");
  Rng rng(7);
  EnvState s = reset(layout);
  for (int t = 0; t < 50; ++t) {
    std::vector<Action> actions = {
        action_from_index(static_cast<int>(rng.uniform_int(kNumActions))),
        action_from_index(static_cast<int>(rng.uniform_int(kNumActions)))};
    StepOutcome a = step(layout, s, actions);
    StepOutcome b = step(layout, s, actions);
    CHECK(a.next_state == b.next_state);
    CHECK(a.sparse_reward == b.sparse_reward);
    CHECK(a.features.values == b.features.values);
    s = a.next_state;
  }
}

TEST_CASE("ascii render shows the grid and agents") {
  Layout layout = Layout::builtin("cramped_room");
  EnvState s = reset(layout);
  std::string frame = render_ascii(layout, s);
  CHECK(frame.find('1') != std::string::npos);
  CHECK(frame.find('2') != std::string::npos);
  CHECK(frame.find("tick 0") != std::string::npos);
}
