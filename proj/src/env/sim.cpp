#include "rsearch/env/sim.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "rsearch/common/errors.hpp"

namespace rsearch::env {

namespace {

struct Delta {
  int dr, dc;
};

Delta direction_delta(Direction d) {
  switch (d) {
    case Direction::Up: return {-1, 0};
    case Direction::Down: return {1, 0};
    case Direction::Left: return {0, -1};
    case Direction::Right: return {0, 1};
  }
  return {0, 0};
}

bool is_move(Action a) { return static_cast<int>(a) < 4; }

Direction move_direction(Action a) { return static_cast<Direction>(static_cast<int>(a)); }

int manhattan(int r0, int c0, const Cell& cell) {
  return std::abs(r0 - cell.row) + std::abs(c0 - cell.col);
}

int nearest_distance(int r, int c, const std::vector<Cell>& cells) {
  int best = 0;
  bool first = true;
  for (const auto& cell : cells) {
    int d = manhattan(r, c, cell);
    if (first || d < best) {
      best = d;
      first = false;
    }
  }
  return best;
}

char item_char(Item item) {
  switch (item) {
    case Item::None: return '-';
    case Item::Onion: return 'o';
    case Item::Dish: return 'd';
    case Item::Soup: return 's';
  }
  return '?';
}

}  // namespace

const char* action_name(Action a) {
  switch (a) {
    case Action::Up: return "Up";
    case Action::Down: return "Down";
    case Action::Left: return "Left";
    case Action::Right: return "Right";
    case Action::Stay: return "Stay";
    case Action::Interact: return "Interact";
  }
  return "?";
}

Action action_from_index(int idx) {
  if (idx < 0 || idx >= kNumActions) throw std::out_of_range("action index out of range");
  return static_cast<Action>(idx);
}

EnvState reset(const Layout& layout, std::uint64_t /*seed*/) {
  EnvState state;
  state.poses.reserve(layout.n_agents());
  for (const auto& s : layout.starts()) state.poses.push_back(AgentPose{s.row, s.col, s.facing});
  state.held.assign(layout.n_agents(), Item::None);
  state.pots.assign(layout.pots().size(), PotState{});
  state.tick = 0;
  state.deliveries = 0;
  return state;
}

StepOutcome step(const Layout& layout, const EnvState& state,
                 const std::vector<Action>& joint_action) {
  if (state.tick >= layout.horizon())
    throw EpisodeFinishedError("step() called after episode end (tick " +
                               std::to_string(state.tick) + ")");
  if (static_cast<int>(joint_action.size()) != layout.n_agents())
    throw std::invalid_argument("joint action arity mismatch");

  const int n = layout.n_agents();
  StepOutcome out;
  EnvState& next = out.next_state;
  next = state;

  // Cook timers advance before anything else; a pot finishing now can be
  // emptied by an interact in the same step.
  for (auto& pot : next.pots) {
    if (pot.cooking()) pot.timer -= 1;
  }

  std::vector<double> onion_pickup(n, 0.0), onion_potted(n, 0.0), dish_pickup(n, 0.0),
      soup_pickup(n, 0.0), delivery(n, 0.0), invalid_delivery(n, 0.0), collision(n, 0.0),
      useful(n, 0.0);

  // --- movement, resolved simultaneously ---
  std::vector<Cell> current(n), desired(n);
  for (int i = 0; i < n; ++i) {
    current[i] = Cell{state.poses[i].row, state.poses[i].col};
    desired[i] = current[i];
    Action a = joint_action[i];
    if (is_move(a)) {
      Direction dir = move_direction(a);
      next.poses[i].facing = dir;
      Delta d = direction_delta(dir);
      int tr = current[i].row + d.dr;
      int tc = current[i].col + d.dc;
      if (layout.in_bounds(tr, tc) && layout.cell(tr, tc) == CellKind::Floor)
        desired[i] = Cell{tr, tc};
    }
  }
  // Two-agent conflicts: a shared target cell (including moving onto a
  // stationary partner) and position swaps both cancel the moves.
  bool same_target = desired[0] == desired[1];
  bool swap = desired[0] == current[1] && desired[1] == current[0];
  if (same_target || swap) {
    for (int i = 0; i < n; ++i) {
      desired[i] = current[i];
      collision[i] = 1.0;
    }
  }
  for (int i = 0; i < n; ++i) {
    next.poses[i].row = desired[i].row;
    next.poses[i].col = desired[i].col;
  }

  // --- interacts, resolved in agent order ---
  for (int i = 0; i < n; ++i) {
    if (joint_action[i] != Action::Interact) continue;
    Delta d = direction_delta(next.poses[i].facing);
    int fr = next.poses[i].row + d.dr;
    int fc = next.poses[i].col + d.dc;
    if (!layout.in_bounds(fr, fc)) continue;
    Item& held = next.held[i];
    switch (layout.cell(fr, fc)) {
      case CellKind::OnionDispenser:
        if (held == Item::None) {
          held = Item::Onion;
          onion_pickup[i] = 1.0;
          useful[i] = 1.0;
        }
        break;
      case CellKind::DishDispenser:
        if (held == Item::None) {
          held = Item::Dish;
          dish_pickup[i] = 1.0;
          useful[i] = 1.0;
        }
        break;
      case CellKind::Pot: {
        PotState& pot = next.pots[static_cast<std::size_t>(layout.pot_id_at(fr, fc))];
        if (held == Item::Onion && pot.onions < kPotCapacity) {
          pot.onions += 1;
          if (pot.onions == kPotCapacity) pot.timer = kCookTicks;
          held = Item::None;
          onion_potted[i] = 1.0;
          useful[i] = 1.0;
        } else if (held == Item::Dish && pot.ready()) {
          pot = PotState{};
          held = Item::Soup;
          soup_pickup[i] = 1.0;
          useful[i] = 1.0;
        }
        break;
      }
      case CellKind::ServeWindow:
        if (held == Item::Soup) {
          held = Item::None;
          next.deliveries += 1;
          out.sparse_reward += kDeliveryReward;
          delivery[i] = 1.0;
          useful[i] = 1.0;
        } else if (held != Item::None) {
          held = Item::None;
          invalid_delivery[i] = 1.0;
        }
        break;
      case CellKind::Counter: {
        int idx = layout.cell_index(fr, fc);
        auto it = next.counter_items.find(idx);
        if (held != Item::None && it == next.counter_items.end()) {
          next.counter_items[idx] = held;
          held = Item::None;
          useful[i] = 1.0;
        } else if (held == Item::None && it != next.counter_items.end()) {
          held = it->second;
          next.counter_items.erase(it);
          useful[i] = 1.0;
        }
        break;
      }
      case CellKind::Floor:
        break;
    }
  }

  next.tick = state.tick + 1;
  out.done = next.tick >= layout.horizon();

  // --- instrumentation features for this transition ---
  FeatureVector& feat = out.features;
  feat.schema_digest = FeatureSchema::instance().digest();
  for (int i = 0; i < n; ++i) {
    feat.set_agent("onion_pickup", i, onion_pickup[i]);
    feat.set_agent("onion_potted", i, onion_potted[i]);
    feat.set_agent("dish_pickup", i, dish_pickup[i]);
    feat.set_agent("soup_pickup", i, soup_pickup[i]);
    feat.set_agent("delivery", i, delivery[i]);
    feat.set_agent("invalid_delivery", i, invalid_delivery[i]);
    feat.set_agent("collision", i, collision[i]);
    feat.set_agent("useful_interact", i, useful[i]);
    feat.set_agent("dist_to_nearest_pot", i,
                   nearest_distance(next.poses[i].row, next.poses[i].col, layout.pots()));
    feat.set_agent("dist_to_nearest_serve", i,
                   nearest_distance(next.poses[i].row, next.poses[i].col, layout.serve_windows()));
    feat.set_agent("holding_code", i, static_cast<double>(next.held[i]));
  }
  int fullness = 0, cooking = 0, ready = 0;
  for (const auto& pot : next.pots) {
    fullness += pot.onions;
    cooking += pot.cooking() ? 1 : 0;
    ready += pot.ready() ? 1 : 0;
  }
  feat.set("pot_fullness", fullness);
  feat.set("pots_cooking", cooking);
  feat.set("pots_ready", ready);
  feat.set("deliveries_cum", next.deliveries);
  feat.set("sparse_reward", out.sparse_reward);
  return out;
}

namespace {

void append_agent_block(std::vector<double>& v, const Layout& layout, const EnvState& state,
                        int agent) {
  const AgentPose& own = state.poses[static_cast<std::size_t>(agent)];
  const int partner = 1 - agent;
  const AgentPose& other = state.poses[static_cast<std::size_t>(partner)];
  const double scale = layout.rows() + layout.cols();

  for (int r = 0; r < layout.rows(); ++r) v.push_back(r == own.row ? 1.0 : 0.0);
  for (int c = 0; c < layout.cols(); ++c) v.push_back(c == own.col ? 1.0 : 0.0);
  for (int f = 0; f < 4; ++f) v.push_back(f == static_cast<int>(own.facing) ? 1.0 : 0.0);
  v.push_back(static_cast<double>(other.row - own.row) / layout.rows());
  v.push_back(static_cast<double>(other.col - own.col) / layout.cols());
  for (int k = 0; k < 4; ++k)
    v.push_back(k == static_cast<int>(state.held[static_cast<std::size_t>(agent)]) ? 1.0 : 0.0);
  for (int k = 0; k < 4; ++k)
    v.push_back(k == static_cast<int>(state.held[static_cast<std::size_t>(partner)]) ? 1.0 : 0.0);
  v.push_back(nearest_distance(own.row, own.col, layout.pots()) / scale);
  v.push_back(nearest_distance(own.row, own.col, layout.onion_dispensers()) / scale);
  v.push_back(nearest_distance(own.row, own.col, layout.dish_dispensers()) / scale);
  v.push_back(nearest_distance(own.row, own.col, layout.serve_windows()) / scale);
  v.push_back(static_cast<double>(agent));
}

void append_global_block(std::vector<double>& v, const Layout& layout, const EnvState& state) {
  for (const auto& pot : state.pots) {
    v.push_back(static_cast<double>(pot.onions) / kPotCapacity);
    v.push_back(static_cast<double>(pot.timer) / kCookTicks);
  }
  v.push_back(static_cast<double>(state.tick) / layout.horizon());
}

}  // namespace

std::vector<double> observe(const Layout& layout, const EnvState& state, int agent) {
  if (agent < 0 || agent >= layout.n_agents()) throw std::out_of_range("agent index");
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(layout.observation_length()));
  append_agent_block(v, layout, state, agent);
  append_global_block(v, layout, state);
  return v;
}

std::vector<double> global_state(const Layout& layout, const EnvState& state) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(layout.global_state_length()));
  for (int i = 0; i < layout.n_agents(); ++i) append_agent_block(v, layout, state, i);
  append_global_block(v, layout, state);
  return v;
}

std::string render_ascii(const Layout& layout, const EnvState& state) {
  std::ostringstream out;
  for (int r = 0; r < layout.rows(); ++r) {
    for (int c = 0; c < layout.cols(); ++c) {
      char ch = cell_char(layout.cell(r, c));
      auto counter_it = state.counter_items.find(layout.cell_index(r, c));
      if (counter_it != state.counter_items.end()) ch = item_char(counter_it->second);
      for (int i = 0; i < layout.n_agents(); ++i) {
        if (state.poses[static_cast<std::size_t>(i)].row == r &&
            state.poses[static_cast<std::size_t>(i)].col == c)
          ch = static_cast<char>('1' + i);
      }
      out << ch;
    }
    out << '\n';
  }
  out << "tick " << state.tick << "  deliveries " << state.deliveries;
  for (int i = 0; i < layout.n_agents(); ++i)
    out << "  a" << i + 1 << ":" << item_char(state.held[static_cast<std::size_t>(i)]);
  for (std::size_t p = 0; p < state.pots.size(); ++p) {
    const auto& pot = state.pots[p];
    out << "  pot" << p << ":" << pot.onions << "/" << kPotCapacity;
    if (pot.cooking()) out << " cooking(" << pot.timer << ")";
    if (pot.ready()) out << " ready";
  }
  out << '\n';
  return out.str();
}

}  // namespace rsearch::env
