#pragma once

#include <string>
#include <vector>

namespace rsearch::env {

enum class CellKind : int {
  Floor = 0,
  Counter,
  OnionDispenser,
  DishDispenser,
  Pot,
  ServeWindow,
};

enum class Direction : int { Up = 0, Down, Left, Right };

struct Cell {
  int row = 0;
  int col = 0;
  bool operator==(const Cell&) const = default;
};

struct AgentStart {
  int row = 0;
  int col = 0;
  Direction facing = Direction::Up;
};

// Static description of a kitchen grid. Agents walk on Floor cells only and
// interact with the entity cell they face.
class Layout {
 public:
  // Parses an ASCII grid. Legend: '.' floor, 'X' counter, 'O' onion
  // dispenser, 'D' dish dispenser, 'P' pot, 'S' serve window, '1'/'2' agent
  // starts (floor underneath). Throws MalformedGridError / MissingEntityError.
  static Layout from_text(const std::string& text, const std::string& name = "custom",
                          int horizon = kDefaultHorizon);

  // Built-in layouts: cramped_room, forced_coordination, coordination_ring,
  // asymmetric_advantages.
  static Layout builtin(const std::string& name);
  static std::vector<std::string> builtin_names();

  // Inverse of from_text: grid text with agent starts overlaid as digits.
  std::string to_text() const;

  const std::string& name() const { return name_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int horizon() const { return horizon_; }
  int n_agents() const { return static_cast<int>(starts_.size()); }

  bool in_bounds(int r, int c) const { return r >= 0 && r < rows_ && c >= 0 && c < cols_; }
  CellKind cell(int r, int c) const { return grid_[static_cast<std::size_t>(r) * cols_ + c]; }
  int cell_index(int r, int c) const { return r * cols_ + c; }

  const std::vector<AgentStart>& starts() const { return starts_; }
  const std::vector<Cell>& pots() const { return pots_; }
  const std::vector<Cell>& onion_dispensers() const { return onion_dispensers_; }
  const std::vector<Cell>& dish_dispensers() const { return dish_dispensers_; }
  const std::vector<Cell>& serve_windows() const { return serve_windows_; }

  // Index into pots() for a pot cell, -1 otherwise.
  int pot_id_at(int r, int c) const;

  // Published encoding lengths, fixed per layout.
  int observation_length() const;
  int global_state_length() const;

  static constexpr int kDefaultHorizon = 200;
  static constexpr int kNumAgents = 2;

 private:
  std::string name_;
  int rows_ = 0;
  int cols_ = 0;
  int horizon_ = kDefaultHorizon;
  std::vector<CellKind> grid_;
  std::vector<AgentStart> starts_;
  std::vector<Cell> pots_;
  std::vector<Cell> onion_dispensers_;
  std::vector<Cell> dish_dispensers_;
  std::vector<Cell> serve_windows_;
};

char cell_char(CellKind kind);

}  // namespace rsearch::env
