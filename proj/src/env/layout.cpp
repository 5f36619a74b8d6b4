#include "rsearch/env/layout.hpp"

#include <map>
#include <sstream>

#include "rsearch/common/errors.hpp"

namespace rsearch::env {

namespace {

// The four benchmark kitchens. Topology: a shared open room; a divided room
// where items move only via counter handoffs; a ring corridor around a
// central block; and two self-sufficient rooms with unequal travel costs to
// pots and serving windows.
const std::map<std::string, const char*> kBuiltins = {
    {"cramped_room",
     "XXPXX\n"
     "O..2O\n"
     "X1..X\n"
     "XDXSX\n"},
    {"forced_coordination",
     "XXXPX\n"
     "O.X1P\n"
     "O2X.X\n"
     "D.X.X\n"
     "XXXSX\n"},
    {"coordination_ring",
     "XXXPX\n"
     "X..2P\n"
     "D1X.X\n"
     "O...X\n"
     "XOSXX\n"},
    {"asymmetric_advantages",
     "XXXXXXXXX\n"
     "O.XSXOX.S\n"
     "X...P.1.X\n"
     "X.2.P...X\n"
     "XXXDXDXXX\n"},
};

}  // namespace

char cell_char(CellKind kind) {
  switch (kind) {
    case CellKind::Floor: return '.';
    case CellKind::Counter: return 'X';
    case CellKind::OnionDispenser: return 'O';
    case CellKind::DishDispenser: return 'D';
    case CellKind::Pot: return 'P';
    case CellKind::ServeWindow: return 'S';
  }
  return '?';
}

Layout Layout::from_text(const std::string& text, const std::string& name, int horizon) {
  Layout layout;
  layout.name_ = name;
  layout.horizon_ = horizon;
  if (horizon < 1) throw MalformedGridError("horizon must be >= 1");

  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw MalformedGridError("empty grid");

  layout.rows_ = static_cast<int>(lines.size());
  layout.cols_ = static_cast<int>(lines[0].size());
  layout.grid_.assign(static_cast<std::size_t>(layout.rows_) * layout.cols_, CellKind::Floor);

  std::vector<AgentStart> starts(kNumAgents);
  std::vector<bool> seen_start(kNumAgents, false);

  for (int r = 0; r < layout.rows_; ++r) {
    if (static_cast<int>(lines[r].size()) != layout.cols_)
      throw MalformedGridError("non-rectangular grid: row " + std::to_string(r) + " has " +
                               std::to_string(lines[r].size()) + " cells, expected " +
                               std::to_string(layout.cols_));
    for (int c = 0; c < layout.cols_; ++c) {
      char ch = lines[r][c];
      CellKind kind = CellKind::Floor;
      switch (ch) {
        case '.': kind = CellKind::Floor; break;
        case 'X': kind = CellKind::Counter; break;
        case 'O': kind = CellKind::OnionDispenser; break;
        case 'D': kind = CellKind::DishDispenser; break;
        case 'P': kind = CellKind::Pot; break;
        case 'S': kind = CellKind::ServeWindow; break;
        case '1':
        case '2': {
          int agent = ch - '1';
          if (seen_start[agent])
            throw MalformedGridError(std::string("duplicate start '") + ch + "'");
          starts[agent] = AgentStart{r, c, Direction::Up};
          seen_start[agent] = true;
          kind = CellKind::Floor;
          break;
        }
        default:
          throw MalformedGridError(std::string("unknown grid character '") + ch + "' at row " +
                                   std::to_string(r) + ", col " + std::to_string(c));
      }
      layout.grid_[static_cast<std::size_t>(r) * layout.cols_ + c] = kind;
      Cell cell{r, c};
      switch (kind) {
        case CellKind::Pot: layout.pots_.push_back(cell); break;
        case CellKind::OnionDispenser: layout.onion_dispensers_.push_back(cell); break;
        case CellKind::DishDispenser: layout.dish_dispensers_.push_back(cell); break;
        case CellKind::ServeWindow: layout.serve_windows_.push_back(cell); break;
        default: break;
      }
    }
  }

  for (int i = 0; i < kNumAgents; ++i) {
    if (!seen_start[i])
      throw MissingEntityError("missing start position for agent " + std::to_string(i + 1));
  }
  if (starts[0].row == starts[1].row && starts[0].col == starts[1].col)
    throw MalformedGridError("agent starts overlap");
  if (layout.pots_.empty()) throw MissingEntityError("layout has no pot");
  if (layout.onion_dispensers_.empty()) throw MissingEntityError("layout has no onion dispenser");
  if (layout.dish_dispensers_.empty()) throw MissingEntityError("layout has no dish dispenser");
  if (layout.serve_windows_.empty()) throw MissingEntityError("layout has no serve window");

  layout.starts_ = std::move(starts);
  return layout;
}

Layout Layout::builtin(const std::string& name) {
  auto it = kBuiltins.find(name);
  if (it == kBuiltins.end()) throw MissingEntityError("unknown built-in layout: " + name);
  return from_text(it->second, name);
}

std::vector<std::string> Layout::builtin_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : kBuiltins) names.push_back(name);
  return names;
}

std::string Layout::to_text() const {
  std::string out;
  out.reserve(static_cast<std::size_t>(rows_) * (cols_ + 1));
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      char ch = cell_char(cell(r, c));
      for (int i = 0; i < n_agents(); ++i) {
        if (starts_[i].row == r && starts_[i].col == c) ch = static_cast<char>('1' + i);
      }
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

int Layout::pot_id_at(int r, int c) const {
  for (std::size_t i = 0; i < pots_.size(); ++i) {
    if (pots_[i].row == r && pots_[i].col == c) return static_cast<int>(i);
  }
  return -1;
}

int Layout::observation_length() const {
  // Per-agent block: row one-hot, col one-hot, facing one-hot(4), partner
  // offset(2), own held one-hot(4), partner held one-hot(4), distances to
  // nearest pot/onion/dish/serve(4), agent index flag(1).
  int own = rows_ + cols_ + 4 + 2 + 4 + 4 + 4 + 1;
  // Global block: per-pot (fullness, timer) pairs plus tick/horizon.
  int global = 2 * static_cast<int>(pots_.size()) + 1;
  return own + global;
}

int Layout::global_state_length() const {
  int own = rows_ + cols_ + 4 + 2 + 4 + 4 + 4 + 1;
  int global = 2 * static_cast<int>(pots_.size()) + 1;
  return n_agents() * own + global;
}

}  // namespace rsearch::env
