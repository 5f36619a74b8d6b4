#include "rsearch/env/features.hpp"

#include <sstream>

#include "rsearch/common/rng.hpp"

namespace rsearch::env {

FeatureSchema::FeatureSchema() {
  entries_ = {
      {"onion_pickup", true, "1 if the agent took an onion from a dispenser this step"},
      {"onion_potted", true, "1 if the agent placed an onion into a pot this step"},
      {"dish_pickup", true, "1 if the agent took a dish from a dispenser this step"},
      {"soup_pickup", true, "1 if the agent collected a finished soup from a ready pot"},
      {"delivery", true, "1 if the agent delivered a soup at a serve window this step"},
      {"invalid_delivery", true, "1 if the agent served a non-soup item (item is lost, no reward)"},
      {"collision", true, "1 if a movement conflict with the partner prevented motion"},
      {"useful_interact", true, "1 if the agent's interact changed the world productively"},
      {"dist_to_nearest_pot", true, "Manhattan distance from the agent to the nearest pot, ignoring obstacles"},
      {"dist_to_nearest_serve", true, "Manhattan distance from the agent to the nearest serve window, ignoring obstacles"},
      {"holding_code", true, "held item code: 0 none, 1 onion, 2 dish, 3 soup"},
      {"pot_fullness", false, "sum of onion counts over all pots"},
      {"pots_cooking", false, "number of pots currently cooking"},
      {"pots_ready", false, "number of pots with finished soup"},
      {"deliveries_cum", false, "cumulative deliveries this episode, including this step"},
      {"sparse_reward", false, "shared task reward emitted this step"},
  };
  std::string key;
  for (const auto& e : entries_) key += e.name + (e.per_agent ? ":a;" : ":g;");
  digest_ = fnv1a_hex(key);
}

const FeatureSchema& FeatureSchema::instance() {
  static FeatureSchema schema;
  return schema;
}

const FeatureDef* FeatureSchema::find(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::string FeatureSchema::describe() const {
  std::ostringstream out;
  for (const auto& e : entries_) {
    out << "- x." << e.name << (e.per_agent ? "[i]" : "") << " : " << e.semantics << "\n";
  }
  return out.str();
}

void FeatureVector::set_agent(const std::string& name, int agent, double v) {
  auto& vec = values[name];
  if (static_cast<int>(vec.size()) <= agent) vec.resize(agent + 1, 0.0);
  vec[static_cast<std::size_t>(agent)] = v;
}

double FeatureVector::get(const std::string& name, int agent) const {
  auto it = values.find(name);
  if (it == values.end()) return 0.0;
  const auto& vec = it->second;
  std::size_t idx = agent < 0 ? 0 : static_cast<std::size_t>(agent);
  if (idx >= vec.size()) return 0.0;
  return vec[idx];
}

}  // namespace rsearch::env
