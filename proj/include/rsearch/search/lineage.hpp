#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rsearch/search/archive.hpp"

namespace rsearch::search {

// Conditioning graph over archived candidates: an edge a -> b means a's
// summary was part of the context b was proposed from. Per-generation best
// records (and the baseline) are flagged as the promotion path.
struct LineageNode {
  CandidateId id;
  std::string verdict;
  std::optional<double> j_hat;
  bool on_best_path = false;

  bool operator==(const LineageNode&) const = default;
};

struct LineageEdge {
  CandidateId from;
  CandidateId to;

  bool operator==(const LineageEdge&) const = default;
};

struct Lineage {
  std::vector<LineageNode> nodes;  // archive order
  std::vector<LineageEdge> edges;
};

Lineage build_lineage(const Archive& archive);

nlohmann::json lineage_to_json(const Lineage& lineage);
Lineage lineage_from_json(const nlohmann::json& j);

// Graphviz rendering; promotion-path nodes and edges drawn bold.
std::string lineage_to_dot(const Lineage& lineage);

}  // namespace rsearch::search
