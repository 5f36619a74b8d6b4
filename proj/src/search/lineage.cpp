#include "rsearch/search/lineage.hpp"

#include <cstdio>
#include <map>

namespace rsearch::search {

using nlohmann::json;

Lineage build_lineage(const Archive& archive) {
  Lineage g;
  // Best trained record per generation for the promotion path.
  std::map<int, const CandidateRecord*> best;
  for (const auto& r : archive.records) {
    if (!r.trained()) continue;
    auto& slot = best[r.id.generation];
    if (!slot || *r.j_hat > *slot->j_hat ||
        (*r.j_hat == *slot->j_hat && r.id < slot->id))
      slot = &r;
  }
  for (const auto& r : archive.records) {
    LineageNode node{r.id, r.verdict, r.j_hat, false};
    auto it = best.find(r.id.generation);
    node.on_best_path = it != best.end() && it->second->id == r.id;
    g.nodes.push_back(node);
    for (const auto& from : r.context_ids) g.edges.push_back({from, r.id});
  }
  return g;
}

json lineage_to_json(const Lineage& lineage) {
  json nodes = json::array();
  for (const auto& n : lineage.nodes) {
    json jn;
    jn["generation"] = n.id.generation;
    jn["index"] = n.id.index;
    jn["verdict"] = n.verdict;
    if (n.j_hat)
      jn["j_hat"] = *n.j_hat;
    else
      jn["j_hat"] = nullptr;
    jn["on_best_path"] = n.on_best_path;
    nodes.push_back(jn);
  }
  json edges = json::array();
  for (const auto& e : lineage.edges)
    edges.push_back(json{{"from", {e.from.generation, e.from.index}},
                         {"to", {e.to.generation, e.to.index}}});
  return json{{"nodes", nodes}, {"edges", edges}};
}

Lineage lineage_from_json(const json& j) {
  Lineage g;
  for (const auto& jn : j.at("nodes")) {
    LineageNode n;
    n.id = {jn.at("generation").get<int>(), jn.at("index").get<int>()};
    n.verdict = jn.at("verdict").get<std::string>();
    if (!jn.at("j_hat").is_null()) n.j_hat = jn.at("j_hat").get<double>();
    n.on_best_path = jn.at("on_best_path").get<bool>();
    g.nodes.push_back(n);
  }
  for (const auto& je : j.at("edges")) {
    LineageEdge e;
    e.from = {je.at("from").at(0).get<int>(), je.at("from").at(1).get<int>()};
    e.to = {je.at("to").at(0).get<int>(), je.at("to").at(1).get<int>()};
    g.edges.push_back(e);
  }
  return g;
}

std::string lineage_to_dot(const Lineage& lineage) {
  std::string dot = "digraph lineage {\n  rankdir=LR;\n  node [shape=box];\n";
  std::map<std::pair<int, int>, bool> on_path;
  for (const auto& n : lineage.nodes) {
    on_path[{n.id.generation, n.id.index}] = n.on_best_path;
    char label[96];
    if (n.j_hat)
      std::snprintf(label, sizeof(label), "%s\\n%s J=%.4g", n.id.str().c_str(),
                    n.verdict.c_str(), *n.j_hat);
    else
      std::snprintf(label, sizeof(label), "%s\\n%s", n.id.str().c_str(),
                    n.verdict.c_str());
    dot += "  " + n.id.str() + " [label=\"" + label + "\"" +
           (n.on_best_path ? ", penwidth=2.5" : "") + "];\n";
  }
  for (const auto& e : lineage.edges) {
    bool bold = on_path[{e.from.generation, e.from.index}] &&
                on_path[{e.to.generation, e.to.index}];
    dot += "  " + e.from.str() + " -> " + e.to.str() +
           (bold ? " [penwidth=2.0]" : "") + ";\n";
  }
  dot += "}\n";
  return dot;
}

}  // namespace rsearch::search
