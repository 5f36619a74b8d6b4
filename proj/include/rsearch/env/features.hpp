#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rsearch::env {

struct FeatureDef {
  std::string name;
  bool per_agent = false;
  std::string semantics;
};

// The instrumentation contract published to the proposer. Closed list, fixed
// per run; programs may reference these names and nothing else.
class FeatureSchema {
 public:
  static const FeatureSchema& instance();

  const std::vector<FeatureDef>& entries() const { return entries_; }
  const std::string& digest() const { return digest_; }

  // nullptr when the name is not in the schema.
  const FeatureDef* find(const std::string& name) const;

  // Human-readable rendering used in docs and proposer prompts.
  std::string describe() const;

 private:
  FeatureSchema();
  std::vector<FeatureDef> entries_;
  std::string digest_;
};

// One step of instrumentation. Values are keyed by schema name; per-agent
// entries hold one value per agent. Entries may be absent (consumers treat
// missing keys as zero).
struct FeatureVector {
  std::map<std::string, std::vector<double>> values;
  std::string schema_digest;

  void set(const std::string& name, double v) { values[name] = {v}; }
  void set_agent(const std::string& name, int agent, double v);
  // Value lookup; absent keys read as 0. agent < 0 addresses a global entry.
  double get(const std::string& name, int agent = -1) const;
  bool has(const std::string& name) const { return values.count(name) > 0; }
};

}  // namespace rsearch::env
