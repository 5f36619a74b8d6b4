#include "rsearch/search/archive.hpp"

#include <fstream>

#include "rsearch/common/errors.hpp"

namespace rsearch::search {

using nlohmann::json;

std::string CandidateId::str() const {
  return "g" + std::to_string(generation) + "k" + std::to_string(index);
}

const CandidateRecord* Archive::find(CandidateId id) const {
  for (const auto& r : records)
    if (r.id == id) return &r;
  return nullptr;
}

static json id_to_json(const CandidateId& id) {
  return json{{"generation", id.generation}, {"index", id.index}};
}

static CandidateId id_from_json(const json& j) {
  return CandidateId{j.at("generation").get<int>(), j.at("index").get<int>()};
}

json record_to_json(const CandidateRecord& r, bool include_timing) {
  json j;
  j["id"] = id_to_json(r.id);
  j["proposer_id"] = r.proposer_id;
  j["source_text"] = r.source_text;
  j["ast_digest"] = r.ast_digest;
  j["verdict"] = r.verdict;
  j["failure_trace"] = r.failure_trace;
  j["repair_calls"] = r.repair_calls;
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v)
      j[key] = *v;
    else
      j[key] = nullptr;
  };
  put("j_hat", r.j_hat);
  put("j_std", r.j_std);
  put("j_undiscounted", r.j_undiscounted);
  put("deliveries", r.deliveries);
  put("invalid_deliveries", r.invalid_deliveries);
  if (r.diagnostics)
    j["diagnostics"] = *r.diagnostics;
  else
    j["diagnostics"] = nullptr;
  j["context_digest"] = r.context_digest;
  json ids = json::array();
  for (const auto& id : r.context_ids) ids.push_back(id_to_json(id));
  j["context_ids"] = ids;
  j["curve_file"] = r.curve_file;
  j["trace_file"] = r.trace_file;
  j["env_steps"] = r.env_steps;
  if (include_timing) j["wall_clock_sec"] = r.wall_clock_sec;
  return j;
}

CandidateRecord record_from_json(const json& j) {
  CandidateRecord r;
  r.id = id_from_json(j.at("id"));
  r.proposer_id = j.at("proposer_id").get<std::string>();
  r.source_text = j.at("source_text").get<std::string>();
  r.ast_digest = j.at("ast_digest").get<std::string>();
  r.verdict = j.at("verdict").get<std::string>();
  r.failure_trace = j.at("failure_trace").get<std::string>();
  r.repair_calls = j.at("repair_calls").get<int>();
  auto take = [&](const char* key) -> std::optional<double> {
    if (j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
  };
  r.j_hat = take("j_hat");
  r.j_std = take("j_std");
  r.j_undiscounted = take("j_undiscounted");
  r.deliveries = take("deliveries");
  r.invalid_deliveries = take("invalid_deliveries");
  if (!j.at("diagnostics").is_null())
    r.diagnostics = j.at("diagnostics").get<diag::DiagnosticTuple>();
  r.context_digest = j.at("context_digest").get<std::string>();
  for (const auto& e : j.at("context_ids")) r.context_ids.push_back(id_from_json(e));
  r.curve_file = j.at("curve_file").get<std::string>();
  r.trace_file = j.at("trace_file").get<std::string>();
  r.env_steps = j.at("env_steps").get<long long>();
  if (j.contains("wall_clock_sec")) r.wall_clock_sec = j.at("wall_clock_sec").get<double>();
  return r;
}

json Archive::to_json(bool include_timing) const {
  json j;
  j["layout"] = layout;
  j["master_seed"] = master_seed;
  j["schema_digest"] = schema_digest;
  json recs = json::array();
  for (const auto& r : records) recs.push_back(record_to_json(r, include_timing));
  j["records"] = recs;
  return j;
}

std::string Archive::canonical_text(bool include_timing) const {
  return to_json(include_timing).dump(2);
}

Archive Archive::from_json(const json& j) {
  Archive a;
  a.layout = j.at("layout").get<std::string>();
  a.master_seed = j.at("master_seed").get<std::uint64_t>();
  a.schema_digest = j.at("schema_digest").get<std::string>();
  for (const auto& e : j.at("records")) a.records.push_back(record_from_json(e));
  return a;
}

void write_archive_file(const Archive& archive, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << archive.to_json(true).dump(2) << "\n";
}

Archive read_archive_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed archive " + path + ": " + e.what());
  }
  return Archive::from_json(j);
}

}  // namespace rsearch::search
