#include "rsearch/proposer/backend.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "rsearch/common/errors.hpp"
#include "rsearch/common/rng.hpp"

namespace rsearch::proposer {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<std::string> extract_fenced_blocks(const std::string& text) {
  std::vector<std::string> blocks;
  std::istringstream in(text);
  std::string line, current;
  bool inside = false;
  while (std::getline(in, line)) {
    std::string_view sv(line);
    while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
    if (sv.substr(0, 3) == "```") {
      if (inside) {
        blocks.push_back(current);
        current.clear();
      }
      inside = !inside;
      continue;
    }
    if (inside) current += line + "\n";
  }
  return blocks;
}

ScriptedBackend::ScriptedBackend(std::string fixture_dir) : dir_(std::move(fixture_dir)) {
  fs::path map_path = fs::path(dir_) / "repairs.json";
  if (fs::exists(map_path)) {
    json j;
    std::ifstream in(map_path);
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw std::runtime_error("malformed repairs.json in " + dir_ + ": " + e.what());
    }
    for (auto it = j.begin(); it != j.end(); ++it)
      repairs_[it.key()] = it.value().get<std::string>();
  }
}

std::vector<dsl::ProgramSource> ScriptedBackend::propose(const Context& context, int n) {
  std::vector<dsl::ProgramSource> out;
  fs::path gen_dir = fs::path(dir_) / ("gen" + std::to_string(context.generation));
  for (int k = 1; k <= n; ++k) {
    fs::path f = gen_dir / ("cand" + std::to_string(k) + ".rwd");
    if (!fs::exists(f)) break;
    dsl::ProgramSource src;
    src.text = read_file(f);
    src.meta = {id(), context.generation, k};
    out.push_back(std::move(src));
  }
  return out;
}

std::optional<dsl::ProgramSource> ScriptedBackend::repair(const Context&,
                                                          const dsl::ProgramSource& source,
                                                          const dsl::ValidityReport&) {
  auto it = repairs_.find(fnv1a_hex(source.text));
  if (it == repairs_.end()) return std::nullopt;
  dsl::ProgramSource fixed;
  fixed.text = it->second;
  fixed.meta = source.meta;
  return fixed;
}

RemoteBackend::RemoteBackend(BackendConfig config) : config_(std::move(config)) {}

std::string RemoteBackend::complete(const std::string& prompt) {
  // Split endpoint into client base and request path.
  std::string url = config_.endpoint;
  auto scheme_end = url.find("://");
  std::size_t path_start =
      scheme_end == std::string::npos ? url.find('/') : url.find('/', scheme_end + 3);
  std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(base);
  client.set_connection_timeout(0, config_.timeout_ms * 1000LL);
  client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);

  httplib::Headers headers;
  if (const char* token = std::getenv(config_.auth_env.c_str()); token && *token)
    headers.emplace("Authorization", std::string("Bearer ") + token);

  json body = {
      {"model", config_.model},
      {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
      {"temperature", config_.temperature},
  };
  std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "http status " + std::to_string(res->status);
      continue;
    }
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception&) {
      throw ExtractionEmptyError("backend returned a non-JSON completion body");
    }
    try {
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
      throw ExtractionEmptyError("completion response has no choices[0].message.content");
    }
  }
  throw BackendUnreachableError("backend " + config_.endpoint + " unreachable after " +
                                std::to_string(config_.retries + 1) +
                                " attempts (" + last_error + ")");
}

std::vector<dsl::ProgramSource> RemoteBackend::propose(const Context& context, int n) {
  std::string content = complete(render_prompt(context));
  std::vector<std::string> blocks = extract_fenced_blocks(content);
  if (blocks.empty())
    throw ExtractionEmptyError("completion contained no fenced program blocks");
  std::vector<dsl::ProgramSource> out;
  for (std::size_t i = 0; i < blocks.size() && static_cast<int>(i) < n; ++i) {
    dsl::ProgramSource src;
    src.text = blocks[i];
    src.meta = {id(), context.generation, static_cast<int>(i) + 1};
    out.push_back(std::move(src));
  }
  return out;
}

std::optional<dsl::ProgramSource> RemoteBackend::repair(const Context&,
                                                        const dsl::ProgramSource& source,
                                                        const dsl::ValidityReport& report) {
  std::string prompt =
      "A reward program failed validation.\n\nProgram:\n```\n" + source.text +
      "```\n\nValidation report:\n" + report.repair_trace +
      "\n\nEmit exactly 1 corrected program in a single ``` fenced code block. Output "
      "nothing outside the block.\n";
  std::string content = complete(prompt);
  std::vector<std::string> blocks = extract_fenced_blocks(content);
  if (blocks.empty())
    throw ExtractionEmptyError("repair completion contained no fenced block");
  dsl::ProgramSource fixed;
  fixed.text = blocks.front();
  fixed.meta = source.meta;
  return fixed;
}

std::unique_ptr<ProposerBackend> make_backend(const BackendConfig& config) {
  if (config.kind == "scripted") {
    if (config.fixture_dir.empty())
      throw std::runtime_error("scripted backend requires fixture_dir");
    return std::make_unique<ScriptedBackend>(config.fixture_dir);
  }
  if (config.kind == "remote") {
    if (config.endpoint.empty())
      throw std::runtime_error("remote backend requires endpoint");
    return std::make_unique<RemoteBackend>(config);
  }
  throw std::runtime_error("unknown backend kind: " + config.kind);
}

RepairOutcome validate_with_repair(ProposerBackend& backend, const Context& context,
                                   dsl::ProgramSource source,
                                   const env::FeatureSchema& schema, double clip_bound,
                                   int attempts) {
  RepairOutcome out;
  out.source = std::move(source);
  out.report = dsl::compile(out.source, schema, clip_bound, out.program);

  while (!out.report.valid() && out.repair_calls < attempts &&
         (out.report.verdict == dsl::Verdict::ParseError ||
          out.report.verdict == dsl::Verdict::SchemaError)) {
    std::optional<dsl::ProgramSource> fixed;
    try {
      fixed = backend.repair(context, out.source, out.report);
    } catch (const ExtractionEmptyError&) {
      fixed = std::nullopt;
    }
    ++out.repair_calls;
    if (!fixed) break;
    out.source = std::move(*fixed);
    out.program.reset();
    out.report = dsl::compile(out.source, schema, clip_bound, out.program);
  }
  return out;
}

}  // namespace rsearch::proposer
