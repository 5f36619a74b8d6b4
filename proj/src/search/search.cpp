#include "rsearch/search/search.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "rsearch/common/errors.hpp"
#include "rsearch/dsl/parser.hpp"

namespace rsearch::search {
namespace fs = std::filesystem;
using nlohmann::json;

SearchConfig config_from_json(const json& j) {
  SearchConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("layout", c.layout);
  get("generations", c.generations);
  get("candidates", c.candidates);
  get("repair_attempts", c.repair_attempts);
  get("master_seed", c.master_seed);
  get("epsilon", c.epsilon);
  get("clip_bound", c.clip_bound);
  get("task_description", c.task_description);
  get("output_dir", c.output_dir);
  get("jobs", c.jobs);

  if (j.contains("train")) {
    const json& t = j.at("train");
    auto tget = [&](const char* key, auto& field) {
      if (t.contains(key)) field = t.at(key).get<std::decay_t<decltype(field)>>();
    };
    tget("actor_lr", c.train.actor_lr);
    tget("critic_lr", c.train.critic_lr);
    tget("gamma", c.train.gamma);
    tget("gae_lambda", c.train.gae_lambda);
    tget("ppo_clip", c.train.ppo_clip);
    tget("entropy_coef", c.train.entropy_coef);
    tget("minibatch", c.train.minibatch);
    tget("epochs", c.train.epochs);
    tget("hidden1", c.train.hidden1);
    tget("hidden2", c.train.hidden2);
    tget("iterations", c.train.iterations);
    tget("episodes_per_iteration", c.train.episodes_per_iteration);
    tget("shaping_scale", c.train.shaping_scale);
    tget("eval_episodes", c.train.eval_episodes);
  }
  if (j.contains("backend")) {
    const json& b = j.at("backend");
    auto bget = [&](const char* key, auto& field) {
      if (b.contains(key)) field = b.at(key).get<std::decay_t<decltype(field)>>();
    };
    bget("kind", c.backend.kind);
    bget("fixture_dir", c.backend.fixture_dir);
    bget("endpoint", c.backend.endpoint);
    bget("model", c.backend.model);
    bget("temperature", c.backend.temperature);
    bget("auth_env", c.backend.auth_env);
    bget("timeout_ms", c.backend.timeout_ms);
    bget("retries", c.backend.retries);
  }
  if (c.generations < 1) throw std::runtime_error("generations must be >= 1");
  if (c.candidates < 1) throw std::runtime_error("candidates must be >= 1");
  return c;
}

SearchConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

CandidateId select_best(const std::vector<std::pair<CandidateId, double>>& scored) {
  if (scored.empty())
    throw NoValidCandidatesError("no valid trained candidate to select from");
  const std::pair<CandidateId, double>* best = &scored.front();
  for (const auto& s : scored)
    if (s.second > best->second || (s.second == best->second && s.first < best->first))
      best = &s;
  return best->first;
}

void write_curve_file(const std::string& path,
                      const std::vector<marl::IterationStats>& curve) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& it : curve) {
    json j{{"iteration", it.iteration},
           {"sparse_return_mean", it.sparse_return_mean},
           {"deliveries_mean", it.deliveries_mean},
           {"actor_loss", it.actor_loss},
           {"critic_loss", it.critic_loss},
           {"entropy", it.entropy},
           {"cumulative_env_steps", it.cumulative_env_steps}};
    out << j.dump() << "\n";
  }
}

std::vector<marl::IterationStats> read_curve_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<marl::IterationStats> curve;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    marl::IterationStats it;
    it.iteration = j.at("iteration").get<int>();
    it.sparse_return_mean = j.at("sparse_return_mean").get<double>();
    it.deliveries_mean = j.at("deliveries_mean").get<double>();
    it.actor_loss = j.at("actor_loss").get<double>();
    it.critic_loss = j.at("critic_loss").get<double>();
    it.entropy = j.at("entropy").get<double>();
    it.cumulative_env_steps = j.at("cumulative_env_steps").get<long long>();
    curve.push_back(it);
  }
  return curve;
}

namespace {

void fill_record(CandidateRecord& record, CandidateOutcome&& outcome,
                 const std::string& out_dir) {
  record.j_hat = outcome.j_hat;
  record.j_std = outcome.j_std;
  record.j_undiscounted = outcome.j_undiscounted;
  record.deliveries = outcome.deliveries;
  record.invalid_deliveries = outcome.invalid_deliveries;
  record.diagnostics = std::move(outcome.diagnostics);
  record.env_steps = outcome.env_steps;
  record.curve_file = "candidates/" + record.id.str() + ".curve.ndjson";
  record.trace_file = "candidates/" + record.id.str() + ".trace.ndjson";
  if (!out_dir.empty()) {
    write_curve_file(out_dir + "/" + record.curve_file, outcome.curve);
    diag::write_trace_file(out_dir + "/" + record.trace_file, outcome.trace);
  }
}

}  // namespace

SearchResult run_search(const SearchConfig& config, proposer::ProposerBackend& backend,
                        const SearchHooks& hooks) {
  if (config.generations < 1) throw std::runtime_error("generations must be >= 1");
  if (config.candidates < 1) throw std::runtime_error("candidates must be >= 1");
  env::Layout layout = env::Layout::builtin(config.layout);
  const env::FeatureSchema& schema = env::FeatureSchema::instance();
  std::string task = config.task_description.empty()
                         ? proposer::default_task_description(config.layout)
                         : config.task_description;

  if (!config.output_dir.empty())
    fs::create_directories(fs::path(config.output_dir) / "candidates");

  auto evaluate = hooks.evaluate_candidate;
  if (!evaluate) {
    evaluate = [&](const std::optional<dsl::CompiledProgram>& program, CandidateId,
                   std::uint64_t seed) {
      marl::TrainConfig tc = config.train;
      tc.seed = seed;
      marl::TrainResult trained = marl::train_candidate(layout, program, tc);
      marl::EvalResult eval = marl::evaluate_sparse(trained.params, layout,
                                                    tc.eval_episodes, seed, program,
                                                    tc.gamma);
      CandidateOutcome o;
      o.j_hat = eval.j_hat;
      o.j_std = eval.j_std;
      o.j_undiscounted = eval.j_undiscounted;
      o.deliveries = eval.deliveries_mean;
      o.invalid_deliveries = eval.invalid_deliveries_mean;
      o.diagnostics = diag::diagnose(eval.trace, eval.j_hat, tc.gamma, config.epsilon);
      o.curve = std::move(trained.curve);
      o.trace = std::move(eval.trace);
      o.env_steps = trained.env_steps;
      return o;
    };
  }

  Archive archive;
  archive.layout = config.layout;
  archive.master_seed = config.master_seed;
  archive.schema_digest = schema.digest();

  auto timed = [&](CandidateRecord& record,
                   const std::optional<dsl::CompiledProgram>& program) {
    auto start = std::chrono::steady_clock::now();
    CandidateOutcome outcome = evaluate(
        program, record.id,
        derive_seed(config.master_seed, record.id.generation, record.id.index));
    fill_record(record, std::move(outcome), config.output_dir);
    record.wall_clock_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  // Reference row: the no-shaping baseline under the identical budget.
  {
    CandidateRecord baseline;
    baseline.id = {0, 0};
    baseline.proposer_id = "baseline";
    baseline.verdict = "Valid";
    timed(baseline, std::nullopt);
    archive.records.push_back(std::move(baseline));
  }

  for (int g = 1; g <= config.generations; ++g) {
    proposer::Context context =
        proposer::build_context(archive, g, task, config.candidates);
    std::string ctx_digest = proposer::context_digest(context);

    std::vector<dsl::ProgramSource> sources = backend.propose(context, config.candidates);
    if (static_cast<int>(sources.size()) < config.candidates)
      std::cerr << "generation " << g << ": proposer returned " << sources.size()
                << " of " << config.candidates << " candidates\n";

    // Sequential validation and repair (backend calls stay rate-limited).
    struct Pending {
      CandidateRecord record;
      std::optional<dsl::CompiledProgram> program;
    };
    std::vector<Pending> pending;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      Pending p;
      p.record.id = {g, static_cast<int>(s) + 1};
      p.record.proposer_id = backend.id();
      p.record.context_digest = ctx_digest;
      p.record.context_ids = context.included_ids;

      proposer::RepairOutcome out =
          proposer::validate_with_repair(backend, context, std::move(sources[s]), schema,
                                         config.clip_bound, config.repair_attempts);
      p.record.source_text = out.source.text;
      p.record.verdict = dsl::verdict_name(out.report.verdict);
      p.record.repair_calls = out.repair_calls;
      if (out.program) {
        p.record.ast_digest = fnv1a_hex(dsl::pretty_print(out.program->ast()));
        p.program = std::move(out.program);
      } else {
        p.record.failure_trace = out.report.repair_trace;
      }
      pending.push_back(std::move(p));
    }

    // Train valid candidates, up to config.jobs at a time; results land in
    // fixed slots so the archive order is independent of scheduling.
    int jobs = std::max(1, config.jobs);
    if (jobs == 1) {
      for (auto& p : pending)
        if (p.program) timed(p.record, p.program);
    } else {
      std::vector<std::size_t> queue;
      for (std::size_t i = 0; i < pending.size(); ++i)
        if (pending[i].program) queue.push_back(i);
      for (std::size_t at = 0; at < queue.size(); at += jobs) {
        std::vector<std::thread> batch;
        for (std::size_t i = at; i < queue.size() && i < at + jobs; ++i)
          batch.emplace_back([&, i] {
            timed(pending[queue[i]].record, pending[queue[i]].program);
          });
        for (auto& t : batch) t.join();
      }
    }

    for (auto& p : pending) archive.records.push_back(std::move(p.record));
  }

  std::vector<std::pair<CandidateId, double>> scored;
  for (const auto& r : archive.records)
    if (r.trained()) scored.push_back({r.id, *r.j_hat});
  CandidateId best = select_best(scored);

  SearchResult result{std::move(archive), best, {}};
  result.lineage = build_lineage(result.archive);

  if (!config.output_dir.empty()) {
    write_archive_file(result.archive, config.output_dir + "/archive.json");
    std::ofstream lj(config.output_dir + "/lineage.json", std::ios::binary);
    lj << lineage_to_json(result.lineage).dump(2) << "\n";
    std::ofstream ld(config.output_dir + "/lineage.dot", std::ios::binary);
    ld << lineage_to_dot(result.lineage);
  }
  return result;
}

}  // namespace rsearch::search
