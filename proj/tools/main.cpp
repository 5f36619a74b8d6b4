#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "rsearch/common/errors.hpp"
#include "rsearch/diag/metrics.hpp"
#include "rsearch/env/sim.hpp"
#include "rsearch/search/search.hpp"

namespace fs = std::filesystem;
using namespace rsearch;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kValidation = 2;
constexpr int kBackend = 3;

struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file_or_fail(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationFailure("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

dsl::CompiledProgram compile_or_fail(const std::string& path, double clip_bound) {
  dsl::ProgramSource src;
  src.text = read_file_or_fail(path);
  src.meta.proposer_id = "cli";
  std::optional<dsl::CompiledProgram> program;
  dsl::ValidityReport report =
      dsl::compile(src, env::FeatureSchema::instance(), clip_bound, program);
  if (!report.valid()) {
    std::string msg = dsl::verdict_name(report.verdict) + " in " + path;
    for (const auto& m : report.messages) msg += "\n  " + m;
    throw ValidationFailure(msg);
  }
  return std::move(*program);
}

env::Layout layout_or_fail(const std::string& name) {
  try {
    return env::Layout::builtin(name);
  } catch (const std::exception& e) {
    throw ValidationFailure(e.what());
  }
}

// ---- search run ----------------------------------------------------------

struct SearchArgs {
  std::string config_file;
  std::string output;
  bool force = false;
  int jobs = 0;
  bool as_json = false;
};

int cmd_search_run(const SearchArgs& args) {
  search::SearchConfig config;
  try {
    config = search::load_config_file(args.config_file);
  } catch (const std::exception& e) {
    throw ValidationFailure(e.what());
  }
  if (!args.output.empty()) config.output_dir = args.output;
  if (config.output_dir.empty()) config.output_dir = "out";
  if (args.jobs > 0) config.jobs = args.jobs;

  if (fs::exists(config.output_dir)) {
    if (!args.force)
      throw ValidationFailure("output directory exists: " + config.output_dir +
                              " (pass --force to replace it)");
    fs::remove_all(config.output_dir);
  }

  auto backend = proposer::make_backend(config.backend);
  search::SearchResult result = search::run_search(config, *backend);
  const search::CandidateRecord* best = result.archive.find(result.best);

  if (args.as_json) {
    json out;
    out["best"] = search::record_to_json(*best, true);
    out["archive"] = config.output_dir + "/archive.json";
    out["lineage"] = config.output_dir + "/lineage.json";
    std::cout << out.dump(2) << "\n";
  } else {
    std::printf("best candidate: %s  J=%.4f +/- %.4f  deliveries=%.2f\n",
                result.best.str().c_str(), *best->j_hat, *best->j_std,
                *best->deliveries);
    std::printf("archive: %s/archive.json\n", config.output_dir.c_str());
    std::printf("lineage: %s/lineage.json, %s/lineage.dot\n", config.output_dir.c_str(),
                config.output_dir.c_str());
  }
  return kOk;
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string program_file;
  std::string layout;
  std::uint64_t seed = 0;
  marl::TrainConfig train;
  double clip_bound = dsl::kDefaultClipBound;
  std::string trace_out;
  bool as_json = false;
};

int cmd_eval(const EvalArgs& args) {
  env::Layout layout = layout_or_fail(args.layout);
  std::optional<dsl::CompiledProgram> program =
      compile_or_fail(args.program_file, args.clip_bound);

  marl::TrainConfig tc = args.train;
  tc.seed = args.seed;
  marl::TrainResult trained = marl::train_candidate(layout, program, tc);
  marl::EvalResult eval = marl::evaluate_sparse(trained.params, layout, tc.eval_episodes,
                                                args.seed, program, tc.gamma);
  diag::DiagnosticTuple d = diag::diagnose(eval.trace, eval.j_hat, tc.gamma);
  if (!args.trace_out.empty()) diag::write_trace_file(args.trace_out, eval.trace);

  if (args.as_json) {
    json out;
    out["j_hat"] = eval.j_hat;
    out["j_std"] = eval.j_std;
    out["j_undiscounted"] = eval.j_undiscounted;
    out["deliveries"] = eval.deliveries_mean;
    out["invalid_deliveries"] = eval.invalid_deliveries_mean;
    out["diagnostics"] = d;
    out["env_steps"] = trained.env_steps;
    std::cout << out.dump(2) << "\n";
  } else {
    std::printf("J      %.4f +/- %.4f (undiscounted %.2f)\n", eval.j_hat, eval.j_std,
                eval.j_undiscounted);
    std::printf("deliveries %.2f   invalid %.2f   env steps %lld\n",
                eval.deliveries_mean, eval.invalid_deliveries_mean, trained.env_steps);
    std::printf("delta  %.4f\nrho    %.4f\nnmi    %.4f\n", d.delta, d.rho, d.nmi);
  }
  return kOk;
}

// ---- diagnose --------------------------------------------------------------

int cmd_diagnose(const std::string& trace_file, double gamma, double eps) {
  diag::RolloutTrace trace;
  try {
    trace = diag::read_trace_file(trace_file);
  } catch (const std::exception& e) {
    throw ValidationFailure(e.what());
  }
  double j_hat = diag::discounted_sparse_return(trace, gamma);
  diag::DiagnosticTuple d = diag::diagnose(trace, j_hat, gamma, eps);
  std::cout << json(d).dump(2) << "\n";
  return kOk;
}

// ---- rollout ---------------------------------------------------------------

int cmd_rollout(const std::string& layout_name, const std::string& policy, int steps,
                std::uint64_t seed, bool render, const std::string& trace_out) {
  env::Layout layout = layout_or_fail(layout_name);
  if (steps <= 0) steps = layout.horizon();
  Rng rng(seed);
  env::EnvState state = env::reset(layout, seed);
  diag::RolloutTrace trace;
  double total_sparse = 0.0;
  for (int t = 0; t < steps && t < layout.horizon(); ++t) {
    std::vector<env::Action> joint;
    for (int i = 0; i < layout.n_agents(); ++i)
      joint.push_back(policy == "stay" ? env::Action::Stay
                                       : env::action_from_index(
                                             static_cast<int>(rng.uniform_int(6))));
    env::StepOutcome out = env::step(layout, state, joint);
    total_sparse += out.sparse_reward;
    trace.steps.push_back(
        {0, t, std::vector<double>(layout.n_agents(), 0.0),
         {static_cast<int>(joint[0]), static_cast<int>(joint[1])}, out.sparse_reward});
    if (render) {
      std::printf("t=%d  %s/%s  r=%.0f\n", t, env::action_name(joint[0]),
                  env::action_name(joint[1]), out.sparse_reward);
      std::fputs(env::render_ascii(layout, out.next_state).c_str(), stdout);
      std::fputs("\n", stdout);
    }
    state = out.next_state;
    if (out.done) break;
  }
  if (!trace_out.empty()) diag::write_trace_file(trace_out, trace);
  std::printf("steps=%d deliveries=%d sparse_total=%.0f\n", state.tick, state.deliveries,
              total_sparse);
  return kOk;
}

// ---- report ----------------------------------------------------------------

struct ReportRow {
  std::string label;
  int generation = 0;
  int total = 0;
  int valid = 0;
  std::optional<search::CandidateId> best;
  std::optional<double> j_hat, j_std, deliveries, invalid_deliveries;
};

std::vector<ReportRow> build_report(const search::Archive& archive) {
  std::map<int, ReportRow> rows;
  for (const auto& r : archive.records) {
    ReportRow& row = rows[r.id.generation];
    row.generation = r.id.generation;
    row.label = r.id.generation == 0 ? "baseline" : "gen " + std::to_string(r.id.generation);
    row.total += 1;
    if (r.verdict == "Valid") row.valid += 1;
    if (!r.trained()) continue;
    if (!row.j_hat || *r.j_hat > *row.j_hat ||
        (*r.j_hat == *row.j_hat && r.id < *row.best)) {
      row.best = r.id;
      row.j_hat = r.j_hat;
      row.j_std = r.j_std;
      row.deliveries = r.deliveries;
      row.invalid_deliveries = r.invalid_deliveries;
    }
  }
  std::vector<ReportRow> out;
  for (auto& [g, row] : rows) out.push_back(std::move(row));
  return out;
}

int cmd_report(const std::string& archive_dir, bool as_json) {
  search::Archive archive;
  try {
    archive = search::read_archive_file(archive_dir + "/archive.json");
  } catch (const std::exception& e) {
    throw ValidationFailure(e.what());
  }
  std::vector<ReportRow> rows = build_report(archive);

  if (as_json) {
    json out = json::array();
    for (const auto& row : rows) {
      json jr;
      jr["label"] = row.label;
      jr["generation"] = row.generation;
      jr["candidates"] = row.total;
      jr["valid"] = row.valid;
      jr["best"] = row.best ? json(row.best->str()) : json(nullptr);
      auto put = [&](const char* k, const std::optional<double>& v) {
        jr[k] = v ? json(*v) : json(nullptr);
      };
      put("j_hat", row.j_hat);
      put("j_std", row.j_std);
      put("deliveries", row.deliveries);
      put("invalid_deliveries", row.invalid_deliveries);
      out.push_back(jr);
    }
    std::cout << out.dump(2) << "\n";
  } else {
    std::printf("%-10s %-6s %-6s %-8s %-18s %-11s %s\n", "row", "cands", "valid", "best",
                "J (mean +/- std)", "deliveries", "invalid");
    for (const auto& row : rows) {
      if (row.best)
        std::printf("%-10s %-6d %-6d %-8s %8.3f +/- %-6.3f %-11.2f %.2f\n",
                    row.label.c_str(), row.total, row.valid, row.best->str().c_str(),
                    *row.j_hat, *row.j_std, *row.deliveries, *row.invalid_deliveries);
      else
        std::printf("%-10s %-6d %-6d %-8s %18s %-11s %s\n", row.label.c_str(), row.total,
                    row.valid, "-", "-", "-", "-");
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reward-program search over a cooperative two-cook kitchen"};
  app.require_subcommand(1);

  // search run
  CLI::App* search_cmd = app.add_subcommand("search", "candidate search");
  search_cmd->require_subcommand(1);
  CLI::App* search_run = search_cmd->add_subcommand("run", "run the full search loop");
  SearchArgs sargs;
  search_run->add_option("--config", sargs.config_file, "run config JSON")->required();
  search_run->add_option("--output", sargs.output, "output directory (overrides config)");
  search_run->add_flag("--force", sargs.force, "replace an existing output directory");
  search_run->add_option("--jobs", sargs.jobs, "parallel candidate trainings");
  search_run->add_flag("--json", sargs.as_json, "machine-readable output");

  // eval
  CLI::App* eval_cmd = app.add_subcommand("eval", "train and evaluate one program");
  EvalArgs eargs;
  eval_cmd->add_option("--program", eargs.program_file, "reward program file")->required();
  eval_cmd->add_option("--layout", eargs.layout, "built-in layout name")->required();
  eval_cmd->add_option("--seed", eargs.seed, "training seed");
  eval_cmd->add_option("--iterations", eargs.train.iterations, "training iterations");
  eval_cmd->add_option("--episodes-per-iteration", eargs.train.episodes_per_iteration,
                       "episodes collected per iteration");
  eval_cmd->add_option("--eval-episodes", eargs.train.eval_episodes,
                       "greedy evaluation episodes");
  eval_cmd->add_option("--shaping-scale", eargs.train.shaping_scale,
                       "shaping weight lambda");
  eval_cmd->add_option("--clip-bound", eargs.clip_bound, "program output bound C");
  eval_cmd->add_option("--trace-out", eargs.trace_out, "write the evaluation trace here");
  eval_cmd->add_flag("--json", eargs.as_json, "machine-readable output");

  // diagnose
  CLI::App* diag_cmd = app.add_subcommand("diagnose", "diagnostics from a trace file");
  std::string trace_file;
  double gamma = 0.99, epsilon = diag::kDefaultEpsilon;
  diag_cmd->add_option("--trace", trace_file, "ndjson rollout trace")->required();
  diag_cmd->add_option("--gamma", gamma, "discount factor");
  diag_cmd->add_option("--epsilon", epsilon, "imbalance regularizer");

  // rollout
  CLI::App* roll_cmd = app.add_subcommand("rollout", "scripted-policy rollout");
  std::string roll_layout, roll_policy = "random", roll_trace_out;
  int roll_steps = 0;
  std::uint64_t roll_seed = 0;
  bool roll_render = false;
  roll_cmd->add_option("--layout", roll_layout, "built-in layout name")->required();
  roll_cmd->add_option("--policy", roll_policy, "random | stay")
      ->check(CLI::IsMember({"random", "stay"}));
  roll_cmd->add_option("--steps", roll_steps, "steps to simulate (default: horizon)");
  roll_cmd->add_option("--seed", roll_seed, "action seed");
  roll_cmd->add_flag("--render", roll_render, "print ASCII frames");
  roll_cmd->add_option("--trace-out", roll_trace_out, "write the rollout trace here");

  // report
  CLI::App* report_cmd = app.add_subcommand("report", "summary table from an archive");
  std::string archive_dir;
  bool report_json = false;
  report_cmd->add_option("--archive", archive_dir, "search output directory")->required();
  report_cmd->add_flag("--json", report_json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (search_run->parsed()) return cmd_search_run(sargs);
    if (eval_cmd->parsed()) return cmd_eval(eargs);
    if (diag_cmd->parsed()) return cmd_diagnose(trace_file, gamma, epsilon);
    if (roll_cmd->parsed())
      return cmd_rollout(roll_layout, roll_policy, roll_steps, roll_seed, roll_render,
                         roll_trace_out);
    if (report_cmd->parsed()) return cmd_report(archive_dir, report_json);
  } catch (const BackendUnreachableError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kBackend;
  } catch (const ExtractionEmptyError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kBackend;
  } catch (const ValidationFailure& e) {
    std::cerr << e.what() << "\n";
    return kValidation;
  } catch (const NoValidCandidatesError& e) {
    std::cerr << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kValidation;
  }
  return kUsage;
}
