// Python surface for the search framework: program compilation/evaluation,
// environment rollouts, training + greedy evaluation, incentive diagnostics,
// and the full search loop driven by a JSON config.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rsearch/common/rng.hpp"
#include "rsearch/diag/metrics.hpp"
#include "rsearch/diag/trace.hpp"
#include "rsearch/dsl/program.hpp"
#include "rsearch/env/features.hpp"
#include "rsearch/env/layout.hpp"
#include "rsearch/env/sim.hpp"
#include "rsearch/marl/trainer.hpp"
#include "rsearch/proposer/backend.hpp"
#include "rsearch/search/search.hpp"

namespace py = pybind11;
using namespace rsearch;

namespace {

env::FeatureVector feature_vector_from_dict(const py::dict& features) {
  env::FeatureVector fv;
  fv.schema_digest = env::FeatureSchema::instance().digest();
  for (auto item : features) {
    std::string name = py::cast<std::string>(item.first);
    if (py::isinstance<py::float_>(item.second) || py::isinstance<py::int_>(item.second)) {
      fv.values[name] = {py::cast<double>(item.second)};
    } else {
      fv.values[name] = py::cast<std::vector<double>>(item.second);
    }
  }
  return fv;
}

py::dict tuple_to_dict(const diag::DiagnosticTuple& d) {
  py::dict out;
  out["j_hat"] = d.j_hat;
  out["delta"] = d.delta;
  out["rho"] = d.rho;
  out["nmi"] = d.nmi;
  out["rho_pooled"] = d.rho_pooled;
  out["shaping_returns"] = d.shaping_returns;
  out["episode_shaping_returns"] = d.episode_shaping_returns;
  out["episode_rho"] = d.episode_rho;
  out["episode_nmi"] = d.episode_nmi;
  return out;
}

// A validated shaping program bound to the published feature schema.
class Program {
 public:
  Program(const std::string& text, double clip_bound) : clip_bound_(clip_bound) {
    dsl::ProgramSource src;
    src.text = text;
    std::optional<dsl::CompiledProgram> compiled;
    dsl::ValidityReport report =
        dsl::compile(src, env::FeatureSchema::instance(), clip_bound, compiled);
    if (!report.valid()) {
      std::ostringstream msg;
      msg << dsl::verdict_name(report.verdict);
      for (const auto& m : report.messages) msg << "\n  " << m;
      throw py::value_error(msg.str());
    }
    program_ = std::move(compiled);
  }

  std::vector<double> evaluate(const py::dict& features, double r_sparse) const {
    return dsl::evaluate(*program_, feature_vector_from_dict(features), r_sparse);
  }

  double clip_bound() const { return clip_bound_; }
  int n_agents() const { return program_->n_agents(); }

  const std::optional<dsl::CompiledProgram>& compiled() const { return program_; }

 private:
  std::optional<dsl::CompiledProgram> program_;
  double clip_bound_;
};

py::dict compile_report(const std::string& text, double clip_bound) {
  dsl::ProgramSource src;
  src.text = text;
  std::optional<dsl::CompiledProgram> compiled;
  dsl::ValidityReport report =
      dsl::compile(src, env::FeatureSchema::instance(), clip_bound, compiled);
  py::dict out;
  out["valid"] = report.valid();
  out["verdict"] = dsl::verdict_name(report.verdict);
  out["messages"] = report.messages;
  return out;
}

py::list schema_entries() {
  py::list out;
  for (const auto& def : env::FeatureSchema::instance().entries()) {
    py::dict e;
    e["name"] = def.name;
    e["per_agent"] = def.per_agent;
    e["semantics"] = def.semantics;
    out.append(e);
  }
  return out;
}

py::dict rollout(const std::string& layout_name, int steps, std::uint64_t seed,
                 bool render) {
  env::Layout layout = env::Layout::builtin(layout_name);
  Rng rng(seed);
  env::EnvState state = env::reset(layout, seed);
  double sparse_total = 0.0;
  int deliveries = 0;
  py::list frames;
  for (int t = 0; t < steps; ++t) {
    std::vector<env::Action> joint = {
        env::action_from_index(static_cast<int>(rng.uniform_int(env::kNumActions))),
        env::action_from_index(static_cast<int>(rng.uniform_int(env::kNumActions)))};
    env::StepOutcome out = env::step(layout, state, joint);
    sparse_total += out.sparse_reward;
    deliveries = out.next_state.deliveries;
    if (render) frames.append(env::render_ascii(layout, out.next_state));
    if (out.done) {
      state = env::reset(layout, seed);
    } else {
      state = out.next_state;
    }
  }
  py::dict out;
  out["sparse_total"] = sparse_total;
  out["deliveries"] = deliveries;
  out["frames"] = frames;
  return out;
}

py::dict train_eval(const std::string& layout_name, const py::object& program,
                    std::uint64_t seed, int iterations, int episodes_per_iteration,
                    int eval_episodes, double shaping_scale, double gamma) {
  env::Layout layout = env::Layout::builtin(layout_name);
  static const std::optional<dsl::CompiledProgram> kNoProgram;
  const std::optional<dsl::CompiledProgram>* compiled = &kNoProgram;
  if (!program.is_none()) compiled = &py::cast<const Program&>(program).compiled();

  marl::TrainConfig config;
  config.seed = seed;
  config.iterations = iterations;
  config.episodes_per_iteration = episodes_per_iteration;
  config.eval_episodes = eval_episodes;
  config.shaping_scale = shaping_scale;
  config.gamma = gamma;

  std::optional<marl::TrainResult> trained;
  std::optional<marl::EvalResult> eval;
  {
    py::gil_scoped_release release;
    trained = marl::train_candidate(layout, *compiled, config);
    eval = marl::evaluate_sparse(trained->params, layout, config.eval_episodes,
                                 config.seed, *compiled, config.gamma);
  }

  diag::DiagnosticTuple diagnostics =
      diag::diagnose(eval->trace, eval->j_hat, config.gamma);

  py::dict out;
  out["j_hat"] = eval->j_hat;
  out["j_std"] = eval->j_std;
  out["j_undiscounted"] = eval->j_undiscounted;
  out["deliveries_mean"] = eval->deliveries_mean;
  out["invalid_deliveries_mean"] = eval->invalid_deliveries_mean;
  out["env_steps"] = trained->env_steps;
  out["diagnostics"] = tuple_to_dict(diagnostics);
  py::list curve;
  for (const auto& it : trained->curve) {
    py::dict row;
    row["iteration"] = it.iteration;
    row["sparse_return_mean"] = it.sparse_return_mean;
    row["deliveries_mean"] = it.deliveries_mean;
    row["entropy"] = it.entropy;
    row["cumulative_env_steps"] = it.cumulative_env_steps;
    curve.append(row);
  }
  out["curve"] = curve;
  return out;
}

py::dict diagnose_steps(const std::vector<int>& episodes,
                        const std::vector<std::vector<double>>& shaping,
                        const std::vector<std::vector<int>>& actions,
                        const std::vector<double>& sparse, double gamma, double eps) {
  if (episodes.size() != shaping.size() || episodes.size() != actions.size() ||
      episodes.size() != sparse.size())
    throw py::value_error("episodes, shaping, actions, and sparse must have equal length");
  diag::RolloutTrace trace;
  int t_in_episode = 0;
  for (std::size_t k = 0; k < episodes.size(); ++k) {
    diag::TraceStep step;
    step.episode = episodes[k];
    t_in_episode = (k > 0 && episodes[k] == episodes[k - 1]) ? t_in_episode + 1 : 0;
    step.t = t_in_episode;
    step.shaping = shaping[k];
    step.actions = actions[k];
    step.sparse = sparse[k];
    trace.steps.push_back(step);
  }
  double j_hat = diag::discounted_sparse_return(trace, gamma);
  return tuple_to_dict(diag::diagnose(trace, j_hat, gamma, eps));
}

std::string run_search_json(const std::string& config_json) {
  search::SearchConfig config =
      search::config_from_json(nlohmann::json::parse(config_json));
  auto backend = proposer::make_backend(config.backend);
  search::SearchResult result;
  {
    py::gil_scoped_release release;
    result = search::run_search(config, *backend);
  }
  nlohmann::json out;
  out["best"] = result.best.str();
  out["archive"] = result.archive.to_json(true);
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Search over executable reward-shaping programs for a cooperative "
            "two-agent kitchen gridworld";

  py::class_<Program>(m, "Program",
                      "A shaping program validated against the feature schema.")
      .def(py::init<const std::string&, double>(), py::arg("text"),
           py::arg("clip_bound") = dsl::kDefaultClipBound)
      .def("evaluate", &Program::evaluate, py::arg("features"),
           py::arg("r_sparse") = 0.0,
           "Per-agent shaping values for one step; missing keys read as zero.")
      .def_property_readonly("clip_bound", &Program::clip_bound)
      .def_property_readonly("n_agents", &Program::n_agents);

  m.def("compile_program", &compile_report, py::arg("text"),
        py::arg("clip_bound") = dsl::kDefaultClipBound,
        "Validate a program; returns {valid, verdict, messages} without throwing.");
  m.def("grammar", &dsl::grammar_ebnf, "The program grammar, as published to proposers.");
  m.def("feature_schema", &schema_entries,
        "Instrumentation contract: name, per_agent flag, semantics per entry.");
  m.def("schema_digest",
        []() { return env::FeatureSchema::instance().digest(); });
  m.def("builtin_layouts", &env::Layout::builtin_names);
  m.def("rollout", &rollout, py::arg("layout"), py::arg("steps") = 200,
        py::arg("seed") = 0, py::arg("render") = false,
        "Random-policy rollout; returns sparse_total, deliveries, and frames.");
  m.def("train_eval", &train_eval, py::arg("layout"), py::arg("program") = py::none(),
        py::arg("seed") = 0, py::arg("iterations") = 21,
        py::arg("episodes_per_iteration") = 8, py::arg("eval_episodes") = 20,
        py::arg("shaping_scale") = 0.1, py::arg("gamma") = 0.99,
        "Train a policy (optionally shaped) under the fixed budget, then "
        "evaluate greedily on the sparse objective.");
  m.def("diagnose", &diagnose_steps, py::arg("episodes"), py::arg("shaping"),
        py::arg("actions"), py::arg("sparse"), py::arg("gamma") = 0.99,
        py::arg("eps") = diag::kDefaultEpsilon,
        "Incentive diagnostics (delta, rho, nmi, j_hat) from parallel step lists.");
  m.def("run_search", &run_search_json, py::arg("config_json"),
        "Full search loop from a JSON config string; returns the archive as JSON.");
}
