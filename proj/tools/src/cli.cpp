#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "msstop/bootstrap.hpp"
#include "msstop/errors.hpp"
#include "msstop/fit.hpp"
#include "msstop/hmm.hpp"
#include "msstop/io.hpp"
#include "msstop/layout.hpp"
#include "msstop/scenario.hpp"
#include "msstop/selection.hpp"
#include "msstop/simulate.hpp"
#include "oracle.hpp"

namespace msstop::cli {
namespace {

using nlohmann::json;

struct Options {
  std::string command_line;
  std::string design_path;
  std::string data_path;
  std::string params_path;
  std::string moves_path;
  std::string structure = "constant";
  std::string out;
  std::optional<double> paper_scenario;
  std::uint64_t seed = 1;
  int starts = 10;
  int replicates = 100;
  int instances = 200;
  int max_iterations = 500;
  unsigned threads = 0;
};

class NotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
}

ModelStructure load_structure(const std::string& spec) {
  if (auto named = named_structure(spec)) return *named;
  std::ifstream probe(spec);
  if (!probe) throw InputError("'" + spec + "' is neither a structure preset (constant, generating, newt) nor a file");
  return parse_structure(read_file(spec));
}

Dataset load_data(const Options& o, std::ostream& err) {
  if (o.data_path.empty()) throw InputError("--data is required");
  std::vector<std::string> warnings;
  Dataset data = read_history_file(o.data_path, &warnings);
  for (const auto& w : warnings) err << "warning: " << o.data_path << ": " << w << "\n";
  return data;
}

// Accepts a bare parameter object or a fit result file.
ParameterSet load_parameters(const std::string& path, const StudyDesign& design) {
  json j = json::parse(read_file(path));
  if (j.contains("fit")) j = j.at("fit");
  if (j.contains("params")) j = j.at("params");
  return parameters_from_json(j, design);
}

StudyDesign load_design(const std::string& path) {
  std::istringstream in(read_file(path));
  return parse_design(in);
}

double scenario_size(const Options& o, std::ostream& err) {
  const double N = *o.paper_scenario;
  if (!paper_scenario(N).standard) {
    err << "warning: N = " << N << " is not one of the standard scenario sizes (100, 1000)\n";
  }
  return N;
}

FitOptions fit_options(const Options& o) {
  FitOptions f;
  f.starts = o.starts;
  f.seed = o.seed;
  f.threads = o.threads;
  f.minimizer.max_iterations = o.max_iterations;
  f.minimizer.simplex_max_evaluations = 40 * o.max_iterations;
  return f;
}

std::string comment_block(const std::string& text) {
  std::string out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out += "#   " + line + "\n";
  return out;
}

json config_json(const Options& o, const std::string& command) {
  json c;
  c["command"] = command;
  c["command_line"] = o.command_line;
  c["seed"] = o.seed;
  if (command == "fit" || command == "bootstrap" || command == "select") {
    c["starts"] = o.starts;
    c["max_iterations"] = o.max_iterations;
  }
  if (command == "bootstrap") c["replicates"] = o.replicates;
  if (!o.data_path.empty()) c["data"] = o.data_path;
  if (!o.design_path.empty()) c["design"] = o.design_path;
  if (!o.params_path.empty()) c["params"] = o.params_path;
  if (!o.moves_path.empty()) c["moves"] = o.moves_path;
  if (o.paper_scenario) c["paper_scenario"] = *o.paper_scenario;
  return c;
}

std::string text_header(const Options& o, const Dataset* data, const ModelStructure* structure) {
  std::string h = "# " + o.command_line + "\n";
  h += fmt::format("# seed: {}\n", o.seed);
  if (data) {
    h += fmt::format("# data: {} (n = {}, unique histories = {})\n", o.data_path, data->observed(),
                     data->unique_count());
    h += "# design: " + design_header(data->design()) + "\n";
  }
  if (structure) h += "# structure:\n" + comment_block(to_string(*structure));
  return h;
}

std::string fit_summary(const FitResult& f) {
  std::string s;
  s += fmt::format("loglik      {:.6f}\n", f.loglik);
  s += fmt::format("parameters  {}\n", f.n_params);
  s += fmt::format("AIC = -2*loglik + 2*k = {:.6f}\n", f.aic);
  s += fmt::format("converged   {} ({} of {} starts, {}, {} iterations, |grad| {:.2e}: {})\n",
                   f.converged ? "yes" : "no", f.starts_converged, f.starts_run, f.optimizer.method,
                   f.optimizer.iterations, f.optimizer.gradient_norm, f.optimizer.message);
  s += "boundary    ";
  if (f.boundary.empty()) s += "none";
  for (std::size_t i = 0; i < f.boundary.size(); ++i) s += (i ? ", " : "") + f.boundary[i];
  return s + "\n";
}

void emit(const Options& o, std::ostream& out, const std::string& text, const json& j) {
  out << text;
  if (o.out.empty()) return;
  write_file(o.out + ".txt", text);
  write_file(o.out + ".json", j.dump(2) + "\n");
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  ParameterSet params;
  std::optional<StudyDesign> design;
  if (o.paper_scenario) {
    auto scenario = paper_scenario(scenario_size(o, err));
    params = scenario.params;
    design = scenario.design;
  } else {
    if (o.design_path.empty() || o.params_path.empty()) {
      throw InputError("simulate needs --paper-scenario or both --design and --params");
    }
    design = load_design(o.design_path);
    params = load_parameters(o.params_path, *design);
  }
  const Simulation sim = simulate(params, *design, o.seed);
  std::ostringstream history;
  history << "# " << o.command_line << "\n";
  write_history(history, sim.data);
  json truth = truth_json(sim.truth, *design);
  truth["config"] = config_json(o, "simulate");
  truth["observed"] = sim.data.observed();
  if (o.out.empty()) {
    out << history.str();
  } else {
    write_file(o.out + ".txt", history.str());
    write_file(o.out + ".truth.json", truth.dump(2) + "\n");
    out << fmt::format("simulated N = {} ({} captured, {} unique histories) -> {}.txt\n", params.N,
                       sim.data.observed(), sim.data.unique_count(), o.out);
  }
  return kExitOk;
}

int cmd_fit(const Options& o, std::ostream& out, std::ostream& err) {
  const Dataset data = load_data(o, err);
  const ModelStructure structure = load_structure(o.structure);
  const FitResult f = fit(data, structure, fit_options(o));
  const StructureLayout layout(structure, data.design());
  const auto values = layout.report(f.theta_hat, data.observed());
  const std::string text = text_header(o, &data, &structure) + "\n" + fit_summary(f) + "\n" + estimates_table(values);
  json j;
  j["config"] = config_json(o, "fit");
  j["config"]["structure"] = to_string(structure);
  j["config"]["design"] = to_json(data.design());
  j["fit"] = to_json(f, layout, data.observed());
  emit(o, out, text, j);
  if (!f.converged) throw NotConverged("no start converged: " + f.optimizer.message);
  return kExitOk;
}

int cmd_bootstrap(const Options& o, std::ostream& out, std::ostream& err) {
  const Dataset data = load_data(o, err);
  const ModelStructure structure = load_structure(o.structure);
  const FitResult f = fit(data, structure, fit_options(o));
  const StructureLayout layout(structure, data.design());
  if (!f.converged) {
    err << fit_summary(f);
    throw NotConverged("full-data fit did not converge; bootstrap skipped");
  }
  BootstrapOptions b;
  b.replicates = o.replicates;
  b.seed = o.seed;
  b.threads = o.threads;
  b.fit = fit_options(o);
  b.fit.starts = 1;
  const BootstrapResult result = bootstrap(data, f, b);
  const auto values = layout.report(f.theta_hat, data.observed());
  std::string text = text_header(o, &data, &structure) + "\n" + fit_summary(f);
  text += fmt::format("bootstrap   {} replicates, {} failed to converge\n\n", result.replicates, result.failures);
  text += estimates_table(values, &result.summaries);
  json j;
  j["config"] = config_json(o, "bootstrap");
  j["config"]["structure"] = to_string(structure);
  j["config"]["design"] = to_json(data.design());
  j["fit"] = to_json(f, layout, data.observed());
  j["bootstrap"] = to_json(result);
  emit(o, out, text, j);
  return kExitOk;
}

int cmd_select(const Options& o, std::ostream& out, std::ostream& err) {
  const Dataset data = load_data(o, err);
  const ModelStructure base = load_structure(o.structure);
  if (o.moves_path.empty()) throw InputError("select needs --moves");
  const auto moves = parse_moves(read_file(o.moves_path));
  const SelectionResult result = step_up_selection(data, moves, base, fit_options(o));
  std::string text = text_header(o, &data, &base);
  text += "# moves:\n";
  for (const auto& m : moves) text += "#   " + m.label() + "\n";
  text += fmt::format("\n{:<6} {:<36} {:>4} {:>14} {:>14} {:>5} {}\n", "round", "move", "k", "loglik", "AIC", "conv",
                      "accepted");
  for (const auto& step : result.trace) {
    text += fmt::format("{:<6} {:<36} {:>4} {:>14.4f} {:>14.4f} {:>5} {}\n", step.round,
                        step.move.empty() ? "(base)" : step.move, step.n_params, step.loglik, step.aic,
                        step.converged ? "yes" : "no", step.accepted ? "*" : "");
  }
  const StructureLayout layout(result.best, data.design());
  text += "\nselected structure:\n" + to_string(result.best) + "\n" + fit_summary(result.best_fit) + "\n";
  text += estimates_table(layout.report(result.best_fit.theta_hat, data.observed()));
  json j;
  j["config"] = config_json(o, "select");
  j["config"]["base_structure"] = to_string(base);
  j["config"]["design"] = to_json(data.design());
  j["selection"] = to_json(result);
  j["fit"] = to_json(result.best_fit, layout, data.observed());
  emit(o, out, text, j);
  if (!result.best_fit.converged) throw NotConverged("selected model did not converge");
  return kExitOk;
}

int cmd_loglik(const Options& o, std::ostream& out, std::ostream& err) {
  const Dataset data = load_data(o, err);
  ParameterSet params;
  if (o.paper_scenario) {
    params = paper_scenario(scenario_size(o, err)).params;
  } else if (!o.params_path.empty()) {
    params = load_parameters(o.params_path, data.design());
  } else {
    throw InputError("loglik needs --params or --paper-scenario");
  }
  const double value = log_likelihood(data, params);
  const std::string text = text_header(o, &data, nullptr) + fmt::format("loglik {:.10f}\n", value);
  json j;
  j["config"] = config_json(o, "loglik");
  j["loglik"] = value;
  j["params"] = to_json(params);
  emit(o, out, text, j);
  return kExitOk;
}

int cmd_oracle(const Options& o, std::ostream& out) {
  const StudyDesign design = o.design_path.empty() ? StudyDesign({2, 2}, 2) : load_design(o.design_path);
  const OracleReport report = oracle_check(design, o.instances, o.seed);
  const bool pass = report.max_abs_deviation < 1e-10;
  std::string text = text_header(o, nullptr, nullptr);
  text += "# design: " + design_header(design) + "\n";
  text += fmt::format("instances          {}\n", report.instances);
  text += fmt::format("histories checked  {}\n", report.histories);
  text += fmt::format("max |HMM - brute|  {:.3e}\n", report.max_abs_deviation);
  text += fmt::format("max relative       {:.3e}\n", report.max_rel_deviation);
  text += fmt::format("result             {}\n", pass ? "PASS (< 1e-10)" : "FAIL (>= 1e-10)");
  json j;
  j["config"] = config_json(o, "oracle-check");
  j["config"]["design"] = to_json(design);
  j["instances"] = report.instances;
  j["histories"] = report.histories;
  j["max_abs_deviation"] = report.max_abs_deviation;
  j["max_rel_deviation"] = report.max_rel_deviation;
  j["pass"] = pass;
  emit(o, out, text, j);
  return pass ? kExitOk : kExitError;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  Options o;
  o.command_line = "msstop";
  for (int i = 1; i < argc; ++i) o.command_line += std::string(" ") + argv[i];

  CLI::App app{"Multi-state multi-period stopover models: simulate, fit, bootstrap, select."};
  app.require_subcommand(1);
  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "random seed")->capture_default_str(); };
  auto add_out = [&](CLI::App* c) { c->add_option("--out", o.out, "output prefix (writes <out>.txt and <out>.json)"); };
  auto add_data = [&](CLI::App* c) { c->add_option("--data", o.data_path, "history file")->required(); };
  auto add_fit = [&](CLI::App* c) {
    c->add_option("--structure", o.structure, "preset (constant, generating, newt) or structure file")
        ->capture_default_str();
    c->add_option("--starts", o.starts, "optimizer starts")->capture_default_str()->check(CLI::PositiveNumber);
    c->add_option("--threads", o.threads, "worker threads, 0 = all cores")->capture_default_str();
    c->add_option("--max-iterations", o.max_iterations,
                  "quasi-Newton iterations per start (simplex fallback gets 40x as many evaluations)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  };
  auto add_scenario = [&](CLI::App* c) {
    c->add_option("--paper-scenario", o.paper_scenario, "three-period simulation scenario with this N (100 or 1000)");
  };

  auto* simulate_cmd = app.add_subcommand("simulate", "simulate a history file (and <out>.truth.json)");
  add_scenario(simulate_cmd);
  simulate_cmd->add_option("--design", o.design_path, "file whose header declares the design");
  simulate_cmd->add_option("--params", o.params_path, "parameter JSON");
  add_seed(simulate_cmd);
  add_out(simulate_cmd);

  auto* fit_cmd = app.add_subcommand("fit", "maximum-likelihood fit");
  add_data(fit_cmd);
  add_fit(fit_cmd);
  add_seed(fit_cmd);
  add_out(fit_cmd);

  auto* boot_cmd = app.add_subcommand("bootstrap", "fit plus nonparametric bootstrap");
  add_data(boot_cmd);
  add_fit(boot_cmd);
  boot_cmd->add_option("--replicates", o.replicates, "bootstrap replicates")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_seed(boot_cmd);
  add_out(boot_cmd);

  auto* select_cmd = app.add_subcommand("select", "step-up AIC model selection");
  add_data(select_cmd);
  add_fit(select_cmd);
  select_cmd->add_option("--moves", o.moves_path, "candidate moves, one 'family: spec' per line")->required();
  add_seed(select_cmd);
  add_out(select_cmd);

  auto* loglik_cmd = app.add_subcommand("loglik", "log-likelihood at given parameters");
  add_data(loglik_cmd);
  loglik_cmd->add_option("--params", o.params_path, "parameter JSON");
  add_scenario(loglik_cmd);
  add_out(loglik_cmd);

  auto* oracle_cmd = app.add_subcommand("oracle-check", "HMM likelihood against brute-force path sums");
  oracle_cmd->add_option("--design", o.design_path, "design header file (default T=2 K=2,2 G=2)");
  oracle_cmd->add_option("--instances", o.instances, "random parameter sets")->capture_default_str();
  add_seed(oracle_cmd);
  add_out(oracle_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (simulate_cmd->parsed()) return cmd_simulate(o, out, err);
    if (fit_cmd->parsed()) return cmd_fit(o, out, err);
    if (boot_cmd->parsed()) return cmd_bootstrap(o, out, err);
    if (select_cmd->parsed()) return cmd_select(o, out, err);
    if (loglik_cmd->parsed()) return cmd_loglik(o, out, err);
    if (oracle_cmd->parsed()) return cmd_oracle(o, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const json::exception& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const NotConverged& e) {
    err << "not converged: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace msstop::cli
