// drift: run simulations, drift tables, exact oracles and bound checks.

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "drift/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Drift analysis toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", drift::kToolkitVersion);

  drift::ExperimentSpec spec;
  std::vector<std::string> settings;
  std::vector<std::string> flag_settings;
  std::string spec_file;

  auto add_common = [&](CLI::App* sub) {
    sub->set_help_flag("--help", "print this help and exit");
    sub->add_option("--seed", spec.seed, "master seed");
    sub->add_option("--trials", spec.trials, "number of trials");
    sub->add_option("--max-steps", spec.max_steps, "per-trial step cap");
    sub->add_option("--workers", spec.workers, "worker threads");
    sub->add_option("--out", spec.out, "write CSV here instead of stdout");
    sub->add_option("--process", spec.process, "process name");
    sub->add_option("--fitness", spec.fitness, "fitness function");
    sub->add_option("--potential", spec.potential, "potential name");
    sub->add_option("--theorem", spec.theorem, "theorem id");
    sub->add_option("--tolerance", spec.tolerance, "ci3 | rel:<p> | abs:<v>");
    sub->add_option("--spec", spec_file, "spec file; flags override it");
    for (const char* key : {"h", "delta", "x0", "smin", "smax", "r", "x", "beta",
                            "eta", "jump-r", "c", "t", "a", "b", "glambda", "tail"}) {
      std::string k = key;
      sub->add_option_function<std::string>(
          "--" + k,
          [&flag_settings, k](const std::string& v) {
            std::string param = k == "jump-r" ? "jump_r" : k;
            flag_settings.push_back(param + "=" + v);
          },
          "theorem parameter");
    }
    sub->add_option("params", settings, "key=value parameters");
  };

  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "hitting time statistics over independent trials"},
      {"drift", "empirical drift table by potential value"},
      {"bound", "evaluate a theorem bound"},
      {"verify", "compare a theorem bound with simulation"},
      {"oracle", "exact expected hitting time of an explicit chain"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub);
  }
  auto* suite = app.add_subcommand("suite", "run every spec listed in a suite file");
  suite->add_option("file", spec.suite, "suite file")->required();
  suite->add_option("--workers", spec.workers, "worker threads");
  suite->add_option("--out", spec.out, "write summary here");

  CLI11_PARSE(app, argc, argv);

  try {
    drift::ExperimentSpec base;
    if (!spec_file.empty()) base = drift::read_spec_file(spec_file);
    const auto* sub = app.get_subcommands().front();
    // Flags given on the command line win over the spec file.
    auto pick = [&](const char* flag, auto& dst, const auto& src) {
      if (sub->count(flag) == 0) dst = src;
    };
    if (!spec_file.empty()) {
      pick("--seed", spec.seed, base.seed);
      pick("--trials", spec.trials, base.trials);
      pick("--max-steps", spec.max_steps, base.max_steps);
      pick("--workers", spec.workers, base.workers);
      pick("--out", spec.out, base.out);
      pick("--process", spec.process, base.process);
      pick("--fitness", spec.fitness, base.fitness);
      pick("--potential", spec.potential, base.potential);
      pick("--theorem", spec.theorem, base.theorem);
      pick("--tolerance", spec.tolerance, base.tolerance);
      for (const auto& [k, v] : base.params) spec.params.emplace(k, v);
    }
    spec.action = sub->get_name();
    for (const auto& kv : settings) drift::apply_setting(spec, kv);
    for (const auto& kv : flag_settings) drift::apply_setting(spec, kv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return drift::run_experiment(spec, std::cout, std::cerr);
}
