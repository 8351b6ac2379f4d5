// Command-line runner: run an experiment, run self-checks, or re-emit the
// summary table from a finished run.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "advattr/experiment.hpp"
#include "advattr/selfcheck.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Options {
  std::string config_path;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  bool concurrent = false;
};

advattr::ExperimentConfig load_config(const Options& opt) {
  advattr::ExperimentConfig config = opt.config_path.empty()
                                         ? advattr::ExperimentConfig{}
                                         : advattr::ExperimentConfig::load(opt.config_path);
  if (opt.seed) config.seed = *opt.seed;
  if (!opt.output_dir.empty()) config.output_dir = opt.output_dir;
  config.validate();
  return config;
}

int cmd_run(const Options& opt) {
  const advattr::ExperimentConfig config = load_config(opt);
  const advattr::RunArtifacts art =
      advattr::run_experiment(config, advattr::RunOptions{opt.concurrent});
  std::cout << "config hash " << art.config_hash << "\n";
  std::cout << "wrote " << art.output_dir.string() << "\n";
  std::ifstream summary(art.summary);
  std::cout << summary.rdbuf();
  return kExitOk;
}

int cmd_check(const Options& opt) {
  const advattr::ExperimentConfig config = load_config(opt);
  bool ok = true;
  for (const auto& line : advattr::self_check(config.world, config.seed)) {
    std::printf("%-20s %s  worst %.3e  bound %.1e\n", line.name.c_str(), line.pass ? "PASS" : "FAIL",
                line.value, line.bound);
    ok = ok && line.pass;
  }
  return ok ? kExitOk : kExitNumeric;
}

int cmd_report(const Options& opt) {
  std::filesystem::path dir = opt.output_dir;
  if (dir.empty()) {
    if (opt.config_path.empty()) throw advattr::ConfigError("report needs --output or --config");
    dir = advattr::ExperimentConfig::load(opt.config_path).output_dir;
  }
  const std::filesystem::path report = dir / "eval_report.json";
  if (!std::filesystem::is_regular_file(report)) {
    throw advattr::ConfigError("no eval_report.json in " + dir.string());
  }
  const auto reports = advattr::load_arm_reports(report);
  advattr::write_summary_csv(advattr::emit_summary(reports), std::cout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribute-space adversarial noise experiments"};
  app.require_subcommand(1);
  Options opt;

  auto* run = app.add_subcommand("run", "Train and evaluate every configured arm");
  auto* check = app.add_subcommand("check", "Gradient and weight-solver self-checks");
  auto* report = app.add_subcommand("report", "Print the summary table of a finished run");
  for (auto* sub : {run, check, report}) {
    sub->add_option("-c,--config", opt.config_path, "Experiment config file")->check(CLI::ExistingFile);
    sub->add_option("-o,--output", opt.output_dir, "Output directory (overrides output_dir)");
  }
  for (auto* sub : {run, check}) {
    sub->add_option("-s,--seed", opt.seed, "Master seed (overrides the config)");
  }
  run->add_flag("--concurrent-arms", opt.concurrent, "Train arms in parallel");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(opt);
    if (*check) return cmd_check(opt);
    return cmd_report(opt);
  } catch (const advattr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const advattr::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
