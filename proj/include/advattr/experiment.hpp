#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "advattr/eval.hpp"
#include "advattr/trainer.hpp"
#include "advattr/world.hpp"

namespace advattr {

enum class Arm { Full, WithoutSelection, WithoutMoo };

/// Label used in configs and reports: "full", "w/o-selection", "w/o-moo".
const char* arm_label(Arm arm);
/// File-name friendly form: "full", "wo_selection", "wo_moo".
const char* arm_slug(Arm arm);
Arm parse_arm(std::string_view label);

struct ExperimentConfig {
  WorldConfig world;
  TrainConfig train;
  EvalConfig eval;
  std::vector<Arm> arms{Arm::Full, Arm::WithoutSelection, Arm::WithoutMoo};
  std::filesystem::path output_dir = "runs/latest";
  std::uint64_t seed = 1;

  void validate() const;

  /// Flat `key = value` text. `#` starts a comment. Unknown or repeated
  /// keys are ConfigErrors; missing keys keep their defaults.
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Canonical key = value listing of every setting except output_dir.
  /// Parsing it back yields an equal config.
  std::string serialize() const;
  /// FNV-1a of serialize(), as 16 hex digits.
  std::string hash() const;
};

/// Documented config keys in serialization order.
const std::vector<std::string>& config_keys();

/// Training config for one arm: the base config with the arm's switches
/// and the master seed applied.
TrainConfig arm_config(const ExperimentConfig& config, Arm arm);

/// Reports for the untrained starting generators ("random") and for
/// zero-noise generators ("zero-noise", attribute edit only).
std::vector<EvalReport> baseline_reports(const World& world, const ExperimentConfig& config,
                                         const Calibration& calibration);

struct ArmResult {
  Arm arm = Arm::Full;
  TrainResult training;
  EvalReport report;
};

struct RunArtifacts {
  std::filesystem::path output_dir;
  std::filesystem::path config_snapshot;
  std::filesystem::path metadata;
  std::filesystem::path schema;
  std::vector<std::filesystem::path> train_logs;   // per arm, declared order
  std::vector<std::filesystem::path> checkpoints;  // per arm, declared order
  std::filesystem::path eval_report;
  std::filesystem::path eval_rows;  // flat CSV, one row per (arm, embedder)
  std::filesystem::path attribute_frequency;
  std::filesystem::path summary;
  std::string config_hash;
};

struct RunOptions {
  bool concurrent_arms = false;
};

/// Builds the world, trains and evaluates every arm plus the random and
/// zero-noise baselines, and writes all artifacts into a fresh
/// config.output_dir. Throws ConfigError if the directory already exists.
RunArtifacts run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Training and evaluation only, without touching the filesystem.
std::vector<ArmResult> run_arms(const World& world, const ExperimentConfig& config,
                                const Calibration& calibration, const RunOptions& options = {});

struct SummaryTable {
  std::vector<std::string> columns;  // "arm" first
  std::vector<std::string> arms;
  std::vector<std::vector<double>> rows;
};

/// One row per report in the given order; columns asr_<embedder> for each
/// embedder, then holdout_asr, mse, stealthy_loss.
SummaryTable emit_summary(std::span<const EvalReport> reports);
void write_summary_csv(const SummaryTable& table, std::ostream& out);
SummaryTable read_summary_csv(std::istream& in);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

/// Arm reports stored in an eval_report.json, in declared order.
std::vector<EvalReport> load_arm_reports(const std::filesystem::path& eval_report);

struct Checkpoint {
  std::string arm;
  std::string config_hash;
  std::vector<NoiseGenerator> generators;
  OptimizerState optimizer;
};

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void write_train_log_csv(const TrainLog& log, const AttributeDictionary& attrs, std::ostream& out);

/// Header plus rows of raw string cells. Fields never contain commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(std::istream& in);

/// Shortest text that round-trips the exact double.
std::string format_double(double x);

}  // namespace advattr
