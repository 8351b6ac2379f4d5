#include "advattr/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <future>
#include <istream>
#include <ostream>
#include <sstream>

namespace advattr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

double parse_real(const std::string& key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a finite number, got '" + std::string(v) + "'");
  }
  return out;
}

struct Key {
  std::string name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename Field>
Key size_key(std::string name, Field field) {
  return {name,
          [name, field](ExperimentConfig& c, std::string_view v) {
            field(c) = static_cast<std::size_t>(parse_u64(name, v));
          },
          [field](const ExperimentConfig& c) {
            return std::to_string(field(c));
          }};
}

template <typename Field>
Key real_key(std::string name, Field field) {
  return {name,
          [name, field](ExperimentConfig& c, std::string_view v) { field(c) = parse_real(name, v); },
          [field](const ExperimentConfig& c) {
            return format_double(field(c));
          }};
}

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back({"seed",
                 [](ExperimentConfig& c, std::string_view v) { c.seed = parse_u64("seed", v); },
                 [](const ExperimentConfig& c) { return std::to_string(c.seed); }});
    k.push_back({"arms",
                 [](ExperimentConfig& c, std::string_view v) {
                   c.arms.clear();
                   for (const auto& a : split(v, ',')) c.arms.push_back(parse_arm(a));
                 },
                 [](const ExperimentConfig& c) {
                   std::vector<std::string> labels;
                   for (Arm a : c.arms) labels.emplace_back(arm_label(a));
                   return join(labels, ",");
                 }});
    k.push_back(size_key("world.latent_dim", [](auto& c) -> auto& { return c.world.latent_dim; }));
    k.push_back(size_key("world.image_dim", [](auto& c) -> auto& { return c.world.image_dim; }));
    k.push_back(size_key("world.hidden_dim", [](auto& c) -> auto& { return c.world.hidden_dim; }));
    k.push_back(size_key("world.embed_dim", [](auto& c) -> auto& { return c.world.embed_dim; }));
    k.push_back(size_key("world.num_attributes",
                         [](auto& c) -> auto& { return c.world.num_attributes; }));
    k.push_back(size_key("world.num_sources", [](auto& c) -> auto& { return c.world.num_sources; }));
    k.push_back(size_key("world.num_targets", [](auto& c) -> auto& { return c.world.num_targets; }));
    k.push_back(size_key("world.num_embedders",
                         [](auto& c) -> auto& { return c.world.num_embedders; }));
    k.push_back(real_key("world.embedder_correlation",
                         [](auto& c) -> auto& { return c.world.embedder_correlation; }));
    k.push_back(size_key("train.iterations", [](auto& c) -> auto& { return c.train.iterations; }));
    k.push_back(real_key("train.learning_rate",
                         [](auto& c) -> auto& { return c.train.learning_rate; }));
    k.push_back({"train.optimizer",
                 [](ExperimentConfig& c, std::string_view v) {
                   if (v == "adam") {
                     c.train.optimizer = OptimizerKind::Adam;
                   } else if (v == "sgd") {
                     c.train.optimizer = OptimizerKind::Sgd;
                   } else {
                     throw ConfigError("train.optimizer: expected adam or sgd, got '" +
                                       std::string(v) + "'");
                   }
                 },
                 [](const ExperimentConfig& c) {
                   return std::string(c.train.optimizer == OptimizerKind::Adam ? "adam" : "sgd");
                 }});
    k.push_back(real_key("train.beta1", [](auto& c) -> auto& { return c.train.beta1; }));
    k.push_back(real_key("train.beta2", [](auto& c) -> auto& { return c.train.beta2; }));
    k.push_back(real_key("train.epsilon", [](auto& c) -> auto& { return c.train.epsilon; }));
    k.push_back(real_key("train.alpha1", [](auto& c) -> auto& { return c.train.loss.alpha1; }));
    k.push_back(real_key("train.alpha2", [](auto& c) -> auto& { return c.train.loss.alpha2; }));
    k.push_back(real_key("train.c1", [](auto& c) -> auto& { return c.train.c1; }));
    k.push_back(real_key("train.c2", [](auto& c) -> auto& { return c.train.c2; }));
    k.push_back({"train.fixed_omega_stealthy",
                 [](ExperimentConfig& c, std::string_view v) {
                   const double w = parse_real("train.fixed_omega_stealthy", v);
                   c.train.fixed_omega = {w, 1.0 - w};
                 },
                 [](const ExperimentConfig& c) { return format_double(c.train.fixed_omega.stealthy); }});
    k.push_back({"train.embedders",
                 [](ExperimentConfig& c, std::string_view v) { c.train.train_embedders = split(v, ','); },
                 [](const ExperimentConfig& c) { return join(c.train.train_embedders, ","); }});
    k.push_back(real_key("eval.far", [](auto& c) -> auto& { return c.eval.far; }));
    k.push_back(size_key("eval.impostor_pairs",
                         [](auto& c) -> auto& { return c.eval.impostor_pairs; }));
    return k;
  }();
  return keys;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json tensor_to_json(const Tensor& t) {
  return json{{"shape", t.shape()}, {"data", t.values()}};
}

Tensor tensor_from_json(const json& j) {
  return Tensor(j.at("shape").get<std::vector<std::size_t>>(), j.at("data").get<Vec>());
}

double cell_to_double(const std::string& s) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("malformed number '" + s + "' in CSV");
  }
  return out;
}

const char* const kSchema = R"(# Output files and CSV columns

config.txt
  Canonical key = value snapshot of the experiment config. The first line
  is a comment carrying the config hash (FNV-1a 64 over the remaining lines).

metadata.json
  created_utc, tool, config_hash, seed, arms. The only file with a timestamp.

train_log_<arm>.csv  (one row per iteration)
  iteration             0-based iteration index
  source                source identity index
  target                target identity index
  adv_loss              adversarial loss averaged over training embedders
  stealthy_loss         stealthy loss over all vicinity vectors
  total_loss            omega_stealthy * stealthy_loss + omega_adversarial * adv_loss
  selected              updated attribute index; empty when every generator is updated
  omega_stealthy        trade-off weight applied to the stealthy gradient
  omega_adversarial     trade-off weight applied to the adversarial gradient
  grad_norm_stealthy    L2 norm of the stealthy gradient of the updated parameters
  grad_norm_adversarial L2 norm of the adversarial gradient of the updated parameters
  gain_<attribute>      marginal gain per attribute; empty when selection is off

checkpoint_<arm>.json
  arm, config_hash, generators[{attribute, updates, parameters[{name, shape, data}]}],
  optimizer[{steps, m[[...]], v[[...]]}] with moments in parameter order w1, b1, w2, b2.

eval_report.json
  config_hash, seed, far, impostor_pairs, calibration[{name, tau}],
  arms[report], baselines[report] where report is
  {arm, pair_count, mean_mse, mean_stealthy_loss, holdout_asr,
   embedders[{name, holdout, tau, asr}]}. ASR values are percentages.

eval_rows.csv  (one row per report and embedder; arms first, then baselines)
  arm, embedder, holdout (0/1), tau, asr, mse, stealthy_loss

attribute_frequency.csv  (arms with attribute selection only)
  arm, attribute_index, attribute, count, fraction

summary.csv  (one row per arm in declared order)
  arm, asr_<embedder> for each embedder, holdout_asr, mse, stealthy_loss
)";

}  // namespace

// ---------------------------------------------------------------------------
// Arms and config

const char* arm_label(Arm arm) {
  switch (arm) {
    case Arm::Full: return "full";
    case Arm::WithoutSelection: return "w/o-selection";
    case Arm::WithoutMoo: return "w/o-moo";
  }
  return "?";
}

const char* arm_slug(Arm arm) {
  switch (arm) {
    case Arm::Full: return "full";
    case Arm::WithoutSelection: return "wo_selection";
    case Arm::WithoutMoo: return "wo_moo";
  }
  return "?";
}

Arm parse_arm(std::string_view label) {
  for (Arm a : {Arm::Full, Arm::WithoutSelection, Arm::WithoutMoo}) {
    if (label == arm_label(a)) return a;
  }
  throw ConfigError("unknown arm '" + std::string(label) +
                    "' (expected full, w/o-selection or w/o-moo)");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& k : key_table()) n.push_back(k.name);
    n.emplace_back("output_dir");
    return n;
  }();
  return names;
}

void ExperimentConfig::validate() const {
  if (arms.empty()) throw ConfigError("arms must list at least one arm");
  for (std::size_t i = 0; i < arms.size(); ++i) {
    for (std::size_t k = i + 1; k < arms.size(); ++k) {
      if (arms[i] == arms[k]) {
        throw ConfigError(std::string("arm '") + arm_label(arms[i]) + "' listed twice");
      }
    }
  }
  world.validate();
  try {
    eval.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (Arm a : arms) arm_config(*this, a).validate();
  std::size_t held_out = world.num_embedders;
  for (const auto& name : train.train_embedders) {
    bool known = false;
    for (std::size_t k = 1; k <= world.num_embedders; ++k) {
      if (name == "fr" + std::to_string(k)) known = true;
    }
    if (!known) {
      throw ConfigError("train.embedders: unknown embedder '" + name + "' (world has fr1..fr" +
                        std::to_string(world.num_embedders) + ")");
    }
    --held_out;
  }
  if (held_out == 0) {
    throw ConfigError("train.embedders uses every embedder; at least one must be held out");
  }
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig config;
  std::vector<std::string> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      throw ConfigError(where + "duplicate key '" + key + "'");
    }
    seen.push_back(key);
    if (key == "output_dir") {
      if (value.empty()) throw ConfigError(where + "output_dir is empty");
      config.output_dir = std::string(value);
      continue;
    }
    const auto& keys = key_table();
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.name == key; });
    if (it == keys.end()) throw ConfigError(where + "unknown key '" + key + "'");
    try {
      it->set(config, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  config.validate();
  return config;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ExperimentConfig::serialize() const {
  std::string out;
  for (const auto& k : key_table()) out += k.name + " = " + k.get(*this) + "\n";
  return out;
}

std::string ExperimentConfig::hash() const {
  Fnv1a h;
  h.text(serialize());
  return hex64(h.digest());
}

TrainConfig arm_config(const ExperimentConfig& config, Arm arm) {
  TrainConfig tc = config.train;
  tc.seed = config.seed;
  tc.enable_selection = arm != Arm::WithoutSelection;
  tc.enable_moo = arm != Arm::WithoutMoo;
  return tc;
}

// ---------------------------------------------------------------------------
// Running

std::vector<EvalReport> baseline_reports(const World& world, const ExperimentConfig& config,
                                         const Calibration& calibration) {
  const TrainConfig tc = arm_config(config, Arm::Full);
  return {transfer_eval(world, initial_generators(world, tc), tc, calibration, "random"),
          transfer_eval(world, make_zero_generators(world), tc, calibration, "zero-noise")};
}

std::vector<ArmResult> run_arms(const World& world, const ExperimentConfig& config,
                                const Calibration& calibration, const RunOptions& options) {
  auto run_one = [&](Arm arm) {
    const TrainConfig tc = arm_config(config, arm);
    ArmResult r;
    r.arm = arm;
    r.training = train(world, tc);
    r.report = transfer_eval(world, r.training.generators, tc, calibration, arm_label(arm));
    return r;
  };
  std::vector<ArmResult> results;
  if (options.concurrent_arms) {
    std::vector<std::future<ArmResult>> pending;
    for (Arm a : config.arms) pending.push_back(std::async(std::launch::async, run_one, a));
    for (auto& f : pending) results.push_back(f.get());
  } else {
    for (Arm a : config.arms) results.push_back(run_one(a));
  }
  return results;
}

RunArtifacts run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const fs::path dir = config.output_dir;
  if (fs::exists(dir)) {
    throw ConfigError("output directory " + dir.string() + " already exists; refusing to overwrite");
  }

  // Compute everything before creating the directory so a numeric failure
  // leaves no partial run behind.
  const World world = make_world(config.world, config.seed);
  const Calibration calibration = calibrate(world, config.eval);
  const std::vector<ArmResult> results = run_arms(world, config, calibration, options);
  const std::vector<EvalReport> baselines = baseline_reports(world, config, calibration);

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());

  RunArtifacts art;
  art.output_dir = dir;
  art.config_hash = config.hash();

  art.config_snapshot = dir / "config.txt";
  write_file(art.config_snapshot, "# config_hash " + art.config_hash + "\n" + config.serialize());

  art.schema = dir / "schema.txt";
  write_file(art.schema, kSchema);

  std::vector<std::string> arm_labels;
  for (Arm a : config.arms) arm_labels.emplace_back(arm_label(a));

  art.metadata = dir / "metadata.json";
  write_file(art.metadata, json{{"created_utc", utc_timestamp()},
                                {"tool", "advattr 0.1.0"},
                                {"config_hash", art.config_hash},
                                {"seed", config.seed},
                                {"arms", arm_labels}}
                                   .dump(2) +
                               "\n");

  std::vector<EvalReport> arm_reports;
  for (const auto& r : results) {
    const std::string slug = arm_slug(r.arm);
    const fs::path log_path = dir / ("train_log_" + slug + ".csv");
    std::ostringstream log;
    write_train_log_csv(r.training.log, world.attributes, log);
    write_file(log_path, log.str());
    art.train_logs.push_back(log_path);

    const fs::path ckpt_path = dir / ("checkpoint_" + slug + ".json");
    const Checkpoint ckpt{arm_label(r.arm), art.config_hash, r.training.generators,
                          r.training.optimizer};
    write_file(ckpt_path, checkpoint_to_json(ckpt).dump() + "\n");
    art.checkpoints.push_back(ckpt_path);
    arm_reports.push_back(r.report);
  }

  json cal = json::array();
  for (std::size_t i = 0; i < calibration.names.size(); ++i) {
    cal.push_back({{"name", calibration.names[i]}, {"tau", calibration.tau[i]}});
  }
  json arms_json = json::array();
  for (const auto& r : arm_reports) arms_json.push_back(report_to_json(r));
  json base_json = json::array();
  for (const auto& r : baselines) base_json.push_back(report_to_json(r));
  art.eval_report = dir / "eval_report.json";
  write_file(art.eval_report, json{{"config_hash", art.config_hash},
                                   {"seed", config.seed},
                                   {"far", config.eval.far},
                                   {"impostor_pairs", config.eval.impostor_pairs},
                                   {"calibration", cal},
                                   {"arms", arms_json},
                                   {"baselines", base_json}}
                                      .dump(2) +
                                  "\n");

  art.eval_rows = dir / "eval_rows.csv";
  {
    std::string out = "arm,embedder,holdout,tau,asr,mse,stealthy_loss\n";
    auto rows = [&](const std::vector<EvalReport>& reports) {
      for (const auto& r : reports) {
        for (const auto& e : r.embedders) {
          out += r.arm + "," + e.name + "," + (e.holdout ? "1" : "0") + "," + format_double(e.tau) +
                 "," + format_double(e.asr) + "," + format_double(r.mean_mse) + "," +
                 format_double(r.mean_stealthy_loss) + "\n";
        }
      }
    };
    rows(arm_reports);
    rows(baselines);
    write_file(art.eval_rows, out);
  }

  art.attribute_frequency = dir / "attribute_frequency.csv";
  {
    std::string out = "arm,attribute_index,attribute,count,fraction\n";
    for (const auto& r : results) {
      if (!arm_config(config, r.arm).enable_selection) continue;
      const FrequencyHistogram hist = frequency_histogram(r.training.log.selection_log());
      for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        out += std::string(arm_label(r.arm)) + "," + std::to_string(i) + "," +
               world.attributes.names[i] + "," + std::to_string(hist.counts[i]) + "," +
               format_double(hist.fractions[i]) + "\n";
      }
    }
    write_file(art.attribute_frequency, out);
  }

  art.summary = dir / "summary.csv";
  {
    std::ostringstream out;
    write_summary_csv(emit_summary(arm_reports), out);
    write_file(art.summary, out.str());
  }
  return art;
}

// ---------------------------------------------------------------------------
// Summary table

SummaryTable emit_summary(std::span<const EvalReport> reports) {
  if (reports.empty()) throw std::invalid_argument("emit_summary needs at least one report");
  SummaryTable table;
  table.columns.emplace_back("arm");
  for (const auto& e : reports.front().embedders) table.columns.push_back("asr_" + e.name);
  table.columns.insert(table.columns.end(), {"holdout_asr", "mse", "stealthy_loss"});
  for (const auto& r : reports) {
    if (r.embedders.size() != reports.front().embedders.size()) {
      throw std::invalid_argument("report '" + r.arm + "' has a different embedder set");
    }
    std::vector<double> row;
    for (std::size_t i = 0; i < r.embedders.size(); ++i) {
      if (r.embedders[i].name != reports.front().embedders[i].name) {
        throw std::invalid_argument("report '" + r.arm + "' has a different embedder set");
      }
      row.push_back(r.embedders[i].asr);
    }
    row.insert(row.end(), {r.holdout_asr(), r.mean_mse, r.mean_stealthy_loss});
    table.arms.push_back(r.arm);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_summary_csv(const SummaryTable& table, std::ostream& out) {
  out << join(table.columns, ",") << "\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    out << table.arms[i];
    for (double v : table.rows[i]) out << "," << format_double(v);
    out << "\n";
  }
}

SummaryTable read_summary_csv(std::istream& in) {
  const CsvTable csv = read_csv(in);
  if (csv.header.empty() || csv.header.front() != "arm") {
    throw std::runtime_error("summary CSV must start with an 'arm' column");
  }
  SummaryTable table;
  table.columns = csv.header;
  for (const auto& row : csv.rows) {
    table.arms.push_back(row.front());
    std::vector<double> values;
    for (std::size_t i = 1; i < row.size(); ++i) values.push_back(cell_to_double(row[i]));
    table.rows.push_back(std::move(values));
  }
  return table;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split(line, ',');
    if (first) {
      table.header = std::move(cells);
      first = false;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw std::runtime_error("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                               std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (first) throw std::runtime_error("CSV is empty");
  return table;
}

// ---------------------------------------------------------------------------
// JSON

json report_to_json(const EvalReport& report) {
  json embedders = json::array();
  for (const auto& e : report.embedders) {
    embedders.push_back({{"name", e.name}, {"holdout", e.holdout}, {"tau", e.tau}, {"asr", e.asr}});
  }
  return json{{"arm", report.arm},
              {"pair_count", report.pair_count},
              {"mean_mse", report.mean_mse},
              {"mean_stealthy_loss", report.mean_stealthy_loss},
              {"holdout_asr", report.holdout_asr()},
              {"embedders", embedders}};
}

EvalReport report_from_json(const json& j) {
  EvalReport r;
  r.arm = j.at("arm").get<std::string>();
  r.pair_count = j.at("pair_count").get<std::size_t>();
  r.mean_mse = j.at("mean_mse").get<double>();
  r.mean_stealthy_loss = j.at("mean_stealthy_loss").get<double>();
  for (const auto& e : j.at("embedders")) {
    r.embedders.push_back({e.at("name").get<std::string>(), e.at("holdout").get<bool>(),
                           e.at("tau").get<double>(), e.at("asr").get<double>()});
  }
  return r;
}

std::vector<EvalReport> load_arm_reports(const fs::path& eval_report) {
  std::ifstream in(eval_report);
  if (!in) throw std::runtime_error("cannot read " + eval_report.string());
  const json j = json::parse(in);
  std::vector<EvalReport> out;
  for (const auto& r : j.at("arms")) out.push_back(report_from_json(r));
  return out;
}

json checkpoint_to_json(const Checkpoint& ckpt) {
  static const char* const kParamNames[] = {"w1", "b1", "w2", "b2"};
  json gens = json::array();
  for (const auto& g : ckpt.generators) {
    json params = json::array();
    const auto ps = g.parameters();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      json p = tensor_to_json(ps[i]);
      p["name"] = kParamNames[i];
      params.push_back(std::move(p));
    }
    gens.push_back({{"attribute", g.attribute()}, {"updates", g.update_count()}, {"parameters", params}});
  }
  json opt = json::array();
  for (const auto& a : ckpt.optimizer.per_generator) {
    opt.push_back({{"steps", a.steps}, {"m", a.m}, {"v", a.v}});
  }
  return json{{"arm", ckpt.arm}, {"config_hash", ckpt.config_hash}, {"generators", gens},
              {"optimizer", opt}};
}

Checkpoint checkpoint_from_json(const json& j) {
  Checkpoint c;
  c.arm = j.at("arm").get<std::string>();
  c.config_hash = j.at("config_hash").get<std::string>();
  for (const auto& g : j.at("generators")) {
    std::vector<Tensor> params;
    for (const auto& p : g.at("parameters")) params.push_back(tensor_from_json(p));
    if (params.size() != 4 || params[0].rank() != 2 || params[2].rank() != 2) {
      throw std::runtime_error("checkpoint generator needs w1, b1, w2, b2");
    }
    NoiseGenerator gen = NoiseGenerator::zeros(g.at("attribute").get<std::size_t>(),
                                               params[0].shape()[1], params[2].shape()[0]);
    gen.restore(std::move(params), g.at("updates").get<std::size_t>());
    c.generators.push_back(std::move(gen));
  }
  for (const auto& a : j.at("optimizer")) {
    AdamState s;
    s.steps = a.at("steps").get<std::size_t>();
    s.m = a.at("m").get<std::vector<Vec>>();
    s.v = a.at("v").get<std::vector<Vec>>();
    c.optimizer.per_generator.push_back(std::move(s));
  }
  return c;
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return checkpoint_from_json(json::parse(in));
}

// ---------------------------------------------------------------------------
// Train log

void write_train_log_csv(const TrainLog& log, const AttributeDictionary& attrs, std::ostream& out) {
  out << "iteration,source,target,adv_loss,stealthy_loss,total_loss,selected,omega_stealthy,"
         "omega_adversarial,grad_norm_stealthy,grad_norm_adversarial";
  for (const auto& name : attrs.names) out << ",gain_" << name;
  out << "\n";
  for (const auto& r : log.records) {
    out << r.iteration << ',' << r.source << ',' << r.target << ',' << format_double(r.adv_loss)
        << ',' << format_double(r.stealthy_loss) << ',' << format_double(r.total_loss) << ',';
    if (r.selected) out << *r.selected;
    out << ',' << format_double(r.omega.stealthy) << ',' << format_double(r.omega.adversarial)
        << ',' << format_double(r.grad_norm_stealthy) << ','
        << format_double(r.grad_norm_adversarial);
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      out << ',';
      if (i < r.gains.size()) out << format_double(r.gains[i]);
    }
    out << "\n";
  }
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

}  // namespace advattr
