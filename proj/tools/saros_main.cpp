// Command-line front end: gen / inspect-blocks / train / eval.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "saros/baselines.hpp"
#include "saros/blocking.hpp"
#include "saros/errors.hpp"
#include "saros/eval.hpp"
#include "saros/interactions.hpp"
#include "saros/model.hpp"
#include "saros/synthgen.hpp"
#include "saros/trainers.hpp"

namespace {

using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitData = 4;
constexpr int kExitConfig = 5;

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw saros::IoError("cannot open " + path + " for digest");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Config files are flat: either key=value lines or a single JSON object.
// Command-line flags always win over file values.
class FlatConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return {};  // config files are read, never emitted
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::string text((std::istreambuf_iterator<char>(input)),
                     std::istreambuf_iterator<char>());
    std::vector<CLI::ConfigItem> items;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      json j = json::parse(text);  // throws on malformed JSON
      for (auto it = j.begin(); it != j.end(); ++it) {
        CLI::ConfigItem item;
        item.name = it.key();
        if (it.value().is_string())
          item.inputs.push_back(it.value().get<std::string>());
        else
          item.inputs.push_back(it.value().dump());
        items.push_back(std::move(item));
      }
      return items;
    }
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto start = line.find_first_not_of(" \t");
      if (start == std::string::npos || line[start] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw CLI::ConversionError("config line is not key=value: " + line);
      CLI::ConfigItem item;
      item.name = CLI::detail::trim_copy(line.substr(0, eq));
      item.inputs.push_back(CLI::detail::trim_copy(line.substr(eq + 1)));
      items.push_back(std::move(item));
    }
    return items;
  }
};

// Values from a config file fill in exactly the options the command line
// left untouched, so flags always win.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw saros::IoError("cannot open config file: " + path);
  const auto items = FlatConfig{}.from_config(in);
  for (const auto& item : items) {
    CLI::Option* opt = cmd->get_option_no_throw("--" + item.name);
    if (opt == nullptr)
      throw saros::ConfigError("unknown config key: " + item.name);
    if (opt->count() > 0) continue;
    for (const auto& value : item.inputs) opt->add_result(value);
    opt->run_callback();
  }
}

struct IngestOptions {
  std::string input;
  std::string separator = "\t";
  std::size_t user_col = 0, item_col = 1, feedback_col = 2, timestamp_col = 3;
  double max_bad_ratio = 0.1;
  double pos_threshold = 0.5;
};

void add_ingest_options(CLI::App* cmd, IngestOptions& opt) {
  cmd->add_option("--input", opt.input, "interaction log (TSV/CSV, optionally gzip)")
      ->required();
  cmd->add_option("--sep", opt.separator, "field separator (default tab)");
  cmd->add_option("--user-col", opt.user_col, "user column index");
  cmd->add_option("--item-col", opt.item_col, "item column index");
  cmd->add_option("--feedback-col", opt.feedback_col, "feedback column index");
  cmd->add_option("--ts-col", opt.timestamp_col, "timestamp column index");
  cmd->add_option("--max-bad-ratio", opt.max_bad_ratio,
                  "abort when the malformed-line ratio exceeds this");
  cmd->add_option("--pos-threshold", opt.pos_threshold,
                  "feedback strictly above this counts as a click");
}

saros::Dataset ingest(const IngestOptions& opt) {
  saros::ColumnSchema schema;
  schema.user_col = opt.user_col;
  schema.item_col = opt.item_col;
  schema.feedback_col = opt.feedback_col;
  schema.timestamp_col = opt.timestamp_col;
  schema.separator = opt.separator;
  auto parsed = saros::parse_tsv_file(opt.input, schema, opt.max_bad_ratio);
  if (!parsed.errors.empty()) {
    std::cerr << "warning: " << parsed.errors.size() << " malformed lines, first at line "
              << parsed.errors.front().line << " (" << parsed.errors.front().message
              << ")\n";
  }
  return saros::build_index(saros::binarize(parsed.records, opt.pos_threshold));
}

struct TrainOptions {
  IngestOptions ingest;
  std::string algo = "saros-b";
  std::uint32_t dim = 16;
  double lr = 0.05;
  std::string lr_policy = "const";
  double momentum = 0.0;
  double reg = 0.0;
  std::optional<std::uint64_t> b_explicit, upper_explicit;
  double b_quantile = 0.1, upper_quantile = 0.9;
  std::uint32_t epochs = 1;
  std::uint64_t seed = 0;
  double init_scale = 0.01;
  double test_fraction = 0.2;
  std::vector<std::size_t> ks = {5, 10};
  std::uint64_t bpr_steps = 0;
  bool no_shuffle = false;
  std::string trace_path;
  std::string model_out = "model.bin";
  std::string report_json = "metrics.json";
  std::string report_csv = "metrics.csv";
  std::string manifest_out = "manifest.json";
  std::string dataset_name = "dataset";
};

saros::TrainConfig to_train_config(const TrainOptions& opt) {
  saros::TrainConfig config;
  if (opt.algo == "saros-b")
    config.algorithm = saros::Algorithm::SarosB;
  else if (opt.algo == "saros-m")
    config.algorithm = saros::Algorithm::SarosM;
  else if (opt.algo == "bpr")
    config.algorithm = saros::Algorithm::Bpr;
  else if (opt.algo == "mostpop")
    config.algorithm = saros::Algorithm::MostPop;
  else
    throw saros::ConfigError("unknown algorithm: " + opt.algo);
  config.dim = opt.dim;
  config.step_eta = opt.lr;
  if (opt.lr_policy == "const")
    config.step_policy = saros::StepPolicy::Constant;
  else if (opt.lr_policy == "c-sqrt")
    config.step_policy = saros::StepPolicy::COverSqrtN;
  else
    throw saros::ConfigError("unknown lr policy: " + opt.lr_policy);
  config.momentum_gamma = opt.momentum;
  config.reg_lambda = opt.reg;
  if (opt.b_explicit || opt.upper_explicit) {
    saros::Thresholds th;
    th.lower = opt.b_explicit.value_or(1);
    th.upper = opt.upper_explicit.value_or(UINT64_MAX);
    config.explicit_thresholds = th;
  }
  config.threshold_q_lo = opt.b_quantile;
  config.threshold_q_hi = opt.upper_quantile;
  config.epochs = opt.epochs;
  config.seed = opt.seed;
  config.shuffle_users = !opt.no_shuffle;
  if (opt.bpr_steps > 0) config.bpr_steps = opt.bpr_steps;
  return config;
}

json options_to_json(const TrainOptions& opt) {
  json j;
  j["input"] = opt.ingest.input;
  j["sep"] = opt.ingest.separator;
  j["pos_threshold"] = opt.ingest.pos_threshold;
  j["algo"] = opt.algo;
  j["dim"] = opt.dim;
  j["lr"] = opt.lr;
  j["lr_policy"] = opt.lr_policy;
  j["momentum"] = opt.momentum;
  j["reg"] = opt.reg;
  if (opt.b_explicit) j["b"] = *opt.b_explicit;
  if (opt.upper_explicit) j["B"] = *opt.upper_explicit;
  j["b_quantile"] = opt.b_quantile;
  j["B_quantile"] = opt.upper_quantile;
  j["epochs"] = opt.epochs;
  j["seed"] = opt.seed;
  j["init_scale"] = opt.init_scale;
  j["test_fraction"] = opt.test_fraction;
  j["k"] = opt.ks;
  j["steps"] = opt.bpr_steps;
  j["no_shuffle"] = opt.no_shuffle;
  j["model_out"] = opt.model_out;
  j["report_json"] = opt.report_json;
  j["report_csv"] = opt.report_csv;
  j["dataset_name"] = opt.dataset_name;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw saros::IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw saros::IoError("write failed: " + path);
}

void write_trace(const std::string& path, const saros::Diagnostics& diag,
                 const saros::Dataset& train) {
  std::ofstream out(path);
  if (!out) throw saros::IoError("cannot open " + path + " for writing");
  for (const auto& rec : diag.trace) {
    json j;
    j["epoch"] = rec.epoch;
    j["user"] = train.user_ids[rec.user];
    j["block"] = rec.block_index;
    j["grad_sq_norm"] = rec.grad_sq_norm;
    j["loss"] = rec.loss;
    out << j.dump() << '\n';
  }
}

int run_train(const TrainOptions& opt) {
  const saros::TrainConfig config = to_train_config(opt);
  if (opt.momentum != 0.0 && config.algorithm != saros::Algorithm::SarosM)
    std::cerr << "warning: --momentum is ignored for --algo " << opt.algo << "\n";

  const json resolved = options_to_json(opt);
  std::cout << "config: " << resolved.dump() << "\n";

  const saros::Dataset full = ingest(opt.ingest);
  auto [train, test] = saros::temporal_split(full, opt.test_fraction);
  const saros::InitSpec init{opt.seed, opt.init_scale};

  saros::MetricsReport report;
  if (config.algorithm == saros::Algorithm::MostPop) {
    const auto pop = saros::train_mostpop(train);
    saros::save_popularity(pop, train, opt.model_out);
    saros::PopularityScorer scorer(pop, train.n_users());
    report = saros::evaluate(scorer, train, test, opt.ks);
  } else {
    saros::LatentModel model(1, 1, 1);
    if (config.algorithm == saros::Algorithm::Bpr) {
      model = saros::train_bpr(train, config, init);
    } else {
      auto result = config.algorithm == saros::Algorithm::SarosB
                        ? saros::train_saros_b(train, config, init)
                        : saros::train_saros_m(train, config, init);
      model = std::move(result.model);
      if (!opt.trace_path.empty())
        write_trace(opt.trace_path, result.diagnostics, train);
      if (config.algorithm == saros::Algorithm::SarosB)
        std::cout << "thresholds: b=" << result.diagnostics.resolved_thresholds.lower
                  << " B=" << result.diagnostics.resolved_thresholds.upper
                  << " discarded_below=" << result.diagnostics.users_discarded_below
                  << " discarded_above=" << result.diagnostics.users_discarded_above
                  << "\n";
    }
    saros::save_model(model, opt.model_out);
    saros::FactorScorer scorer(model);
    report = saros::evaluate(scorer, train, test, opt.ks);
  }

  write_text(opt.report_json, saros::report_to_json(report));
  write_text(opt.report_csv,
             saros::report_to_csv(report, opt.dataset_name, opt.algo));

  json manifest;
  manifest["command"] = "train";
  manifest["config"] = resolved;
  manifest["inputs"][opt.ingest.input] = hex64(fnv1a64_file(opt.ingest.input));
  write_text(opt.manifest_out, manifest.dump(2) + "\n");

  std::cout << saros::report_to_csv(report, opt.dataset_name, opt.algo);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequential block-wise pairwise ranking toolkit"};
  app.require_subcommand(1);

  // --- gen ---
  auto* gen = app.add_subcommand("gen", "write a planted-factor synthetic TSV");
  saros::SynthSpec synth;
  saros::BotSpec bots;
  std::string gen_out = "synthetic.tsv";
  gen->add_option("--users", synth.n_users, "number of organic users");
  gen->add_option("--items", synth.n_items, "number of items");
  gen->add_option("--k-true", synth.k_true, "planted latent dimension");
  gen->add_option("--events-per-user", synth.interactions_per_user,
                  "presented items per user");
  gen->add_option("--noise", synth.click_noise, "label flip probability");
  gen->add_option("--seed", synth.seed, "generator seed");
  gen->add_option("--bots", bots.n_bots, "number of injected bot users");
  gen->add_option("--bot-clicks", bots.clicks_per_bot, "clicks per bot");
  gen->add_option("--bot-targets", bots.target_items,
                  "target item ids for the bots");
  gen->add_option("--bot-seed", bots.seed, "bot stream seed");
  gen->add_option("--out", gen_out, "output TSV path");

  // --- inspect-blocks ---
  auto* inspect = app.add_subcommand(
      "inspect-blocks", "block-count histogram and estimated thresholds");
  IngestOptions inspect_ingest;
  double iq_lo = 0.1, iq_hi = 0.9;
  std::string inspect_out;
  add_ingest_options(inspect, inspect_ingest);
  inspect->add_option("--b-quantile", iq_lo, "lower threshold quantile");
  inspect->add_option("--B-quantile", iq_hi, "upper threshold quantile");
  inspect->add_option("--out", inspect_out, "write JSON here instead of stdout");

  // --- train ---
  auto* train = app.add_subcommand("train", "train a model and evaluate it");
  TrainOptions topt;
  add_ingest_options(train, topt.ingest);
  train->add_option("--algo", topt.algo, "saros-b | saros-m | bpr | mostpop")
      ->check(CLI::IsMember({"saros-b", "saros-m", "bpr", "mostpop"}));
  train->add_option("--dim", topt.dim, "latent dimension");
  train->add_option("--lr", topt.lr, "step size (eta / alpha / c)");
  train->add_option("--lr-policy", topt.lr_policy, "const | c-sqrt")
      ->check(CLI::IsMember({"const", "c-sqrt"}));
  train->add_option("--momentum", topt.momentum, "momentum coefficient (saros-m)");
  train->add_option("--reg", topt.reg, "L2 regularization weight");
  train->add_option("--b", topt.b_explicit, "explicit lower block-count threshold");
  train->add_option("--B", topt.upper_explicit, "explicit upper block-count threshold");
  train->add_option("--b-quantile", topt.b_quantile, "lower threshold quantile");
  train->add_option("--B-quantile", topt.upper_quantile, "upper threshold quantile");
  train->add_option("--epochs", topt.epochs, "training epochs");
  train->add_option("--seed", topt.seed, "run seed");
  train->add_option("--init-scale", topt.init_scale, "half-width of uniform init");
  train->add_option("--test-fraction", topt.test_fraction,
                    "per-user chronological test share");
  train->add_option("--k", topt.ks, "metric cutoffs")->delimiter(',');
  train->add_option("--steps", topt.bpr_steps,
                    "bpr sampling steps (0: epochs x clicked events)");
  train->add_flag("--no-shuffle", topt.no_shuffle,
                  "visit users in id order instead of a seeded shuffle");
  train->add_option("--trace", topt.trace_path, "JSON-lines diagnostics path");
  train->add_option("--model-out", topt.model_out, "model output path");
  train->add_option("--report-json", topt.report_json, "metrics JSON path");
  train->add_option("--report-csv", topt.report_csv, "metrics CSV path");
  train->add_option("--manifest", topt.manifest_out, "run manifest path");
  train->add_option("--dataset-name", topt.dataset_name, "label for the CSV row");

  // --- eval ---
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved model");
  IngestOptions eval_ingest;
  std::string eval_model;
  double eval_fraction = 0.2;
  std::vector<std::size_t> eval_ks = {5, 10};
  std::string eval_report_json = "metrics.json";
  std::string eval_report_csv = "metrics.csv";
  std::string eval_dataset_name = "dataset";
  std::string eval_algo_name = "model";
  add_ingest_options(eval_cmd, eval_ingest);
  eval_cmd->add_option("--model", eval_model, "binary model file")->required();
  eval_cmd->add_option("--test-fraction", eval_fraction,
                       "per-user chronological test share");
  eval_cmd->add_option("--k", eval_ks, "metric cutoffs")->delimiter(',');
  eval_cmd->add_option("--report-json", eval_report_json, "metrics JSON path");
  eval_cmd->add_option("--report-csv", eval_report_csv, "metrics CSV path");
  eval_cmd->add_option("--dataset-name", eval_dataset_name, "label for the CSV row");
  eval_cmd->add_option("--algo-name", eval_algo_name, "label for the CSV row");

  std::string config_path;
  for (CLI::App* cmd : {gen, inspect, train, eval_cmd})
    cmd->add_option("--config", config_path,
                    "flat key=value or JSON config file; flags win");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (!config_path.empty())
      for (CLI::App* cmd : {gen, inspect, train, eval_cmd})
        if (cmd->parsed()) apply_config_file(cmd, config_path);
    if (gen->parsed()) {
      auto planted = saros::generate_planted(synth);
      const saros::Dataset data =
          bots.n_bots > 0 ? saros::inject_bots(planted.data, bots) : planted.data;
      saros::write_tsv(data, gen_out);
      std::cout << "wrote " << data.n_events() << " events for "
                << data.n_users() << " users to " << gen_out << "\n";
      return 0;
    }
    if (inspect->parsed()) {
      const saros::Dataset data = ingest(inspect_ingest);
      const auto counts = saros::block_counts(data);
      const auto th = saros::estimate_thresholds(counts, iq_lo, iq_hi);
      std::map<std::uint64_t, std::uint64_t> histogram;
      for (std::uint64_t c : counts) ++histogram[c];
      json j;
      j["histogram"] = json::object();
      for (const auto& [count, users] : histogram)
        j["histogram"][std::to_string(count)] = users;
      j["b"] = th.lower;
      j["B"] = th.upper;
      j["users"] = counts.size();
      const std::string text = j.dump(2) + "\n";
      if (inspect_out.empty())
        std::cout << text;
      else
        write_text(inspect_out, text);
      return 0;
    }
    if (train->parsed()) return run_train(topt);
    if (eval_cmd->parsed()) {
      const saros::Dataset full = ingest(eval_ingest);
      auto [train_ds, test_ds] = saros::temporal_split(full, eval_fraction);
      const saros::LatentModel model = saros::load_model(eval_model);
      if (model.n_users() != full.n_users() || model.n_items() != full.n_items())
        throw saros::DimensionMismatchError(
            "model shape does not match the dataset vocabularies");
      saros::FactorScorer scorer(model);
      const auto report = saros::evaluate(scorer, train_ds, test_ds, eval_ks);
      write_text(eval_report_json, saros::report_to_json(report));
      write_text(eval_report_csv, saros::report_to_csv(report, eval_dataset_name,
                                                       eval_algo_name));
      std::cout << saros::report_to_csv(report, eval_dataset_name, eval_algo_name);
      return 0;
    }
  } catch (const saros::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const saros::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const saros::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
