#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "liefm/checkpoint.hpp"
#include "liefm/eval.hpp"
#include "liefm/selfcheck.hpp"
#include "liefm/training.hpp"
#include "liefm/trajectory_io.hpp"

namespace liefm::cli {

namespace fs = std::filesystem;

namespace {

struct FlowOptions {
  std::string checkpoint;
  std::string group;
  std::string source = "hline";
  int n = 256;
  int steps = 100;
  std::uint64_t seed = 0;
  std::string out_dir = "runs/flow";
};

struct EvalOptions {
  std::string input;
  std::string reference;
  std::string checkpoint;
  std::string group;
  std::string source = "hline";
  std::string target = "vline";
  int n = 256;
  int steps = 100;
  std::uint64_t seed = 0;
  int permutations = 0;
  std::string out_dir;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Flat `key = value` file; '#' and ';' start comments.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("--config: cannot read '" + path + "'");
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config " + path + ": expected key = value", line_no);
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    // An empty value leaves the flag at its default.
    if (!value.empty()) entries.emplace_back(trim(line.substr(0, eq)), value);
  }
  return entries;
}

std::string config_path_from(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

std::set<std::string> long_names(const CLI::App& app) {
  std::set<std::string> names;
  for (const CLI::Option* opt : app.get_options())
    for (const auto& n : opt->get_lnames()) names.insert(n);
  return names;
}

/// Values of every long option after parsing (defaults for unset ones).
std::string resolved_config(const CLI::App& app) {
  std::ostringstream out;
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
      if (value == "{}") value.clear();
    }
    out << name << " = " << value << '\n';
  }
  return out.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::string group_check(const std::string& id) {
  try {
    make_group(id);
    return {};
  } catch (const UsageError& e) {
    return e.what();
  }
}

SampleBatch read_endpoints(const std::string& path, const Group& group) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read trajectory file " + path);
  try {
    return trajectory_endpoints(read_trajectories(in, group));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

int cmd_train(const TrainConfig& config, const CLI::App& sub, const std::string& out_dir, int log_every,
              std::ostream& out) {
  TrainConfig cfg = config;
  const fs::path dir(out_dir);
  ensure_dir(dir);
  cfg.checkpoint_path = dir / "checkpoint.json";
  cfg.loss_log_path = dir / "loss.csv";
  write_text(dir / "resolved_config.ini", resolved_config(sub));
  const auto on_step = [&](int step, double loss) {
    if (log_every > 0 && (step % log_every == 0 || step + 1 == cfg.steps)) {
      out << "step " << step << "  loss " << loss << '\n';
    }
  };
  train(cfg, on_step);
  out << "wrote " << cfg.checkpoint_path.string() << " and " << cfg.loss_log_path.string() << '\n';
  return 0;
}

std::shared_ptr<const Group> checkpoint_group(const Checkpoint& ck, const std::string& requested) {
  if (!requested.empty() && requested != ck.group) {
    throw UsageError("--group " + requested + " does not match checkpoint group " + ck.group);
  }
  auto group = make_group(ck.group);
  ck.check_compatible(*group);
  return group;
}

int cmd_flow(const FlowOptions& o, const CLI::App& sub, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(o.checkpoint);
  const auto group = checkpoint_group(ck, o.group);
  const Distribution source = make_distribution(*group, o.source);
  Rng rng = Rng::stream(o.seed, "flow-source");
  const SampleBatch starts = source.sample(o.n, rng);

  const VectorField field = network_field(*group, ck.net);
  std::vector<std::vector<GroupElement>> trajectories;
  for (const auto& g0 : starts.elements) trajectories.push_back(integrate_field(*group, field, g0, o.steps));

  const fs::path dir(o.out_dir);
  ensure_dir(dir);
  write_text(dir / "resolved_config.ini", resolved_config(sub));
  std::ofstream csv(dir / "trajectories.csv", std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + (dir / "trajectories.csv").string());
  write_trajectories(csv, *group, trajectories);
  out << "wrote " << (dir / "trajectories.csv").string() << " (" << o.n << " samples x " << (o.steps + 1)
      << " rows)\n";
  return 0;
}

int cmd_eval(const EvalOptions& o, const CLI::App& sub, std::ostream& out) {
  if (o.input.empty() == o.checkpoint.empty()) {
    throw UsageError("eval needs exactly one of --input <trajectories.csv> or --checkpoint <file>");
  }
  std::shared_ptr<const Group> group;
  SampleBatch generated;
  SampleBatch reference;
  std::optional<FlowResult> flowed;

  if (!o.input.empty()) {
    if (o.group.empty()) throw UsageError("--group is required with --input");
    group = make_group(o.group);
    generated = read_endpoints(o.input, *group);
    if (!o.reference.empty()) {
      reference = read_endpoints(o.reference, *group);
    } else {
      Rng rng = Rng::stream(o.seed, "eval-target");
      reference = make_distribution(*group, o.target).sample(static_cast<int>(generated.size()), rng);
    }
  } else {
    const Checkpoint ck = load_checkpoint(o.checkpoint);
    group = checkpoint_group(ck, o.group);
    Rng rng = Rng::stream(o.seed, "eval-flow");
    flowed = flow_and_eval(*group, ck.net, make_distribution(*group, o.source), make_distribution(*group, o.target),
                           o.steps, o.n, rng);
    generated = flowed->endpoints;
    reference = flowed->reference;
  }

  const EvalReport report = flowed ? flowed->report : two_sample_metrics(*group, generated, reference);
  nlohmann::json doc = nlohmann::json::parse(report.to_json());
  doc["group"] = group->name();
  if (flowed) doc["trajectory_defect"] = flowed->trajectory_defect;
  if (o.permutations > 0) {
    Rng rng = Rng::stream(o.seed, "eval-permutation");
    const PermutationTest test = mmd_permutation_test(*group, generated, reference, o.permutations, rng);
    doc["permutation_test"] = {{"permutations", o.permutations},
                               {"null_q95", test.quantile(0.95)},
                               {"null_q99", test.quantile(0.99)},
                               {"p_value", test.p_value()}};
  }
  const std::string text = doc.dump(2);
  out << text << '\n';
  if (!o.out_dir.empty()) {
    const fs::path dir(o.out_dir);
    ensure_dir(dir);
    write_text(dir / "report.json", text + "\n");
    write_text(dir / "resolved_config.ini", resolved_config(sub));
    if (flowed) {
      std::ofstream csv(dir / "trajectories.csv", std::ios::binary);
      write_trajectories(csv, *group, flowed->trajectories);
    }
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Flow matching on Lie groups", "liefm"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_file;

  // train
  TrainConfig train_cfg;
  std::string train_out = "runs/train";
  int log_every = 1000;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a vector field with conditional flow matching");
  train_cmd->add_option("--config", config_file, "Flat key = value file with defaults for these flags");
  train_cmd->add_option("--group", train_cfg.group, "r<d>, se2, so3, or a product such as se2xr2")
      ->check(CLI::Validator(group_check, "GROUP"));
  train_cmd->add_option("--source", train_cfg.source, "Source distribution spec");
  train_cmd->add_option("--target", train_cfg.target, "Target distribution spec");
  train_cmd->add_option("--steps", train_cfg.steps, "Optimizer steps")->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch", train_cfg.batch, "Batch size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", train_cfg.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train_cfg.seed, "Root random seed");
  train_cmd->add_option("--epsilon", train_cfg.epsilon, "Training times are drawn from U[0, 1 - epsilon]")
      ->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--width", train_cfg.width, "Hidden layer width")->check(CLI::PositiveNumber);
  train_cmd->add_option("--hidden-layers", train_cfg.hidden_layers, "Number of hidden layers")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--metric-weights", train_cfg.metric_weights, "Left-invariant metric weights (comma list)")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  train_cmd->add_option("--log-every", log_every, "Print the loss every N steps (0 = quiet)");
  train_cmd->add_option("--out", train_out, "Output directory");

  // flow
  FlowOptions flow;
  CLI::App* flow_cmd = app.add_subcommand("flow", "Integrate source samples through a trained field");
  flow_cmd->add_option("--config", config_file, "Flat key = value file with defaults for these flags");
  flow_cmd->add_option("--checkpoint", flow.checkpoint, "Checkpoint written by train")->required();
  flow_cmd->add_option("--group", flow.group, "Expected group (must match the checkpoint)");
  flow_cmd->add_option("--source", flow.source, "Source distribution spec");
  flow_cmd->add_option("--n", flow.n, "Number of samples")->check(CLI::PositiveNumber);
  flow_cmd->add_option("--steps", flow.steps, "Lie-Euler steps")->check(CLI::PositiveNumber);
  flow_cmd->add_option("--seed", flow.seed, "Root random seed");
  flow_cmd->add_option("--out", flow.out_dir, "Output directory");

  // eval
  EvalOptions ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Two-sample metrics of generated samples against a target");
  eval_cmd->add_option("--config", config_file, "Flat key = value file with defaults for these flags");
  eval_cmd->add_option("--input", ev.input, "Trajectory CSV; its last step per sample is evaluated");
  eval_cmd->add_option("--reference", ev.reference, "Trajectory CSV used as the reference sample");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint to flow and evaluate");
  eval_cmd->add_option("--group", ev.group, "Group of the samples");
  eval_cmd->add_option("--source", ev.source, "Source distribution spec (checkpoint mode)");
  eval_cmd->add_option("--target", ev.target, "Target distribution spec");
  eval_cmd->add_option("--n", ev.n, "Number of samples (checkpoint mode)")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--steps", ev.steps, "Lie-Euler steps (checkpoint mode)")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", ev.seed, "Root random seed");
  eval_cmd->add_option("--permutations", ev.permutations, "Permutation-test size (0 = skip)")
      ->check(CLI::NonNegativeNumber);
  eval_cmd->add_option("--out", ev.out_dir, "Directory for report.json");

  // selfcheck
  std::string fault;
  CLI::App* self_cmd = app.add_subcommand("selfcheck", "Run the fast property checks");
  self_cmd->add_option("--config", config_file, "Flat key = value file with defaults for these flags");
  self_cmd->add_option("--inject-fault", fault, "Test hook: 'sinc' perturbs the SE(2) exponential")
      ->check(CLI::IsMember({"", "sinc"}));

  try {
    std::vector<std::string> expanded;
    const std::string config_path = config_path_from(args);
    if (!config_path.empty() && !args.empty()) {
      const CLI::App* sub = app.get_subcommand_no_throw(args.front());
      if (sub == nullptr) throw UsageError("--config must follow a subcommand");
      const std::set<std::string> allowed = long_names(*sub);
      std::set<std::string> on_command_line;
      for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i].rfind("--", 0) == 0) on_command_line.insert(args[i].substr(2, args[i].find('=') - 2));
      }
      expanded.push_back(args.front());
      for (const auto& [key, value] : read_config_file(config_path)) {
        if (!allowed.count(key) || key == "config" || key == "help") {
          throw UsageError("config " + config_path + ": unknown key '" + key + "' for " + args.front());
        }
        if (on_command_line.count(key)) continue;
        expanded.push_back("--" + key);
        expanded.push_back(value);
      }
      expanded.insert(expanded.end(), args.begin() + 1, args.end());
    } else {
      expanded = args;
    }

    std::vector<const char*> argv{"liefm"};
    for (const auto& a : expanded) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      return app.exit(e, out, err);
    }

    if (train_cmd->parsed()) return cmd_train(train_cfg, *train_cmd, train_out, log_every, out);
    if (flow_cmd->parsed()) return cmd_flow(flow, *flow_cmd, out);
    if (eval_cmd->parsed()) return cmd_eval(ev, *eval_cmd, out);
    if (self_cmd->parsed()) {
      SelfcheckOptions options;
      options.inject_sinc_fault = fault == "sinc";
      return print_selfcheck(out, run_selfcheck(options));
    }
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace liefm::cli
