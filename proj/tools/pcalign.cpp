#include "pcalign/errors.hpp"
#include "pcalign/experiments.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using nlohmann::json;
using pcalign::ExperimentConfig;
using pcalign::ExperimentKind;

struct RunOptions {
  std::string config;
  std::string preset;
  std::string out;
  std::string seeds;
  std::string data_dir;
  bool full_scale = false;
  bool serial = false;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string part;
  try {
    while (std::getline(ss, part, ',')) {
      const auto dash = part.find('-');
      if (dash == std::string::npos) {
        out.push_back(std::stoull(part));
        continue;
      }
      const auto lo = std::stoull(part.substr(0, dash));
      const auto hi = std::stoull(part.substr(dash + 1));
      if (hi < lo) throw std::invalid_argument("descending range");
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    }
  } catch (const std::exception&) {
    throw pcalign::ValidationError({"--seeds: expected a list like 0-9 or 0,2,5, got '" + text + "'"});
  }
  if (out.empty()) throw pcalign::ValidationError({"--seeds: must not be empty"});
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pcalign::IoError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw pcalign::ValidationError({"--config: " + std::string(e.what())});
  }
}

bool kind_allowed(const std::string& command, ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::OneStepAlignment:
    case ExperimentKind::ConditioningSweep:
    case ExperimentKind::BatchSizeSweep:
      return command == "align";
    case ExperimentKind::WholeTraining:
      return command == "train" || command == "sweep";
    case ExperimentKind::LrSweep:
      return command == "sweep";
    case ExperimentKind::Autoencoder:
      return command == "autoencoder";
    case ExperimentKind::ResNetAlignment:
      return command == "resnet";
  }
  return false;
}

std::string default_kind(const std::string& command) {
  static const std::map<std::string, std::string> kinds = {
      {"align", "one_step_alignment"}, {"train", "whole_training"},     {"sweep", "lr_sweep"},
      {"autoencoder", "autoencoder"},  {"resnet", "resnet_alignment"},
  };
  return kinds.at(command);
}

std::vector<pcalign::NamedConfig> resolve(const std::string& command, const RunOptions& opt) {
  if (opt.preset.empty() && opt.config.empty()) {
    throw pcalign::ValidationError({"--preset/--config: give a preset, a config file, or both"});
  }
  const json patch = opt.config.empty() ? json::object() : read_json_file(opt.config);
  std::vector<pcalign::NamedConfig> configs;
  if (opt.preset.empty()) {
    json doc = patch;
    if (doc.is_object() && !doc.contains("kind")) doc["kind"] = default_kind(command);
    configs.push_back({"run", ExperimentConfig::from_json(doc)});
  } else {
    for (auto& named : pcalign::preset(opt.preset, opt.full_scale)) {
      json doc = named.config.to_json();
      doc.merge_patch(patch);
      configs.push_back({named.name, ExperimentConfig::from_json(doc)});
    }
  }
  for (auto& nc : configs) {
    auto& c = nc.config;
    if (command == "sweep" && c.kind == ExperimentKind::WholeTraining) c.kind = ExperimentKind::LrSweep;
    if (!kind_allowed(command, c.kind)) {
      throw pcalign::ValidationError({"kind: '" + pcalign::to_string(c.kind) + "' cannot run under '" +
                                      command + "'"});
    }
    if (!opt.seeds.empty()) c.seeds = parse_seeds(opt.seeds);
    if (!opt.data_dir.empty()) c.mnist.data_dir = opt.data_dir;
    if (opt.serial) c.execution = pcalign::Execution::Serial;
    c.validate();
  }
  return configs;
}

json error_json(const std::string& kind, const std::string& message,
                const std::vector<std::string>& fields = {}) {
  json err{{"kind", kind}, {"message", message}};
  if (!fields.empty()) err["fields"] = fields;
  return {{"status", "error"}, {"error", err}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Target-alignment experiments for predictive coding and backpropagation"};
  app.require_subcommand(1);

  std::string names;
  for (const auto& n : pcalign::preset_names()) names += (names.empty() ? "" : ", ") + n;

  RunOptions opt;
  std::vector<std::pair<std::string, std::string>> commands = {
      {"align", "one-step alignment sweeps (depth, width, conditioning, batch size)"},
      {"train", "whole-training runs with a per-rule learning-rate search"},
      {"sweep", "learning-rate sweeps only"},
      {"autoencoder", "nonlinear MNIST autoencoder training"},
      {"resnet", "linear residual network vs plain network alignment"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "JSON config; merged over the preset when both are given");
    sub->add_option("--preset", opt.preset, "named preset: " + names);
    sub->add_option("--out", opt.out, "output directory (default results/<preset or command>)");
    sub->add_option("--seeds", opt.seeds, "seed list, e.g. 0-9 or 0,3,7");
    sub->add_option("--data-dir", opt.data_dir, "directory holding the MNIST IDX files");
    sub->add_flag("--full-scale", opt.full_scale, "use published sizes instead of desk-scale presets");
    sub->add_flag("--serial", opt.serial, "run cells on the serial reference path");
  }

  std::string results_dir;
  std::string plots_out;
  auto* plots = app.add_subcommand("emit-plots", "write plot-ready tables from result CSVs");
  plots->add_option("--results", results_dir, "directory searched recursively for result CSVs")->required();
  plots->add_option("--out", plots_out, "output directory (default <results>/plots)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json("usage_error", e.what()).dump() << '\n';
    return 2;
  }

  try {
    std::vector<std::string> files;
    if (plots->parsed()) {
      const std::filesystem::path out = plots_out.empty() ? std::filesystem::path(results_dir) / "plots"
                                                          : std::filesystem::path(plots_out);
      for (const auto& p : pcalign::emit_plotdata(results_dir, out)) files.push_back(p.string());
    } else {
      const std::string command = app.get_subcommands().front()->get_name();
      const auto configs = resolve(command, opt);
      const std::filesystem::path root =
          opt.out.empty() ? std::filesystem::path("results") / (opt.preset.empty() ? command : opt.preset)
                          : std::filesystem::path(opt.out);
      for (const auto& nc : configs) {
        for (const auto& p : pcalign::run(nc.config, root / nc.name)) files.push_back(p.string());
      }
    }
    std::cout << json{{"status", "ok"}, {"files", files}}.dump() << '\n';
    return 0;
  } catch (const pcalign::ValidationError& e) {
    std::cerr << error_json(e.kind(), e.what(), e.fields()).dump() << '\n';
    return 2;
  } catch (const pcalign::Error& e) {
    std::cerr << error_json(e.kind(), e.what()).dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << error_json("internal_error", e.what()).dump() << '\n';
    return 1;
  }
}
