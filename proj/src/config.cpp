#include "pcalign/errors.hpp"
#include "pcalign/experiments.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <set>

namespace pcalign {

using nlohmann::json;

namespace {

constexpr std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::OneStepAlignment, "one_step_alignment"},
    {ExperimentKind::ConditioningSweep, "conditioning_sweep"},
    {ExperimentKind::BatchSizeSweep, "batch_size_sweep"},
    {ExperimentKind::WholeTraining, "whole_training"},
    {ExperimentKind::LrSweep, "lr_sweep"},
    {ExperimentKind::Autoencoder, "autoencoder"},
    {ExperimentKind::ResNetAlignment, "resnet_alignment"},
};

constexpr std::pair<InitKind, const char*> kInitNames[] = {
    {InitKind::KaimingUniform, "kaiming_uniform"},
    {InitKind::NormPreservingNormal, "norm_preserving"},
    {InitKind::LeCunNormal, "lecun_normal"},
};

std::string policy_name(InversePolicy p) {
  return p == InversePolicy::PseudoInverse ? "pseudo_inverse" : "spectral_regularized";
}

json rule_to_json(const RuleSpec& r) {
  return {
      {"rule", to_string(r.rule)},
      {"rescaling", to_string(r.rescaling.mode)},
      {"inverse_policy", policy_name(r.rescaling.inverse_policy)},
      {"alpha", r.rescaling.alpha},
      {"adaptive_layers", r.rescaling.adaptive_layers == AdaptiveLayers::All ? "all" : "exclude_last"},
      {"orientation",
       r.rescaling.orientation == DecorrelationOrientation::Transposed ? "transposed" : "literal"},
      {"degenerate_floor", r.rescaling.degenerate_floor},
      {"pinv_cutoff", r.rescaling.pinv_cutoff},
  };
}

RuleSpec rule_from_json(const json& j) {
  if (j.is_string()) return parse_rule_label(j.get<std::string>());
  RuleSpec r;
  for (const auto& [key, value] : j.items()) {
    if (key == "rule") {
      r.rule = parse_rule(value.get<std::string>());
    } else if (key == "rescaling") {
      r.rescaling.mode = parse_rescaling(value.get<std::string>());
    } else if (key == "inverse_policy") {
      const auto v = value.get<std::string>();
      if (v == "pseudo_inverse") {
        r.rescaling.inverse_policy = InversePolicy::PseudoInverse;
      } else if (v == "spectral_regularized") {
        r.rescaling.inverse_policy = InversePolicy::SpectralRegularized;
      } else {
        throw ValidationError({"rules.inverse_policy: unknown value '" + v + "'"});
      }
    } else if (key == "alpha") {
      r.rescaling.alpha = value.get<double>();
    } else if (key == "adaptive_layers") {
      const auto v = value.get<std::string>();
      if (v != "all" && v != "exclude_last") {
        throw ValidationError({"rules.adaptive_layers: unknown value '" + v + "'"});
      }
      r.rescaling.adaptive_layers = v == "all" ? AdaptiveLayers::All : AdaptiveLayers::ExcludeLast;
    } else if (key == "orientation") {
      const auto v = value.get<std::string>();
      if (v != "transposed" && v != "literal") {
        throw ValidationError({"rules.orientation: unknown value '" + v + "'"});
      }
      r.rescaling.orientation =
          v == "transposed" ? DecorrelationOrientation::Transposed : DecorrelationOrientation::Literal;
    } else if (key == "degenerate_floor") {
      r.rescaling.degenerate_floor = value.get<double>();
    } else if (key == "pinv_cutoff") {
      r.rescaling.pinv_cutoff = value.get<double>();
    } else {
      throw ValidationError({"rules." + key + ": unknown key"});
    }
  }
  return r;
}

std::vector<std::uint64_t> seed_range(int n) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint64_t>(i));
  return out;
}

RuleSpec spec(Rule rule, Rescaling mode, InversePolicy policy = InversePolicy::PseudoInverse,
              double alpha = 1e-5) {
  RuleSpec r;
  r.rule = rule;
  r.rescaling.mode = mode;
  r.rescaling.inverse_policy = policy;
  r.rescaling.alpha = alpha;
  return r;
}

std::vector<RuleSpec> online_rules() {
  return {spec(Rule::BP, Rescaling::None), spec(Rule::BP, Rescaling::AdaptiveLR),
          spec(Rule::PC, Rescaling::None), spec(Rule::PC, Rescaling::AdaptiveLR)};
}

std::vector<RuleSpec> batch_rules(InversePolicy policy, double alpha) {
  return {spec(Rule::BP, Rescaling::None), spec(Rule::BP, Rescaling::Decorrelation, policy, alpha),
          spec(Rule::PC, Rescaling::None), spec(Rule::PC, Rescaling::Decorrelation, policy, alpha)};
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& text) {
  for (const auto& [k, name] : kKindNames) {
    if (text == name) return k;
  }
  throw ValidationError({"kind: unknown value '" + text + "'"});
}

std::string to_string(InitKind kind) {
  for (const auto& [k, name] : kInitNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

InitKind parse_init_kind(const std::string& text) {
  for (const auto& [k, name] : kInitNames) {
    if (text == name) return k;
  }
  throw ValidationError({"inits: unknown value '" + text + "'"});
}

std::string to_string(Family family) { return family == Family::Dln ? "dln" : "resnet"; }

std::string RuleSpec::label() const {
  std::string out(to_string(rule));
  if (rescaling.mode != Rescaling::None) out += "+" + std::string(to_string(rescaling.mode));
  return out;
}

RuleSpec parse_rule_label(const std::string& label) {
  RuleSpec r;
  const auto plus = label.find('+');
  r.rule = parse_rule(label.substr(0, plus));
  if (plus != std::string::npos) r.rescaling.mode = parse_rescaling(label.substr(plus + 1));
  return r;
}

std::vector<double> LrGrid::values() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    const double e = count == 1 ? lo_exp : lo_exp + (hi_exp - lo_exp) * i / (count - 1);
    out.push_back(std::pow(10.0, e));
  }
  return out;
}

void ExperimentConfig::validate() const {
  std::vector<std::string> bad;
  auto positive = [&](int v, const char* name) {
    if (v < 1) bad.push_back(std::string(name) + ": must be >= 1");
  };
  positive(input_dim, "input_dim");
  positive(output_dim, "output_dim");
  positive(hidden_width, "hidden_width");
  positive(batch_size, "batch_size");
  positive(record_every, "record_every");
  if (hidden_layers < 0) bad.push_back("hidden_layers: must be >= 0");
  if (steps < 0) bad.push_back("steps: must be >= 0");
  for (int d : depths) {
    if (d < 0) bad.push_back("depths: entries must be >= 0");
  }
  for (int w : widths) {
    if (w < 1) bad.push_back("widths: entries must be >= 1");
  }
  for (double k : kappas) {
    if (!(k >= 1.0) || !std::isfinite(k)) bad.push_back("kappas: entries must be finite and >= 1");
  }
  for (int b : batch_sizes) {
    if (b < 1) bad.push_back("batch_sizes: entries must be >= 1");
  }
  if (seeds.empty()) bad.push_back("seeds: must not be empty");
  if (rules.empty()) bad.push_back("rules: must not be empty");
  if (inits.empty()) bad.push_back("inits: must not be empty");
  if (!(lr >= 0.0) || !std::isfinite(lr)) bad.push_back("lr: must be finite and >= 0");
  if (!(residual_scale >= 0.0) || !std::isfinite(residual_scale)) {
    bad.push_back("residual_scale: must be finite and >= 0");
  }
  if (lr_grid) {
    if (lr_grid->count < 1) bad.push_back("lr_grid.count: must be >= 1");
    if (!std::isfinite(lr_grid->lo_exp) || !std::isfinite(lr_grid->hi_exp) ||
        lr_grid->lo_exp > lr_grid->hi_exp) {
      bad.push_back("lr_grid: bounds must be finite with lo_exp <= hi_exp");
    }
  }
  std::set<std::string> labels;
  for (const auto& r : rules) {
    if (!labels.insert(r.label()).second) bad.push_back("rules: duplicate entry " + r.label());
    try {
      r.rescaling.validate();
    } catch (const ValidationError& e) {
      bad.insert(bad.end(), e.fields().begin(), e.fields().end());
    }
  }
  const bool training = kind == ExperimentKind::WholeTraining || kind == ExperimentKind::LrSweep ||
                        kind == ExperimentKind::Autoencoder;
  if (training && family == Family::ResNet) bad.push_back("family: training runs use plain networks");
  if (training && inits.size() != 1) bad.push_back("inits: training runs take exactly one init");
  if ((family == Family::ResNet || kind == ExperimentKind::ResNetAlignment) &&
      (input_dim != hidden_width || output_dim != hidden_width)) {
    bad.push_back("family: residual networks need input_dim == hidden_width == output_dim");
  }
  if (kind == ExperimentKind::Autoencoder) {
    if (autoencoder_dims.size() < 2) bad.push_back("autoencoder_dims: need at least two widths");
    for (int d : autoencoder_dims) {
      if (d < 1) bad.push_back("autoencoder_dims: entries must be >= 1");
    }
    if (!autoencoder_dims.empty() && autoencoder_dims.front() != autoencoder_dims.back()) {
      bad.push_back("autoencoder_dims: input and output widths must match");
    }
    if (mnist.train_limit == 0 || mnist.test_limit == 0) {
      bad.push_back("mnist: limits must be positive or negative (all)");
    }
    try {
      mnist.inference.validate();
    } catch (const ValidationError& e) {
      bad.insert(bad.end(), e.fields().begin(), e.fields().end());
    }
  }
  if (!bad.empty()) throw ValidationError(bad);
}

json ExperimentConfig::to_json() const {
  json j;
  j["kind"] = to_string(kind);
  j["family"] = to_string(family);
  j["toy"] = toy;
  j["input_dim"] = input_dim;
  j["output_dim"] = output_dim;
  j["hidden_width"] = hidden_width;
  j["hidden_layers"] = hidden_layers;
  j["depths"] = depths;
  j["widths"] = widths;
  j["kappas"] = kappas;
  j["batch_sizes"] = batch_sizes;
  j["inits"] = json::array();
  for (auto k : inits) j["inits"].push_back(to_string(k));
  j["rules"] = json::array();
  for (const auto& r : rules) j["rules"].push_back(rule_to_json(r));
  j["batch_size"] = batch_size;
  j["target"] = target == TargetKind::Random ? "random" : "teacher";
  j["lr"] = lr;
  if (lr_grid) {
    j["lr_grid"] = {{"lo_exp", lr_grid->lo_exp}, {"hi_exp", lr_grid->hi_exp}, {"count", lr_grid->count}};
  } else {
    j["lr_grid"] = nullptr;
  }
  j["steps"] = steps;
  j["record_every"] = record_every;
  j["seeds"] = seeds;
  j["init_checkpoint"] = init_checkpoint;
  j["residual_scale"] = residual_scale;
  j["autoencoder_dims"] = autoencoder_dims;
  j["mnist"] = {
      {"data_dir", mnist.data_dir},
      {"train_limit", mnist.train_limit},
      {"test_limit", mnist.test_limit},
      {"inference",
       {{"max_steps", mnist.inference.max_steps},
        {"step_size", mnist.inference.step_size},
        {"early_stop_grad_norm", mnist.inference.early_stop_grad_norm},
        {"divergence_patience", mnist.inference.divergence_patience}}},
  };
  j["execution"] = execution == Execution::Serial ? "serial" : "parallel";
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError({"config: expected a JSON object"});
  ExperimentConfig c;
  std::vector<std::string> bad;

  // Each key is parsed independently so that every bad field is reported.
  const std::map<std::string, std::function<void(const json&)>> fields = {
      {"kind", [&](const json& v) { c.kind = parse_experiment_kind(v.get<std::string>()); }},
      {"family",
       [&](const json& v) {
         const auto s = v.get<std::string>();
         if (s != "dln" && s != "resnet") throw ValidationError({"family: unknown value '" + s + "'"});
         c.family = s == "dln" ? Family::Dln : Family::ResNet;
       }},
      {"toy", [&](const json& v) { c.toy = v.get<bool>(); }},
      {"input_dim", [&](const json& v) { c.input_dim = v.get<int>(); }},
      {"output_dim", [&](const json& v) { c.output_dim = v.get<int>(); }},
      {"hidden_width", [&](const json& v) { c.hidden_width = v.get<int>(); }},
      {"hidden_layers", [&](const json& v) { c.hidden_layers = v.get<int>(); }},
      {"depths", [&](const json& v) { c.depths = v.get<std::vector<int>>(); }},
      {"widths", [&](const json& v) { c.widths = v.get<std::vector<int>>(); }},
      {"kappas", [&](const json& v) { c.kappas = v.get<std::vector<double>>(); }},
      {"batch_sizes", [&](const json& v) { c.batch_sizes = v.get<std::vector<int>>(); }},
      {"inits",
       [&](const json& v) {
         c.inits.clear();
         for (const auto& e : v) c.inits.push_back(parse_init_kind(e.get<std::string>()));
       }},
      {"rules",
       [&](const json& v) {
         c.rules.clear();
         for (const auto& e : v) c.rules.push_back(rule_from_json(e));
       }},
      {"batch_size", [&](const json& v) { c.batch_size = v.get<int>(); }},
      {"target",
       [&](const json& v) {
         const auto s = v.get<std::string>();
         if (s != "random" && s != "teacher") throw ValidationError({"target: unknown value '" + s + "'"});
         c.target = s == "random" ? TargetKind::Random : TargetKind::Teacher;
       }},
      {"lr", [&](const json& v) { c.lr = v.get<double>(); }},
      {"lr_grid",
       [&](const json& v) {
         if (v.is_null()) {
           c.lr_grid.reset();
           return;
         }
         LrGrid g;
         g.lo_exp = v.value("lo_exp", g.lo_exp);
         g.hi_exp = v.value("hi_exp", g.hi_exp);
         g.count = v.value("count", g.count);
         c.lr_grid = g;
       }},
      {"steps", [&](const json& v) { c.steps = v.get<int>(); }},
      {"record_every", [&](const json& v) { c.record_every = v.get<int>(); }},
      {"seeds", [&](const json& v) { c.seeds = v.get<std::vector<std::uint64_t>>(); }},
      {"init_checkpoint", [&](const json& v) { c.init_checkpoint = v.get<std::string>(); }},
      {"residual_scale", [&](const json& v) { c.residual_scale = v.get<double>(); }},
      {"autoencoder_dims", [&](const json& v) { c.autoencoder_dims = v.get<std::vector<int>>(); }},
      {"mnist",
       [&](const json& v) {
         c.mnist.data_dir = v.value("data_dir", c.mnist.data_dir);
         c.mnist.train_limit = v.value("train_limit", c.mnist.train_limit);
         c.mnist.test_limit = v.value("test_limit", c.mnist.test_limit);
         if (v.contains("inference")) {
           const auto& inf = v.at("inference");
           auto& dst = c.mnist.inference;
           dst.max_steps = inf.value("max_steps", dst.max_steps);
           dst.step_size = inf.value("step_size", dst.step_size);
           dst.early_stop_grad_norm = inf.value("early_stop_grad_norm", dst.early_stop_grad_norm);
           dst.divergence_patience = inf.value("divergence_patience", dst.divergence_patience);
         }
       }},
      {"execution",
       [&](const json& v) {
         const auto s = v.get<std::string>();
         if (s != "serial" && s != "parallel") {
           throw ValidationError({"execution: unknown value '" + s + "'"});
         }
         c.execution = s == "serial" ? Execution::Serial : Execution::Parallel;
       }},
  };

  for (const auto& [key, value] : doc.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) {
      bad.push_back(key + ": unknown key");
      continue;
    }
    try {
      it->second(value);
    } catch (const ValidationError& e) {
      bad.insert(bad.end(), e.fields().begin(), e.fields().end());
    } catch (const json::exception& e) {
      bad.push_back(key + ": " + e.what());
    }
  }
  if (!bad.empty()) throw ValidationError(bad);
  c.validate();
  return c;
}

std::vector<std::string> preset_names() {
  return {"fig1_toy", "fig2_onestep", "fig3_conditioning", "fig3_online", "fig4_batch", "fig4_train",
          "lr_sweep", "appendix_resnet", "autoencoder"};
}

std::vector<NamedConfig> preset(const std::string& name, bool full_scale) {
  const int onestep_width = full_scale ? 512 : 128;
  const auto ten_seeds = seed_range(10);
  std::vector<NamedConfig> out;

  if (name == "fig1_toy") {
    ExperimentConfig c;
    c.kind = ExperimentKind::OneStepAlignment;
    c.toy = true;
    c.input_dim = 1;
    c.hidden_width = 1;
    c.output_dim = 2;
    c.rules = {spec(Rule::BP, Rescaling::None), spec(Rule::PC, Rescaling::None),
               spec(Rule::PC, Rescaling::AdaptiveLR)};
    c.seeds = {0};
    out.push_back({"toy", c});
  } else if (name == "fig2_onestep") {
    for (auto init : {InitKind::NormPreservingNormal, InitKind::KaimingUniform}) {
      ExperimentConfig c;
      c.kind = ExperimentKind::OneStepAlignment;
      c.input_dim = c.output_dim = c.hidden_width = onestep_width;
      c.inits = {init};
      c.rules = {spec(Rule::BP, Rescaling::None), spec(Rule::PC, Rescaling::None)};
      c.seeds = ten_seeds;
      ExperimentConfig depth = c;
      depth.depths = {1, 2, 3, 4, 5, 6, 7, 8};
      out.push_back({"depth_" + to_string(init), depth});
      ExperimentConfig width = c;
      width.widths = full_scale ? std::vector<int>{128, 256, 512, 1024} : std::vector<int>{32, 64, 128, 256};
      out.push_back({"width_" + to_string(init), width});
    }
  } else if (name == "fig3_conditioning") {
    ExperimentConfig c;
    c.kind = ExperimentKind::ConditioningSweep;
    c.input_dim = c.output_dim = c.hidden_width = full_scale ? 512 : 64;
    c.inits = {InitKind::KaimingUniform};
    c.kappas = {1, 2, 10, 50, 1e3, 1e4, 1e5, 1e7, 1e9, 1e12};
    c.rules = online_rules();
    c.seeds = ten_seeds;
    out.push_back({"conditioning", c});
  } else if (name == "fig3_online" || name == "fig4_train" || name == "lr_sweep") {
    const bool batch = name == "fig4_train";
    for (int hidden : {1, 8}) {
      ExperimentConfig c;
      c.kind = name == "lr_sweep" ? ExperimentKind::LrSweep : ExperimentKind::WholeTraining;
      c.input_dim = c.output_dim = c.hidden_width = 20;
      c.hidden_layers = hidden;
      c.target = TargetKind::Teacher;
      c.batch_size = batch ? 64 : 1;
      c.steps = 500;
      c.record_every = full_scale ? 1 : 5;
      c.seeds = ten_seeds;
      const double alpha = hidden == 1 ? 1e-5 : 1e-4;
      c.rules = batch ? batch_rules(InversePolicy::SpectralRegularized, alpha) : online_rules();
      const int points = full_scale ? 100 : 25;
      c.lr_grid = LrGrid{-3.5, batch ? 0.4 : (name == "lr_sweep" ? 0.3 : -0.04), points};
      out.push_back({"hidden" + std::to_string(hidden), c});
      if (name == "lr_sweep") {
        // The two other published ranges.
        c.lr_grid = LrGrid{-3.5, 0.5, points};
        out.push_back({"hidden" + std::to_string(hidden) + "_to_e0.5", c});
        c.lr_grid = LrGrid{-5.0, 0.0, points};
        out.push_back({"hidden" + std::to_string(hidden) + "_e-5_to_e0", c});
      }
    }
  } else if (name == "fig4_batch") {
    ExperimentConfig c;
    c.kind = ExperimentKind::BatchSizeSweep;
    c.input_dim = c.output_dim = c.hidden_width = onestep_width;
    c.inits = {InitKind::KaimingUniform};
    c.batch_sizes = full_scale ? std::vector<int>{1, 32, 64, 128, 256, 480, 550, 1000, 2048}
                               : std::vector<int>{1, 8, 16, 32, 64, 120, 140, 250, 512};
    c.rules = batch_rules(InversePolicy::PseudoInverse, 1e-5);
    c.seeds = full_scale ? ten_seeds : seed_range(5);
    out.push_back({"batch", c});
  } else if (name == "appendix_resnet") {
    ExperimentConfig c;
    c.kind = ExperimentKind::ResNetAlignment;
    c.input_dim = c.output_dim = c.hidden_width = onestep_width;
    c.depths = {1, 2, 3, 4, 5, 6, 7, 8};
    c.rules = {spec(Rule::BP, Rescaling::None), spec(Rule::PC, Rescaling::None),
               spec(Rule::PC, Rescaling::AdaptiveLR)};
    c.seeds = ten_seeds;
    out.push_back({"resnet", c});
  } else if (name == "autoencoder") {
    for (int b : {1, 64}) {
      ExperimentConfig c;
      c.kind = ExperimentKind::Autoencoder;
      c.inits = {InitKind::LeCunNormal};
      c.batch_size = b;
      c.rules = b == 1 ? online_rules() : batch_rules(InversePolicy::SpectralRegularized, 1e-5);
      c.seeds = seed_range(3);
      c.lr_grid = LrGrid{-4.0, 1.0, full_scale ? 11 : 6};
      if (full_scale) {
        c.steps = 200;
        c.mnist.train_limit = -1;
        c.mnist.test_limit = -1;
      } else {
        c.steps = 30;
        c.record_every = 1;
        c.mnist.train_limit = 1024;
        c.mnist.test_limit = 256;
        c.mnist.inference.max_steps = 20;
        c.mnist.inference.step_size = 0.1;
      }
      out.push_back({b == 1 ? "online" : "batch64", c});
    }
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += " " + n;
    throw ValidationError({"preset: unknown name '" + name + "' (known:" + known + ")"});
  }
  return out;
}

}  // namespace pcalign
