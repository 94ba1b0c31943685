#include "csv.hpp"
#include "pcalign/errors.hpp"
#include "pcalign/experiments.hpp"

#include <algorithm>
#include <map>
#include <cmath>
#include <set>

namespace pcalign {

namespace fs = std::filesystem;

namespace {

/// Keeps first-seen order of labels.
void remember(std::vector<std::string>& order, const std::string& label) {
  if (std::find(order.begin(), order.end(), label) == order.end()) order.push_back(label);
}

std::string prefix_for(const fs::path& results_dir, const fs::path& file) {
  std::string rel = fs::relative(file.parent_path(), results_dir).generic_string();
  if (rel.empty() || rel == ".") return "results";
  std::replace(rel.begin(), rel.end(), '/', '_');
  return rel;
}

/// x -> rule -> values, with x ordered numerically.
using Series = std::map<double, std::map<std::string, std::vector<double>>>;

csv::Table mean_sd_table(const std::string& axis, const Series& series,
                         const std::vector<std::string>& labels, const std::string& stat) {
  csv::Table t;
  t.header.push_back(axis);
  for (const auto& l : labels) {
    t.header.push_back("mean_" + stat + "_" + l);
    t.header.push_back("sd_" + stat + "_" + l);
  }
  for (const auto& [x, by_rule] : series) {
    std::vector<std::string> row{csv::fmt(x)};
    for (const auto& l : labels) {
      const auto it = by_rule.find(l);
      const MeanSd m = it == by_rule.end() ? MeanSd{std::nan(""), std::nan(""), 0} : mean_sd(it->second);
      row.push_back(csv::fmt(m.mean));
      row.push_back(csv::fmt(m.sd));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void alignment_panels(const fs::path& file, const std::string& prefix, const fs::path& out_dir,
                      std::vector<fs::path>& written) {
  const auto rows = read_alignment_csv(file);
  std::map<std::pair<std::string, std::string>, std::vector<const AlignmentRow*>> groups;
  for (const auto& r : rows) groups[{r.family, r.init}].push_back(&r);

  for (const auto& [key, members] : groups) {
    std::set<int> depths, widths, batches;
    std::set<double> kappas;
    std::vector<std::string> labels;
    for (const auto* r : members) {
      depths.insert(r->hidden_layers);
      widths.insert(r->hidden_width);
      kappas.insert(r->kappa);
      batches.insert(r->batch_size);
      remember(labels, r->rule);
    }
    std::string axis = "depth";
    if (depths.size() <= 1) {
      if (widths.size() > 1) {
        axis = "width";
      } else if (kappas.size() > 1) {
        axis = "kappa";
      } else if (batches.size() > 1) {
        axis = "batch_size";
      }
    }
    Series series;
    for (const auto* r : members) {
      const double x = axis == "depth"   ? r->hidden_layers
                       : axis == "width" ? r->hidden_width
                       : axis == "kappa" ? r->kappa
                                         : r->batch_size;
      series[x][r->rule].push_back(r->mean_ta);
    }
    const fs::path out = out_dir / (prefix + "__" + key.first + "_" + key.second + "_" + axis + ".csv");
    csv::write_table(out, mean_sd_table(axis, series, labels, "ta"));
    written.push_back(out);
  }
}

void trajectory_panel(const fs::path& file, const std::string& prefix, const fs::path& out_dir,
                      std::vector<fs::path>& written) {
  const csv::Table t = csv::read_table(file);
  const auto c_step = t.column("step"), c_rule = t.column("rule"), c_eval = t.column("eval_error");
  Series series;
  std::vector<std::string> labels;
  for (const auto& r : t.rows) {
    remember(labels, r[c_rule]);
    series[std::stod(r[c_step])][r[c_rule]].push_back(csv::parse_double(r[c_eval]));
  }
  const fs::path out = out_dir / (prefix + "__trajectory.csv");
  csv::write_table(out, mean_sd_table("step", series, labels, "eval"));
  written.push_back(out);
}

void sweep_panel(const fs::path& file, const std::string& prefix, const fs::path& out_dir,
                 std::vector<fs::path>& written) {
  const csv::Table t = csv::read_table(file);
  const auto c_lr = t.column("lr"), c_rule = t.column("rule"), c_eval = t.column("final_eval"),
             c_finite = t.column("finite");
  Series series;
  std::vector<std::string> labels;
  for (const auto& r : t.rows) {
    remember(labels, r[c_rule]);
    const double v = r[c_finite] == "1" ? csv::parse_double(r[c_eval]) : std::nan("");
    series[csv::parse_double(r[c_lr])][r[c_rule]].push_back(v);
  }
  const fs::path out = out_dir / (prefix + "__lr_sweep.csv");
  csv::write_table(out, mean_sd_table("lr", series, labels, "final_eval"));
  written.push_back(out);
}

}  // namespace

std::vector<fs::path> emit_plotdata(const fs::path& results_dir, const fs::path& out_dir) {
  if (!fs::is_directory(results_dir)) throw IoError("results directory not found: " + results_dir.string());
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  const auto out_abs = fs::weakly_canonical(out_dir);

  std::vector<fs::path> inputs;
  for (const auto& entry : fs::recursive_directory_iterator(results_dir)) {
    if (!entry.is_regular_file()) continue;
    // Skip our own output if it lives under the results tree.
    if (fs::weakly_canonical(entry.path()).parent_path() == out_abs) continue;
    const auto name = entry.path().filename().string();
    if (name == "alignment.csv" || name == "trajectory.csv" || name == "lr_sweep.csv") {
      inputs.push_back(entry.path());
    }
  }
  std::sort(inputs.begin(), inputs.end());

  std::vector<fs::path> written;
  for (const auto& file : inputs) {
    const std::string prefix = prefix_for(results_dir, file);
    const auto name = file.filename().string();
    if (name == "alignment.csv") {
      alignment_panels(file, prefix, out_dir, written);
    } else if (name == "trajectory.csv") {
      trajectory_panel(file, prefix, out_dir, written);
    } else {
      sweep_panel(file, prefix, out_dir, written);
    }
  }
  return written;
}

}  // namespace pcalign
