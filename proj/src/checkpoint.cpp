#include "pcalign/checkpoint.hpp"

#include "pcalign/errors.hpp"

#include <cmath>
#include <fstream>

namespace pcalign {

namespace {

nlohmann::json matrix_rows(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

nlohmann::json checkpoint_to_json(const WeightStack& stack) {
  nlohmann::json doc;
  doc["format"] = "pcalign-weights";
  doc["version"] = kCheckpointVersion;
  doc["dims"] = stack.dims();
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& w : stack.weights()) {
    weights.push_back(std::vector<double>(w.reshaped<Eigen::RowMajor>().begin(),
                                          w.reshaped<Eigen::RowMajor>().end()));
  }
  doc["weights"] = std::move(weights);
  return doc;
}

WeightStack checkpoint_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "pcalign-weights") {
      throw ValidationError({"format: expected \"pcalign-weights\""});
    }
    const int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ValidationError({"version: unsupported checkpoint version " + std::to_string(version)});
    }
    const auto dims = doc.at("dims").get<std::vector<int>>();
    const auto& weights = doc.at("weights");
    if (dims.size() < 2 || weights.size() != dims.size() - 1) {
      throw ValidationError({"weights: expected one matrix per consecutive dims pair"});
    }
    std::vector<Matrix> out;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      const auto flat = weights[l].get<std::vector<double>>();
      const int rows = dims[l + 1];
      const int cols = dims[l];
      if (rows < 1 || cols < 1 || flat.size() != static_cast<std::size_t>(rows) * cols) {
        throw ValidationError({"weights[" + std::to_string(l) + "]: expected " +
                               std::to_string(rows) + "x" + std::to_string(cols) + " entries"});
      }
      Matrix w(rows, cols);
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) w(i, j) = flat[static_cast<std::size_t>(i) * cols + j];
      }
      out.push_back(std::move(w));
    }
    return WeightStack(std::move(out));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError({std::string("checkpoint: ") + e.what()});
  }
}

void save_checkpoint(const WeightStack& stack, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << checkpoint_to_json(stack).dump(1) << '\n';
  if (!out) throw IoError("short write to " + path.string());
}

WeightStack load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError({path.string() + ": " + e.what()});
  }
  return checkpoint_from_json(doc);
}

nlohmann::json report_to_json(const UpdateReport& report, bool include_deltas) {
  nlohmann::json doc;
  doc["rule"] = to_string(report.rule);
  doc["rescaling"] = to_string(report.rescaling);
  doc["residual"] = matrix_rows(report.residual);
  doc["predicted_dydt"] = matrix_rows(report.predicted_dydt);
  nlohmann::json ta = nlohmann::json::array();
  for (const auto& t : report.ta_per_sample) {
    // Undefined alignment is written as null.
    ta.push_back(t.defined() ? nlohmann::json(*t.value) : nlohmann::json(nullptr));
  }
  doc["ta_per_sample"] = std::move(ta);
  const double mean = report.mean_ta();
  doc["mean_ta"] = std::isnan(mean) ? nlohmann::json(nullptr) : nlohmann::json(mean);
  if (include_deltas) {
    nlohmann::json deltas = nlohmann::json::array();
    for (const auto& d : report.deltas) deltas.push_back(matrix_rows(d));
    doc["deltas"] = std::move(deltas);
  }
  return doc;
}

}  // namespace pcalign
