#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace pcalign {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Rule { BP, PC };

enum class Rescaling { None, AdaptiveLR, Decorrelation };

std::string_view to_string(Rule rule);
std::string_view to_string(Rescaling rescaling);
Rule parse_rule(std::string_view text);
Rescaling parse_rescaling(std::string_view text);

/// Inputs and targets of a batch; column b of `inputs` pairs with column b of `targets`.
struct Batch {
  Matrix inputs;
  Matrix targets;

  int size() const { return static_cast<int>(inputs.cols()); }
};

}  // namespace pcalign
