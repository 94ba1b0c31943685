#include "pcalign/types.hpp"

#include "pcalign/errors.hpp"

#include <string>

namespace pcalign {

std::string_view to_string(Rule rule) { return rule == Rule::BP ? "BP" : "PC"; }

std::string_view to_string(Rescaling rescaling) {
  switch (rescaling) {
    case Rescaling::None: return "None";
    case Rescaling::AdaptiveLR: return "AdaptiveLR";
    case Rescaling::Decorrelation: return "Decorrelation";
  }
  return "None";
}

Rule parse_rule(std::string_view text) {
  if (text == "BP" || text == "bp") return Rule::BP;
  if (text == "PC" || text == "pc") return Rule::PC;
  throw ValidationError({"rule: unknown value '" + std::string(text) + "'"});
}

Rescaling parse_rescaling(std::string_view text) {
  if (text == "None" || text == "none") return Rescaling::None;
  if (text == "AdaptiveLR" || text == "adaptive_lr") return Rescaling::AdaptiveLR;
  if (text == "Decorrelation" || text == "decorrelation") return Rescaling::Decorrelation;
  throw ValidationError({"rescaling: unknown value '" + std::string(text) + "'"});
}

}  // namespace pcalign
