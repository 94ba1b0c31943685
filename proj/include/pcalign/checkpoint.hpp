#pragma once

#include "pcalign/learning_rules.hpp"

#include "json.hpp"

#include <filesystem>

namespace pcalign {

inline constexpr int kCheckpointVersion = 1;

/// {"format": "pcalign-weights", "version": 1, "dims": [...], "weights": [[row-major]...]}
nlohmann::json checkpoint_to_json(const WeightStack& stack);
WeightStack checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const WeightStack& stack, const std::filesystem::path& path);
WeightStack load_checkpoint(const std::filesystem::path& path);

/// predicted_dydt, residual and TA are always written; deltas only on request.
nlohmann::json report_to_json(const UpdateReport& report, bool include_deltas = false);

}  // namespace pcalign
