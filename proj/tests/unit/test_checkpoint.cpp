#include "doctest.h"

#include "pcalign/checkpoint.hpp"
#include "pcalign/errors.hpp"
#include "pcalign/tasks.hpp"

#include <filesystem>

using namespace pcalign;

TEST_CASE("checkpoint round trip is bit exact") {
  const auto stack = initialize(NetworkSpec({4, 3, 5, 2}), {InitKind::KaimingUniform, 1, {}});
  const auto path = std::filesystem::temp_directory_path() / "pcalign_ckpt_test.json";
  save_checkpoint(stack, path);
  const auto back = load_checkpoint(path);
  CHECK(back == stack);
  CHECK(back.fingerprint() == stack.fingerprint());
  const auto doc = checkpoint_to_json(stack);
  CHECK(doc["dims"] == nlohmann::json::array({4, 3, 5, 2}));
  CHECK(doc["weights"][0].size() == 12);
  CHECK(doc["weights"][0][1].get<double>() == stack.weight(1)(0, 1));
}

TEST_CASE("malformed checkpoints are rejected") {
  const auto good = checkpoint_to_json(initialize(NetworkSpec({2, 2}), {InitKind::KaimingUniform, 1, {}}));
  auto bad = good;
  bad["version"] = 2;
  CHECK_THROWS_AS(checkpoint_from_json(bad), ValidationError);
  bad = good;
  bad["weights"][0].erase(0);
  CHECK_THROWS_AS(checkpoint_from_json(bad), ValidationError);
  bad = good;
  bad["format"] = "other";
  CHECK_THROWS_AS(checkpoint_from_json(bad), ValidationError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.json"), IoError);
}

TEST_CASE("update report JSON") {
  const auto stack = initialize(NetworkSpec({3, 3, 3}), {InitKind::KaimingUniform, 2, {}});
  Batch batch = random_regression_batch(3, 3, 2, 2);
  batch.targets.col(1) = forward(stack, batch.inputs).prediction().col(1);
  const auto rep = pc_gradients(stack, batch);
  const auto doc = report_to_json(rep, true);
  CHECK(doc["rule"] == "PC");
  CHECK(doc["rescaling"] == "None");
  CHECK(doc["ta_per_sample"][1].is_null());
  CHECK(doc["ta_per_sample"][0].get<double>() == *rep.ta_per_sample[0].value);
  CHECK(doc["deltas"].size() == 2);
  CHECK_FALSE(report_to_json(rep).contains("deltas"));
}
