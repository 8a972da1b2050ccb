#include "gbst/model_io.h"

#include <json.hpp>

#include "gbst/error.h"
#include "gbst/file_util.h"

namespace gbst {

using Json = nlohmann::ordered_json;

namespace {

Json NodeToJson(const SurvivalTree& tree, int id) {
  const TreeNode& node = tree.nodes()[id];
  Json j;
  if (node.IsLeaf()) {
    j["weights"] = node.weights;
    return j;
  }
  j["feature"] = node.feature;
  j["threshold"] = node.threshold;
  j["gain"] = node.gain;
  j["left"] = NodeToJson(tree, node.left);
  j["right"] = NodeToJson(tree, node.right);
  return j;
}

// rebuilds nodes in pre-order, matching the layout produced by GrowTree
int NodeFromJson(const Json& j, std::vector<TreeNode>* nodes) {
  const int id = static_cast<int>(nodes->size());
  nodes->emplace_back();
  if (j.contains("weights")) {
    (*nodes)[id].weights = j.at("weights").get<std::vector<double>>();
    return id;
  }
  (*nodes)[id].feature = j.at("feature").get<int>();
  (*nodes)[id].threshold = j.at("threshold").get<double>();
  (*nodes)[id].gain = j.value("gain", 0.0);
  const int left = NodeFromJson(j.at("left"), nodes);
  const int right = NodeFromJson(j.at("right"), nodes);
  (*nodes)[id].left = left;
  (*nodes)[id].right = right;
  return id;
}

}  // namespace

std::string SerializeModel(const BoosterModel& model) {
  Json j;
  j["format_version"] = kModelFormatVersion;
  j["grid"] = model.grid.boundaries();
  j["feature_names"] = model.feature_names;
  j["base_hazards"] = model.base_hazards;
  j["base_margins"] = model.base_margins;
  j["learning_rate"] = model.params.learning_rate;
  j["lambda"] = model.params.lambda;
  const BoosterParams& p = model.params;
  j["params"] = {
      {"num_trees", p.num_trees},
      {"max_depth", p.max_depth},
      {"subsample", p.subsample},
      {"split_mode", p.split_mode == SplitMode::kExact ? "exact" : "quantile"},
      {"epsilon", p.epsilon},
      {"min_gain", p.min_gain},
      {"min_child_count", p.min_child_count},
      {"seed", p.seed},
  };
  j["initial_loss"] = model.initial_loss;
  j["loss_trace"] = model.loss_trace;
  Json trees = Json::array();
  for (const auto& tree : model.trees) trees.push_back(NodeToJson(tree, 0));
  j["trees"] = std::move(trees);
  return j.dump(1) + "\n";
}

BoosterModel ParseModel(std::string_view text) {
  try {
    Json j = Json::parse(text);
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw DataError("unsupported model format_version " + std::to_string(version));
    }
    BoosterModel model;
    model.grid = ObservationGrid(j.at("grid").get<std::vector<double>>());
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.base_hazards = j.at("base_hazards").get<std::vector<double>>();
    model.base_margins = j.at("base_margins").get<std::vector<double>>();
    const auto J = static_cast<std::size_t>(model.grid.periods());
    if (model.base_hazards.size() != J || model.base_margins.size() != J) {
      throw DataError("baseline length differs from the grid");
    }
    BoosterParams& p = model.params;
    p.learning_rate = j.at("learning_rate").get<double>();
    p.lambda = j.at("lambda").get<double>();
    const Json& params = j.at("params");
    p.num_trees = params.at("num_trees").get<int>();
    p.max_depth = params.at("max_depth").get<int>();
    p.subsample = params.at("subsample").get<double>();
    const std::string mode = params.at("split_mode").get<std::string>();
    if (mode == "exact") {
      p.split_mode = SplitMode::kExact;
    } else if (mode == "quantile") {
      p.split_mode = SplitMode::kQuantile;
    } else {
      throw DataError("unknown split_mode '" + mode + "'");
    }
    p.epsilon = params.at("epsilon").get<double>();
    p.min_gain = params.at("min_gain").get<double>();
    p.min_child_count = params.at("min_child_count").get<std::size_t>();
    p.seed = params.at("seed").get<std::uint64_t>();
    model.initial_loss = j.value("initial_loss", 0.0);
    model.loss_trace = j.value("loss_trace", std::vector<double>{});
    for (const Json& t : j.at("trees")) {
      std::vector<TreeNode> nodes;
      NodeFromJson(t, &nodes);
      model.trees.emplace_back(static_cast<int>(J), model.num_features(), std::move(nodes));
    }
    return model;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  } catch (const ParamError& e) {
    throw DataError(std::string("invalid model document: ") + e.what());
  }
}

void SaveModel(const BoosterModel& model, const std::string& path) {
  WriteFileAtomic(path, SerializeModel(model));
}

BoosterModel LoadModel(const std::string& path) { return ParseModel(ReadFile(path)); }

}  // namespace gbst
