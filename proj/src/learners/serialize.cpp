// Model artifact: a single JSON object
//   {"format": "nidsbench-model/1", "kind", "hyperparams", "schema", "classes",
//    "fit_wall_seconds", "fit_cpu_core_count", "model": {...}}
// where "model" depends on the variant (see the writers below).
#include "nidsbench/learners.hpp"

#include "json.hpp"

namespace nidsbench {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "nidsbench-model/1";

json tree_json(const TreeModel& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.leaf_class});
  return nodes;
}

TreeModel tree_from(const json& j) {
  TreeModel t;
  for (const auto& n : j) {
    t.nodes.push_back(TreeNode{n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                               n.at(4).get<int>()});
  }
  return t;
}

json boosted_tree_json(const BoostedTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  return nodes;
}

BoostedTree boosted_tree_from(const json& j) {
  BoostedTree t;
  for (const auto& n : j) {
    t.nodes.push_back(BoostedNode{n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(),
                                  n.at(3).get<int>(), n.at(4).get<double>()});
  }
  return t;
}

json model_json(const ModelParams& params) {
  return std::visit(
      [](const auto& m) -> json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ConstantModel>) {
          return {{"type", "constant"}, {"label", m.label}};
        } else if constexpr (std::is_same_v<M, TreeModel>) {
          return {{"type", "tree"}, {"nodes", tree_json(m)}};
        } else if constexpr (std::is_same_v<M, ForestModel>) {
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(tree_json(t));
          return {{"type", "forest"}, {"n_classes", m.n_classes}, {"trees", trees}};
        } else if constexpr (std::is_same_v<M, LogisticModel>) {
          std::vector<int> conv(m.converged.begin(), m.converged.end());
          return {{"type", "logistic"}, {"mean", m.mean},           {"scale", m.scale},
                  {"weights", m.weights}, {"iterations", m.iterations}, {"converged", conv}};
        } else {
          json rounds = json::array();
          for (const auto& round : m.trees) {
            json r = json::array();
            for (const auto& t : round) r.push_back(boosted_tree_json(t));
            rounds.push_back(r);
          }
          return {{"type", "boosted"}, {"n_classes", m.n_classes}, {"baseline", m.baseline},
                  {"trees", rounds},   {"train_loss", m.train_loss}};
        }
      },
      params);
}

ModelParams model_from(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "constant") return ConstantModel{j.at("label").get<ClassId>()};
  if (type == "tree") return tree_from(j.at("nodes"));
  if (type == "forest") {
    ForestModel f;
    f.n_classes = j.at("n_classes").get<std::size_t>();
    for (const auto& t : j.at("trees")) f.trees.push_back(tree_from(t));
    return f;
  }
  if (type == "logistic") {
    LogisticModel m;
    m.mean = j.at("mean").get<std::vector<double>>();
    m.scale = j.at("scale").get<std::vector<double>>();
    m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    m.iterations = j.at("iterations").get<std::vector<std::size_t>>();
    for (int c : j.at("converged").get<std::vector<int>>()) m.converged.push_back(c != 0);
    return m;
  }
  if (type == "boosted") {
    BoostedModel m;
    m.n_classes = j.at("n_classes").get<std::size_t>();
    m.baseline = j.at("baseline").get<std::vector<double>>();
    m.train_loss = j.at("train_loss").get<std::vector<double>>();
    for (const auto& round : j.at("trees")) {
      std::vector<BoostedTree> r;
      for (const auto& t : round) r.push_back(boosted_tree_from(t));
      m.trees.push_back(std::move(r));
    }
    return m;
  }
  throw Error("model artifact: unknown model type '" + type + "'");
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
  json j;
  j["format"] = kFormat;
  j["kind"] = std::string(to_string(model.kind()));
  j["hyperparams"] = json::parse(model.config().hyper.to_json());
  j["schema"] = model.schema();
  j["classes"] = model.classes();
  j["fit_wall_seconds"] = model.fit_wall_seconds();
  j["fit_cpu_core_count"] = model.fit_cpu_core_count();
  j["model"] = model_json(model.params());
  return j.dump();
}

TrainedModel deserialize_model(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", std::string()) != kFormat) throw Error("model artifact: unsupported format");
    LearnerConfig config;
    config.kind = learner_kind_from_string(j.at("kind").get<std::string>());
    config.hyper = Hyperparams::from_json(j.at("hyperparams").dump());
    return TrainedModel(config, j.at("schema").get<std::vector<std::string>>(),
                        j.at("classes").get<std::vector<ClassId>>(), model_from(j.at("model")),
                        j.at("fit_wall_seconds").get<double>(), j.at("fit_cpu_core_count").get<int>());
  } catch (const json::exception& e) {
    throw Error(std::string("model artifact: ") + e.what());
  }
}

}  // namespace nidsbench
