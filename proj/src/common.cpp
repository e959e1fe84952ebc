#include "nidsbench/common.hpp"

namespace nidsbench {

std::string_view to_string(FeatureSet fs) {
  return fs == FeatureSet::Complete ? "Complete" : "Essential";
}

FeatureSet feature_set_from_string(std::string_view s) {
  if (s == "Complete") return FeatureSet::Complete;
  if (s == "Essential") return FeatureSet::Essential;
  throw Error("unknown feature set '" + std::string(s) + "'");
}

}  // namespace nidsbench
