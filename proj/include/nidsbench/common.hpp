#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nidsbench {

/// Class identifier: 0 is benign, 1..M are attack families.
using ClassId = int;
inline constexpr ClassId kBenign = 0;

/// All recoverable failures in the library surface as this exception type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FeatureSet { Complete, Essential };

std::string_view to_string(FeatureSet fs);
FeatureSet feature_set_from_string(std::string_view s);

}  // namespace nidsbench
