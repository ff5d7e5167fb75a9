#pragma once

// Regressor input for a (src, mt, ref) triple of dimension d, length 6d:
//
//   [ ref ; mt ; src*mt ; |src-mt| ; ref*mt ; |ref-mt| ]
//
// (* and |.| are element-wise). The block order is part of the model file
// contract: a model trained on one layout is meaningless on another.

#include <cstddef>
#include <span>
#include <vector>

namespace blaser {

inline constexpr std::size_t kFeatureBlocks = 6;

struct FeatureVector {
  std::vector<double> values;
  std::size_t d = 0;  // embedding dimension; values.size() == 6 * d

  std::span<const double> block(std::size_t k) const {
    return std::span<const double>(values).subspan(k * d, d);
  }
};

// Throws DimensionError unless all three inputs have the same length.
FeatureVector build_features(std::span<const float> src, std::span<const float> mt,
                             std::span<const float> ref);

// Writes the 6d features into `out` (which must have exactly that length).
void build_features_into(std::span<const float> src, std::span<const float> mt,
                         std::span<const float> ref, std::span<double> out);

}  // namespace blaser
