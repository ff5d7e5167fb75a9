#include "blaser/features.hpp"

#include <cmath>
#include <string>

#include "blaser/error.hpp"

namespace blaser {

void build_features_into(std::span<const float> src, std::span<const float> mt,
                         std::span<const float> ref, std::span<double> out) {
  const std::size_t d = mt.size();
  if (src.size() != d || ref.size() != d) {
    throw DimensionError("build_features: dims differ (src " + std::to_string(src.size()) + ", mt " +
                         std::to_string(d) + ", ref " + std::to_string(ref.size()) + ")");
  }
  if (out.size() != kFeatureBlocks * d) {
    throw DimensionError("build_features: output length " + std::to_string(out.size()) +
                         ", expected " + std::to_string(kFeatureBlocks * d));
  }
  for (std::size_t i = 0; i < d; ++i) {
    const double s = src[i], m = mt[i], r = ref[i];
    out[i] = r;
    out[d + i] = m;
    out[2 * d + i] = s * m;
    out[3 * d + i] = std::abs(s - m);
    out[4 * d + i] = r * m;
    out[5 * d + i] = std::abs(r - m);
  }
}

FeatureVector build_features(std::span<const float> src, std::span<const float> mt,
                             std::span<const float> ref) {
  FeatureVector f;
  f.d = mt.size();
  f.values.assign(kFeatureBlocks * f.d, 0.0);
  build_features_into(src, mt, ref, f.values);
  return f;
}

}  // namespace blaser
