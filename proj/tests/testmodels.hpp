#pragma once

// Test access to the builtin spray models plus box sampling helpers.

#include <memory>
#include <random>
#include <vector>

#include "sprayholo/builtins.hpp"

namespace shtest {

using sprayholo::SprayModel;

inline std::shared_ptr<const SprayModel> make_model(int which) {
  return sprayholo::builtin_examples()[static_cast<std::size_t>(which - 1)].model;
}

// the pinned evaluation point ((x1,x2),(y1,y2)) = ((0,1),(1,1))
inline std::vector<double> pinned_point() { return {0.0, 1.0, 1.0, 1.0}; }

inline std::vector<double> sample_in_box(const SprayModel& m,
                                         std::mt19937_64& rng) {
  std::vector<double> z(m.box_lo.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    z[i] = m.box_lo[i] + u * (m.box_hi[i] - m.box_lo[i]);
  }
  return z;
}

inline std::vector<std::vector<double>> samples_in_box(const SprayModel& m,
                                                       int count,
                                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(sample_in_box(m, rng));
  return out;
}

} // namespace shtest
