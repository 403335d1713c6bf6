#pragma once

#include <memory>
#include <vector>

#include "teamrules/common.hpp"
#include "teamrules/dataspace.hpp"

namespace testing {

// Random 0/1 raw features binarized into identity/negation column pairs.
inline std::shared_ptr<teamrules::BinarizedDataset> random_binary(std::size_t rows, std::size_t features,
                                                                  teamrules::Rng& rng, double density = 0.5) {
  auto raw = std::make_shared<teamrules::RawDataset>();
  for (std::size_t j = 0; j < features; ++j) raw->feature_names.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < features; ++j) raw->values.push_back(rng.uniform() < density ? 1.0 : 0.0);
    raw->labels.push_back(rng.coin() ? 1 : 0);
  }
  // Keep every feature non-constant so it yields its column pair.
  for (std::size_t j = 0; j < features && rows > 1; ++j) {
    bool varies = false;
    for (std::size_t i = 1; i < rows; ++i) varies |= raw->values[i * features + j] != raw->values[j];
    if (!varies) raw->values[j] = 1.0 - raw->values[j];
  }
  auto data = std::make_shared<teamrules::BinarizedDataset>(teamrules::binarize(*raw, 1));
  data->source = raw;
  return data;
}

inline std::vector<teamrules::Label> random_labels(std::size_t n, teamrules::Rng& rng) {
  std::vector<teamrules::Label> out(n);
  for (auto& v : out) v = rng.coin() ? 1 : 0;
  return out;
}

}  // namespace testing
