#pragma once

#include <filesystem>
#include <optional>

#include "fairshift/nn.hpp"

namespace fairshift {

// JSON checkpoint, format "fairshift-checkpoint" version 1:
//
//   {
//     "format": "fairshift-checkpoint", "version": 1,
//     "predictor": {
//       "config": {"input_dim", "hidden_width", "representation_width", "head_width", "dropout_rate"},
//       "input_normalization": {"mean": [d], "std": [d]},
//       "layers": [ {"in": I, "out": O, "weight": [I*O row-major], "bias": [O]} x 4 ]
//     },
//     "weight_network": null | {"layers": [ layer x 2 ]}
//   }
//
// Doubles are written in shortest round-trip form, so save/load is exact.
struct Checkpoint {
  PredictorModel predictor;
  std::optional<WeightNetwork> weight_network;
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fairshift
