#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "dicoh/parameters.hpp"
#include "dicoh/tensor.hpp"

namespace dicoh {

struct AdamMoments {
  Tensor first;
  Tensor second;
};

// Bias-corrected Adam. Moments are keyed by parameter name and created on
// the first update that sees the parameter.
struct AdamState {
  double learning_rate = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::map<std::string, AdamMoments> moments;
};

// Applies one step to every trainable parameter in the store using the
// gradients accumulated in Parameter::grad. Throws TrainingError naming the
// first parameter whose gradient is missing or mis-shaped.
void adam_update(AdamState& state, ParameterStore& params);

}  // namespace dicoh
