#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dicoh/adam.hpp"
#include "dicoh/parameters.hpp"
#include "dicoh/tensor.hpp"

namespace dicoh {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Self-describing container: string metadata plus named tensors.
//
// Layout (all integers little-endian uint64, doubles IEEE-754 binary64 in
// host order):
//   "DICOHCK1"
//   metadata count, then per entry: key length, key bytes, value length, value bytes
//   tensor count, then per tensor: name length, name bytes, rank, dims..., values
struct CheckpointData {
  std::map<std::string, std::string> metadata;
  std::vector<NamedTensor> tensors;

  const Tensor* find(const std::string& name) const;
  const std::string& meta(const std::string& key) const;
};

void write_checkpoint(const std::filesystem::path& path, const CheckpointData& data);
CheckpointData read_checkpoint(const std::filesystem::path& path);

// Appends every parameter as "param/<name>" and the optimizer as
// "adam.first/<name>", "adam.second/<name>" plus adam.* metadata.
void store_parameters(CheckpointData& out, const ParameterStore& params);
void store_adam(CheckpointData& out, const AdamState& adam);
// Overwrites values of parameters present in the store; every store
// parameter must be present in the checkpoint with an identical shape.
void restore_parameters(const CheckpointData& in, ParameterStore& params);
AdamState restore_adam(const CheckpointData& in);

}  // namespace dicoh
