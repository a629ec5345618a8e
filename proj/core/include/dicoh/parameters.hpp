#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dicoh/tensor.hpp"

namespace dicoh {

// A named trainable tensor together with its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;

  void zero_grad() { grad = Tensor(value.shape()); }
};

// Owns every parameter of a model. Addresses are stable for the lifetime of
// the store, so tapes and optimizers may hold raw pointers into it.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  Parameter& add(std::string name, Tensor value, bool trainable = true);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;

  void zero_grad();
  std::size_t scalar_count() const;
  std::size_t size() const { return params_.size(); }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

}  // namespace dicoh
