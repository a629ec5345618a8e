#include "dicoh/parameters.hpp"

#include "dicoh/error.hpp"

namespace dicoh {

Parameter& ParameterStore::add(std::string name, Tensor value, bool trainable) {
  if (find(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  auto p = std::make_unique<Parameter>();
  p->name = std::move(name);
  p->value = std::move(value);
  p->trainable = trainable;
  p->zero_grad();
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter* ParameterStore::find(const std::string& name) {
  for (auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

const Parameter* ParameterStore::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

Parameter& ParameterStore::get(const std::string& name) {
  if (auto* p = find(name)) return *p;
  throw ConfigError("unknown parameter '" + name + "'");
}

const Parameter& ParameterStore::get(const std::string& name) const {
  if (const auto* p = find(name)) return *p;
  throw ConfigError("unknown parameter '" + name + "'");
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

}  // namespace dicoh
