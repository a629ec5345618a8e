#include "dicoh/adam.hpp"

#include <cmath>

#include "dicoh/error.hpp"

namespace dicoh {

void adam_update(AdamState& state, ParameterStore& params) {
  auto all = params.all();
  for (const Parameter* p : all) {
    if (p->trainable && !p->grad.same_shape(p->value)) {
      throw TrainingError("missing gradient for parameter '" + p->name + "'");
    }
  }
  const std::uint64_t t = state.step + 1;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(t));
  for (Parameter* p : all) {
    if (!p->trainable) continue;
    auto [it, inserted] = state.moments.try_emplace(p->name);
    AdamMoments& mom = it->second;
    if (inserted || !mom.first.same_shape(p->value)) {
      mom.first = Tensor(p->value.shape());
      mom.second = Tensor(p->value.shape());
    }
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad[i];
      double& m = mom.first[i];
      double& v = mom.second[i];
      m = state.beta1 * m + (1.0 - state.beta1) * g;
      v = state.beta2 * v + (1.0 - state.beta2) * g * g;
      const double m_hat = m / c1;
      const double v_hat = v / c2;
      p->value[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
  state.step = t;
}

}  // namespace dicoh
