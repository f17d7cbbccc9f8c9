#include "ember/numerics/adam.hpp"

#include <cmath>

#include "ember/error.hpp"

namespace ember::num {

Adam::Adam(const ParamStore& store, AdamOptions opts)
    : opts_(opts), m_(store.total_size(), 0.0), v_(store.total_size(), 0.0) {}

void Adam::step(ParamStore& store) {
  auto& x = store.values();
  const auto& g = store.grads();
  if (g.size() != m_.size())
    throw DimensionError("optimizer state does not match parameter layout");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i]))
      throw NumericError("non-finite gradient in parameter " + store.owner(i).path);
  }
  ++t_;
  const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] == 0.0) continue;
    m_[i] = opts_.beta1 * m_[i] + (1.0 - opts_.beta1) * g[i];
    v_[i] = opts_.beta2 * v_[i] + (1.0 - opts_.beta2) * g[i] * g[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    x[i] -= opts_.lr * mhat / (std::sqrt(vhat) + opts_.epsilon);
  }
}

}  // namespace ember::num
