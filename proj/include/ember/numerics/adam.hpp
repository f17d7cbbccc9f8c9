#pragma once

#include <cstdint>
#include <vector>

#include "ember/numerics/params.hpp"

namespace ember::num {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam over a ParamStore's flat buffers. Coordinates whose
// gradient is exactly zero are left untouched (value and moments), so a
// parameter moves iff its gradient is nonzero.
class Adam {
 public:
  explicit Adam(const ParamStore& store, AdamOptions opts = {});

  // Applies one update from store.grads(). Throws NumericError naming the
  // parameter path if any gradient is not finite; nothing is modified then.
  void step(ParamStore& store);

  std::uint64_t t() const noexcept { return t_; }
  const AdamOptions& options() const noexcept { return opts_; }
  const std::vector<double>& first_moment() const noexcept { return m_; }
  const std::vector<double>& second_moment() const noexcept { return v_; }

 private:
  AdamOptions opts_;
  std::uint64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace ember::num
