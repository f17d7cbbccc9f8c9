#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ember/numerics/params.hpp"

namespace ember::num {

// Evaluates a deterministic scalar loss at the store's current values. When
// `grad_sink` is non-empty the analytic gradient is accumulated into it.
using LossFn = std::function<double(ParamStore& store, std::span<double> grad_sink)>;

struct GradcheckOptions {
  double delta = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor for the relative error, so coordinates whose true
  // gradient is ~0 are judged on absolute error instead.
  double floor = 1e-6;
  std::size_t samples = 200;
  std::uint64_t seed = 0;
  // Restrict sampling to parameters whose path starts with one of these.
  std::vector<std::string> prefixes;
  // Fault injection: adds `corrupt_amount` to the analytic gradient of every
  // coordinate of this parameter before comparison.
  std::string corrupt_path;
  double corrupt_amount = 1e-2;
};

struct CoordinateCheck {
  std::string path;
  std::size_t index = 0;  // within the parameter
  double analytic = 0;
  double numeric = 0;
  double rel_error = 0;
};

struct GradcheckReport {
  std::vector<CoordinateCheck> checks;
  double max_rel_error = 0;
  std::string worst_path;
  bool passed = true;
};

double relative_error(double analytic, double numeric, double floor);

GradcheckReport gradcheck(ParamStore& store, const LossFn& loss,
                          const GradcheckOptions& opts);

}  // namespace ember::num
