#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ember/model/train.hpp"
#include "ember/numerics/gradcheck.hpp"

namespace ember::model {

struct ModuleGradcheck {
  std::string module;  // e.g. "intra_extractors/hfe"
  std::string prefix;  // parameter path prefix that was sampled
  num::GradcheckReport report;
};

struct GradcheckRequest {
  std::size_t samples = 200;  // per module
  std::uint64_t seed = 0;
  double tolerance = 1e-4;
  std::string corrupt_path;   // fault injection, see GradcheckOptions
};

// Finite-difference check of the joint loss on a two-item synthetic batch
// (one item lacks comments so the placeholder path is live), run separately
// for each parameter group of `cfg.model`. Parameters start from the seeded
// initialisation plus a small uniform perturbation so no gradient is
// trivially zero.
std::vector<ModuleGradcheck> check_module_gradients(const TrainConfig& cfg,
                                                    const GradcheckRequest& req);

}  // namespace ember::model
