#include "ember/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "ember/error.hpp"
#include "ember/numerics/rng.hpp"

namespace ember::num {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradcheckReport gradcheck(ParamStore& store, const LossFn& loss,
                          const GradcheckOptions& opts) {
  if (opts.samples == 0) throw ConfigError("gradcheck needs at least one sample");

  std::vector<std::size_t> eligible;
  for (const auto& info : store.infos()) {
    const bool keep =
        opts.prefixes.empty() ||
        std::any_of(opts.prefixes.begin(), opts.prefixes.end(),
                    [&](const std::string& p) { return info.path.rfind(p, 0) == 0; });
    if (!keep) continue;
    for (std::size_t k = 0; k < info.size; ++k) eligible.push_back(info.offset + k);
  }
  if (eligible.empty()) throw ConfigError("gradcheck: no parameters match the requested prefixes");

  Rng rng(opts.seed);
  rng.shuffle(eligible);
  if (eligible.size() > opts.samples) eligible.resize(opts.samples);
  std::sort(eligible.begin(), eligible.end());

  std::vector<double> analytic(store.total_size(), 0.0);
  loss(store, analytic);
  if (!opts.corrupt_path.empty()) {
    const auto& info = store.info(store.id(opts.corrupt_path));
    for (std::size_t k = 0; k < info.size; ++k)
      analytic[info.offset + k] += opts.corrupt_amount;
  }

  GradcheckReport report;
  auto& x = store.values();
  for (std::size_t flat : eligible) {
    const double saved = x[flat];
    x[flat] = saved + opts.delta;
    const double plus = loss(store, {});
    x[flat] = saved - opts.delta;
    const double minus = loss(store, {});
    x[flat] = saved;

    const auto& owner = store.owner(flat);
    CoordinateCheck c;
    c.path = owner.path;
    c.index = flat - owner.offset;
    c.analytic = analytic[flat];
    c.numeric = (plus - minus) / (2.0 * opts.delta);
    c.rel_error = relative_error(c.analytic, c.numeric, opts.floor);
    if (!std::isfinite(c.rel_error)) c.rel_error = INFINITY;
    if (report.worst_path.empty() || c.rel_error > report.max_rel_error) {
      report.max_rel_error = c.rel_error;
      report.worst_path = c.path;
    }
    report.checks.push_back(std::move(c));
  }
  report.passed = report.max_rel_error < opts.tolerance;
  return report;
}

}  // namespace ember::num
