#pragma once
// Central finite-difference verification of reverse-mode gradients.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gsgan/tensor.hpp"

namespace gsgan {

struct GradReport {
  std::string param;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;  // |analytic - numeric| / max(1e-12, |analytic| + |numeric|)
};

struct GradCheckOptions {
  double step = 1e-5;
  std::size_t max_coords_per_param = 32;  // sampled coordinates; all if fewer
  std::uint64_t seed = 7;
};

// loss_fn must be deterministic and rebuild its graph from the given
// parameter tensors on every call. Parameter data is perturbed in place and
// restored. Throws when the loss is non-finite at a perturbed point.
std::vector<GradReport> finite_diff_check(
    const std::function<Tensor()>& loss_fn,
    const std::vector<std::pair<std::string, Tensor>>& params,
    const GradCheckOptions& opt = {});

double max_rel_error(const std::vector<GradReport>& reports);
// Fraction of reports with rel_error <= tol.
double pass_fraction(const std::vector<GradReport>& reports, double tol);

}  // namespace gsgan
