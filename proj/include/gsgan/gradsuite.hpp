#pragma once
// Named finite-difference suites over the training losses, built on small
// seeded fixture networks. Used by the `gradcheck` CLI command and the
// acceptance tests.

#include <cstdint>
#include <string>
#include <vector>

#include "gsgan/gradcheck.hpp"

namespace gsgan {

enum class GradTarget { lg, ldr, linp, adv, total, all };

GradTarget parse_grad_target(const std::string& name);

struct GradSuiteResult {
  std::string name;
  std::vector<GradReport> reports;
};

std::vector<GradSuiteResult> run_gradient_suite(GradTarget target, std::uint64_t seed = 11);

}  // namespace gsgan
