#include "gsgan/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "gsgan/random.hpp"

namespace gsgan {

namespace {

double eval_scalar(const std::function<Tensor()>& loss_fn, const std::string& param) {
  NoGradGuard ng;
  try {
    const Tensor loss = loss_fn();
    if (loss.size() != 1) throw std::invalid_argument("finite_diff_check: loss must be scalar");
    const double v = loss.value();
    if (!std::isfinite(v)) throw std::runtime_error("loss is not finite");
    return v;
  } catch (const std::runtime_error& e) {
    throw std::runtime_error("finite_diff_check: non-finite loss when perturbing '" + param +
                             "': " + e.what());
  }
}

}  // namespace

std::vector<GradReport> finite_diff_check(
    const std::function<Tensor()>& loss_fn,
    const std::vector<std::pair<std::string, Tensor>>& params, const GradCheckOptions& opt) {
  if (!(opt.step > 0.0)) throw std::invalid_argument("finite_diff_check: step must be > 0");

  for (const auto& [name, t] : params) {
    if (!t.defined() || !t.requires_grad()) {
      throw std::invalid_argument("finite_diff_check: parameter '" + name +
                                  "' must be a defined tensor with requires_grad");
    }
    Tensor(t).zero_grad();
  }

  Tensor loss = loss_fn();
  if (loss.size() != 1) throw std::invalid_argument("finite_diff_check: loss must be scalar");
  loss.backward();

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& [name, t] : params) analytic.push_back(t.grad());

  RngEngine rng(seed_stream(opt.seed, 0x67636b /* "gck" */));
  std::vector<GradReport> reports;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const auto& name = params[pi].first;
    Tensor t = params[pi].second;
    auto& values = t.data();

    std::vector<std::size_t> coords;
    if (values.size() <= opt.max_coords_per_param) {
      coords.resize(values.size());
      for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    } else {
      std::unordered_set<std::size_t> picked;
      while (picked.size() < opt.max_coords_per_param) {
        picked.insert(uniform_index(rng, values.size()));
      }
      coords.assign(picked.begin(), picked.end());
      std::sort(coords.begin(), coords.end());
    }

    for (std::size_t ci : coords) {
      const double saved = values[ci];
      values[ci] = saved + opt.step;
      const double up = eval_scalar(loss_fn, name);
      values[ci] = saved - opt.step;
      const double down = eval_scalar(loss_fn, name);
      values[ci] = saved;

      GradReport r;
      r.param = name + "[" + std::to_string(ci) + "]";
      r.analytic = analytic[pi][ci];
      r.numeric = (up - down) / (2.0 * opt.step);
      r.rel_error = std::abs(r.analytic - r.numeric) /
                    std::max(1e-12, std::abs(r.analytic) + std::abs(r.numeric));
      reports.push_back(std::move(r));
    }
  }
  return reports;
}

double max_rel_error(const std::vector<GradReport>& reports) {
  double mx = 0.0;
  for (const auto& r : reports) mx = std::max(mx, r.rel_error);
  return mx;
}

double pass_fraction(const std::vector<GradReport>& reports, double tol) {
  if (reports.empty()) return 1.0;
  std::size_t ok = 0;
  for (const auto& r : reports) {
    if (r.rel_error <= tol) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(reports.size());
}

}  // namespace gsgan
