#include "gsgan/preshape.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gsgan {

namespace {

constexpr double kCoincidentTol = 1e-12;
constexpr double kAntipodalTol = 1e-9;
constexpr double kDegenerateNorm = 1e-12;

double clamped_inner(const PreShape& a, const PreShape& b) {
  if (a.points.shape() != b.points.shape()) {
    throw std::invalid_argument("geodesic_distance: pre-shape size mismatch " +
                                shape_str(a.points.shape()) + " vs " + shape_str(b.points.shape()));
  }
  const auto& av = a.points.data();
  const auto& bv = b.points.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  return std::min(1.0, std::max(-1.0, acc));
}

// Shared curve core. s_t must be a scalar tensor holding a value in [0, d].
PreShape curve_core(const PreShape& tau1, const PreShape& tau2, const Tensor& d_t,
                    const Tensor& s_t) {
  // G(s) = cos(s) tau1 + sin(s) (tau2 - cos(d) tau1) / sin(d)
  const Tensor direction = scalar_div(sub(tau2.points, scalar_mul(cos(d_t), tau1.points)),
                                      sin(d_t));
  const Tensor point = add(scalar_mul(cos(s_t), tau1.points), scalar_mul(sin(s_t), direction));
  return PreShape{point};
}

}  // namespace

PreShape project_preshape(const Tensor& feature) {
  if (!feature.defined() || feature.size() == 0) {
    throw std::invalid_argument("project_preshape: undefined or empty feature");
  }
  const std::size_t n = feature.size();
  if (n % 2 != 0) {
    throw std::invalid_argument("project_preshape: odd feature volume (" + std::to_string(n) +
                                " elements in " + shape_str(feature.shape()) + ")");
  }
  const Tensor config = reshape(feature, {2, n / 2});
  const Tensor centered = center_rows(config);
  const Tensor norm = l2_norm(centered);
  if (norm.value() <= kDegenerateNorm) {
    throw std::runtime_error("project_preshape: degenerate feature (zero norm after centering)");
  }
  return PreShape{scalar_div(centered, norm)};
}

Tensor preshape_to_feature(const PreShape& ps, const Shape& shape) {
  return reshape(ps.points, shape);
}

double geodesic_distance(const PreShape& a, const PreShape& b) {
  return std::acos(clamped_inner(a, b));
}

Tensor geodesic_distance_t(const PreShape& a, const PreShape& b) {
  if (a.points.shape() != b.points.shape()) {
    throw std::invalid_argument("geodesic_distance: pre-shape size mismatch " +
                                shape_str(a.points.shape()) + " vs " + shape_str(b.points.shape()));
  }
  return acos(clamp(dot(a.points, b.points), -1.0, 1.0));
}

GeodesicSpec make_geodesic_spec(PreShape tau1, PreShape tau2, double s) {
  GeodesicSpec spec;
  spec.d = geodesic_distance(tau1, tau2);
  if (s < 0.0 || s > spec.d + kCoincidentTol) {
    throw std::invalid_argument("make_geodesic_spec: arc parameter s=" + std::to_string(s) +
                                " outside [0, d=" + std::to_string(spec.d) + "]");
  }
  spec.s = std::min(s, spec.d);
  spec.tau1 = std::move(tau1);
  spec.tau2 = std::move(tau2);
  return spec;
}

PreShape geodesic_curve_point(const GeodesicSpec& spec) {
  const double d = geodesic_distance(spec.tau1, spec.tau2);
  if (d <= kCoincidentTol) return spec.tau1;  // coincident endpoints: the curve degenerates
  if (d >= std::numbers::pi - kAntipodalTol) {
    throw std::runtime_error("geodesic_curve_point: antipodal pre-shapes (direction undefined)");
  }
  if (spec.s < 0.0 || spec.s > d + kCoincidentTol) {
    throw std::invalid_argument("geodesic_curve_point: arc parameter s=" + std::to_string(spec.s) +
                                " outside [0, d=" + std::to_string(d) + "]");
  }
  const Tensor d_t = geodesic_distance_t(spec.tau1, spec.tau2);
  return curve_core(spec.tau1, spec.tau2, d_t, Tensor::scalar(std::min(spec.s, d)));
}

PreShape geodesic_curve_at(const PreShape& tau1, const PreShape& tau2, double s_radians) {
  GeodesicSpec spec;
  spec.tau1 = tau1;
  spec.tau2 = tau2;
  spec.s = s_radians;
  return geodesic_curve_point(spec);
}

PreShape geodesic_curve_fraction(const PreShape& tau1, const PreShape& tau2, double fraction) {
  if (fraction < 0.0 || fraction > 1.0) {
    throw std::invalid_argument("geodesic_curve_fraction: fraction " + std::to_string(fraction) +
                                " outside [0, 1]");
  }
  const double d = geodesic_distance(tau1, tau2);
  if (d <= kCoincidentTol) return tau1;
  if (d >= std::numbers::pi - kAntipodalTol) {
    throw std::runtime_error("geodesic_curve_point: antipodal pre-shapes (direction undefined)");
  }
  const Tensor d_t = geodesic_distance_t(tau1, tau2);
  return curve_core(tau1, tau2, d_t, scale(d_t, fraction));
}

PreShape geodesic_surface_point(const std::vector<PreShape>& taus, const WeightVector& omega) {
  if (taus.empty()) throw std::invalid_argument("geodesic_surface_point: empty pre-shape list");
  if (taus.size() != omega.weights.size()) {
    throw std::invalid_argument("geodesic_surface_point: " + std::to_string(taus.size()) +
                                " pre-shapes vs " + std::to_string(omega.weights.size()) +
                                " weights");
  }
  double total = 0.0;
  for (double w : omega.weights) {
    if (w < 0.0) throw std::invalid_argument("geodesic_surface_point: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("geodesic_surface_point: weights sum to zero");

  PreShape mu = taus[0];
  double cumulative = omega.weights[0];
  for (std::size_t j = 1; j < taus.size(); ++j) {
    const double wj = omega.weights[j];
    cumulative += wj;
    if (wj == 0.0) continue;  // zero fraction: stay at mu
    mu = geodesic_curve_fraction(mu, taus[j], wj / cumulative);
  }
  return mu;
}

}  // namespace gsgan
