#pragma once
// Pre-shape space geometry: projection of feature maps onto the unit
// hypersphere of centered 2 x m landmark configurations, great-circle
// geodesics between pre-shapes, and weighted barycenters built from iterated
// geodesic curves. All constructions are differentiable Tensor expressions so
// gradients flow back into the networks that produced the features.

#include <cstddef>
#include <vector>

#include "gsgan/tensor.hpp"

namespace gsgan {

// Centered (row means ~0), unit-Frobenius-norm 2 x m configuration.
struct PreShape {
  Tensor points;  // {2, m}
  std::size_t landmarks() const { return points.shape()[1]; }
};

struct WeightVector {
  std::vector<double> weights;  // nonnegative, positive sum
};

struct GeodesicSpec {
  PreShape tau1;
  PreShape tau2;
  double d = 0.0;  // geodesic distance arccos(<tau1, tau2>), radians
  double s = 0.0;  // arc parameter, 0 <= s <= d
};

// Project a feature tensor: flatten row-major, split into two half rows,
// subtract row means, normalize to unit Frobenius norm.
// Throws "odd feature volume" for odd element counts and "degenerate feature"
// when the centered configuration has (near-)zero norm.
PreShape project_preshape(const Tensor& feature);

// Inverse of the projection's reshape: lay the 2 x m points back out as
// `shape` (row-major). Norm/centering are left as-is.
Tensor preshape_to_feature(const PreShape& ps, const Shape& shape);

// arccos of the clamped inner product; in [0, pi]. The _t variant returns a
// differentiable scalar tensor.
double geodesic_distance(const PreShape& a, const PreShape& b);
Tensor geodesic_distance_t(const PreShape& a, const PreShape& b);

GeodesicSpec make_geodesic_spec(PreShape tau1, PreShape tau2, double s);

// Point at arc length spec.s along the great circle from tau1 toward tau2.
// Coincident endpoints (d <= 1e-12) return tau1; antipodal endpoints
// (d >= pi - 1e-9) throw.
PreShape geodesic_curve_point(const GeodesicSpec& spec);
PreShape geodesic_curve_at(const PreShape& tau1, const PreShape& tau2, double s_radians);
// Same curve with s = fraction * d; fraction in [0, 1].
PreShape geodesic_curve_fraction(const PreShape& tau1, const PreShape& tau2, double fraction);

// Weighted barycenter approximated by iterated curves, in input order:
// mu_1 = tau_1, mu_j = curve(mu_{j-1}, tau_j) at fraction w_j / sum_{i<=j} w_i.
PreShape geodesic_surface_point(const std::vector<PreShape>& taus, const WeightVector& omega);

}  // namespace gsgan
