#pragma once
// Desk-scale evaluation: mean pairwise pixel distance over a sample set,
// Fréchet distance between feature Gaussians, and an interpolation-path
// evenness score. These are small-model proxies, not the pretrained-network
// metrics used in the literature.

#include <cstddef>
#include <vector>

#include "gsgan/nets.hpp"
#include "gsgan/tensor.hpp"

namespace gsgan {

struct MetricsRow {
  std::size_t step = 0;
  double l_adv_g = 0.0;
  double l_adv_d = 0.0;
  double l_inp = 0.0;
  double l_dr = 0.0;
  double l_g = 0.0;
  double pairwise_diversity = 0.0;
  double ffd = 0.0;
  double smoothness = 0.0;
};

// Mean over unordered pairs of ||a - b||_2 / sqrt(pixel count).
double pairwise_diversity(const std::vector<Tensor>& images);

// ||mu_r - mu_f||^2 + tr(S_r + S_f - 2 (S_r S_f)^{1/2}) with unbiased sample
// covariances, 1e-6 diagonal loading, and an eigendecomposition-based
// symmetric PSD square root.
double frechet_feature_distance(const std::vector<std::vector<double>>& real_feats,
                                const std::vector<std::vector<double>>& fake_feats);

// Generate k images along the segment [z_start, z_end], pool the generator
// features as the distance regularizer does, and return max/mean of the k-1
// consecutive distances. 1.0 means perfectly even; degenerate paths (all
// distances zero) return 1.0 by convention.
double interpolation_smoothness(const Generator& g, const Tensor& z_start, const Tensor& z_end,
                                std::size_t k);

// The distance-profile score on an explicit {k,c,h,w} feature path.
double smoothness_from_features(const Tensor& path_features);

// Cyclic-Jacobi eigendecomposition of a symmetric matrix (row-major n x n).
// Returns eigenvalues; eigenvectors_out columns (row-major) when non-null.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n,
                                          std::vector<double>* eigenvectors_out = nullptr);

}  // namespace gsgan
