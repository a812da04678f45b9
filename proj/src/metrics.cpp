#include "gsgan/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gsgan/losses.hpp"

namespace gsgan {

namespace {

constexpr double kDiagLoading = 1e-6;

std::vector<double> mean_vector(const std::vector<std::vector<double>>& rows) {
  const std::size_t d = rows[0].size();
  std::vector<double> mu(d, 0.0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < d; ++i) mu[i] += r[i];
  }
  for (auto& v : mu) v /= static_cast<double>(rows.size());
  return mu;
}

// Unbiased sample covariance with diagonal loading.
std::vector<double> covariance(const std::vector<std::vector<double>>& rows,
                               const std::vector<double>& mu) {
  const std::size_t n = rows.size();
  const std::size_t d = mu.size();
  std::vector<double> cov(d * d, 0.0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < d; ++i) {
      const double xi = r[i] - mu[i];
      for (std::size_t j = i; j < d; ++j) cov[i * d + j] += xi * (r[j] - mu[j]);
    }
  }
  const double inv = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      cov[i * d + j] *= inv;
      cov[j * d + i] = cov[i * d + j];
    }
  }
  for (std::size_t i = 0; i < d; ++i) cov[i * d + i] += kDiagLoading;
  return cov;
}

// Symmetric PSD square root via eigendecomposition with eigenvalue clamping.
std::vector<double> psd_sqrt(const std::vector<double>& a, std::size_t n) {
  std::vector<double> vecs;
  std::vector<double> vals = symmetric_eigenvalues(a, n, &vecs);
  for (auto& v : vals) v = std::sqrt(std::max(0.0, v));
  // Q diag(sqrt(vals)) Q^T, vecs holds eigenvectors as columns.
  std::vector<double> out(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = vals[k];
    if (s == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double qik = vecs[i * n + k] * s;
      if (qik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += qik * vecs[j * n + k];
    }
  }
  return out;
}

std::vector<double> matmul_sq(const std::vector<double>& a, const std::vector<double>& b,
                              std::size_t n) {
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double av = a[i * n + k];
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += av * b[k * n + j];
    }
  }
  return out;
}

}  // namespace

double pairwise_diversity(const std::vector<Tensor>& images) {
  if (images.size() < 2) throw std::invalid_argument("pairwise_diversity: need >= 2 images");
  const std::size_t n = images.size();
  const std::size_t px = images[0].size();
  for (const auto& im : images) {
    if (im.size() != px) throw std::invalid_argument("pairwise_diversity: image size mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = images[i].data();
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& b = images[j].data();
      double sq = 0.0;
      for (std::size_t c = 0; c < px; ++c) {
        const double d = a[c] - b[c];
        sq += d * d;
      }
      acc += std::sqrt(sq / static_cast<double>(px));  // L2 / sqrt(N) per pair
    }
  }
  return acc / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

double frechet_feature_distance(const std::vector<std::vector<double>>& real_feats,
                                const std::vector<std::vector<double>>& fake_feats) {
  if (real_feats.size() < 2 || fake_feats.size() < 2) {
    throw std::invalid_argument("frechet_feature_distance: need >= 2 vectors per side");
  }
  const std::size_t d = real_feats[0].size();
  for (const auto& r : real_feats) {
    if (r.size() != d) throw std::invalid_argument("frechet_feature_distance: dimension mismatch");
  }
  for (const auto& f : fake_feats) {
    if (f.size() != d) throw std::invalid_argument("frechet_feature_distance: dimension mismatch");
  }

  const std::vector<double> mu_r = mean_vector(real_feats);
  const std::vector<double> mu_f = mean_vector(fake_feats);
  const std::vector<double> cov_r = covariance(real_feats, mu_r);
  const std::vector<double> cov_f = covariance(fake_feats, mu_f);

  double mean_term = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = mu_r[i] - mu_f[i];
    mean_term += diff * diff;
  }

  // tr((S_r S_f)^{1/2}) = tr((A S_f A)^{1/2}) with A = S_r^{1/2}; the inner
  // matrix is symmetric PSD so its eigenvalues can be clamped and rooted.
  const std::vector<double> a = psd_sqrt(cov_r, d);
  std::vector<double> inner = matmul_sq(matmul_sq(a, cov_f, d), a, d);
  for (std::size_t i = 0; i < d; ++i) {  // symmetrize against roundoff
    for (std::size_t j = i + 1; j < d; ++j) {
      const double v = 0.5 * (inner[i * d + j] + inner[j * d + i]);
      inner[i * d + j] = v;
      inner[j * d + i] = v;
    }
  }
  const std::vector<double> vals = symmetric_eigenvalues(inner, d);
  double tr_sqrt = 0.0;
  for (double v : vals) tr_sqrt += std::sqrt(std::max(0.0, v));

  double tr_r = 0.0, tr_f = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    tr_r += cov_r[i * d + i];
    tr_f += cov_f[i * d + i];
  }
  return mean_term + tr_r + tr_f - 2.0 * tr_sqrt;
}

double smoothness_from_features(const Tensor& path_features) {
  if (!path_features.defined() || path_features.rank() != 4 || path_features.shape()[0] < 3) {
    throw std::invalid_argument("smoothness_from_features: expected {k>=3,c,h,w} features");
  }
  NoGradGuard ng;
  const std::size_t k = path_features.shape()[0];
  const std::size_t c = path_features.shape()[1];
  const std::size_t h = path_features.shape()[2], w = path_features.shape()[3];
  const std::size_t oh = (h + 3) / 4, ow = (w + 3) / 4;
  const Tensor pooled = adaptive_avg_pool2d(path_features, oh, ow);  // {k,c,oh,ow}
  const std::size_t stride = c * oh * ow;

  std::vector<double> dists(k - 1, 0.0);
  const auto& pd = pooled.data();
  for (std::size_t i = 0; i + 1 < k; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < stride; ++j) {
      const double diff = pd[i * stride + j] - pd[(i + 1) * stride + j];
      sq += diff * diff;
    }
    dists[i] = std::sqrt(sq);
  }
  double mx = 0.0, total = 0.0;
  for (double v : dists) {
    mx = std::max(mx, v);
    total += v;
  }
  const double mean_d = total / static_cast<double>(dists.size());
  if (mean_d == 0.0) return 1.0;  // degenerate path
  return mx / mean_d;
}

double interpolation_smoothness(const Generator& g, const Tensor& z_start, const Tensor& z_end,
                                std::size_t k) {
  if (k < 3) throw std::invalid_argument("interpolation_smoothness: k must be >= 3");
  NoGradGuard ng;
  const std::vector<Tensor> path = interpolation_set(z_start, z_end, k);
  const std::size_t dim = z_start.size();
  std::vector<double> zdata;
  zdata.reserve(k * dim);
  for (const auto& z : path) {
    const auto& v = z.data();
    zdata.insert(zdata.end(), v.begin(), v.end());
  }
  return smoothness_from_features(g.forward(Tensor::from_data({k, dim}, std::move(zdata))).features);
}

std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n,
                                          std::vector<double>* eigenvectors_out) {
  if (n == 0 || a.size() != n * n) {
    throw std::invalid_argument("symmetric_eigenvalues: bad dimensions");
  }
  std::vector<double> v;
  if (eigenvectors_out) {
    v.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  }

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    }
    if (off <= 1e-24) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a[i * n + p];
          const double aiq = a[i * n + q];
          a[i * n + p] = c * aip - s * aiq;
          a[i * n + q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a[p * n + i];
          const double aqi = a[q * n + i];
          a[p * n + i] = c * api - s * aqi;
          a[q * n + i] = s * api + c * aqi;
        }
        if (eigenvectors_out) {
          for (std::size_t i = 0; i < n; ++i) {
            const double vip = v[i * n + p];
            const double viq = v[i * n + q];
            v[i * n + p] = c * vip - s * viq;
            v[i * n + q] = s * vip + c * viq;
          }
        }
      }
    }
  }

  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = a[i * n + i];
  if (eigenvectors_out) *eigenvectors_out = std::move(v);
  return vals;
}

}  // namespace gsgan
