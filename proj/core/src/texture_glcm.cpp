// Gray-level co-occurrence features (IBSI naming). Each offset's symmetric
// matrix is normalized to a joint probability p(i,j); features are computed
// per offset and averaged over offsets that contain at least one pair.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "ipmn/radiomics.hpp"

namespace ipmn {
namespace {

double xlog2x(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

std::vector<double> glcm_offset_features(const GrayMatrix& counts, int ng) {
  const double total = counts.sum();
  std::vector<double> p(counts.values.size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = counts.values[k] / total;
  auto P = [&](int i, int j) { return p[static_cast<std::size_t>(i) * ng + j]; };

  // Marginals (symmetric matrix, so px == py).
  std::vector<double> px(ng, 0.0);
  for (int i = 0; i < ng; ++i) {
    for (int j = 0; j < ng; ++j) px[i] += P(i, j);
  }
  double mu = 0.0;
  for (int i = 0; i < ng; ++i) mu += (i + 1) * px[i];
  double var = 0.0;
  for (int i = 0; i < ng; ++i) var += (i + 1 - mu) * (i + 1 - mu) * px[i];

  // p_{x+y}(k), k = 2..2ng and p_{x-y}(k), k = 0..ng-1.
  std::vector<double> psum(2 * ng + 1, 0.0), pdiff(ng, 0.0);

  double autocorr = 0.0, prominence = 0.0, shade = 0.0, tendency = 0.0, contrast = 0.0;
  double energy = 0.0, joint_entropy = 0.0, idm = 0.0, idmn = 0.0, id = 0.0, idn = 0.0;
  double inv_var = 0.0, max_prob = 0.0, hxy1 = 0.0, hxy2 = 0.0;
  const double ng2 = static_cast<double>(ng) * ng;
  for (int i = 0; i < ng; ++i) {
    const double li = i + 1;
    for (int j = 0; j < ng; ++j) {
      const double lj = j + 1;
      const double pij = P(i, j);
      const double pxy = px[i] * px[j];
      if (pxy > 0.0) hxy2 -= pxy * std::log2(pxy);
      if (pij == 0.0) continue;
      const double diff = li - lj;
      const double adiff = std::abs(diff);
      const double centered = li + lj - 2.0 * mu;
      psum[i + j + 2] += pij;
      pdiff[static_cast<std::size_t>(adiff)] += pij;
      autocorr += li * lj * pij;
      prominence += centered * centered * centered * centered * pij;
      shade += centered * centered * centered * pij;
      tendency += centered * centered * pij;
      contrast += diff * diff * pij;
      energy += pij * pij;
      joint_entropy -= xlog2x(pij);
      idm += pij / (1.0 + diff * diff);
      idmn += pij / (1.0 + diff * diff / ng2);
      id += pij / (1.0 + adiff);
      idn += pij / (1.0 + adiff / ng);
      if (i != j) inv_var += pij / (diff * diff);
      max_prob = std::max(max_prob, pij);
      hxy1 -= pij * std::log2(pxy);
    }
  }

  const double correlation = var > 0.0 ? (autocorr - mu * mu) / var : 0.0;

  double diff_avg = 0.0, diff_entropy = 0.0;
  for (int k = 0; k < ng; ++k) {
    diff_avg += k * pdiff[k];
    diff_entropy -= xlog2x(pdiff[k]);
  }
  double diff_var = 0.0;
  for (int k = 0; k < ng; ++k) diff_var += (k - diff_avg) * (k - diff_avg) * pdiff[k];

  double sum_avg = 0.0, sum_entropy = 0.0;
  for (int k = 2; k <= 2 * ng; ++k) {
    sum_avg += k * psum[k];
    sum_entropy -= xlog2x(psum[k]);
  }

  double hx = 0.0;
  for (double v : px) hx -= xlog2x(v);
  const double imc1 = hx > 0.0 ? (joint_entropy - hxy1) / hx : 0.0;
  const double imc2 = hxy2 > joint_entropy ? std::sqrt(1.0 - std::exp(-2.0 * (hxy2 - joint_entropy))) : 0.0;

  // Maximal correlation coefficient: sqrt of the second largest eigenvalue of
  // Q = D^-1 P D^-1 P^T over present levels. With P symmetric, Q is similar to
  // S^2 where S = D^-1/2 P D^-1/2, so its eigenvalues are squared eigenvalues of S.
  double mcc = 0.0;
  std::vector<int> present;
  for (int i = 0; i < ng; ++i) {
    if (px[i] > 0.0) present.push_back(i);
  }
  if (present.size() >= 2) {
    const auto m = static_cast<Eigen::Index>(present.size());
    Eigen::MatrixXd s(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) {
        const int i = present[a], j = present[b];
        s(a, b) = P(i, j) / std::sqrt(px[i] * px[j]);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
    std::vector<double> lambda(present.size());
    for (Eigen::Index a = 0; a < m; ++a) lambda[a] = solver.eigenvalues()(a) * solver.eigenvalues()(a);
    std::sort(lambda.begin(), lambda.end(), std::greater<>());
    mcc = std::sqrt(std::max(0.0, lambda[1]));
  }

  // Order matches glcm_feature_names().
  return {autocorr,     prominence,  shade, tendency, contrast,    correlation, diff_avg, diff_entropy,
          diff_var,     id,          idm,   idmn,     idn,         imc1,        imc2,     inv_var,
          mu,           energy,      joint_entropy,   mcc,         max_prob,    sum_avg,  sum_entropy,
          var};
}

}  // namespace

GrayMatrix glcm_matrix(const DiscretizedRoi& d, const Index3& offset) {
  GrayMatrix m(d.ng, d.ng);
  for (int z = 0; z < d.dims[2]; ++z) {
    for (int y = 0; y < d.dims[1]; ++y) {
      for (int x = 0; x < d.dims[0]; ++x) {
        const int a = d.at(x, y, z);
        if (a == 0) continue;
        const int b = d.level_or_zero(x + offset[0], y + offset[1], z + offset[2]);
        if (b == 0) continue;
        m(a - 1, b - 1) += 1.0;
        m(b - 1, a - 1) += 1.0;
      }
    }
  }
  return m;
}

NamedValues glcm_features(const DiscretizedRoi& d) {
  const auto names = glcm_feature_names();
  std::vector<double> acc(names.size(), 0.0);
  int used = 0;
  for (const auto& offset : kDirections13) {
    const GrayMatrix counts = glcm_matrix(d, offset);
    if (counts.sum() == 0.0) continue;
    const auto f = glcm_offset_features(counts, d.ng);
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += f[k];
    ++used;
  }
  NamedValues out;
  for (std::size_t k = 0; k < names.size(); ++k) {
    out.add(std::string(names[k]), used > 0 ? acc[k] / used : 0.0);
  }
  return out;
}

}  // namespace ipmn
