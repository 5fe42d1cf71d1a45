#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "ipmn/error.hpp"
#include "ipmn/stats.hpp"

namespace ipmn {

OlsResult ols_fit(const Columns& predictors, std::span<const double> y) {
  const auto n = static_cast<Eigen::Index>(y.size());
  const auto p = static_cast<Eigen::Index>(predictors.size());
  if (n <= p + 1) throw InvalidArgument("OLS needs more cases than parameters");
  for (const auto& col : predictors) {
    if (static_cast<Eigen::Index>(col.size()) != n) throw InvalidArgument("OLS predictor length mismatch");
  }

  Eigen::MatrixXd a(n, p + 1);
  Eigen::VectorXd yv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < p; ++j) a(i, j + 1) = predictors[j][i];
    yv(i) = y[i];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < p + 1) throw NumericError("OLS design matrix is rank deficient");

  const Eigen::VectorXd beta = qr.solve(yv);
  const Eigen::VectorXd resid = yv - a * beta;
  const double rss = resid.squaredNorm();
  const double mean_y = yv.mean();
  const double tss = (yv.array() - mean_y).square().sum();

  OlsResult r;
  r.n = static_cast<std::size_t>(n);
  r.dof = static_cast<std::size_t>(n - p - 1);
  r.r_squared = tss > 0.0 ? std::clamp(1.0 - rss / tss, 0.0, 1.0) : 1.0;
  r.residuals.assign(resid.data(), resid.data() + n);

  // (A^T A)^-1 = P R^-1 R^-T P^T with A P = Q R.
  const Eigen::MatrixXd rmat = qr.matrixR().topLeftCorner(p + 1, p + 1).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd rinv =
      rmat.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p + 1, p + 1));
  const Eigen::MatrixXd cov_perm = rinv * rinv.transpose();
  const auto& perm = qr.colsPermutation();
  const Eigen::MatrixXd xtx_inv = perm * cov_perm * perm.transpose();

  const double sigma2 = rss / static_cast<double>(r.dof);
  for (Eigen::Index j = 0; j <= p; ++j) {
    const double b = beta(j);
    const double se = std::sqrt(std::max(0.0, sigma2 * xtx_inv(j, j)));
    double t = 0.0, pv = 1.0;
    if (se > 0.0) {
      t = b / se;
      pv = student_t_two_sided_p(t, static_cast<double>(r.dof));
    } else if (b != 0.0) {
      t = std::copysign(std::numeric_limits<double>::infinity(), b);
      pv = 0.0;
    }
    r.coefficients.push_back(b);
    r.std_errors.push_back(se);
    r.t_stats.push_back(t);
    r.p_values.push_back(pv);
  }
  return r;
}

namespace {

Columns gather(const Columns& all, const std::vector<std::size_t>& idx) {
  Columns out;
  out.reserve(idx.size());
  for (std::size_t j : idx) out.push_back(all[j]);
  return out;
}

}  // namespace

StepwiseResult stepwise_select(const Columns& predictors, std::span<const double> y, double p_enter,
                               double p_remove) {
  if (!(p_enter > 0.0 && p_enter <= p_remove)) throw InvalidArgument("stepwise needs 0 < p_enter <= p_remove");
  // Validate the inputs once up front (throws on bad shapes).
  ols_fit({}, y);

  std::vector<std::size_t> selected;
  std::set<std::vector<std::size_t>> visited{selected};
  const std::size_t max_steps = 4 * predictors.size() + 4;

  for (std::size_t step = 0; step < max_steps; ++step) {
    // Forward step.
    std::size_t best = predictors.size();
    double best_p = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < predictors.size(); ++j) {
      if (std::binary_search(selected.begin(), selected.end(), j)) continue;
      std::vector<std::size_t> trial = selected;
      trial.insert(std::upper_bound(trial.begin(), trial.end(), j), j);
      if (trial.size() + 1 >= y.size()) continue;
      OlsResult fit;
      try {
        fit = ols_fit(gather(predictors, trial), y);
      } catch (const NumericError&) {
        continue;  // collinear with the current model
      }
      const auto pos = static_cast<std::size_t>(std::find(trial.begin(), trial.end(), j) - trial.begin());
      const double pj = fit.p_values[pos + 1];
      if (pj < best_p) {
        best_p = pj;
        best = j;
      }
    }
    if (best == predictors.size() || !(best_p < p_enter)) break;
    selected.insert(std::upper_bound(selected.begin(), selected.end(), best), best);

    // Backward steps.
    while (!selected.empty()) {
      const OlsResult fit = ols_fit(gather(predictors, selected), y);
      std::size_t worst = selected.size();
      double worst_p = p_remove;
      for (std::size_t k = 0; k < selected.size(); ++k) {
        if (fit.p_values[k + 1] > worst_p) {
          worst_p = fit.p_values[k + 1];
          worst = k;
        }
      }
      if (worst == selected.size()) break;
      selected.erase(selected.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    if (!visited.insert(selected).second) break;  // cycle
  }

  StepwiseResult out;
  out.selected = selected;
  out.fit = ols_fit(gather(predictors, selected), y);
  return out;
}

TTestResult welch_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw InvalidArgument("Welch t-test needs at least 2 values per sample");
  auto moments = [](std::span<const double> s) {
    const double n = static_cast<double>(s.size());
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : s) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / (n - 1.0)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double sa = va / na, sb = vb / nb;
  if (!(sa + sb > 0.0)) throw NumericError("Welch t-test needs positive variance in at least one sample");

  TTestResult r;
  r.t = (ma - mb) / std::sqrt(sa + sb);
  r.dof = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p = student_t_two_sided_p(r.t, r.dof);
  return r;
}

}  // namespace ipmn
