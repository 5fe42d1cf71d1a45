#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ipmn {

/// I_x(a, b) by Lentz continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// Student-t distribution with `dof` degrees of freedom (dof > 0, may be fractional).
double student_t_cdf(double t, double dof);
/// P(|T| >= |t|).
double student_t_two_sided_p(double t, double dof);

/// Predictors are stored column-wise: columns[j][i] is predictor j of case i.
using Columns = std::vector<std::vector<double>>;

/// Ordinary least squares with an intercept. Index 0 of every per-term vector
/// is the intercept, index j+1 is predictor j.
struct OlsResult {
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> t_stats;
  std::vector<double> p_values;
  std::vector<double> residuals;
  double r_squared = 0.0;
  std::size_t n = 0;
  std::size_t dof = 0;  // n - (predictors + 1)
};

/// Throws NumericError when the design (with intercept) is rank deficient and
/// InvalidArgument when n <= predictors + 1.
OlsResult ols_fit(const Columns& predictors, std::span<const double> y);

struct StepwiseResult {
  std::vector<std::size_t> selected;  // ascending predictor indices
  OlsResult fit;                      // OLS on the selected predictors
};

/// Bidirectional stepwise selection. Each step adds the outside predictor
/// with the smallest p-value when it is below p_enter, then repeatedly drops
/// the inside predictor with the largest p-value while it exceeds p_remove.
/// Candidates that would make the design rank deficient are skipped; ties go
/// to the lower predictor index.
StepwiseResult stepwise_select(const Columns& predictors, std::span<const double> y, double p_enter = 0.05,
                               double p_remove = 0.10);

struct TTestResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;
};

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of freedom.
TTestResult welch_ttest(std::span<const double> a, std::span<const double> b);

}  // namespace ipmn
