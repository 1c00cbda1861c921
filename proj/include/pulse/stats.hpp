#pragma once

#include "pulse/activity.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pulse {

/// Full result of an ordinary least squares fit.
///
/// Coefficient-indexed vectors (coefficients, std_errors, t_stats, p_values)
/// start with the intercept when one was fitted; `names` matches them.
/// `vif` has one entry per predictor and never covers the intercept.
struct OlsFit {
  std::vector<std::string> names;
  bool has_intercept = true;
  std::size_t n = 0;  // observations
  std::size_t k = 0;  // predictors, intercept excluded

  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd t_stats;
  Eigen::VectorXd p_values;
  Eigen::VectorXd vif;
  Eigen::VectorXd residuals;

  double rss = 0.0;
  double tss = 0.0;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double f_stat = 0.0;
  double f_p_value = 1.0;
  double aic = 0.0;  // n ln(RSS/n) + 2 (number of coefficients)

  std::size_t df_resid() const noexcept { return n - k - (has_intercept ? 1 : 0); }
  /// Residual standard error sqrt(RSS / df).
  double sigma() const noexcept;
  /// Position of a coefficient by name, or nullopt.
  std::optional<std::size_t> index_of(const std::string& name) const;
};

/// Fits y ~ X (+ intercept).
///
/// Requires n > k + 1. The solve runs on a column-scaled, column-pivoted
/// Householder QR. p-values use Student's t with n - k - 1 degrees of
/// freedom; the F test uses (k, n - k - 1). VIF_j = 1 / (1 - R2_j) from
/// regressing predictor j on the others with an intercept.
///
/// Throws std::invalid_argument on dimension mismatch, InputError when there
/// are too few observations and SingularityError for an all-zero column,
/// duplicated columns or any other rank deficiency (the message names the
/// columns).
OlsFit fit_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, bool intercept = true,
               std::vector<std::string> names = {});

struct StepwiseResult {
  OlsFit initial;
  OlsFit final_fit;
  std::vector<std::size_t> kept;  // column positions in X that survived
  std::vector<std::string> dropped;
  std::optional<std::string> warning;
};

/// Two passes: fit every predictor, drop those with p >= alpha, refit once
/// with the survivors. Nothing is iterated further. When every predictor is
/// dropped the final fit is intercept-only and `warning` is set.
StepwiseResult stepwise_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                            std::vector<std::string> names, double alpha = 0.01);

struct BivariateResult {
  double r2 = 0.0;
  double intercept = 0.0;
  double slope = 0.0;
  Eigen::VectorXd residuals;
  /// residual / residual standard error; all zero for a perfect fit.
  Eigen::VectorXd std_residuals;
};

/// Fits b ~ a. A positive residual means the zone is more active in `b`
/// than `a` predicts. Throws InputError when `a` has zero variance.
BivariateResult bivariate_slot_ols(std::span<const double> a, std::span<const double> b);

struct Descriptives {
  std::size_t n = 0;
  double mean = 0.0;
  double std_dev = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
  double total = 0.0;
};

/// Throws std::invalid_argument on an empty input.
Descriptives slot_descriptives(std::span<const double> values);

struct ZoneVisit {
  std::uint32_t zone = 0;  // row in sorted zone_id order
  QuarterBin bin;
};

/// Modal residential zone among a user's night visits. Ties go to the zone
/// with more visits overall (day and night), then to the smaller zone row,
/// which is the lexicographically smaller zone_id.
std::optional<std::uint32_t> infer_home(std::span<const ZoneVisit> visits, const BinRange& night,
                                        const std::vector<bool>& residential);

/// r2 of census ~ home counts. Throws InputError on zero variance or a size
/// mismatch.
double census_correlation(std::span<const double> home_counts, std::span<const double> census);

/// predictor,coefficient,std_error,t,p,vif rows for the final model, blank
/// rows for dropped predictors, then r2/adj_r2/f/f_p/aic/n rows carrying
/// their value in the coefficient column.
void write_model_csv(std::ostream& out, const StepwiseResult& result);
void write_residuals_csv(std::ostream& out, std::span<const std::string> zone_ids, const OlsFit& fit);

}  // namespace pulse
