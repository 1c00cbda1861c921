#include "pulse/stats.hpp"

#include "pulse/csv.hpp"
#include "pulse/error.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace pulse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRankThreshold = 1e-12;

struct ScaledQr {
  Eigen::VectorXd scale;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
};

// QR of A with every column rescaled to unit norm. Columns are assumed
// non-zero.
ScaledQr scaled_qr(const Eigen::MatrixXd& A) {
  ScaledQr s;
  s.scale = A.colwise().norm().transpose();
  Eigen::MatrixXd As = A * s.scale.cwiseInverse().asDiagonal();
  s.qr.setThreshold(kRankThreshold);
  s.qr.compute(As);
  return s;
}

Eigen::VectorXd solve(const ScaledQr& s, const Eigen::VectorXd& y) {
  return s.qr.solve(y).cwiseQuotient(s.scale);
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd A(X.rows(), X.cols() + 1);
  A.col(0).setOnes();
  A.rightCols(X.cols()) = X;
  return A;
}

double centered_ss(const Eigen::VectorXd& v) { return (v.array() - v.mean()).square().sum(); }

double two_sided_t(double t, double df) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const std::string& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

// 1 - RSS/TSS of column j regressed on the remaining columns plus intercept.
double vif_of(const Eigen::MatrixXd& X, Eigen::Index j) {
  const Eigen::Index k = X.cols();
  if (k == 1) return 1.0;
  Eigen::MatrixXd others(X.rows(), k - 1);
  for (Eigen::Index c = 0, o = 0; c < k; ++c) {
    if (c != j) others.col(o++) = X.col(c);
  }
  const Eigen::MatrixXd A = with_intercept(others);
  const Eigen::VectorXd target = X.col(j);
  const double tss = centered_ss(target);
  if (!(tss > 0.0)) return kInf;
  const ScaledQr s = scaled_qr(A);
  const Eigen::VectorXd resid = target - A * solve(s, target);
  const double r2 = 1.0 - resid.squaredNorm() / tss;
  if (r2 >= 1.0) return kInf;
  return std::max(1.0, 1.0 / (1.0 - r2));
}

}  // namespace

double OlsFit::sigma() const noexcept {
  const std::size_t df = df_resid();
  return df ? std::sqrt(rss / double(df)) : 0.0;
}

std::optional<std::size_t> OlsFit::index_of(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

OlsFit fit_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, bool intercept,
               std::vector<std::string> names) {
  const auto n = static_cast<std::size_t>(y.size());
  const auto k = static_cast<std::size_t>(X.cols());
  if (static_cast<std::size_t>(X.rows()) != n) {
    throw std::invalid_argument("fit_ols: y has " + std::to_string(n) + " rows, X has " +
                                std::to_string(X.rows()));
  }
  if (names.empty()) {
    for (std::size_t j = 0; j < k; ++j) names.push_back("x" + std::to_string(j + 1));
  }
  if (names.size() != k) throw std::invalid_argument("fit_ols: names do not match X columns");
  if (!intercept && k == 0) throw std::invalid_argument("fit_ols: nothing to fit");
  if (n <= k + 1) {
    throw InputError("fit_ols: " + std::to_string(n) + " observations for " + std::to_string(k) +
                     " predictors; need more than predictors + 1");
  }
  if (!y.allFinite() || !X.allFinite()) throw InputError("fit_ols: non-finite input");

  for (std::size_t j = 0; j < k; ++j) {
    if (X.col(static_cast<Eigen::Index>(j)).cwiseAbs().maxCoeff() == 0.0) {
      throw SingularityError("column '" + names[j] + "' is all zero");
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t l = j + 1; l < k; ++l) {
      if (X.col(static_cast<Eigen::Index>(j)) == X.col(static_cast<Eigen::Index>(l))) {
        throw SingularityError("columns '" + names[j] + "' and '" + names[l] + "' are identical");
      }
    }
  }

  const Eigen::MatrixXd A = intercept ? with_intercept(X) : X;
  const auto p = static_cast<std::size_t>(A.cols());
  std::vector<std::string> coef_names;
  if (intercept) coef_names.push_back("intercept");
  coef_names.insert(coef_names.end(), names.begin(), names.end());

  const ScaledQr s = scaled_qr(A);
  if (static_cast<std::size_t>(s.qr.rank()) < p) {
    std::vector<std::string> dependent;
    const auto& perm = s.qr.colsPermutation().indices();
    for (Eigen::Index i = s.qr.rank(); i < static_cast<Eigen::Index>(p); ++i) {
      dependent.push_back(coef_names[static_cast<std::size_t>(perm(i))]);
    }
    throw SingularityError("design matrix is rank deficient; dependent column(s): " + join(dependent));
  }

  OlsFit fit;
  fit.names = std::move(coef_names);
  fit.has_intercept = intercept;
  fit.n = n;
  fit.k = k;
  fit.coefficients = solve(s, y);
  fit.residuals = y - A * fit.coefficients;
  fit.rss = fit.residuals.squaredNorm();
  fit.tss = intercept ? centered_ss(y) : y.squaredNorm();
  fit.r2 = fit.tss > 0.0 ? std::clamp(1.0 - fit.rss / fit.tss, 0.0, 1.0) : 0.0;

  const double df = double(n - p);
  fit.adj_r2 = 1.0 - (1.0 - fit.r2) * (intercept ? double(n - 1) : double(n)) / df;

  // Cov(beta) = sigma^2 S^-1 P (R^T R)^-1 P^T S^-1
  const Eigen::MatrixXd R = s.qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd inv_perm = Rinv * Rinv.transpose();
  const auto& perm = s.qr.colsPermutation().indices();
  const double sigma2 = fit.rss / df;
  fit.std_errors.resize(static_cast<Eigen::Index>(p));
  fit.t_stats.resize(static_cast<Eigen::Index>(p));
  fit.p_values.resize(static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(p); ++i) {
    const Eigen::Index col = perm(i);
    const double se = std::sqrt(sigma2 * inv_perm(i, i)) / s.scale(col);
    fit.std_errors(col) = se;
  }
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j) {
    const double b = fit.coefficients(j), se = fit.std_errors(j);
    double t;
    if (se > 0.0) t = b / se;
    else t = b == 0.0 ? 0.0 : std::copysign(kInf, b);
    fit.t_stats(j) = t;
    fit.p_values(j) = two_sided_t(t, df);
  }

  const std::size_t model_df = intercept ? k : p;
  if (model_df == 0 || !(fit.tss > 0.0)) {
    fit.f_stat = 0.0;
    fit.f_p_value = 1.0;
  } else if (fit.rss == 0.0) {
    fit.f_stat = kInf;
    fit.f_p_value = 0.0;
  } else {
    fit.f_stat = ((fit.tss - fit.rss) / double(model_df)) / (fit.rss / df);
    if (fit.f_stat <= 0.0) {
      fit.f_stat = 0.0;
      fit.f_p_value = 1.0;
    } else {
      boost::math::fisher_f dist(double(model_df), df);
      fit.f_p_value = boost::math::cdf(boost::math::complement(dist, fit.f_stat));
    }
  }

  fit.aic = double(n) * std::log(fit.rss / double(n)) + 2.0 * double(p);

  fit.vif.resize(static_cast<Eigen::Index>(k));
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) fit.vif(j) = vif_of(X, j);
  return fit;
}

StepwiseResult stepwise_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                            std::vector<std::string> names, double alpha) {
  StepwiseResult out;
  out.initial = fit_ols(y, X, true, names);
  const std::vector<std::string>& used = out.initial.names;  // "intercept" + predictors
  std::vector<std::string> kept_names;
  for (std::size_t j = 0; j < static_cast<std::size_t>(X.cols()); ++j) {
    const double pv = out.initial.p_values(static_cast<Eigen::Index>(j + 1));
    if (pv < alpha) {
      out.kept.push_back(j);
      kept_names.push_back(used[j + 1]);
    } else {
      out.dropped.push_back(used[j + 1]);
    }
  }
  if (out.dropped.empty()) {
    out.final_fit = out.initial;
    return out;
  }
  std::vector<Eigen::Index> cols(out.kept.begin(), out.kept.end());
  const Eigen::MatrixXd Xk = X(Eigen::all, cols);
  out.final_fit = fit_ols(y, Xk, true, kept_names);
  if (out.kept.empty()) {
    out.warning = "every predictor had p >= " + csv::fmt(alpha) + "; intercept-only model returned";
  }
  return out;
}

BivariateResult bivariate_slot_ols(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("bivariate_slot_ols: zone sets differ in size");
  const std::size_t n = a.size();
  if (n < 2) throw InputError("bivariate_slot_ols: need at least 2 zones");
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / double(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / double(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  if (!(saa > 0.0)) throw InputError("bivariate_slot_ols: predictor distribution has zero variance");

  BivariateResult r;
  r.slope = sab / saa;
  r.intercept = mb - r.slope * ma;
  r.r2 = sbb > 0.0 ? std::clamp(sab * sab / (saa * sbb), 0.0, 1.0) : 0.0;
  r.residuals.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    r.residuals(static_cast<Eigen::Index>(i)) = (b[i] - mb) - r.slope * (a[i] - ma);
  }
  const double rss = r.residuals.squaredNorm();
  const double s = n > 2 ? std::sqrt(rss / double(n - 2)) : 0.0;
  r.std_residuals = s > 0.0 ? Eigen::VectorXd(r.residuals / s)
                            : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  return r;
}

Descriptives slot_descriptives(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("slot_descriptives: no values");
  Descriptives d;
  d.n = values.size();
  d.total = std::accumulate(values.begin(), values.end(), 0.0);
  d.mean = d.total / double(d.n);
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  d.min = *lo;
  d.max = *hi;
  double ss = 0.0;
  for (double v : values) ss += (v - d.mean) * (v - d.mean);
  d.std_dev = std::sqrt(ss / double(d.n));
  return d;
}

std::optional<std::uint32_t> infer_home(std::span<const ZoneVisit> visits, const BinRange& night,
                                        const std::vector<bool>& residential) {
  std::map<std::uint32_t, std::pair<std::size_t, std::size_t>> tally;  // zone -> (night, total)
  for (const ZoneVisit& v : visits) {
    auto& t = tally[v.zone];
    ++t.second;
    if (night.contains(v.bin) && v.zone < residential.size() && residential[v.zone]) ++t.first;
  }
  std::optional<std::uint32_t> best;
  std::pair<std::size_t, std::size_t> best_t{0, 0};
  for (const auto& [zone, t] : tally) {  // ascending zone: first wins full ties
    if (t.first == 0) continue;
    if (!best || t.first > best_t.first || (t.first == best_t.first && t.second > best_t.second)) {
      best = zone;
      best_t = t;
    }
  }
  return best;
}

double census_correlation(std::span<const double> home_counts, std::span<const double> census) {
  if (home_counts.size() != census.size()) {
    throw InputError("census_correlation: zone sets differ in size");
  }
  const Descriptives c = slot_descriptives(census);
  if (!(c.std_dev > 0.0)) throw InputError("census_correlation: census has zero variance");
  return bivariate_slot_ols(home_counts, census).r2;
}

void write_model_csv(std::ostream& out, const StepwiseResult& result) {
  const OlsFit& f = result.final_fit;
  out << "predictor,coefficient,std_error,t,p,vif\n";
  for (std::size_t j = 0; j < result.initial.names.size(); ++j) {
    const std::string& name = result.initial.names[j];
    auto idx = f.index_of(name);
    if (!idx) {
      csv::write_row(out, {name, "", "", "", "", ""});
      continue;
    }
    const auto i = static_cast<Eigen::Index>(*idx);
    std::string vif;
    if (f.has_intercept && i > 0) vif = csv::fmt(f.vif(i - 1));
    else if (!f.has_intercept) vif = csv::fmt(f.vif(i));
    csv::write_row(out, {name, csv::fmt(f.coefficients(i)), csv::fmt(f.std_errors(i)),
                         csv::fmt(f.t_stats(i)), csv::fmt(f.p_values(i)), vif});
  }
  csv::write_row(out, {"r2", csv::fmt(f.r2), "", "", "", ""});
  csv::write_row(out, {"adj_r2", csv::fmt(f.adj_r2), "", "", "", ""});
  csv::write_row(out, {"f", csv::fmt(f.f_stat), "", "", "", ""});
  csv::write_row(out, {"f_p", csv::fmt(f.f_p_value), "", "", "", ""});
  csv::write_row(out, {"aic", csv::fmt(f.aic), "", "", "", ""});
  csv::write_row(out, {"n", std::to_string(f.n), "", "", "", ""});
}

void write_residuals_csv(std::ostream& out, std::span<const std::string> zone_ids, const OlsFit& fit) {
  if (zone_ids.size() != static_cast<std::size_t>(fit.residuals.size())) {
    throw std::invalid_argument("write_residuals_csv: zone count mismatch");
  }
  const double s = fit.sigma();
  out << "zone_id,residual,std_residual\n";
  for (std::size_t i = 0; i < zone_ids.size(); ++i) {
    const double e = fit.residuals(static_cast<Eigen::Index>(i));
    csv::write_row(out, {zone_ids[i], csv::fmt(e), csv::fmt(s > 0.0 ? e / s : 0.0)});
  }
}

}  // namespace pulse
