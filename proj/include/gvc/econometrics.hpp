#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gvc/productivity.hpp"
#include "gvc/rd_content.hpp"

namespace gvc {

struct PanelObservation {
    std::string country;
    std::string industry;
    int year = 0;
    double ln_tfp = 0.0;
    std::vector<double> x;  // aligned with Panel::names
    std::string importer_flags;
};

struct Panel {
    std::vector<std::string> names;
    std::vector<PanelObservation> rows;
    std::vector<std::string> log;  // listwise deletions and other drops
};

// Appends name + "_x_post" columns equal to the named regressor times 1[year >= breakpoint].
Panel add_interactions(const Panel& panel, int breakpoint, const std::vector<std::string>& names);

// Regressors of year t replaced by those of year t - lag within each
// (country, industry); rows whose lagged year is absent are dropped.
Panel lag_regressors(const Panel& panel, int lag);

struct FixedEffects {
    bool unit = true;  // country-industry
    bool year = true;
};

struct DemeanedPanel {
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
    Eigen::VectorXd y_raw;
    Eigen::MatrixXd x_raw;
    std::vector<std::string> names;
    std::vector<std::string> cluster;  // industry of each row
    std::size_t units = 0;
    std::size_t years = 0;
    std::size_t absorbed = 0;  // degrees of freedom taken by the fixed effects
};

// Exact two-way demeaning: unit demeaning followed by partialling out the
// unit-demeaned year dummies.
DemeanedPanel within_transform(const Panel& panel, FixedEffects fe = {});

// Sandwich (X'X)^-1 (sum_c X_c' u_c u_c' X_c) (X'X)^-1. When `corrected`, scaled
// by G/(G-1) (N-1)/(N-K) with K = X.cols().
Eigen::MatrixXd cluster_robust_se(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals,
                                  const std::vector<std::string>& clusters, bool corrected = true);

struct FitResult {
    std::string label;
    std::vector<std::string> names;
    Eigen::VectorXd beta;
    Eigen::MatrixXd cov;        // cluster-robust, small-sample corrected
    Eigen::MatrixXd cov_raw;    // cluster-robust, uncorrected
    Eigen::MatrixXd cov_classical;
    double constant = 0.0;      // mean(y) - mean(x)' beta
    double constant_se = 0.0;
    double r2 = 0.0;            // overall, fixed effects included
    double r2_within = 0.0;
    std::size_t n = 0;
    std::size_t clusters = 0;
    Eigen::VectorXd residuals;

    double se(std::size_t k) const;
    double t(std::size_t k) const;
    double p(std::size_t k) const;  // two-sided, t with clusters - 1 degrees of freedom
};

// Least squares on the demeaned panel via column-pivoting QR; throws
// SpecificationError naming collinear columns.
FitResult ols_fit(const DemeanedPanel& demeaned);

std::string stars(double p);

// ---- specifications ------------------------------------------------------

struct RegressionSpec {
    std::string label;
    std::string importer_set = "ALL";
    // "total" uses ln V (benchmark); "A" / "B" use the domestic term and the
    // High/Middle/Low foreign terms of that exporter-industry group.
    std::string group = "B";
    int lag = 0;
    std::optional<int> interaction_breakpoint;
};

Panel build_panel(const std::vector<RegressorRow>& regressors, const std::vector<TfpObservation>& tfp,
                  const RegressionSpec& spec);

FitResult run_regression(const std::vector<RegressorRow>& regressors, const std::vector<TfpObservation>& tfp,
                         const RegressionSpec& spec);

void write_fit_csv(const FitResult& fit, std::ostream& out);
// Coefficient rows with parenthesized standard errors, N, R2 and FE rows, one column per fit.
void write_fit_table(const std::string& title, const std::vector<FitResult>& fits, std::ostream& out);

}  // namespace gvc
