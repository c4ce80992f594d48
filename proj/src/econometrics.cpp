#include "gvc/econometrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "gvc/csv.hpp"
#include "gvc/error.hpp"

namespace gvc {

Panel add_interactions(const Panel& panel, int breakpoint, const std::vector<std::string>& names) {
    Panel out = panel;
    std::vector<std::size_t> cols;
    for (const auto& n : names) {
        auto it = std::find(panel.names.begin(), panel.names.end(), n);
        if (it == panel.names.end()) throw SpecificationError("cannot interact unknown regressor '" + n + "'");
        cols.push_back(static_cast<std::size_t>(it - panel.names.begin()));
        out.names.push_back(n + "_x_post");
    }
    for (auto& row : out.rows) {
        const double dummy = row.year >= breakpoint ? 1.0 : 0.0;
        for (auto c : cols) row.x.push_back(dummy * row.x[c]);
    }
    return out;
}

Panel lag_regressors(const Panel& panel, int lag) {
    if (lag < 0) throw SpecificationError("lag must be nonnegative");
    if (lag == 0) return panel;
    std::map<std::tuple<std::string, std::string, int>, const PanelObservation*> by;
    for (const auto& r : panel.rows) by[{r.country, r.industry, r.year}] = &r;
    Panel out;
    out.names = panel.names;
    out.log = panel.log;
    std::size_t dropped = 0;
    for (const auto& r : panel.rows) {
        auto it = by.find({r.country, r.industry, r.year - lag});
        if (it == by.end()) {
            ++dropped;
            continue;
        }
        PanelObservation o = r;
        o.x = it->second->x;
        out.rows.push_back(std::move(o));
    }
    out.log.push_back("lag " + std::to_string(lag) + ": dropped " + std::to_string(dropped) +
                      " rows without a lagged observation");
    return out;
}

DemeanedPanel within_transform(const Panel& panel, FixedEffects fe) {
    const auto n = static_cast<Eigen::Index>(panel.rows.size());
    const auto k = static_cast<Eigen::Index>(panel.names.size());
    if (n == 0) throw SpecificationError("regression panel is empty");
    DemeanedPanel out;
    out.names = panel.names;
    out.y_raw.resize(n);
    out.x_raw.resize(n, k);
    std::map<std::pair<std::string, std::string>, std::vector<Eigen::Index>> units;
    std::map<int, Eigen::Index> year_col;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = panel.rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(r.x.size()) != k) throw SpecificationError("panel row has wrong regressor count");
        out.y_raw(i) = r.ln_tfp;
        for (Eigen::Index j = 0; j < k; ++j) out.x_raw(i, j) = r.x[static_cast<std::size_t>(j)];
        units[{r.country, r.industry}].push_back(i);
        year_col.emplace(r.year, 0);
        out.cluster.push_back(r.industry);
    }
    if (!out.y_raw.allFinite() || !out.x_raw.allFinite()) throw SpecificationError("panel contains non-finite values");
    Eigen::Index t = 0;
    for (auto& [y, col] : year_col) col = t++;
    out.units = units.size();
    out.years = year_col.size();

    Eigen::MatrixXd data(n, k + 1);
    data.col(0) = out.y_raw;
    data.rightCols(k) = out.x_raw;

    auto unit_demean = [&](Eigen::MatrixXd& m) {
        for (const auto& [u, idx] : units) {
            Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(m.cols());
            for (auto i : idx) mean += m.row(i);
            mean /= static_cast<double>(idx.size());
            for (auto i : idx) m.row(i) -= mean;
        }
    };

    if (fe.unit) {
        unit_demean(data);
        out.absorbed += units.size();
    }
    if (fe.year) {
        Eigen::MatrixXd dummies = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(year_col.size()));
        for (Eigen::Index i = 0; i < n; ++i) dummies(i, year_col.at(panel.rows[static_cast<std::size_t>(i)].year)) = 1.0;
        if (fe.unit) unit_demean(dummies);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dummies);
        qr.setThreshold(1e-10);
        const auto rank = qr.rank();
        out.absorbed += static_cast<std::size_t>(rank);
        if (rank > 0) {
            // Residualize on the column space of the (demeaned) year dummies.
            const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, rank);
            data -= q * (q.transpose() * data);
        }
    }
    out.y = data.col(0);
    out.x = data.rightCols(k);
    if (out.absorbed + static_cast<std::size_t>(k) >= static_cast<std::size_t>(n)) {
        throw SpecificationError("too few observations (" + std::to_string(n) + ") for " + std::to_string(k) +
                                 " regressors and " + std::to_string(out.absorbed) + " fixed effects");
    }
    return out;
}

Eigen::MatrixXd cluster_robust_se(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals,
                                  const std::vector<std::string>& clusters, bool corrected) {
    const auto n = x.rows();
    const auto k = x.cols();
    if (residuals.size() != n || static_cast<Eigen::Index>(clusters.size()) != n) {
        throw SpecificationError("cluster covariance inputs disagree in length");
    }
    std::map<std::string, Eigen::VectorXd> score;
    for (Eigen::Index i = 0; i < n; ++i) {
        auto [it, inserted] = score.try_emplace(clusters[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(k));
        it->second += x.row(i).transpose() * residuals(i);
    }
    const auto g = static_cast<double>(score.size());
    if (score.size() < 2) throw SpecificationError("cluster-robust covariance needs at least 2 clusters");
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (const auto& [c, s] : score) meat.noalias() += s * s.transpose();
    const Eigen::LDLT<Eigen::MatrixXd> xtx(x.transpose() * x);
    const Eigen::MatrixXd bread = xtx.solve(Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd v = bread * meat * bread;
    v = 0.5 * (v + v.transpose());
    if (corrected) {
        const double dn = static_cast<double>(n), dk = static_cast<double>(k);
        if (dn - dk <= 0.0) throw SpecificationError("no residual degrees of freedom for the cluster correction");
        v *= g / (g - 1.0) * (dn - 1.0) / (dn - dk);
    }
    return v;
}

double FitResult::se(std::size_t k) const {
    return std::sqrt(std::max(0.0, cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))));
}

double FitResult::t(std::size_t k) const { return beta(static_cast<Eigen::Index>(k)) / se(k); }

double FitResult::p(std::size_t k) const {
    const double tv = t(k);
    if (!std::isfinite(tv)) return tv != tv ? std::nan("") : 0.0;
    const double df = clusters > 1 ? static_cast<double>(clusters - 1) : 1.0;
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(tv)));
}

std::string stars(double p) {
    if (!(p == p)) return "";
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

FitResult ols_fit(const DemeanedPanel& dm) {
    const auto n = dm.x.rows();
    const auto k = dm.x.cols();
    FitResult fit;
    fit.names = dm.names;
    fit.n = static_cast<std::size_t>(n);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dm.x);
    const double scale = k ? dm.x.cwiseAbs().maxCoeff() : 0.0;
    qr.setThreshold(1e-10);
    if (k > 0 && (qr.rank() < k || scale == 0.0)) {
        std::ostringstream msg;
        msg << "regressors are collinear after removing fixed effects:";
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index j = qr.rank(); j < k; ++j) msg << ' ' << dm.names[static_cast<std::size_t>(perm(j))];
        throw SpecificationError(msg.str());
    }
    fit.beta = k ? Eigen::VectorXd(qr.solve(dm.y)) : Eigen::VectorXd();
    fit.residuals = k ? Eigen::VectorXd(dm.y - dm.x * fit.beta) : dm.y;

    fit.cov = cluster_robust_se(dm.x, fit.residuals, dm.cluster, true);
    fit.cov_raw = cluster_robust_se(dm.x, fit.residuals, dm.cluster, false);
    std::set<std::string> distinct(dm.cluster.begin(), dm.cluster.end());
    fit.clusters = distinct.size();

    const double ssr = fit.residuals.squaredNorm();
    const double dof = static_cast<double>(n) - static_cast<double>(k) - static_cast<double>(dm.absorbed);
    const Eigen::LDLT<Eigen::MatrixXd> xtx(dm.x.transpose() * dm.x);
    fit.cov_classical = (ssr / dof) * xtx.solve(Eigen::MatrixXd::Identity(k, k));

    const double ybar = dm.y_raw.mean();
    const double tss = (dm.y_raw.array() - ybar).square().sum();
    fit.r2 = tss > 0.0 ? 1.0 - ssr / tss : 0.0;
    const double wss = dm.y.squaredNorm();
    fit.r2_within = wss > 0.0 ? 1.0 - ssr / wss : 0.0;

    // Constant reported as mean(y) - mean(x)'b; its variance comes from the
    // sandwich of the demeaned design augmented with a unit column.
    const Eigen::RowVectorXd xbar = dm.x_raw.colwise().mean();
    fit.constant = ybar - (k ? (xbar * fit.beta)(0) : 0.0);
    Eigen::MatrixXd z(n, k + 1);
    z.leftCols(k) = dm.x;
    z.col(k).setOnes();
    Eigen::VectorXd uz = fit.residuals.array() - fit.residuals.mean();
    const Eigen::MatrixXd vz = cluster_robust_se(z, uz, dm.cluster, true);
    Eigen::RowVectorXd jac(k + 1);
    jac.head(k) = -xbar;
    jac(k) = 1.0;
    fit.constant_se = std::sqrt(std::max(0.0, (jac * vz * jac.transpose())(0)));
    return fit;
}

// ---- specifications ------------------------------------------------------

Panel build_panel(const std::vector<RegressorRow>& regressors, const std::vector<TfpObservation>& tfp,
                  const RegressionSpec& spec) {
    Panel panel;
    std::size_t group = 0;
    if (spec.group == "total") {
        panel.names = {"total"};
    } else if (spec.group == "A" || spec.group == "B") {
        panel.names = {"domestic", "high", "middle", "low"};
        group = spec.group == "A" ? 0 : 1;
    } else {
        throw SpecificationError("unknown regression group '" + spec.group + "' (expected total, A or B)");
    }
    std::map<std::tuple<std::string, std::string, int>, double> y;
    for (const auto& t : tfp) y[{t.country, t.industry, t.year}] = t.ln_tfp;

    std::size_t not_member = 0, no_tfp = 0, nonpositive = 0;
    for (const auto& r : regressors) {
        std::vector<std::string> flags = csv::split(r.importer_flags, '|');
        if (std::find(flags.begin(), flags.end(), spec.importer_set) == flags.end()) {
            ++not_member;
            continue;
        }
        auto it = y.find({r.country, r.industry, r.year});
        if (it == y.end()) {
            ++no_tfp;
            continue;
        }
        std::vector<double> raw;
        if (spec.group == "total") {
            raw = {r.total};
        } else {
            raw = {r.domestic, r.foreign[0 + group], r.foreign[2 + group], r.foreign[4 + group]};
        }
        if (std::any_of(raw.begin(), raw.end(), [](double v) { return !(v > 0.0); })) {
            ++nonpositive;
            continue;
        }
        PanelObservation o;
        o.country = r.country;
        o.industry = r.industry;
        o.year = r.year;
        o.ln_tfp = it->second;
        o.importer_flags = r.importer_flags;
        for (double v : raw) o.x.push_back(std::log(v));
        panel.rows.push_back(std::move(o));
    }
    panel.log.push_back(spec.label + ": " + std::to_string(not_member) + " rows outside importer set " +
                        spec.importer_set + ", " + std::to_string(no_tfp) + " without ln TFP, " +
                        std::to_string(nonpositive) + " dropped for a nonpositive content bucket");
    return panel;
}

FitResult run_regression(const std::vector<RegressorRow>& regressors, const std::vector<TfpObservation>& tfp,
                         const RegressionSpec& spec) {
    Panel panel = build_panel(regressors, tfp, spec);
    if (spec.lag > 0) panel = lag_regressors(panel, spec.lag);
    if (spec.interaction_breakpoint) {
        if (spec.group == "total") throw SpecificationError("interaction terms need a class specification");
        panel = add_interactions(panel, *spec.interaction_breakpoint, {"high", "middle", "low"});
    }
    FitResult fit = ols_fit(within_transform(panel));
    fit.label = spec.label;
    return fit;
}

void write_fit_csv(const FitResult& fit, std::ostream& out) {
    csv::Writer w(out);
    w.row(std::vector<std::string>{"term", "estimate", "se", "t", "p", "stars", "se_raw"});
    for (std::size_t k = 0; k < fit.names.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        w.row(fit.names[k], fit.beta(kk), fit.se(k), fit.t(k), fit.p(k), stars(fit.p(k)),
              std::sqrt(std::max(0.0, fit.cov_raw(kk, kk))));
    }
    w.row(std::string("constant"), fit.constant, fit.constant_se, std::string{}, std::string{}, std::string{},
          std::string{});
    w.row(std::string("N"), fit.n, std::string{}, std::string{}, std::string{}, std::string{}, std::string{});
    w.row(std::string("clusters"), fit.clusters, std::string{}, std::string{}, std::string{}, std::string{},
          std::string{});
    w.row(std::string("r2"), fit.r2, std::string{}, std::string{}, std::string{}, std::string{}, std::string{});
    w.row(std::string("r2_within"), fit.r2_within, std::string{}, std::string{}, std::string{}, std::string{},
          std::string{});
}

void write_fit_table(const std::string& title, const std::vector<FitResult>& fits, std::ostream& out) {
    constexpr int kLabel = 22;
    constexpr int kCol = 14;
    auto fixed = [](double v, int prec) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(prec) << v;
        return s.str();
    };
    std::vector<std::string> terms;
    for (const auto& f : fits) {
        for (const auto& n : f.names) {
            if (std::find(terms.begin(), terms.end(), n) == terms.end()) terms.push_back(n);
        }
    }
    out << title << '\n';
    out << std::left << std::setw(kLabel) << "";
    for (std::size_t c = 0; c < fits.size(); ++c) out << std::right << std::setw(kCol) << "(" + std::to_string(c + 1) + ")";
    out << '\n' << std::left << std::setw(kLabel) << "";
    for (const auto& f : fits) out << std::right << std::setw(kCol) << f.label;
    out << '\n';
    auto line = [&](const std::string& label, auto cell) {
        out << std::left << std::setw(kLabel) << label;
        for (const auto& f : fits) out << std::right << std::setw(kCol) << cell(f);
        out << '\n';
    };
    for (const auto& term : terms) {
        auto pos = [&](const FitResult& f) -> std::optional<std::size_t> {
            auto it = std::find(f.names.begin(), f.names.end(), term);
            if (it == f.names.end()) return std::nullopt;
            return static_cast<std::size_t>(it - f.names.begin());
        };
        line(term, [&](const FitResult& f) {
            auto k = pos(f);
            return k ? fixed(f.beta(static_cast<Eigen::Index>(*k)), 3) + stars(f.p(*k)) : std::string{};
        });
        line("", [&](const FitResult& f) {
            auto k = pos(f);
            return k ? "(" + fixed(f.se(*k), 3) + ")" : std::string{};
        });
    }
    line("constant", [&](const FitResult& f) { return fixed(f.constant, 3); });
    line("", [&](const FitResult& f) { return "(" + fixed(f.constant_se, 3) + ")"; });
    line("N", [&](const FitResult& f) { return std::to_string(f.n); });
    line("R2", [&](const FitResult& f) { return fixed(f.r2, 3); });
    line("R2 within", [&](const FitResult& f) { return fixed(f.r2_within, 3); });
    line("Country-Industry FE", [&](const FitResult&) { return std::string("Yes"); });
    line("Year FE", [&](const FitResult&) { return std::string("Yes"); });
    out << "Standard errors clustered by industry in parentheses; * p<0.1, ** p<0.05, *** p<0.01\n";
}

}  // namespace gvc
