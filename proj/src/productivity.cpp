#include "gvc/productivity.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "gvc/csv.hpp"
#include "gvc/error.hpp"
#include "gvc/summary.hpp"

namespace gvc {

namespace {
const std::vector<std::string> kSeaColumns{"country", "industry",     "year",        "va_nominal",
                                            "va_real", "employment",   "capital_real", "labor_comp"};
const std::vector<std::string> kDeflatorColumns{"country", "industry", "year", "index_base1995"};
const std::vector<std::string> kTfpColumns{"country", "industry", "year", "ln_tfp", "sigma_fitted"};

using Key = std::tuple<std::string, std::string, int>;
}  // namespace

std::vector<SeaRecord> read_sea_csv(const std::filesystem::path& path) {
    const auto table = csv::Table::read(path, kSeaColumns);
    std::vector<SeaRecord> out;
    std::set<Key> seen;
    for (const auto& row : table.rows()) {
        SeaRecord r;
        r.country = row.str("country");
        r.industry = row.str("industry");
        r.year = row.integer("year");
        r.va_nominal = row.num("va_nominal");
        r.va_real = row.opt_num("va_real");
        r.employment = row.num("employment");
        r.capital_real = row.num("capital_real");
        r.labor_comp = row.num("labor_comp");
        if (r.country.empty() || r.industry.empty()) row.fail("empty country or industry code");
        if (!seen.insert({r.country, r.industry, r.year}).second) row.fail("duplicate country, industry and year");
        out.push_back(std::move(r));
    }
    return out;
}

void write_sea_csv(const std::vector<SeaRecord>& records, std::ostream& out) {
    csv::Writer w(out);
    w.row(kSeaColumns);
    for (const auto& r : records) {
        w.row(r.country, r.industry, r.year, r.va_nominal, r.va_real ? csv::format(*r.va_real) : std::string{},
              r.employment, r.capital_real, r.labor_comp);
    }
}

Deflators Deflators::read_csv(const std::filesystem::path& path) {
    const auto table = csv::Table::read(path, kDeflatorColumns);
    Deflators d;
    for (const auto& row : table.rows()) {
        const double idx = row.num("index_base1995");
        if (!(idx > 0.0)) row.fail("deflator index must be positive");
        const Key key{row.str("country"), row.str("industry"), row.integer("year")};
        if (!d.entries_.emplace(key, idx).second) row.fail("duplicate deflator entry");
    }
    return d;
}

void Deflators::write_csv(std::ostream& out) const {
    csv::Writer w(out);
    w.row(kDeflatorColumns);
    for (const auto& [key, idx] : entries_) w.row(std::get<0>(key), std::get<1>(key), std::get<2>(key), idx);
}

void Deflators::set(const std::string& country, const std::string& industry, int year, double index) {
    if (!(index > 0.0)) throw ValidationError("deflator index must be positive");
    entries_[{country, industry, year}] = index;
}

std::optional<double> Deflators::index(const std::string& country, const std::string& industry, int year) const {
    if (auto it = entries_.find({country, industry, year}); it != entries_.end()) return it->second;
    if (auto it = entries_.find({country, std::string{}, year}); it != entries_.end()) return it->second;
    return std::nullopt;
}

double Deflators::to_real(double nominal, const std::string& country, const std::string& industry, int year) const {
    auto idx = index(country, industry, year);
    if (!idx) {
        throw ValidationError("no value-added or GDP deflator for " + country + "/" + industry + " in " +
                              std::to_string(year));
    }
    return nominal * 100.0 / *idx;
}

void apply_deflators(std::vector<SeaRecord>& records, const Deflators& deflators) {
    for (auto& r : records) {
        if (!r.va_real) r.va_real = deflators.to_real(r.va_nominal, r.country, r.industry, r.year);
    }
}

double LaborShareModel::predict(const std::string& country, const std::string& industry, int year,
                                double ln_k_over_l) const {
    auto get = [](const auto& m, const auto& k) {
        auto it = m.find(k);
        return it == m.end() ? 0.0 : it->second;
    };
    return intercept + get(country_effect, country) + get(industry_effect, industry) + get(year_effect, year) +
           get(slope, industry) * ln_k_over_l;
}

LaborShareModel smooth_labor_shares(const std::vector<SeaRecord>& records) {
    LaborShareModel model;
    std::vector<const SeaRecord*> used;
    for (const auto& r : records) {
        if (r.va_nominal > 0.0 && r.employment > 0.0 && r.capital_real > 0.0) {
            used.push_back(&r);
        } else {
            model.diagnostics.push_back("share regression excludes " + r.country + "/" + r.industry + "/" +
                                        std::to_string(r.year) + ": nonpositive value added, employment or capital");
        }
    }
    if (used.empty()) throw ValidationError("labour-share regression has no usable observations");

    std::set<std::string> countries, industries;
    std::set<int> years;
    for (const auto* r : used) {
        countries.insert(r->country);
        industries.insert(r->industry);
        years.insert(r->year);
    }
    if (countries.size() < 2 || industries.size() < 2 || years.size() < 2) {
        model.diagnostics.push_back(
            "labour-share panel spans fewer than 2 countries, industries or years; "
            "fitting the estimable subset only");
    }

    // Column layout: intercept, country, industry and year dummies (first level
    // omitted), then one ln(K/L) slope per industry.
    std::vector<std::string> names{"intercept"};
    std::map<std::string, Eigen::Index> ccol, hcol, scol;
    std::map<int, Eigen::Index> tcol;
    for (auto it = std::next(countries.begin()); it != countries.end(); ++it) {
        ccol[*it] = static_cast<Eigen::Index>(names.size());
        names.push_back("country:" + *it);
    }
    for (auto it = std::next(industries.begin()); it != industries.end(); ++it) {
        hcol[*it] = static_cast<Eigen::Index>(names.size());
        names.push_back("industry:" + *it);
    }
    for (auto it = std::next(years.begin()); it != years.end(); ++it) {
        tcol[*it] = static_cast<Eigen::Index>(names.size());
        names.push_back("year:" + std::to_string(*it));
    }
    for (const auto& h : industries) {
        scol[h] = static_cast<Eigen::Index>(names.size());
        names.push_back("slope:" + h);
    }

    const auto n = static_cast<Eigen::Index>(used.size());
    const auto p = static_cast<Eigen::Index>(names.size());
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = *used[static_cast<std::size_t>(i)];
        x(i, 0) = 1.0;
        if (auto it = ccol.find(r.country); it != ccol.end()) x(i, it->second) = 1.0;
        if (auto it = hcol.find(r.industry); it != hcol.end()) x(i, it->second) = 1.0;
        if (auto it = tcol.find(r.year); it != tcol.end()) x(i, it->second) = 1.0;
        x(i, scol.at(r.industry)) = std::log(r.capital_real / r.employment);
        y(i) = r.labor_comp / r.va_nominal;
        model.raw_share[{r.country, r.industry, r.year}] = y(i);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(p);
    if (qr.rank() < p) {
        const auto& perm = qr.colsPermutation().indices();
        std::vector<Eigen::Index> keep(perm.data(), perm.data() + qr.rank());
        std::sort(keep.begin(), keep.end());
        std::ostringstream msg;
        msg << "labour-share design is rank deficient (rank " << qr.rank() << " of " << p << "); dropped:";
        for (Eigen::Index j = qr.rank(); j < p; ++j) msg << ' ' << names[static_cast<std::size_t>(perm(j))];
        model.diagnostics.push_back(msg.str());
        Eigen::MatrixXd xs(n, static_cast<Eigen::Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) xs.col(static_cast<Eigen::Index>(k)) = x.col(keep[k]);
        const Eigen::VectorXd sub = xs.colPivHouseholderQr().solve(y);
        for (std::size_t k = 0; k < keep.size(); ++k) coef(keep[k]) = sub(static_cast<Eigen::Index>(k));
    } else {
        coef = qr.solve(y);
    }

    model.intercept = coef(0);
    for (const auto& [c, j] : ccol) model.country_effect[c] = coef(j);
    model.country_effect[*countries.begin()] = 0.0;
    for (const auto& [h, j] : hcol) model.industry_effect[h] = coef(j);
    model.industry_effect[*industries.begin()] = 0.0;
    for (const auto& [t, j] : tcol) model.year_effect[t] = coef(j);
    model.year_effect[*years.begin()] = 0.0;
    for (const auto& [h, j] : scol) model.slope[h] = coef(j);

    const Eigen::VectorXd fitted = x * coef;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = *used[static_cast<std::size_t>(i)];
        double s = fitted(i);
        if (!(s > kShareFloor && s < kShareCeiling)) {
            std::ostringstream msg;
            msg << "fitted labour share " << csv::format(s) << " for " << r.country << "/" << r.industry << "/"
                << r.year << " clamped to [" << kShareFloor << ", " << kShareCeiling << "]";
            model.diagnostics.push_back(msg.str());
            s = std::clamp(s, kShareFloor, kShareCeiling);
        }
        model.fitted_share[{r.country, r.industry, r.year}] = s;
    }
    return model;
}

TfpResult caves_tfp(const std::vector<SeaRecord>& records, const LaborShareModel& shares) {
    TfpResult out;
    struct Obs {
        const SeaRecord* r;
        double ln_y, ln_l, ln_k, sigma;
    };
    std::map<std::pair<std::string, int>, std::vector<Obs>> cells;
    std::set<std::string> all_countries;
    for (const auto& r : records) {
        all_countries.insert(r.country);
        const std::string id = r.country + "/" + r.industry + "/" + std::to_string(r.year);
        if (!r.va_real) throw ValidationError("real value added missing for " + id + " (no deflator applied)");
        if (!(*r.va_real > 0.0 && r.employment > 0.0 && r.capital_real > 0.0)) {
            out.diagnostics.push_back("tfp excludes " + id + ": nonpositive-input");
            continue;
        }
        auto it = shares.fitted_share.find({r.country, r.industry, r.year});
        if (it == shares.fitted_share.end()) {
            out.diagnostics.push_back("tfp excludes " + id + ": no-fitted-share");
            continue;
        }
        cells[{r.industry, r.year}].push_back(
            {&r, std::log(*r.va_real), std::log(r.employment), std::log(r.capital_real), it->second});
    }
    for (const auto& [cell, obs] : cells) {
        const double n = static_cast<double>(obs.size());
        if (obs.size() < all_countries.size()) {
            out.diagnostics.push_back("cell " + cell.first + "/" + std::to_string(cell.second) + " has " +
                                      std::to_string(obs.size()) + " of " + std::to_string(all_countries.size()) +
                                      " countries; means use the countries present");
        }
        double my = 0, ml = 0, mk = 0, ms = 0;
        for (const auto& o : obs) {
            my += o.ln_y;
            ml += o.ln_l;
            mk += o.ln_k;
            ms += o.sigma;
        }
        my /= n;
        ml /= n;
        mk /= n;
        ms /= n;
        for (const auto& o : obs) {
            const double w = 0.5 * (o.sigma + ms);
            const double v = (o.ln_y - my) - w * (o.ln_l - ml) - (1.0 - w) * (o.ln_k - mk);
            out.rows.push_back({o.r->country, o.r->industry, o.r->year, v, o.sigma});
        }
    }
    std::sort(out.rows.begin(), out.rows.end(), [](const auto& a, const auto& b) {
        return std::tie(a.country, a.industry, a.year) < std::tie(b.country, b.industry, b.year);
    });
    return out;
}

void write_tfp_csv(const std::vector<TfpObservation>& rows, std::ostream& out) {
    csv::Writer w(out);
    w.row(kTfpColumns);
    for (const auto& r : rows) w.row(r.country, r.industry, r.year, r.ln_tfp, r.sigma_fitted);
}

std::vector<TfpObservation> read_tfp_csv(const std::filesystem::path& path) {
    const auto table = csv::Table::read(path, kTfpColumns);
    std::vector<TfpObservation> out;
    for (const auto& row : table.rows()) {
        out.push_back({row.str("country"), row.str("industry"), row.integer("year"), row.num("ln_tfp"),
                       row.num("sigma_fitted")});
    }
    return out;
}

void write_tfp_summary(const std::vector<TfpObservation>& rows, std::ostream& out) {
    std::vector<std::pair<std::string, double>> v;
    for (const auto& r : rows) v.emplace_back(r.industry, r.ln_tfp);
    csv::Writer w(out);
    w.row(std::vector<std::string>{"industry", "obs", "min", "max", "mean", "sd"});
    for (const auto& s : summarize(v)) w.row(s.industry, s.obs, s.min, s.max, s.mean, s.sd);
}

}  // namespace gvc
