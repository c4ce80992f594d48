#include "gvc/rd_accounts.hpp"

#include <cmath>
#include <ostream>
#include <tuple>

#include "gvc/csv.hpp"
#include "gvc/error.hpp"

namespace gvc {

namespace {
const std::vector<std::string> kRdColumns{"country", "industry", "year", "expenditure_nominal"};
const std::vector<std::string> kStockColumns{"country", "industry", "year", "stock_real", "delta", "g"};
}  // namespace

std::vector<RDRecord> read_rd_csv(const std::filesystem::path& path) {
    const auto table = csv::Table::read(path, kRdColumns);
    std::vector<RDRecord> out;
    std::set<std::tuple<std::string, std::string, int>> seen;
    for (const auto& row : table.rows()) {
        RDRecord r{row.str("country"), row.str("industry"), row.integer("year"), row.num("expenditure_nominal")};
        if (r.expenditure_nominal < 0.0) row.fail("negative R&D expenditure");
        if (!seen.insert({r.country, r.industry, r.year}).second) row.fail("duplicate country, industry and year");
        out.push_back(std::move(r));
    }
    return out;
}

void write_rd_csv(const std::vector<RDRecord>& records, std::ostream& out) {
    csv::Writer w(out);
    w.row(kRdColumns);
    for (const auto& r : records) w.row(r.country, r.industry, r.year, r.expenditure_nominal);
}

std::vector<RDSeries> deflate_rd(const std::vector<RDRecord>& records, const Deflators& deflators) {
    std::map<std::pair<std::string, std::string>, RDSeries> by;
    for (const auto& r : records) {
        auto& s = by[{r.country, r.industry}];
        s.country = r.country;
        s.industry = r.industry;
        s.expenditure[r.year] = deflators.to_real(r.expenditure_nominal, r.country, r.industry, r.year);
    }
    std::vector<RDSeries> out;
    for (auto& [k, s] : by) out.push_back(std::move(s));
    return out;
}

RDStock perpetual_inventory(const RDSeries& series, double delta) {
    const std::string name = series.country + "/" + series.industry;
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("depreciation rate must lie in (0, 1)");
    if (series.expenditure.size() < 2) {
        throw ValidationError("R&D series " + name + " needs at least two observed years");
    }
    RDStock out;
    out.country = series.country;
    out.industry = series.industry;
    out.delta = delta;

    std::map<int, double> filled;
    for (auto it = series.expenditure.begin(); it != series.expenditure.end(); ++it) {
        if (it->second < 0.0) throw ValidationError("R&D series " + name + " has a negative expenditure");
        filled[it->first] = it->second;
        auto next = std::next(it);
        if (next == series.expenditure.end()) break;
        const int span = next->first - it->first;
        const double a = it->second, b = next->second;
        for (int y = it->first + 1; y < next->first; ++y) {
            const double t = static_cast<double>(y - it->first) / span;
            filled[y] = (a > 0.0 && b > 0.0) ? std::exp((1.0 - t) * std::log(a) + t * std::log(b))
                                             : (1.0 - t) * a + t * b;
            out.interpolated_years.insert(y);
        }
    }
    if (!out.interpolated_years.empty()) {
        out.diagnostics.push_back("R&D series " + name + ": " + std::to_string(out.interpolated_years.size()) +
                                  " unreported year(s) interpolated in logs");
    }

    bool all_zero = true;
    for (const auto& [y, r] : filled) all_zero = all_zero && r == 0.0;
    if (all_zero) {
        out.diagnostics.push_back("R&D series " + name + " is identically zero; stock set to zero");
        for (const auto& [y, r] : filled) out.stock[y] = 0.0;
        return out;
    }

    double sum = 0.0;
    int pairs = 0;
    for (auto it = filled.begin(); std::next(it) != filled.end(); ++it) {
        const double a = it->second, b = std::next(it)->second;
        if (a > 0.0 && b > 0.0) {
            sum += std::log(b / a);
            ++pairs;
        }
    }
    if (pairs == 0) {
        out.diagnostics.push_back("R&D series " + name + " has no consecutive positive years; growth rate set to 0");
    }
    out.g = pairs ? sum / pairs : 0.0;
    if (out.g <= -delta) {
        throw NumericalError("R&D series " + name + ": average log growth " + csv::format(out.g) +
                             " does not exceed -delta, initial stock undefined");
    }

    auto it = filled.begin();
    double s = it->second / (delta + out.g);
    out.stock[it->first] = s;
    for (++it; it != filled.end(); ++it) {
        s = (1.0 - delta) * s + it->second;
        out.stock[it->first] = s;
    }
    return out;
}

void write_stock_csv(const std::vector<RDStock>& stocks, std::ostream& out) {
    csv::Writer w(out);
    w.row(kStockColumns);
    for (const auto& s : stocks) {
        for (const auto& [y, v] : s.stock) w.row(s.country, s.industry, y, v, s.delta, s.g);
    }
}

std::vector<RDStock> read_stock_csv(const std::filesystem::path& path) {
    const auto table = csv::Table::read(path, kStockColumns);
    std::map<std::pair<std::string, std::string>, RDStock> by;
    for (const auto& row : table.rows()) {
        auto& s = by[{row.str("country"), row.str("industry")}];
        s.country = row.str("country");
        s.industry = row.str("industry");
        s.delta = row.num("delta");
        s.g = row.num("g");
        if (!s.stock.emplace(row.integer("year"), row.num("stock_real")).second) {
            row.fail("duplicate country, industry and year");
        }
    }
    std::vector<RDStock> out;
    for (auto& [k, s] : by) out.push_back(std::move(s));
    return out;
}

IntensityVector intensity(const std::vector<RDStock>& stocks, const IOTable& table,
                          const std::set<std::string>& manufacturing) {
    IntensityVector out;
    out.year = table.year;
    out.d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table.size()));
    for (const auto& s : stocks) {
        auto node = table.index.find({s.country, s.industry});
        if (!node) {
            throw ValidationError("R&D stock for " + s.country + "/" + s.industry +
                                  " has no node in the input-output table");
        }
        auto it = s.stock.find(table.year);
        if (it == s.stock.end()) continue;
        const double stock = it->second;
        if (stock < 0.0) {
            throw ValidationError("negative R&D stock for " + s.country + "/" + s.industry + " in " +
                                  std::to_string(table.year));
        }
        if (!manufacturing.count(s.industry)) {
            if (stock > 0.0) {
                out.diagnostics.push_back("R&D stock for non-manufacturing " + s.country + "/" + s.industry +
                                          " ignored (intensity forced to zero)");
            }
            continue;
        }
        const double q = table.gross_output(static_cast<Eigen::Index>(*node));
        if (q > 0.0) out.d(static_cast<Eigen::Index>(*node)) = stock / q;
    }
    return out;
}

}  // namespace gvc
