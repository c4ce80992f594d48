#include "gvc/rd_content.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "gvc/csv.hpp"
#include "gvc/error.hpp"

namespace gvc {

LeontiefSolver::LeontiefSolver(const CoefficientMatrix& coefficients, const SolverOptions& options)
    : year_(coefficients.year), system_(coefficients.b, options) {}

const Eigen::MatrixXd& LeontiefSolver::inverse() const {
    if (!inverse_) {
        inverse_ = system_.solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(system_.size(), system_.size())));
    }
    return *inverse_;
}

Eigen::MatrixXd leontief_solve(const CoefficientMatrix& coefficients, const Eigen::MatrixXd& rhs,
                               const SolverOptions& options) {
    return LeontiefSolver(coefficients, options).solve(rhs);
}

ContentResult rd_content(const Eigen::VectorXd& d, const LeontiefSolver& leontief, const Eigen::VectorXd& f) {
    const auto& l = leontief.inverse();
    if (d.size() != l.rows() || f.size() != l.rows()) {
        throw ValidationError("intensity, final demand and coefficient dimensions disagree");
    }
    ContentResult out;
    out.year = leontief.year();
    out.t = l * f.asDiagonal();
    out.v = (d.transpose() * out.t).transpose();
    return out;
}

ImporterSets ImporterSets::default_sets() {
    ImporterSets s;
    s.all = {"BEL", "CAN", "CZE", "DEU", "ESP", "FRA", "GBR", "GRC", "HUN", "IRL", "ITA",
             "JPN", "MEX", "NLD", "POL", "PRT", "ROM", "RUS", "SVN", "TUR", "USA"};
    s.na = {"CAN", "MEX", "USA"};
    s.g5 = {"DEU", "FRA", "GBR", "JPN", "USA"};
    for (const auto& c : s.all) {
        if (!s.na.count(c) && c != "JPN") s.eur.insert(c);
    }
    return s;
}

bool ImporterSets::member(const std::string& country, const std::string& set) const {
    const bool in_all = std::find(all.begin(), all.end(), country) != all.end();
    if (set == "ALL") return in_all;
    if (set == "EUR") return in_all && eur.count(country);
    if (set == "NA") return in_all && na.count(country);
    if (set == "G5") return in_all && g5.count(country);
    if (set == "nonG5") return in_all && !g5.count(country);
    throw ValidationError("unknown importer set '" + set + "'");
}

std::string ImporterSets::flags(const std::string& country) const {
    std::string out;
    for (const char* s : {"ALL", "EUR", "NA", "G5", "nonG5"}) {
        if (member(country, s)) {
            if (!out.empty()) out += '|';
            out += s;
        }
    }
    return out;
}

std::size_t bucket_of(TotalClass total, IndustryGroup group) {
    const std::size_t base = total == TotalClass::kHigh ? 0 : (total == TotalClass::kMiddle ? 2 : 4);
    return base + (group == IndustryGroup::kA ? 0 : 1);
}

BucketValue ImporterContent::foreign_total() const {
    BucketValue s;
    for (const auto& b : foreign) {
        s.total += b.total;
        s.direct += b.direct;
        s.indirect += b.indirect;
    }
    return s;
}

namespace {

// Exporter label per node for one year; nullptr where the exporter is unlabeled.
std::vector<const NodeLabel*> exporter_labels(const NodeIndex& index, const ClassLabels& labels, int year) {
    std::vector<const NodeLabel*> out(index.size(), nullptr);
    for (std::size_t r = 0; r < index.size(); ++r) {
        const auto id = index.node(r);
        out[r] = labels.find(year, id.country, id.industry);
    }
    return out;
}

std::size_t subcategory_index(const std::string& s) {
    const auto& all = middle_subcategories();
    auto it = std::find(all.begin(), all.end(), s);
    if (it == all.end()) throw ValidationError("unknown Middle subcategory '" + s + "'");
    return static_cast<std::size_t>(it - all.begin());
}

std::vector<std::size_t> importer_nodes(const NodeIndex& index, const std::vector<std::string>& importers) {
    std::vector<std::size_t> out;
    for (const auto& c : importers) {
        auto ci = index.country_index(c);
        if (!ci) throw ValidationError("importer country '" + c + "' is not in the input-output table");
        for (std::size_t h = 0; h < index.industry_count(); ++h) out.push_back(index.at(*ci, h));
    }
    return out;
}

// Shared accumulation: contribution(r, c) returns {total, direct, indirect}.
template <typename Contribution>
std::vector<ImporterContent> accumulate(const Eigen::VectorXd& d, const Eigen::VectorXd& v, const NodeIndex& index,
                                        const ClassLabels& labels, int year,
                                        const std::vector<std::string>& importers, Contribution contribution) {
    const auto exporters = exporter_labels(index, labels, year);
    std::vector<ImporterContent> out;
    for (auto c : importer_nodes(index, importers)) {
        const auto id = index.node(c);
        ImporterContent ic;
        ic.country = id.country;
        ic.industry = id.industry;
        ic.year = year;
        ic.v = v(static_cast<Eigen::Index>(c));
        const auto ci = index.country_of(c);
        for (std::size_t r = 0; r < index.size(); ++r) {
            const double dr = d(static_cast<Eigen::Index>(r));
            if (dr == 0.0) continue;
            const BucketValue x = contribution(r, c, dr);
            auto add = [&](BucketValue& b) {
                b.total += x.total;
                b.direct += x.direct;
                b.indirect += x.indirect;
            };
            if (index.country_of(r) == ci) {
                add(ic.domestic);
                continue;
            }
            const NodeLabel* lab = exporters[r];
            if (!lab) {
                const auto ex = index.node(r);
                throw ValidationError("no centrality label for exporter " + ex.country + "/" + ex.industry +
                                      " in " + std::to_string(year));
            }
            add(ic.foreign[bucket_of(lab->total.total, lab->group)]);
            if (lab->total.total == TotalClass::kMiddle) add(ic.middle[subcategory_index(lab->total.middle_subcategory)]);
        }
        out.push_back(std::move(ic));
    }
    return out;
}

}  // namespace

std::vector<ImporterContent> partition_content(const ContentResult& content, const Eigen::VectorXd& d,
                                               const NodeIndex& index, const ClassLabels& labels,
                                               const std::vector<std::string>& importers) {
    const auto& t = content.t;
    return accumulate(d, content.v, index, labels, content.year, importers,
                      [&](std::size_t r, std::size_t c, double dr) {
                          return BucketValue{dr * t(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)),
                                             0.0, 0.0};
                      });
}

std::vector<ImporterContent> direct_indirect_split(const LeontiefSolver& leontief, const Eigen::VectorXd& d,
                                                   const Eigen::VectorXd& f, const NodeIndex& index,
                                                   const ClassLabels& labels,
                                                   const std::vector<std::string>& importers) {
    const auto& l = leontief.inverse();
    const auto& b = leontief.coefficients();
    const Eigen::VectorXd v = ((d.transpose() * l).transpose().array() * f.array()).matrix();
    return accumulate(d, v, index, labels, leontief.year(), importers, [&](std::size_t r, std::size_t c, double dr) {
        const auto ri = static_cast<Eigen::Index>(r), cj = static_cast<Eigen::Index>(c);
        const double fc = f(cj);
        const double own = r == c ? 1.0 : 0.0;
        BucketValue x;
        x.total = dr * l(ri, cj) * fc;
        x.direct = dr * (own + b(ri, cj)) * fc;
        x.indirect = dr * (l(ri, cj) - own - b(ri, cj)) * fc;
        return x;
    });
}

namespace {
const std::vector<std::string> kRegressorColumns{
    "country",  "industry", "year",     "importer_flags", "ln_domestic", "ln_high_A", "ln_high_B",
    "ln_middle_A", "ln_middle_B", "ln_low_A", "ln_low_B", "domestic",  "high_A",  "high_B",
    "middle_A", "middle_B", "low_A", "low_B", "total"};

std::string ln_field(double v) { return v > 0.0 ? csv::format(std::log(v)) : std::string{}; }
}  // namespace

std::vector<RegressorRow> regressor_rows(const std::vector<ImporterContent>& contents, const ImporterSets& sets) {
    std::vector<RegressorRow> out;
    for (const auto& c : contents) {
        RegressorRow r;
        r.country = c.country;
        r.industry = c.industry;
        r.year = c.year;
        r.importer_flags = sets.flags(c.country);
        r.domestic = c.domestic.total;
        for (std::size_t k = 0; k < 6; ++k) r.foreign[k] = c.foreign[k].total;
        r.total = c.v;
        out.push_back(std::move(r));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.country, a.industry, a.year) < std::tie(b.country, b.industry, b.year);
    });
    return out;
}

void write_regressor_csv(const std::vector<RegressorRow>& rows, std::ostream& out) {
    csv::Writer w(out);
    w.row(kRegressorColumns);
    for (const auto& r : rows) {
        std::vector<std::string> f{r.country, r.industry, std::to_string(r.year), r.importer_flags, ln_field(r.domestic)};
        for (double v : r.foreign) f.push_back(ln_field(v));
        f.push_back(csv::format(r.domestic));
        for (double v : r.foreign) f.push_back(csv::format(v));
        f.push_back(csv::format(r.total));
        w.row(f);
    }
}

std::vector<RegressorRow> read_regressor_csv(const std::filesystem::path& path) {
    const auto table = csv::Table::read(path, kRegressorColumns);
    std::vector<RegressorRow> out;
    for (const auto& row : table.rows()) {
        RegressorRow r;
        r.country = row.str("country");
        r.industry = row.str("industry");
        r.year = row.integer("year");
        r.importer_flags = row.str("importer_flags");
        r.domestic = row.num("domestic");
        for (std::size_t k = 0; k < 6; ++k) r.foreign[k] = row.num(kForeignBuckets[k]);
        r.total = row.num("total");
        out.push_back(std::move(r));
    }
    return out;
}

ShareTable shares_report(const std::vector<ImporterContent>& contents, ShareGrouping grouping,
                         std::optional<int> year, std::optional<std::string> industry) {
    ShareTable table;
    struct Acc {
        std::vector<double> sum;
        std::size_t nodes = 0;
    };
    std::map<std::string, Acc> acc;
    std::vector<std::string> order;
    const std::size_t width = grouping == ShareGrouping::kMiddleSubcategory ? 7 : 6;
    if (grouping == ShareGrouping::kMiddleSubcategory) {
        table.columns = middle_subcategories();
    } else {
        table.columns = {"direct_High", "direct_Middle", "direct_Low", "indirect_High", "indirect_Middle", "indirect_Low"};
    }
    for (const auto& c : contents) {
        if (grouping == ShareGrouping::kIndustry && year && c.year != *year) continue;
        if (grouping != ShareGrouping::kIndustry && industry && c.industry != *industry) continue;
        std::string key;
        std::ostringstream ys;
        ys << c.year;
        key = grouping == ShareGrouping::kIndustry ? c.industry : ys.str();
        auto [it, inserted] = acc.try_emplace(key, Acc{std::vector<double>(width, 0.0), 0});
        std::vector<double> part(width, 0.0);
        double denom = 0.0;
        if (grouping == ShareGrouping::kMiddleSubcategory) {
            for (std::size_t k = 0; k < 7; ++k) {
                part[k] = c.middle[k].total;
                denom += part[k];
            }
        } else {
            for (std::size_t k = 0; k < 6; ++k) {
                const std::size_t cls = k / 2;  // 0 High, 1 Middle, 2 Low
                part[cls] += c.foreign[k].direct;
                part[3 + cls] += c.foreign[k].indirect;
            }
            for (double p : part) denom += p;
        }
        if (!(denom > 0.0)) continue;
        for (std::size_t k = 0; k < width; ++k) it->second.sum[k] += 100.0 * part[k] / denom;
        ++it->second.nodes;
    }
    for (auto& [key, a] : acc) {
        ShareRow row;
        row.key = key;
        row.nodes = a.nodes;
        row.percent.assign(width, 0.0);
        if (a.nodes == 0) {
            row.zero_total = true;
        } else {
            for (std::size_t k = 0; k < width; ++k) row.percent[k] = a.sum[k] / static_cast<double>(a.nodes);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_share_csv(const ShareTable& table, const std::string& key_name, std::ostream& out) {
    csv::Writer w(out);
    std::vector<std::string> header{key_name};
    header.insert(header.end(), table.columns.begin(), table.columns.end());
    header.push_back("nodes");
    header.push_back("zero_total");
    w.row(header);
    for (const auto& r : table.rows) {
        std::vector<std::string> f{r.key};
        for (double p : r.percent) f.push_back(csv::format(p));
        f.push_back(std::to_string(r.nodes));
        f.push_back(r.zero_total ? "1" : "0");
        w.row(f);
    }
}

}  // namespace gvc
