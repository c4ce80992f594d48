#include "gvc/io_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gvc/csv.hpp"
#include "gvc/error.hpp"

namespace gvc {

NodeIndex::NodeIndex(std::vector<std::string> countries, std::vector<std::string> industries)
    : countries_(std::move(countries)), industries_(std::move(industries)) {
    auto check_unique = [](std::vector<std::string> v, const char* what) {
        std::sort(v.begin(), v.end());
        if (std::adjacent_find(v.begin(), v.end()) != v.end()) {
            throw ValidationError(std::string("duplicate ") + what + " code in registry");
        }
    };
    check_unique(countries_, "country");
    check_unique(industries_, "industry");
}

std::optional<std::size_t> NodeIndex::country_index(const std::string& code) const {
    auto it = std::find(countries_.begin(), countries_.end(), code);
    if (it == countries_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - countries_.begin());
}

std::optional<std::size_t> NodeIndex::industry_index(const std::string& code) const {
    auto it = std::find(industries_.begin(), industries_.end(), code);
    if (it == industries_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - industries_.begin());
}

std::optional<std::size_t> NodeIndex::find(const NodeId& id) const {
    auto c = country_index(id.country);
    auto h = industry_index(id.industry);
    if (!c || !h) return std::nullopt;
    return at(*c, *h);
}

void IOTable::validate() const {
    const auto n = static_cast<Eigen::Index>(size());
    const auto nc = static_cast<Eigen::Index>(index.country_count());
    if (flows.rows() != n || flows.cols() != n) throw ValidationError("flow matrix is not NG x NG");
    if (final_demand.rows() != n || final_demand.cols() != nc) {
        throw ValidationError("final-demand matrix is not NG x countries");
    }
    if (gross_output.size() != n) throw ValidationError("gross-output vector is not of length NG");
    auto nonneg = [&](const auto& m, const char* what) {
        if (!m.allFinite()) throw ValidationError(std::string(what) + " contains non-finite values");
        if (m.size() && m.minCoeff() < 0.0) throw ValidationError(std::string(what) + " contains negative values");
    };
    nonneg(flows, "flow matrix");
    nonneg(final_demand, "final-demand matrix");
    nonneg(gross_output, "gross output");
    for (Eigen::Index k = 0; k < n; ++k) {
        if (gross_output(k) == 0.0 && (flows.row(k).any() || flows.col(k).any())) {
            const auto id = index.node(static_cast<std::size_t>(k));
            throw ValidationError("year " + std::to_string(year) + ": node " + id.country + "/" + id.industry +
                                  " has zero gross output but nonzero intermediate flows");
        }
    }
}

namespace {

const std::vector<std::string> kFlowColumns{"year", "src_country", "src_industry", "dst_country",
                                             "dst_industry", "value"};
const std::vector<std::string> kFinalColumns{"year", "src_country", "src_industry", "dst_country", "value"};
const std::vector<std::string> kOutputColumns{"year", "country", "industry", "gross_output"};

struct RawTables {
    csv::Table flows;
    csv::Table final_demand;
    csv::Table output;
};

RawTables read_raw(const IOPaths& paths) {
    return {csv::Table::read(paths.flows, kFlowColumns), csv::Table::read(paths.final_demand, kFinalColumns),
            csv::Table::read(paths.output, kOutputColumns)};
}

NodeIndex collect_registry(const RawTables& raw) {
    std::set<std::string> countries;
    std::set<std::string> industries;
    auto need = [](const csv::Row& row, const std::string& col) -> const std::string& {
        const auto& s = row.str(col);
        if (s.empty()) row.fail("empty code in column '" + col + "'");
        return s;
    };
    for (const auto& row : raw.output.rows()) {
        countries.insert(need(row, "country"));
        industries.insert(need(row, "industry"));
    }
    for (const auto& row : raw.flows.rows()) {
        countries.insert(need(row, "src_country"));
        countries.insert(need(row, "dst_country"));
        industries.insert(need(row, "src_industry"));
        industries.insert(need(row, "dst_industry"));
    }
    for (const auto& row : raw.final_demand.rows()) {
        countries.insert(need(row, "src_country"));
        countries.insert(need(row, "dst_country"));
        industries.insert(need(row, "src_industry"));
    }
    return NodeIndex({countries.begin(), countries.end()}, {industries.begin(), industries.end()});
}

double nonnegative_value(const csv::Row& row) {
    const double v = row.num("value");
    if (v < 0.0) row.fail("negative value " + csv::format(v));
    return v;
}

IOTable assemble(const RawTables& raw, const NodeIndex& index, int year) {
    IOTable t;
    t.year = year;
    t.index = index;
    const auto n = static_cast<Eigen::Index>(index.size());
    const auto nc = static_cast<Eigen::Index>(index.country_count());
    t.flows = Eigen::MatrixXd::Zero(n, n);
    t.final_demand = Eigen::MatrixXd::Zero(n, nc);
    t.gross_output = Eigen::VectorXd::Zero(n);

    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen_flow =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
    for (const auto& row : raw.flows.rows()) {
        if (row.integer("year") != year) continue;
        const auto src = *index.find({row.str("src_country"), row.str("src_industry")});
        const auto dst = *index.find({row.str("dst_country"), row.str("dst_industry")});
        const double v = nonnegative_value(row);
        if (seen_flow(src, dst)) row.fail("duplicate flow record for seller, buyer and year");
        seen_flow(src, dst) = true;
        t.flows(src, dst) = v;
    }
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen_final =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, nc, false);
    for (const auto& row : raw.final_demand.rows()) {
        if (row.integer("year") != year) continue;
        const auto src = *index.find({row.str("src_country"), row.str("src_industry")});
        const auto dst = *index.country_index(row.str("dst_country"));
        const double v = nonnegative_value(row);
        if (seen_final(src, dst)) row.fail("duplicate final-demand record for seller, consumer and year");
        seen_final(src, dst) = true;
        t.final_demand(src, dst) = v;
    }
    std::vector<bool> seen_output(index.size(), false);
    for (const auto& row : raw.output.rows()) {
        if (row.integer("year") != year) continue;
        const auto node = *index.find({row.str("country"), row.str("industry")});
        const double v = row.num("gross_output");
        if (v < 0.0) row.fail("negative gross output " + csv::format(v));
        if (seen_output[node]) row.fail("duplicate gross-output record for node and year");
        seen_output[node] = true;
        t.gross_output(node) = v;
    }
    t.validate();
    return t;
}

}  // namespace

IOTable load_io_table(const IOPaths& paths, int year) {
    const auto raw = read_raw(paths);
    const auto& rows = raw.output.rows();
    if (std::none_of(rows.begin(), rows.end(), [&](const csv::Row& r) { return r.integer("year") == year; })) {
        throw ValidationError("no gross-output records for year " + std::to_string(year));
    }
    return assemble(raw, collect_registry(raw), year);
}

std::map<int, IOTable> load_io_series(const IOPaths& paths) {
    const auto raw = read_raw(paths);
    const auto index = collect_registry(raw);
    std::set<int> years;
    for (const auto& row : raw.output.rows()) years.insert(row.integer("year"));
    for (const auto& row : raw.flows.rows()) years.insert(row.integer("year"));
    std::map<int, IOTable> out;
    for (int y : years) out.emplace(y, assemble(raw, index, y));
    return out;
}

namespace {

void write_rows(const IOTable& t, csv::Writer& flows, csv::Writer& fd, csv::Writer& output) {
    const auto& idx = t.index;
    const auto n = static_cast<Eigen::Index>(t.size());
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto src = idx.node(static_cast<std::size_t>(r));
        for (Eigen::Index c = 0; c < n; ++c) {
            if (t.flows(r, c) == 0.0) continue;
            const auto dst = idx.node(static_cast<std::size_t>(c));
            flows.row(t.year, src.country, src.industry, dst.country, dst.industry, t.flows(r, c));
        }
    }
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto src = idx.node(static_cast<std::size_t>(r));
        for (Eigen::Index c = 0; c < t.final_demand.cols(); ++c) {
            if (t.final_demand(r, c) == 0.0) continue;
            fd.row(t.year, src.country, src.industry, idx.countries()[static_cast<std::size_t>(c)],
                   t.final_demand(r, c));
        }
    }
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto id = idx.node(static_cast<std::size_t>(r));
        output.row(t.year, id.country, id.industry, t.gross_output(r));
    }
}

}  // namespace

void write_io_table(const IOTable& table, std::ostream& flows, std::ostream& final_demand,
                    std::ostream& output) {
    csv::Writer fw(flows), dw(final_demand), ow(output);
    fw.row(kFlowColumns);
    dw.row(kFinalColumns);
    ow.row(kOutputColumns);
    write_rows(table, fw, dw, ow);
}

void write_io_series(const std::vector<const IOTable*>& tables, const IOPaths& paths) {
    std::ofstream f(paths.flows, std::ios::binary), d(paths.final_demand, std::ios::binary),
        o(paths.output, std::ios::binary);
    if (!f || !d || !o) throw ValidationError("cannot open input-output files for writing");
    csv::Writer fw(f), dw(d), ow(o);
    fw.row(kFlowColumns);
    dw.row(kFinalColumns);
    ow.row(kOutputColumns);
    for (const auto* t : tables) write_rows(*t, fw, dw, ow);
}

ProductiveCheck check_productive(const Eigen::MatrixXd& b, const SolverOptions& options) {
    ProductiveCheck out;
    if (b.size() == 0) {
        out.productive = true;
        return out;
    }
    // A column-sum bound below one settles the question without a solve.
    const double max_col = b.colwise().sum().maxCoeff();
    const double max_row = b.rowwise().sum().maxCoeff();
    if (std::min(max_col, max_row) < 1.0) {
        out.productive = true;
        out.radius_upper_bound = std::min(max_col, max_row);
    }
    Eigen::VectorXd x;
    try {
        ShiftedSystem sys(b, options);
        x = sys.solve(Eigen::VectorXd::Ones(b.rows()).eval());
    } catch (const NumericalError&) {
        out.productive = false;
        out.radius_upper_bound = std::numeric_limits<double>::infinity();
        return out;
    }
    // Any solution of a productive system satisfies x = sum_n B^n 1 >= 1.
    if (x.allFinite() && x.minCoeff() >= 1.0 - 1e-9) {
        const double bound = 1.0 - 1.0 / x.maxCoeff();
        out.radius_upper_bound = out.productive ? std::min(out.radius_upper_bound, bound) : bound;
        out.productive = true;
    } else {
        out.productive = false;
        out.radius_upper_bound = std::numeric_limits<double>::infinity();
    }
    return out;
}

CoefficientMatrix build_coefficients(const IOTable& table, const SolverOptions& options) {
    CoefficientMatrix cm;
    cm.year = table.year;
    const auto n = static_cast<Eigen::Index>(table.size());
    cm.b = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        const double q = table.gross_output(c);
        if (q > 0.0) cm.b.col(c) = table.flows.col(c) / q;
    }
    if (!check_productive(cm.b, options).productive) {
        throw NumericalError("year " + std::to_string(table.year) +
                             ": non-productive economy, spectral radius of the coefficient matrix is not below 1");
    }
    return cm;
}

IOTable apply_mask(const IOTable& table, const MaskSpec& spec) {
    const auto& idx = table.index;
    for (const auto& c : spec.drop_countries) {
        if (!idx.country_index(c)) throw ValidationError("mask drops unknown country '" + c + "'");
    }
    std::optional<std::size_t> focus;
    if (spec.foreign_only_for) {
        focus = idx.country_index(*spec.foreign_only_for);
        if (!focus) throw ValidationError("mask focuses on unknown country '" + *spec.foreign_only_for + "'");
        if (spec.drop_countries.count(*spec.foreign_only_for)) {
            throw ValidationError("mask focuses on a dropped country '" + *spec.foreign_only_for + "'");
        }
    }

    std::vector<std::size_t> kept_countries;
    std::vector<std::string> kept_codes;
    for (std::size_t c = 0; c < idx.country_count(); ++c) {
        if (!spec.drop_countries.count(idx.countries()[c])) {
            kept_countries.push_back(c);
            kept_codes.push_back(idx.countries()[c]);
        }
    }
    if (kept_countries.empty() || idx.industry_count() == 0) {
        throw ValidationError("mask removes every node (empty network)");
    }

    IOTable out;
    out.year = table.year;
    out.index = NodeIndex(kept_codes, idx.industries());
    const auto ni = idx.industry_count();
    const auto n = static_cast<Eigen::Index>(out.size());
    std::vector<Eigen::Index> old_of(out.size());
    for (std::size_t k = 0; k < kept_countries.size(); ++k) {
        for (std::size_t h = 0; h < ni; ++h) {
            old_of[out.index.at(k, h)] = static_cast<Eigen::Index>(idx.at(kept_countries[k], h));
        }
    }
    out.flows.resize(n, n);
    out.final_demand.resize(n, static_cast<Eigen::Index>(kept_countries.size()));
    out.gross_output.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        out.gross_output(r) = table.gross_output(old_of[r]);
        for (Eigen::Index c = 0; c < n; ++c) out.flows(r, c) = table.flows(old_of[r], old_of[c]);
        for (std::size_t k = 0; k < kept_countries.size(); ++k) {
            out.final_demand(r, static_cast<Eigen::Index>(k)) =
                table.final_demand(old_of[r], static_cast<Eigen::Index>(kept_countries[k]));
        }
    }
    const auto blk = static_cast<Eigen::Index>(ni);
    if (spec.drop_domestic) {
        for (std::size_t k = 0; k < kept_countries.size(); ++k) {
            const auto s = static_cast<Eigen::Index>(k) * blk;
            out.flows.block(s, s, blk, blk).setZero();
        }
    }
    if (focus) {
        const auto k = static_cast<Eigen::Index>(*out.index.country_index(*spec.foreign_only_for));
        Eigen::MatrixXd kept = Eigen::MatrixXd::Zero(n, n);
        kept.middleCols(k * blk, blk) = out.flows.middleCols(k * blk, blk);
        kept.block(k * blk, k * blk, blk, blk).setZero();
        out.flows = std::move(kept);
    }
    return out;
}

Eigen::VectorXd aggregate_final_demand(const IOTable& table, FinalDemandScope scope) {
    Eigen::VectorXd f = table.final_demand.rowwise().sum();
    if (scope == FinalDemandScope::kForeign) {
        for (Eigen::Index r = 0; r < f.size(); ++r) {
            f(r) -= table.final_demand(r, static_cast<Eigen::Index>(table.index.country_of(static_cast<std::size_t>(r))));
        }
    }
    return f;
}

IOTable scale_flows_and_output(const IOTable& table, double c) {
    IOTable out = table;
    out.flows *= c;
    out.final_demand *= c;
    out.gross_output *= c;
    return out;
}

}  // namespace gvc
