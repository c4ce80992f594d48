#include "gvc/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include "gvc/csv.hpp"
#include "gvc/error.hpp"

namespace gvc {

WeightMatrix normalize_weights(const IOTable& table, Normalization normalization, bool strict) {
    const auto& a = table.flows;
    if (strict) {
        const auto blk = static_cast<Eigen::Index>(table.index.industry_count());
        for (std::size_t c = 0; c < table.index.country_count(); ++c) {
            const auto s = static_cast<Eigen::Index>(c) * blk;
            if (a.block(s, s, blk, blk).any()) {
                throw ValidationError("year " + std::to_string(table.year) + ": within-country flows of " +
                                      table.index.countries()[c] +
                                      " are still present; mask domestic transactions before computing centrality");
            }
        }
    }
    WeightMatrix out;
    out.year = table.year;
    out.normalization = normalization;
    out.w = Eigen::MatrixXd::Zero(a.rows(), a.cols());
    if (normalization == Normalization::kSellerShare) {
        const Eigen::VectorXd sales = a.rowwise().sum();
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            if (sales(r) > 0.0) out.w.row(r) = a.row(r) / sales(r);
        }
    } else {
        const Eigen::RowVectorXd purchases = a.colwise().sum();
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            if (purchases(c) > 0.0) out.w.col(c) = a.col(c) / purchases(c);
        }
    }
    return out;
}

Eigen::VectorXd katz_bonacich(const WeightMatrix& weights, double lambda, Direction direction,
                              const SolverOptions& options) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw ValidationError("decay lambda must lie in (0, 1)");
    if (weights.w.rows() != weights.w.cols()) throw NumericalError("weight matrix is not square");
    const double eta = 1.0 - lambda;
    Eigen::MatrixXd m = direction == Direction::kForward ? Eigen::MatrixXd(lambda * weights.w)
                                                         : Eigen::MatrixXd(lambda * weights.w.transpose());
    ShiftedSystem system(std::move(m), options);
    return system.solve(Eigen::VectorXd(Eigen::VectorXd::Constant(weights.w.rows(), eta)));
}

CentralityScores compute_centrality(const IOTable& masked, double lambda, Orientation orientation,
                                    const SolverOptions& options) {
    CentralityScores s;
    s.year = masked.year;
    s.index = masked.index;
    s.lambda = lambda;
    const auto seller = normalize_weights(masked, Normalization::kSellerShare);
    const auto buyer = normalize_weights(masked, Normalization::kBuyerShare);
    if (orientation == Orientation::kResolved) {
        s.forward = katz_bonacich(buyer, lambda, Direction::kForward, options);
        s.backward = katz_bonacich(seller, lambda, Direction::kBackward, options);
    } else {
        s.forward = katz_bonacich(seller, lambda, Direction::kForward, options);
        s.backward = katz_bonacich(buyer, lambda, Direction::kBackward, options);
    }
    return s;
}

std::string_view to_string(Tier t) {
    switch (t) {
        case Tier::kHigh: return "high";
        case Tier::kMiddle: return "middle";
        case Tier::kLow: return "low";
    }
    return "";
}

std::string_view to_string(TotalClass t) {
    switch (t) {
        case TotalClass::kHigh: return "High";
        case TotalClass::kMiddle: return "Middle";
        case TotalClass::kLow: return "Low";
    }
    return "";
}

std::string_view to_string(IndustryGroup g) { return g == IndustryGroup::kA ? "A" : "B"; }

Tier parse_tier(std::string_view s) {
    if (s == "high") return Tier::kHigh;
    if (s == "middle") return Tier::kMiddle;
    if (s == "low") return Tier::kLow;
    throw ValidationError("unknown centrality tier '" + std::string(s) + "'");
}

TotalClass parse_total_class(std::string_view s) {
    if (s == "High") return TotalClass::kHigh;
    if (s == "Middle") return TotalClass::kMiddle;
    if (s == "Low") return TotalClass::kLow;
    throw ValidationError("unknown total class '" + std::string(s) + "'");
}

IndustryGroup parse_group(std::string_view s) {
    if (s == "A") return IndustryGroup::kA;
    if (s == "B") return IndustryGroup::kB;
    throw ValidationError("unknown industry group '" + std::string(s) + "'");
}

namespace {

// Ranks positions by descending score, ties by ascending country code.
std::vector<std::size_t> rank_order(const std::vector<CountryScore>& scores) {
    for (const auto& s : scores) {
        if (!std::isfinite(s.score)) throw NumericalError("non-finite centrality score for " + s.country);
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a].score != scores[b].score) return scores[a].score > scores[b].score;
        return scores[a].country < scores[b].country;
    });
    return order;
}

std::vector<Tier> assign(const std::vector<CountryScore>& scores, std::size_t high, std::size_t middle) {
    const auto order = rank_order(scores);
    std::vector<Tier> out(scores.size(), Tier::kLow);
    for (std::size_t r = 0; r < order.size(); ++r) {
        out[order[r]] = r < high ? Tier::kHigh : (r < high + middle ? Tier::kMiddle : Tier::kLow);
    }
    return out;
}

}  // namespace

std::vector<Tier> classify_tertiles(const std::vector<CountryScore>& scores) {
    if (scores.size() < 3) throw ValidationError("tertile classification needs at least 3 countries");
    const std::size_t third = (scores.size() + 2) / 3;
    return assign(scores, third, third);
}

std::vector<Tier> classify_topk(const std::vector<CountryScore>& scores, int k) {
    if (k < 1) throw ValidationError("top-k classification needs k >= 1");
    if (2 * static_cast<std::size_t>(k) >= scores.size()) {
        throw ValidationError("top-k classification needs 2k < N (k=" + std::to_string(k) +
                              ", N=" + std::to_string(scores.size()) + ")");
    }
    return assign(scores, static_cast<std::size_t>(k), static_cast<std::size_t>(k));
}

TotalLabel total_class(Tier forward, Tier backward) {
    if (forward == Tier::kHigh && backward == Tier::kHigh) return {TotalClass::kHigh, {}};
    if (forward == Tier::kLow && backward == Tier::kLow) return {TotalClass::kLow, {}};
    return {TotalClass::kMiddle, std::string(to_string(backward)) + "-" + std::string(to_string(forward))};
}

const std::vector<std::string>& middle_subcategories() {
    static const std::vector<std::string> kSub{"high-middle", "high-low",   "middle-high", "middle-middle",
                                               "middle-low",  "low-high",   "low-middle"};
    return kSub;
}

std::map<std::string, IndustryGroup> split_industry_groups(const std::map<std::string, double>& industry_max) {
    if (industry_max.size() < 2) throw ValidationError("industry group split needs at least 2 industries");
    std::vector<std::pair<std::string, double>> ranked(industry_max.begin(), industry_max.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    const std::size_t top = ranked.size() / 2;
    std::map<std::string, IndustryGroup> out;
    for (std::size_t r = 0; r < ranked.size(); ++r) {
        out[ranked[r].first] = r < top ? IndustryGroup::kB : IndustryGroup::kA;
    }
    return out;
}

const NodeLabel* ClassLabels::find(int year, const std::string& country, const std::string& industry) const {
    auto key = std::make_tuple(year, std::cref(country), std::cref(industry));
    auto it = std::lower_bound(nodes.begin(), nodes.end(), key, [](const NodeLabel& n, const auto& k) {
        return std::make_tuple(n.year, std::cref(n.country), std::cref(n.industry)) < k;
    });
    if (it == nodes.end() || it->year != year || it->country != country || it->industry != industry) return nullptr;
    return &*it;
}

namespace {

void sort_nodes(std::vector<NodeLabel>& nodes) {
    std::sort(nodes.begin(), nodes.end(), [](const NodeLabel& a, const NodeLabel& b) {
        return std::tie(a.year, a.country, a.industry) < std::tie(b.year, b.country, b.industry);
    });
}

// Assigns tiers, total classes and groups in place to already-scored nodes.
void label_nodes(std::vector<NodeLabel>& nodes, const ClassificationOptions& options,
                 std::map<std::string, IndustryGroup>& groups) {
    std::map<std::pair<int, std::string>, std::vector<std::size_t>> cells;
    for (std::size_t k = 0; k < nodes.size(); ++k) cells[{nodes[k].year, nodes[k].industry}].push_back(k);

    auto classify_scores = [&](const std::vector<CountryScore>& s) {
        return options.mode == ClassificationOptions::Mode::kTertile ? classify_tertiles(s)
                                                                     : classify_topk(s, options.k);
    };
    for (const auto& [cell, members] : cells) {
        std::vector<CountryScore> fwd, back;
        for (auto k : members) {
            fwd.push_back({nodes[k].country, nodes[k].forward});
            back.push_back({nodes[k].country, nodes[k].backward});
        }
        std::vector<Tier> ft, bt;
        try {
            ft = classify_scores(fwd);
            bt = classify_scores(back);
        } catch (const ValidationError& e) {
            throw ValidationError("industry " + cell.second + ", year " + std::to_string(cell.first) + ": " +
                                  e.what());
        }
        for (std::size_t m = 0; m < members.size(); ++m) {
            auto& n = nodes[members[m]];
            n.fwd_class = ft[m];
            n.back_class = bt[m];
            n.total = total_class(ft[m], bt[m]);
        }
    }

    std::map<std::string, double> maxima;
    for (const auto& n : nodes) {
        double v = 0.0;
        switch (options.group_direction) {
            case GroupSplitDirection::kBoth: v = std::max(n.forward, n.backward); break;
            case GroupSplitDirection::kForward: v = n.forward; break;
            case GroupSplitDirection::kBackward: v = n.backward; break;
        }
        auto [it, inserted] = maxima.emplace(n.industry, v);
        if (!inserted) it->second = std::max(it->second, v);
    }
    groups = split_industry_groups(maxima);
    for (auto& n : nodes) n.group = groups.at(n.industry);
}

}  // namespace

ClassLabels classify(const std::vector<CentralityScores>& years, const ClassificationOptions& options) {
    ClassLabels out;
    for (const auto& s : years) {
        const auto& idx = s.index;
        std::vector<std::size_t> countries;
        if (options.sample.empty()) {
            for (std::size_t c = 0; c < idx.country_count(); ++c) countries.push_back(c);
        } else {
            for (const auto& code : options.sample) {
                auto c = idx.country_index(code);
                if (!c) {
                    throw ValidationError("sample country '" + code + "' is absent from the centrality network of " +
                                          std::to_string(s.year));
                }
                countries.push_back(*c);
            }
        }
        for (auto c : countries) {
            for (std::size_t h = 0; h < idx.industry_count(); ++h) {
                NodeLabel n;
                n.year = s.year;
                n.country = idx.countries()[c];
                n.industry = idx.industries()[h];
                const auto node = static_cast<Eigen::Index>(idx.at(c, h));
                n.forward = s.forward(node);
                n.backward = s.backward(node);
                out.nodes.push_back(std::move(n));
            }
        }
    }
    sort_nodes(out.nodes);
    label_nodes(out.nodes, options, out.groups);
    return out;
}

ClassLabels reclassify(const ClassLabels& scored, const ClassificationOptions& options) {
    ClassLabels out;
    std::set<std::string> keep(options.sample.begin(), options.sample.end());
    for (const auto& n : scored.nodes) {
        if (keep.empty() || keep.count(n.country)) out.nodes.push_back(n);
    }
    sort_nodes(out.nodes);
    label_nodes(out.nodes, options, out.groups);
    return out;
}

namespace {
const std::vector<std::string> kCentralityColumns{"year",       "country",   "industry",    "forward",
                                                   "backward",   "fwd_class", "back_class",  "total_class",
                                                   "middle_subcategory", "industry_group"};
}

void write_centrality_csv(const ClassLabels& labels, std::ostream& out) {
    csv::Writer w(out);
    w.row(kCentralityColumns);
    for (const auto& n : labels.nodes) {
        w.row(n.year, n.country, n.industry, n.forward, n.backward, to_string(n.fwd_class), to_string(n.back_class),
              to_string(n.total.total), n.total.middle_subcategory, to_string(n.group));
    }
}

ClassLabels read_centrality_csv(const std::filesystem::path& path) {
    const auto table = csv::Table::read(path, kCentralityColumns);
    ClassLabels out;
    for (const auto& row : table.rows()) {
        NodeLabel n;
        n.year = row.integer("year");
        n.country = row.str("country");
        n.industry = row.str("industry");
        n.forward = row.num("forward");
        n.backward = row.num("backward");
        try {
            n.fwd_class = parse_tier(row.str("fwd_class"));
            n.back_class = parse_tier(row.str("back_class"));
            n.total.total = parse_total_class(row.str("total_class"));
            n.total.middle_subcategory = row.str("middle_subcategory");
            n.group = parse_group(row.str("industry_group"));
        } catch (const ValidationError& e) {
            row.fail(e.what());
        }
        out.groups[n.industry] = n.group;
        out.nodes.push_back(std::move(n));
    }
    sort_nodes(out.nodes);
    return out;
}

void write_centrality_summary(const ClassLabels& labels, std::ostream& out) {
    std::vector<std::pair<std::string, double>> back, fwd;
    for (const auto& n : labels.nodes) {
        back.emplace_back(n.industry, n.backward);
        fwd.emplace_back(n.industry, n.forward);
    }
    const auto b = summarize(back);
    const auto f = summarize(fwd);
    csv::Writer w(out);
    w.row(std::vector<std::string>{"industry", "back_obs", "back_min", "back_max", "back_mean", "back_sd",
                                   "fwd_obs", "fwd_min", "fwd_max", "fwd_mean", "fwd_sd"});
    for (std::size_t k = 0; k < b.size(); ++k) {
        w.row(b[k].industry, b[k].obs, b[k].min, b[k].max, b[k].mean, b[k].sd, f[k].obs, f[k].min, f[k].max,
              f[k].mean, f[k].sd);
    }
}

}  // namespace gvc
