#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gvc/io_core.hpp"
#include "gvc/linalg.hpp"
#include "gvc/summary.hpp"

namespace gvc {

// seller-share: w_ji = a_ji / sum_i a_ji (rows sum to one)
// buyer-share:  w_ji = a_ji / sum_j a_ji (columns sum to one)
enum class Normalization { kSellerShare, kBuyerShare };

struct WeightMatrix {
    int year = 0;
    Normalization normalization = Normalization::kSellerShare;
    Eigen::MatrixXd w;
};

// strict = true rejects tables that still carry within-country flows.
WeightMatrix normalize_weights(const IOTable& table, Normalization normalization, bool strict = false);

enum class Direction { kForward, kBackward };

// Solves c = eta 1 + lambda W c (forward) or c = eta 1 + lambda W' c (backward),
// eta = 1 - lambda, by factorizing the shifted system.
Eigen::VectorXd katz_bonacich(const WeightMatrix& weights, double lambda, Direction direction,
                              const SolverOptions& options = {});

// How weights are paired with directions.
//   kResolved: forward uses buyer-share W (key supplier), backward uses the
//              transpose of seller-share W (key buyer).
//   kLiteral:  forward uses seller-share W untransposed, backward uses the
//              transpose of buyer-share W. On a fully connected network this
//              collapses to the constant vector.
enum class Orientation { kResolved, kLiteral };

struct CentralityScores {
    int year = 0;
    NodeIndex index;
    Eigen::VectorXd forward;
    Eigen::VectorXd backward;
    double lambda = 0.5;
    double eta() const { return 1.0 - lambda; }
};

// The table must already be masked (RoW dropped, domestic flows zeroed).
CentralityScores compute_centrality(const IOTable& masked, double lambda = 0.5,
                                    Orientation orientation = Orientation::kResolved,
                                    const SolverOptions& options = {});

// ---- classification -------------------------------------------------------

enum class Tier { kHigh, kMiddle, kLow };
enum class TotalClass { kHigh, kMiddle, kLow };
enum class IndustryGroup { kA, kB };

std::string_view to_string(Tier t);
std::string_view to_string(TotalClass t);
std::string_view to_string(IndustryGroup g);
Tier parse_tier(std::string_view s);
TotalClass parse_total_class(std::string_view s);
IndustryGroup parse_group(std::string_view s);

struct CountryScore {
    std::string country;
    double score = 0.0;
};

// Descending by score, ties by ascending country code. First ceil(N/3) high,
// next ceil(N/3) middle, the rest low. Result follows the input order.
std::vector<Tier> classify_tertiles(const std::vector<CountryScore>& scores);
// First k high, next k middle, rest low; requires 2k < N.
std::vector<Tier> classify_topk(const std::vector<CountryScore>& scores, int k);

struct TotalLabel {
    TotalClass total = TotalClass::kMiddle;
    // "<backward>-<forward>" for Middle, empty otherwise.
    std::string middle_subcategory;
};

TotalLabel total_class(Tier forward, Tier backward);

// The seven Middle subcategories, in the order they are reported.
const std::vector<std::string>& middle_subcategories();

enum class GroupSplitDirection { kBoth, kForward, kBackward };

// Industries ranked by their maximum centrality; the top floor(n/2) form
// Group B, the rest Group A. Ties go to the lexicographically smaller code.
std::map<std::string, IndustryGroup> split_industry_groups(const std::map<std::string, double>& industry_max);

struct ClassificationOptions {
    enum class Mode { kTertile, kTopK } mode = Mode::kTertile;
    int k = 5;
    // Countries classified within each industry-year; empty = every country present.
    std::vector<std::string> sample;
    GroupSplitDirection group_direction = GroupSplitDirection::kBoth;
};

struct NodeLabel {
    int year = 0;
    std::string country;
    std::string industry;
    double forward = 0.0;
    double backward = 0.0;
    Tier fwd_class = Tier::kLow;
    Tier back_class = Tier::kLow;
    TotalLabel total;
    IndustryGroup group = IndustryGroup::kA;
};

struct ClassLabels {
    std::vector<NodeLabel> nodes;  // sorted by (year, country, industry)
    std::map<std::string, IndustryGroup> groups;

    const NodeLabel* find(int year, const std::string& country, const std::string& industry) const;
};

// Labels every sample node-year; group split uses the maxima over every year
// and every sample country.
ClassLabels classify(const std::vector<CentralityScores>& years, const ClassificationOptions& options);

// ---- I/O -------------------------------------------------------------------

void write_centrality_csv(const ClassLabels& labels, std::ostream& out);
// Reads the centrality CSV schema; class columns are taken as-is.
ClassLabels read_centrality_csv(const std::filesystem::path& path);
// Re-derives every label column from the forward/backward scores of a centrality CSV.
ClassLabels reclassify(const ClassLabels& scored, const ClassificationOptions& options);

// Per-industry backward and forward statistics over all labeled node-years.
void write_centrality_summary(const ClassLabels& labels, std::ostream& out);

}  // namespace gvc
