#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gvc/centrality.hpp"
#include "gvc/io_core.hpp"
#include "gvc/linalg.hpp"

namespace gvc {

// Factorization of (I - B), shared by every pass over one year.
class LeontiefSolver {
public:
    explicit LeontiefSolver(const CoefficientMatrix& coefficients, const SolverOptions& options = {});

    // (I - B)^{-1} rhs with a residual check.
    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return system_.solve(rhs); }
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return system_.solve(rhs); }
    // (I - B)^{-1}, computed on first use.
    const Eigen::MatrixXd& inverse() const;
    const Eigen::MatrixXd& coefficients() const { return system_.operator_matrix(); }
    int year() const { return year_; }

private:
    int year_;
    ShiftedSystem system_;
    mutable std::optional<Eigen::MatrixXd> inverse_;
};

Eigen::MatrixXd leontief_solve(const CoefficientMatrix& coefficients, const Eigen::MatrixXd& rhs,
                               const SolverOptions& options = {});

struct ContentResult {
    int year = 0;
    Eigen::VectorXd v;  // R&D content of each node's final goods: V = D (I - B)^{-1} f
    Eigen::MatrixXd t;  // total requirements (I - B)^{-1} diag(f)
};

ContentResult rd_content(const Eigen::VectorXd& d, const LeontiefSolver& leontief, const Eigen::VectorXd& f);

// Importer sets used to split the regression sample.
struct ImporterSets {
    std::vector<std::string> all;  // estimation sample
    std::set<std::string> eur;
    std::set<std::string> na;
    std::set<std::string> g5;

    static ImporterSets default_sets();
    // Pipe-joined membership flags in the order ALL|EUR|NA|G5|nonG5.
    std::string flags(const std::string& country) const;
    bool member(const std::string& country, const std::string& set) const;
};

// Foreign buckets: total class x exporter-industry group.
inline constexpr std::array<const char*, 6> kForeignBuckets{"high_A",   "high_B", "middle_A",
                                                            "middle_B", "low_A",  "low_B"};
std::size_t bucket_of(TotalClass total, IndustryGroup group);

struct BucketValue {
    double total = 0.0;
    double direct = 0.0;
    double indirect = 0.0;
};

struct ImporterContent {
    std::string country;
    std::string industry;
    int year = 0;
    double v = 0.0;  // V of this node
    BucketValue domestic;
    std::array<BucketValue, 6> foreign{};  // indexed as kForeignBuckets
    std::array<BucketValue, 7> middle{};   // indexed as middle_subcategories()

    BucketValue foreign_total() const;
};

// Per importer node of the sample: domestic term sum_g D_i(g) T_ii(g,h) and the
// six class x group sums over foreign exporters. Direct/indirect fields stay zero.
std::vector<ImporterContent> partition_content(const ContentResult& content, const Eigen::VectorXd& d,
                                               const NodeIndex& index, const ClassLabels& labels,
                                               const std::vector<std::string>& importers);

// As partition_content, with every bucket also split into first-round foreign
// inputs D B^F f and higher rounds D [(I - B)^{-1} - (I + B)]^F f. The own
// final-output term and first-round domestic inputs are the domestic direct part.
std::vector<ImporterContent> direct_indirect_split(const LeontiefSolver& leontief, const Eigen::VectorXd& d,
                                                   const Eigen::VectorXd& f, const NodeIndex& index,
                                                   const ClassLabels& labels,
                                                   const std::vector<std::string>& importers);

// ---- regressor table -----------------------------------------------------

struct RegressorRow {
    std::string country;
    std::string industry;
    int year = 0;
    std::string importer_flags;
    double domestic = 0.0;
    std::array<double, 6> foreign{};
    double total = 0.0;
};

std::vector<RegressorRow> regressor_rows(const std::vector<ImporterContent>& contents, const ImporterSets& sets);
// ln columns are left blank where the raw value is not positive.
void write_regressor_csv(const std::vector<RegressorRow>& rows, std::ostream& out);
std::vector<RegressorRow> read_regressor_csv(const std::filesystem::path& path);

// ---- shares ---------------------------------------------------------------

enum class ShareGrouping { kIndustry, kYear, kMiddleSubcategory };

struct ShareRow {
    std::string key;
    std::vector<double> percent;
    std::size_t nodes = 0;  // importer nodes averaged
    bool zero_total = false;
};

struct ShareTable {
    std::vector<std::string> columns;
    std::vector<ShareRow> rows;
};

// Average over importer nodes of each bucket's percentage of foreign content.
//   kIndustry / kYear: direct and indirect High/Middle/Low (6 columns)
//   kMiddleSubcategory: the seven Middle subcategories as shares of Middle content, by year
// `year` restricts kIndustry tables; `industry` restricts the by-year tables.
ShareTable shares_report(const std::vector<ImporterContent>& contents, ShareGrouping grouping,
                         std::optional<int> year = std::nullopt,
                         std::optional<std::string> industry = std::nullopt);

void write_share_csv(const ShareTable& table, const std::string& key_name, std::ostream& out);

}  // namespace gvc
