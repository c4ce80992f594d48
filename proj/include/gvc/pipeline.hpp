#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gvc/centrality.hpp"
#include "gvc/econometrics.hpp"
#include "gvc/io_core.hpp"
#include "gvc/productivity.hpp"
#include "gvc/rd_accounts.hpp"
#include "gvc/rd_content.hpp"

namespace gvc {

// The fourteen manufacturing industries of the world input-output tables.
const std::vector<std::string>& manufacturing_industries();

struct RunConfig {
    IOPaths io;
    std::filesystem::path sea;
    std::filesystem::path deflators;
    std::filesystem::path rd;
    std::filesystem::path out_dir = "gvc_out";

    int first_year = 1995;
    int last_year = 2007;
    ImporterSets importers = ImporterSets::default_sets();
    std::set<std::string> manufacturing{manufacturing_industries().begin(), manufacturing_industries().end()};
    std::set<std::string> centrality_drop{"ROW"};

    double lambda = 0.5;
    double delta = kDefaultDepreciation;
    Orientation orientation = Orientation::kResolved;
    ClassificationOptions::Mode mode = ClassificationOptions::Mode::kTertile;
    int k = 5;
    GroupSplitDirection group_direction = GroupSplitDirection::kBoth;
    FinalDemandScope final_demand = FinalDemandScope::kWorld;

    std::vector<std::string> importer_splits{"ALL", "EUR", "NA", "G5", "nonG5"};
    int lag = 1;
    std::optional<int> breakpoint = 2002;
    std::string share_industry;  // by-year share series; empty = every industry

    unsigned workers = 0;  // 0 = hardware concurrency
    SolverOptions solver;

    // key = value pairs, lists comma-separated. Unknown keys are rejected.
    void set(const std::string& key, const std::string& value);
    static RunConfig from_file(const std::filesystem::path& path);
    // Every parameter as key = value lines, keys sorted.
    std::map<std::string, std::string> entries() const;
    void validate(bool require_inputs = true) const;
    ClassificationOptions classification() const;
};

// Runs f(i) for i in [0, n) on up to `workers` threads; rethrows the first
// failure in index order.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& f);

// ---- stages ---------------------------------------------------------------

std::map<int, IOTable> load_window(const RunConfig& config);

TfpResult tfp_stage(std::vector<SeaRecord> sea, const Deflators& deflators);

std::vector<CentralityScores> centrality_stage(const std::map<int, IOTable>& tables, const RunConfig& config);

std::vector<RDStock> rdstock_stage(const std::vector<RDRecord>& records, const Deflators& deflators,
                                   const RunConfig& config);

struct ContentStage {
    std::vector<ImporterContent> contents;  // every sample importer node-year, with direct/indirect split
    std::vector<RegressorRow> regressors;
    std::vector<std::string> diagnostics;
};

ContentStage content_stage(const std::map<int, IOTable>& tables, const std::vector<RDStock>& stocks,
                           const ClassLabels& labels, const RunConfig& config);

struct RegressionTable {
    std::string name;   // e.g. "table3"
    std::string title;
    std::vector<RegressionSpec> specs;
    std::vector<FitResult> fits;
};

// The specification grid implied by the classification mode, importer splits,
// lag and interaction settings.
std::vector<RegressionTable> regression_plan(const RunConfig& config);
void run_regressions(std::vector<RegressionTable>& plan, const std::vector<RegressorRow>& regressors,
                     const std::vector<TfpObservation>& tfp, unsigned workers);

std::string sha256_file(const std::filesystem::path& path);

// Writes every table into config.out_dir, ending with manifest.txt.
void run_pipeline(const RunConfig& config);

}  // namespace gvc
