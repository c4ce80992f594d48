#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "gvc/centrality.hpp"
#include "gvc/io_core.hpp"
#include "gvc/pipeline.hpp"
#include "gvc/productivity.hpp"
#include "gvc/rd_accounts.hpp"

namespace gvc {

struct SynthConfig {
    std::vector<std::string> countries = ImporterSets::default_sets().all;
    std::string rest_of_world = "ROW";
    // Appears only in the socio-economic accounts; its planted TFP offsets the
    // sample so every industry-year cross-country mean is zero.
    std::string anchor = "ZZZ";
    std::vector<std::string> industries = manufacturing_industries();
    int first_year = 1995;
    int last_year = 2007;

    int hub_count = 2;
    double hub_strength = 6.0;      // extra seller attractiveness of hub countries
    double domestic_bias = 4.0;     // weight multiplier on same-country suppliers
    double input_share_min = 0.35;  // column sums of B, kept below max_input_share
    double input_share_max = 0.6;
    double max_input_share = 0.9;
    double weight_drift = 0.08;     // yearly log random walk of supplier weights

    double rd_intensity_min = 0.005;  // real R&D per unit of base-year output
    double rd_intensity_max = 0.05;
    double rd_growth_sd = 0.05;
    std::vector<std::string> gdp_deflator_only{"IRL", "ROM", "RUS", "TUR"};

    // Planted effects of ln domestic, ln High, ln Middle, ln Low content of
    // Group B exporters on ln TFP.
    std::array<double, 4> beta{0.0, 0.040, 0.034, 0.015};
    double labor_share = 0.6;
    double noise_sd = 0.01;
    std::uint64_t seed = 1;

    // Throws ValidationError on an empty or inconsistent setup.
    void validate() const;
};

struct SyntheticEconomy {
    SynthConfig config;
    std::map<int, IOTable> tables;
    std::vector<SeaRecord> sea;
    Deflators deflators;
    std::vector<RDRecord> rd;
    // The regressor table the pipeline should reconstruct and the planted
    // ln TFP of every sample node-year before the anchor is added.
    std::vector<RegressorRow> regressors;
    std::map<std::tuple<std::string, std::string, int>, double> planted_tfp;

    // A pipeline configuration matching the generated membership.
    RunConfig run_config(const std::filesystem::path& dir) const;
};

SyntheticEconomy gen_economy(const SynthConfig& config);

// Writes flows.csv, final_demand.csv, output.csv, sea.csv, deflators.csv,
// rd.csv, truth.csv and run.cfg into dir.
void write_economy(const SyntheticEconomy& economy, const std::filesystem::path& dir);

// ---- oracles ----------------------------------------------------------------

// D * sum_{n=0}^{order} B^n * f evaluated with explicit loops; one entry per node.
Eigen::VectorXd oracle_neumann(const Eigen::MatrixXd& b, const Eigen::VectorXd& f, const Eigen::VectorXd& d,
                               int order);

// eta * sum_{n=0}^{order} (lambda M)^n 1 with M = W (forward) or W' (backward).
Eigen::VectorXd oracle_katz(const Eigen::MatrixXd& w, double lambda, Direction direction, int order);

// Cluster sandwich by explicit summation and Gauss-Jordan inversion.
Eigen::MatrixXd oracle_sandwich(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals,
                                const std::vector<std::string>& clusters, bool corrected = true);

}  // namespace gvc
