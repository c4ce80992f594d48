#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gvc/linalg.hpp"

namespace gvc {

struct NodeId {
    std::string country;
    std::string industry;
    auto operator<=>(const NodeId&) const = default;
};

// Bijection between (country, industry) pairs and dense indices. Nodes are laid
// out country-major, so every country owns a contiguous block of industries.
class NodeIndex {
public:
    NodeIndex() = default;
    NodeIndex(std::vector<std::string> countries, std::vector<std::string> industries);

    std::size_t size() const { return countries_.size() * industries_.size(); }
    std::size_t country_count() const { return countries_.size(); }
    std::size_t industry_count() const { return industries_.size(); }
    const std::vector<std::string>& countries() const { return countries_; }
    const std::vector<std::string>& industries() const { return industries_; }

    std::size_t at(std::size_t country, std::size_t industry) const {
        return country * industries_.size() + industry;
    }
    std::size_t country_of(std::size_t node) const { return node / industries_.size(); }
    std::size_t industry_of(std::size_t node) const { return node % industries_.size(); }
    NodeId node(std::size_t n) const { return {countries_[country_of(n)], industries_[industry_of(n)]}; }

    std::optional<std::size_t> country_index(const std::string& code) const;
    std::optional<std::size_t> industry_index(const std::string& code) const;
    std::optional<std::size_t> find(const NodeId& id) const;

    bool operator==(const NodeIndex&) const = default;

private:
    std::vector<std::string> countries_;
    std::vector<std::string> industries_;
};

// One year of a world input-output table in current prices.
struct IOTable {
    int year = 0;
    NodeIndex index;
    Eigen::MatrixXd flows;         // NG x NG, row = selling node, column = buying node
    Eigen::MatrixXd final_demand;  // NG x C, column = consuming country
    Eigen::VectorXd gross_output;  // NG

    std::size_t size() const { return index.size(); }
    // Throws ValidationError on negative/non-finite entries, shape mismatches, or
    // nonzero flows attached to a zero-output node.
    void validate() const;
};

struct IOPaths {
    std::filesystem::path flows;
    std::filesystem::path final_demand;
    std::filesystem::path output;
};

IOTable load_io_table(const IOPaths& paths, int year);
// Every year present in the output file, sharing one registry.
std::map<int, IOTable> load_io_series(const IOPaths& paths);

// Canonical serialization: header, all gross-output rows, nonzero flow and
// final-demand rows only, nodes in index order.
void write_io_table(const IOTable& table, std::ostream& flows, std::ostream& final_demand,
                    std::ostream& output);
void write_io_series(const std::vector<const IOTable*>& tables, const IOPaths& paths);

struct CoefficientMatrix {
    int year = 0;
    Eigen::MatrixXd b;  // input per unit of the buyer's gross output
};

struct ProductiveCheck {
    bool productive = false;
    double radius_upper_bound = 0.0;  // Collatz-Wielandt bound from the solve of (I - B) x = 1
};

// For B >= 0: rho(B) < 1 iff (I - B) x = 1 has a nonnegative solution.
ProductiveCheck check_productive(const Eigen::MatrixXd& b, const SolverOptions& options = {});

// Throws NumericalError naming the year if the economy is not productive.
CoefficientMatrix build_coefficients(const IOTable& table, const SolverOptions& options = {});

struct MaskSpec {
    std::set<std::string> drop_countries;
    bool drop_domestic = false;
    // Keep only foreign flows into this country (dimensions unchanged).
    std::optional<std::string> foreign_only_for;
};

IOTable apply_mask(const IOTable& table, const MaskSpec& spec);

enum class FinalDemandScope { kWorld, kForeign };

// Each node's total shipments to final demand (the diagonal of f).
Eigen::VectorXd aggregate_final_demand(const IOTable& table,
                                       FinalDemandScope scope = FinalDemandScope::kWorld);

// Multiplies flows, final demand and gross output by c.
IOTable scale_flows_and_output(const IOTable& table, double c);

}  // namespace gvc
