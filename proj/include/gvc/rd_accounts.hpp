#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gvc/io_core.hpp"
#include "gvc/productivity.hpp"

namespace gvc {

inline constexpr double kDefaultDepreciation = 0.15;

struct RDRecord {
    std::string country;
    std::string industry;
    int year = 0;
    double expenditure_nominal = 0.0;
};

std::vector<RDRecord> read_rd_csv(const std::filesystem::path& path);
void write_rd_csv(const std::vector<RDRecord>& records, std::ostream& out);

// Real expenditure of one (country, industry). Years absent from the map are
// unreported, not zero.
struct RDSeries {
    std::string country;
    std::string industry;
    std::map<int, double> expenditure;
};

// Deflates with the industry value-added deflator (GDP deflator fallback).
std::vector<RDSeries> deflate_rd(const std::vector<RDRecord>& records, const Deflators& deflators);

struct RDStock {
    std::string country;
    std::string industry;
    double delta = kDefaultDepreciation;
    double g = 0.0;  // mean log first-difference of the (gap-filled) expenditure series
    std::map<int, double> stock;
    std::set<int> interpolated_years;
    std::vector<std::string> diagnostics;
};

// S_0 = R_0 / (delta + g), then S_t = (1 - delta) S_{t-1} + R_t. Interior gaps
// are filled by log-linear interpolation (linear when an endpoint is zero).
RDStock perpetual_inventory(const RDSeries& series, double delta = kDefaultDepreciation);

void write_stock_csv(const std::vector<RDStock>& stocks, std::ostream& out);
std::vector<RDStock> read_stock_csv(const std::filesystem::path& path);

struct IntensityVector {
    int year = 0;
    Eigen::VectorXd d;  // per node of the table's index
    std::vector<std::string> diagnostics;
};

// D = S / Q where Q > 0, else 0. Industries outside `manufacturing` are forced
// to zero; nodes without a stock for the year get zero.
IntensityVector intensity(const std::vector<RDStock>& stocks, const IOTable& table,
                          const std::set<std::string>& manufacturing);

}  // namespace gvc
