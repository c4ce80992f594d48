#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace gvc {

// One row of the socio-economic accounts.
struct SeaRecord {
    std::string country;
    std::string industry;
    int year = 0;
    double va_nominal = 0.0;
    std::optional<double> va_real;  // blank in the file -> derived from deflators
    double employment = 0.0;
    double capital_real = 0.0;
    double labor_comp = 0.0;
};

std::vector<SeaRecord> read_sea_csv(const std::filesystem::path& path);
void write_sea_csv(const std::vector<SeaRecord>& records, std::ostream& out);

// Price indices with the base year at 100. Industry value-added deflators take
// precedence; an entry with an empty industry is the country's GDP deflator.
class Deflators {
public:
    static Deflators read_csv(const std::filesystem::path& path);
    void write_csv(std::ostream& out) const;

    void set(const std::string& country, const std::string& industry, int year, double index);
    std::optional<double> index(const std::string& country, const std::string& industry, int year) const;
    // nominal * 100 / index; throws ValidationError if no deflator applies.
    double to_real(double nominal, const std::string& country, const std::string& industry, int year) const;
    bool empty() const { return entries_.empty(); }

private:
    std::map<std::tuple<std::string, std::string, int>, double> entries_;
};

// Fills blank va_real fields from the deflators.
void apply_deflators(std::vector<SeaRecord>& records, const Deflators& deflators);

// Least-squares fit of
//   share = a_country + a_industry + a_year + phi_industry * ln(K/L)
// with the first level of each dummy set as reference.
struct LaborShareModel {
    double intercept = 0.0;
    std::map<std::string, double> country_effect;
    std::map<std::string, double> industry_effect;
    std::map<int, double> year_effect;
    std::map<std::string, double> slope;

    // Per included record, keyed by (country, industry, year).
    std::map<std::tuple<std::string, std::string, int>, double> raw_share;
    std::map<std::tuple<std::string, std::string, int>, double> fitted_share;  // clamped to [0.01, 0.99]
    std::vector<std::string> diagnostics;

    // Unclamped prediction.
    double predict(const std::string& country, const std::string& industry, int year, double ln_k_over_l) const;
};

inline constexpr double kShareFloor = 0.01;
inline constexpr double kShareCeiling = 0.99;

LaborShareModel smooth_labor_shares(const std::vector<SeaRecord>& records);

struct TfpObservation {
    std::string country;
    std::string industry;
    int year = 0;
    double ln_tfp = 0.0;
    double sigma_fitted = 0.0;
};

struct TfpResult {
    std::vector<TfpObservation> rows;  // sorted by (country, industry, year)
    std::vector<std::string> diagnostics;
};

// Multilateral index relative to the cross-country mean of each industry-year
// cell, weighting factor deviations by 0.5 (sigma + mean sigma).
TfpResult caves_tfp(const std::vector<SeaRecord>& records, const LaborShareModel& shares);

void write_tfp_csv(const std::vector<TfpObservation>& rows, std::ostream& out);
std::vector<TfpObservation> read_tfp_csv(const std::filesystem::path& path);
// Obs/Min/Max/Mean/Std of ln TFP per industry.
void write_tfp_summary(const std::vector<TfpObservation>& rows, std::ostream& out);

}  // namespace gvc
