#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gvc/io_core.hpp"

namespace testing {

class TempDir {
public:
    TempDir() {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("gvc_test_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::vector<std::string> codes(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(prefix + (i < 10 ? "0" : "") + std::to_string(i));
    }
    return out;
}

// Random productive table: column input shares in [0.2, 0.8), every entry
// positive unless sparsity knocks it out, gross output consistent with final demand.
inline gvc::IOTable random_table(std::mt19937_64& rng, std::size_t countries, std::size_t industries,
                                 int year = 2000, double sparsity = 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    gvc::IOTable t;
    t.year = year;
    t.index = gvc::NodeIndex(codes("C", countries), codes("I", industries));
    const auto n = static_cast<Eigen::Index>(t.index.size());
    Eigen::MatrixXd b(n, n);
    for (Eigen::Index h = 0; h < n; ++h) {
        for (Eigen::Index j = 0; j < n; ++j) b(j, h) = u(rng) < sparsity ? 0.0 : u(rng);
        const double s = b.col(h).sum();
        if (s > 0) b.col(h) *= (0.2 + 0.6 * u(rng)) / s;
    }
    t.final_demand.resize(n, static_cast<Eigen::Index>(countries));
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(countries); ++c) t.final_demand(j, c) = 1.0 + 10.0 * u(rng);
    }
    const Eigen::VectorXd f = t.final_demand.rowwise().sum();
    t.gross_output = (Eigen::MatrixXd::Identity(n, n) - b).partialPivLu().solve(f);
    t.flows = b * t.gross_output.asDiagonal();
    return t;
}

inline double max_rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
    return scale == 0.0 ? 0.0 : (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace testing
