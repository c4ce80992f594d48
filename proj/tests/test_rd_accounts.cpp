#include <doctest.h>

#include <cmath>
#include <random>

#include "gvc/error.hpp"
#include "gvc/rd_accounts.hpp"
#include "support.hpp"

using namespace gvc;

namespace {

RDSeries series(std::map<int, double> r) { return {"AAA", "M", std::move(r)}; }

RDSeries growing(double r0, double rate, int years) {
    RDSeries s{"AAA", "M", {}};
    for (int t = 0; t < years; ++t) s.expenditure[2000 + t] = r0 * std::exp(rate * t);
    return s;
}

}  // namespace

TEST_CASE("default depreciation rate") { CHECK(kDefaultDepreciation == 0.15); }

TEST_CASE("constant spending is a steady state") {
    std::map<int, double> r;
    for (int t = 0; t < 10; ++t) r[1995 + t] = 100.0;
    const auto s = perpetual_inventory(series(r));
    CHECK(s.g == 0.0);
    CHECK(s.stock.at(1995) == doctest::Approx(666.67).epsilon(1e-5));
    for (const auto& [y, v] : s.stock) CHECK(std::abs(v - 100.0 / 0.15) <= 1e-10);
}

TEST_CASE("ten percent log growth against the closed-form sum") {
    const double r0 = 40.0, rate = 0.10, delta = 0.15;
    const auto s = perpetual_inventory(growing(r0, rate, 13), delta);
    CHECK(std::abs(s.g - rate) <= 1e-14);
    CHECK(std::abs(s.stock.at(2000) - r0 / 0.25) <= 1e-12);
    const double q = (1.0 - delta) * std::exp(-rate);
    for (int t = 0; t < 13; ++t) {
        // (1-d)^t S0 + R0 e^{rt} (1 - q^t) / (1 - q)
        const double closed = std::pow(1.0 - delta, t) * r0 / (delta + rate) +
                              r0 * std::exp(rate * t) * (1.0 - std::pow(q, t)) / (1.0 - q);
        CHECK(std::abs(s.stock.at(2000 + t) - closed) <= 1e-9 * closed);
    }
}

TEST_CASE("perpetual inventory rejects bad input") {
    CHECK_THROWS_AS(perpetual_inventory(series({{2000, 1.0}})), ValidationError);
    CHECK_THROWS_AS(perpetual_inventory(series({{2000, 1.0}, {2001, 1.0}}), 0.0), ValidationError);
    CHECK_THROWS_AS(perpetual_inventory(series({{2000, 1.0}, {2001, 1.0}}), 1.0), ValidationError);
    CHECK_THROWS_AS(perpetual_inventory(series({{2000, 1.0}, {2001, -1.0}})), ValidationError);
    try {
        perpetual_inventory(growing(100.0, -0.2, 5), 0.15);
        FAIL("expected a numerical error");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("AAA/M") != std::string::npos);
    }
}

TEST_CASE("all-zero spending gives a zero stock with a warning") {
    const auto s = perpetual_inventory(series({{2000, 0.0}, {2001, 0.0}, {2002, 0.0}}));
    for (const auto& [y, v] : s.stock) CHECK(v == 0.0);
    CHECK(s.stock.size() == 3);
    CHECK_FALSE(s.diagnostics.empty());
}

TEST_CASE("interior gaps are interpolated in logs and flagged") {
    const auto s = perpetual_inventory(series({{2000, 100.0}, {2002, 400.0}, {2003, 400.0}}));
    CHECK(s.interpolated_years == std::set<int>{2001});
    // Filled 2001 = 200; g = mean(ln 2, ln 2, 0)
    CHECK(std::abs(s.g - 2.0 * std::log(2.0) / 3.0) <= 1e-14);
    const double s0 = 100.0 / (0.15 + s.g);
    CHECK(std::abs(s.stock.at(2001) - (0.85 * s0 + 200.0)) <= 1e-10);
    CHECK_FALSE(s.diagnostics.empty());
}

TEST_CASE("stock properties: linearity, depreciation order, reconstruction") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(50.0, 150.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::map<int, double> r;
        for (int t = 0; t < 13; ++t) r[1995 + t] = u(rng);
        const auto base = perpetual_inventory(series(r));

        auto scaled = r;
        for (auto& [y, v] : scaled) v *= 3.5;
        const auto lin = perpetual_inventory(series(scaled));
        for (const auto& [y, v] : base.stock) CHECK(std::abs(lin.stock.at(y) - 3.5 * v) <= 1e-12 * lin.stock.at(y));

        const auto heavier = perpetual_inventory(series(r), 0.25);
        for (const auto& [y, v] : base.stock) {
            if (y > 1995) CHECK(heavier.stock.at(y) < v);
        }

        for (auto it = std::next(base.stock.begin()); it != base.stock.end(); ++it) {
            const double recovered = it->second - 0.85 * std::prev(it)->second;
            CHECK(std::abs(recovered - r.at(it->first)) <= 1e-12 * it->second);
        }
    }
}

TEST_CASE("intensity: ratio, zero output and non-manufacturing") {
    IOTable t;
    t.year = 2000;
    t.index = NodeIndex({"AAA", "BBB"}, {"M", "S"});
    t.flows = Eigen::MatrixXd::Zero(4, 4);
    t.final_demand = Eigen::MatrixXd::Zero(4, 2);
    t.gross_output = Eigen::Vector4d(200.0, 50.0, 0.0, 10.0);
    auto stock = [](const std::string& c, const std::string& h, double v) {
        RDStock s;
        s.country = c;
        s.industry = h;
        s.stock[2000] = v;
        return s;
    };
    const auto d = intensity({stock("AAA", "M", 50.0), stock("AAA", "S", 5.0), stock("BBB", "M", 1.0)}, t, {"M"});
    CHECK(d.d(0) == 0.25);
    CHECK(d.d(1) == 0.0);  // service industry
    CHECK(d.d(2) == 0.0);  // zero output
    CHECK(d.d(3) == 0.0);  // no stock
    CHECK(d.diagnostics.size() == 1);
    CHECK_THROWS_AS(intensity({stock("AAA", "M", -1.0)}, t, {"M"}), ValidationError);
    CHECK_THROWS_AS(intensity({stock("ZZZ", "M", 1.0)}, t, {"M"}), ValidationError);
}

TEST_CASE("intensity on a random panel matches element-wise division") {
    std::mt19937_64 rng(12);
    const auto t = testing::random_table(rng, 5, 4);
    std::uniform_real_distribution<double> u(0.0, 30.0);
    std::vector<RDStock> stocks;
    for (std::size_t n = 0; n < t.size(); ++n) {
        RDStock s;
        s.country = t.index.node(n).country;
        s.industry = t.index.node(n).industry;
        s.stock[t.year] = u(rng);
        stocks.push_back(s);
    }
    const auto d = intensity(stocks, t, {"I00", "I01", "I02", "I03"});
    for (std::size_t n = 0; n < t.size(); ++n) {
        CHECK(d.d(static_cast<Eigen::Index>(n)) == stocks[n].stock.at(t.year) / t.gross_output(static_cast<Eigen::Index>(n)));
    }
}

TEST_CASE("R&D deflation uses the industry index with GDP fallback") {
    Deflators d;
    d.set("AAA", "M", 2000, 100.0);
    d.set("AAA", "M", 2001, 125.0);
    d.set("BBB", "", 2000, 100.0);
    d.set("BBB", "", 2001, 80.0);
    const std::vector<RDRecord> raw{{"AAA", "M", 2000, 10.0}, {"AAA", "M", 2001, 25.0}, {"BBB", "M", 2000, 4.0},
                                    {"BBB", "M", 2001, 4.0}};
    const auto s = deflate_rd(raw, d);
    REQUIRE(s.size() == 2);
    CHECK(s[0].expenditure.at(2001) == 20.0);
    CHECK(s[1].expenditure.at(2001) == 5.0);
    CHECK_THROWS_AS(deflate_rd({{"CCC", "M", 2000, 1.0}}, d), ValidationError);
}

TEST_CASE("R&D and stock CSV round-trips") {
    const auto s = perpetual_inventory(growing(10.0, 0.05, 5));
    testing::TempDir dir;
    {
        std::ofstream out(dir / "s.csv", std::ios::binary);
        write_stock_csv({s}, out);
    }
    const auto back = read_stock_csv(dir / "s.csv");
    REQUIRE(back.size() == 1);
    CHECK(back[0].stock == s.stock);
    CHECK(back[0].g == s.g);
    CHECK(back[0].delta == s.delta);
    CHECK(testing::slurp(dir / "s.csv").rfind("country,industry,year,stock_real,delta,g\n", 0) == 0);

    const std::vector<RDRecord> rd{{"AAA", "M", 2000, 1.5}, {"AAA", "M", 2001, 2.25}};
    {
        std::ofstream out(dir / "rd.csv", std::ios::binary);
        write_rd_csv(rd, out);
    }
    const auto rd_back = read_rd_csv(dir / "rd.csv");
    REQUIRE(rd_back.size() == 2);
    CHECK(rd_back[1].expenditure_nominal == 2.25);
    testing::write_file(dir / "bad.csv", "country,industry,year,expenditure_nominal\nAAA,M,2000,-1\n");
    CHECK_THROWS_AS(read_rd_csv(dir / "bad.csv"), ValidationError);
}
