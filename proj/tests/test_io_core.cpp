#include <doctest.h>

#include <chrono>
#include <map>

#include "gvc/csv.hpp"
#include "gvc/error.hpp"
#include "gvc/io_core.hpp"
#include "support.hpp"

using namespace gvc;
using testing::TempDir;
using testing::write_file;

namespace {

IOPaths paths_in(const TempDir& dir) { return {dir / "flows.csv", dir / "fd.csv", dir / "q.csv"}; }

void write_two_country(const TempDir& dir, const std::string& extra_flow = "") {
    write_file(dir / "flows.csv",
               "year,src_country,src_industry,dst_country,dst_industry,value\n"
               "2000,AAA,M,AAA,M,1\n"
               "2000,AAA,M,BBB,M,2\n"
               "2000,BBB,M,AAA,M,3\n"
               "2000,BBB,M,BBB,M,4\n" +
                   extra_flow);
    write_file(dir / "fd.csv",
               "year,src_country,src_industry,dst_country,value\n"
               "2000,AAA,M,AAA,5\n"
               "2000,BBB,M,AAA,6\n");
    write_file(dir / "q.csv", "year,country,industry,gross_output\n2000,AAA,M,20\n2000,BBB,M,30\n");
}

IOTable tiny(const std::vector<std::string>& countries, const std::vector<std::string>& industries,
             const Eigen::MatrixXd& flows, const Eigen::VectorXd& q) {
    IOTable t;
    t.year = 2000;
    t.index = NodeIndex(countries, industries);
    t.flows = flows;
    t.gross_output = q;
    t.final_demand = Eigen::MatrixXd::Zero(q.size(), static_cast<Eigen::Index>(countries.size()));
    return t;
}

}  // namespace

TEST_CASE("node index is country-major and bijective") {
    NodeIndex idx({"AAA", "BBB", "CCC"}, {"X", "Y"});
    CHECK(idx.size() == 6);
    CHECK(idx.at(1, 0) == 2);
    for (std::size_t n = 0; n < idx.size(); ++n) {
        const auto id = idx.node(n);
        CHECK(idx.find(id) == n);
    }
    CHECK_FALSE(idx.find({"ZZZ", "X"}));
    CHECK_THROWS_AS(NodeIndex({"AAA", "AAA"}, {"X"}), ValidationError);
}

TEST_CASE("minimal two-country table loads fully populated") {
    TempDir dir;
    write_two_country(dir);
    const auto t = load_io_table(paths_in(dir), 2000);
    CHECK(t.size() == 2);
    CHECK(t.flows(0, 0) == 1);
    CHECK(t.flows(0, 1) == 2);
    CHECK(t.flows(1, 0) == 3);
    CHECK(t.flows(1, 1) == 4);
    CHECK(t.final_demand(1, 0) == 6);
    CHECK(t.final_demand(1, 1) == 0);  // unreported cell
    CHECK(t.gross_output(1) == 30);
}

TEST_CASE("negative flow is rejected with its row number") {
    TempDir dir;
    write_two_country(dir, "2000,AAA,M,BBB,N,-1\n");
    try {
        load_io_table(paths_in(dir), 2000);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":6") != std::string::npos);
        CHECK(e.code() == ExitCode::kValidation);
    }
}

TEST_CASE("duplicate seller-buyer-year record is a validation error") {
    TempDir dir;
    write_two_country(dir, "2000,AAA,M,BBB,M,2\n");
    CHECK_THROWS_AS(load_io_table(paths_in(dir), 2000), ValidationError);
}

TEST_CASE("schema violations name the file and row") {
    TempDir dir;
    write_two_country(dir);
    write_file(dir / "flows.csv", "year,src_country,src_industry,dst_country,value\n2000,AAA,M,AAA,1\n");
    CHECK_THROWS_AS(load_io_table(paths_in(dir), 2000), ParseError);
    write_file(dir / "flows.csv",
               "year,src_country,src_industry,dst_country,dst_industry,value\n2000,AAA,M,AAA,M,abc\n");
    try {
        load_io_table(paths_in(dir), 2000);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("flows.csv:2") != std::string::npos);
    }
    write_file(dir / "flows.csv", "year,src_country,src_industry,dst_country,dst_industry,value\n2000,AAA,M\n");
    CHECK_THROWS_AS(load_io_table(paths_in(dir), 2000), ParseError);
}

TEST_CASE("missing year is a validation error") {
    TempDir dir;
    write_two_country(dir);
    CHECK_THROWS_AS(load_io_table(paths_in(dir), 2001), ValidationError);
}

TEST_CASE("zero output forces a zero row and column") {
    auto t = tiny({"AAA", "BBB"}, {"M"}, Eigen::MatrixXd::Zero(2, 2), Eigen::Vector2d(10, 0));
    CHECK_NOTHROW(t.validate());
    t.flows(0, 1) = 1.0;
    CHECK_THROWS_AS(t.validate(), ValidationError);
    t.flows(0, 1) = 0.0;
    t.flows(0, 0) = -1.0;
    CHECK_THROWS_AS(t.validate(), ValidationError);
    t.flows(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(t.validate(), ValidationError);
}

TEST_CASE("coefficients: zero flows and a single cross flow") {
    const auto zero = tiny({"AAA", "BBB"}, {"M"}, Eigen::MatrixXd::Zero(2, 2), Eigen::Vector2d(10, 20));
    CHECK(build_coefficients(zero).b.isZero(0.0));

    Eigen::MatrixXd flows = Eigen::MatrixXd::Zero(2, 2);
    flows(0, 1) = 5;
    const auto b = build_coefficients(tiny({"AAA", "BBB"}, {"M"}, flows, Eigen::Vector2d(10, 20))).b;
    CHECK(b(0, 1) == 0.25);
    CHECK(b(0, 0) == 0);
    CHECK(b(1, 0) == 0);
    CHECK(b(1, 1) == 0);
}

TEST_CASE("coefficients match element-wise division on a random 6-node table") {
    std::mt19937_64 rng(11);
    const auto t = testing::random_table(rng, 3, 2);
    const auto b = build_coefficients(t).b;
    for (Eigen::Index j = 0; j < 6; ++j) {
        for (Eigen::Index h = 0; h < 6; ++h) CHECK(std::abs(b(j, h) - t.flows(j, h) / t.gross_output(h)) <= 1e-12);
    }
    CHECK((b.array() >= 0).all());
    CHECK((b.array() <= 1).all());
}

TEST_CASE("zero-output column of B is all zero") {
    Eigen::MatrixXd flows = Eigen::MatrixXd::Zero(3, 3);
    flows(0, 1) = 2;
    const auto b = build_coefficients(tiny({"AAA", "BBB", "CCC"}, {"M"}, flows, Eigen::Vector3d(10, 20, 0))).b;
    CHECK(b.col(2).isZero(0.0));
    CHECK(b(0, 1) == 0.1);
}

TEST_CASE("non-productive economy is rejected naming the year") {
    Eigen::MatrixXd flows(2, 2);
    flows << 6, 6, 6, 6;
    auto t = tiny({"AAA", "BBB"}, {"M"}, flows, Eigen::Vector2d(10, 10));
    t.year = 1999;
    try {
        build_coefficients(t);
        FAIL("expected a numerical error");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("1999") != std::string::npos);
        CHECK(e.code() == ExitCode::kNumerical);
    }
    // Column sums above one but rho < 1: the solve-based gate still accepts it.
    Eigen::MatrixXd b(2, 2);
    b << 0.0, 1.5, 0.1, 0.0;  // rho = sqrt(0.15)
    const auto check = check_productive(b);
    CHECK(check.productive);
    CHECK(check.radius_upper_bound < 1.0);
    CHECK(check.radius_upper_bound >= std::sqrt(0.15) - 1e-12);
}

TEST_CASE("drop_domestic on a purely domestic table leaves no flows") {
    Eigen::MatrixXd flows = Eigen::MatrixXd::Zero(4, 4);
    flows.block(0, 0, 2, 2) << 1, 2, 3, 4;
    flows.block(2, 2, 2, 2) << 5, 6, 7, 8;
    const auto t = tiny({"AAA", "BBB"}, {"X", "Y"}, flows, Eigen::Vector4d(50, 50, 50, 50));
    MaskSpec spec;
    spec.drop_domestic = true;
    const auto m = apply_mask(t, spec);
    CHECK(m.size() == 4);
    CHECK(m.flows.isZero(0.0));
}

TEST_CASE("dropping the rest of the world from 41 entities leaves 40 countries") {
    auto countries = testing::codes("C", 40);
    countries.push_back("ROW");
    const auto n = static_cast<Eigen::Index>(countries.size() * 2);
    auto t = tiny(countries, {"X", "Y"}, Eigen::MatrixXd::Constant(n, n, 1.0), Eigen::VectorXd::Constant(n, 1000.0));
    MaskSpec spec;
    spec.drop_countries = {"ROW"};
    const auto m = apply_mask(t, spec);
    CHECK(m.index.country_count() == 40);
    CHECK(m.size() == 80);
    CHECK(m.final_demand.cols() == 40);
    CHECK_FALSE(m.index.country_index("ROW"));
}

TEST_CASE("mask then coefficients on a 3-node fixture") {
    // AAA has industries X, Y; BBB has X.
    Eigen::MatrixXd flows = Eigen::MatrixXd::Zero(4, 4);
    NodeIndex idx({"AAA", "BBB"}, {"X", "Y"});
    // nodes: 0 AAA-X, 1 AAA-Y, 2 BBB-X, 3 BBB-Y (inactive)
    flows(0, 1) = 2;  // domestic
    flows(0, 2) = 4;
    flows(2, 0) = 1;
    flows(2, 1) = 3;
    flows(1, 2) = 5;
    auto t = tiny({"AAA", "BBB"}, {"X", "Y"}, flows, Eigen::Vector4d(10, 20, 40, 0));
    MaskSpec spec;
    spec.drop_domestic = true;
    const auto b = build_coefficients(apply_mask(t, spec)).b;
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(4, 4);
    expect(0, 2) = 4.0 / 40;
    expect(1, 2) = 5.0 / 40;
    expect(2, 0) = 1.0 / 10;
    expect(2, 1) = 3.0 / 20;
    CHECK((b - expect).cwiseAbs().maxCoeff() <= 1e-15);

    MaskSpec only;
    only.foreign_only_for = "BBB";
    const auto fo = apply_mask(t, only);
    CHECK(fo.flows(0, 2) == 4);
    CHECK(fo.flows(1, 2) == 5);
    CHECK(fo.flows(2, 0) == 0);
    CHECK(fo.flows(0, 1) == 0);
}

TEST_CASE("apply_mask is idempotent and rejects bad specs") {
    std::mt19937_64 rng(5);
    auto t = testing::random_table(rng, 4, 3);
    MaskSpec spec;
    spec.drop_domestic = true;
    spec.drop_countries = {"C01"};
    const auto once = apply_mask(t, spec);
    const auto twice = apply_mask(once, MaskSpec{{}, true, std::nullopt});
    CHECK(once.index == twice.index);
    CHECK(once.flows == twice.flows);
    CHECK(once.final_demand == twice.final_demand);
    CHECK(once.gross_output == twice.gross_output);

    CHECK_THROWS_AS(apply_mask(t, MaskSpec{{"XXX"}, false, std::nullopt}), ValidationError);
    CHECK_THROWS_AS(apply_mask(t, MaskSpec{{"C00", "C01", "C02", "C03"}, false, std::nullopt}), ValidationError);
}

TEST_CASE("final demand aggregation: world and foreign totals") {
    IOTable t = tiny({"AAA"}, {"M"}, Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, 10));
    t.final_demand(0, 0) = 7;
    CHECK(aggregate_final_demand(t)(0) == 7);

    IOTable two = tiny({"AAA", "BBB"}, {"M"}, Eigen::MatrixXd::Zero(2, 2), Eigen::Vector2d(10, 10));
    two.final_demand(0, 0) = 3;
    two.final_demand(0, 1) = 4;
    CHECK(aggregate_final_demand(two, FinalDemandScope::kWorld)(0) == 7);
    CHECK(aggregate_final_demand(two, FinalDemandScope::kForeign)(0) == 4);
}

TEST_CASE("1400-node table: load and final demand against record sums") {
    std::mt19937_64 rng(1400);
    const auto t = testing::random_table(rng, 40, 35, 2000, 0.98);
    TempDir dir;
    write_io_series({&t}, paths_in(dir));
    const auto start = std::chrono::steady_clock::now();
    const auto loaded = load_io_table(paths_in(dir), 2000);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    MESSAGE("1400-node load: " << seconds << " s");
    CHECK(loaded.size() == 1400);

    // Independent summation over the raw records.
    std::map<std::pair<std::string, std::string>, double> sums;
    const auto records = csv::Table::read(dir / "fd.csv", {"src_country", "src_industry", "value"});
    for (const auto& r : records.rows()) {
        sums[{r.str("src_country"), r.str("src_industry")}] += r.num("value");
    }
    const auto f = aggregate_final_demand(loaded);
    for (std::size_t n = 0; n < loaded.size(); ++n) {
        const auto id = loaded.index.node(n);
        CHECK(std::abs(f(static_cast<Eigen::Index>(n)) - sums[{id.country, id.industry}]) <= 1e-9 * sums[{id.country, id.industry}]);
    }
}

TEST_CASE("canonical serialization round-trips byte for byte") {
    std::mt19937_64 rng(21);
    auto a = testing::random_table(rng, 3, 2, 2001, 0.3);
    auto b = testing::random_table(rng, 3, 2, 2002, 0.3);
    TempDir dir;
    write_io_series({&a, &b}, paths_in(dir));
    const auto first = testing::slurp(dir / "flows.csv") + testing::slurp(dir / "fd.csv") + testing::slurp(dir / "q.csv");
    const auto series = load_io_series(paths_in(dir));
    REQUIRE(series.size() == 2);
    CHECK(series.at(2001).flows == a.flows);
    TempDir again;
    std::vector<const IOTable*> list;
    for (const auto& [y, t] : series) list.push_back(&t);
    write_io_series(list, paths_in(again));
    const auto second =
        testing::slurp(again / "flows.csv") + testing::slurp(again / "fd.csv") + testing::slurp(again / "q.csv");
    CHECK(first == second);
}

TEST_CASE("coefficients are invariant to scaling flows and output") {
    std::mt19937_64 rng(8);
    const auto t = testing::random_table(rng, 4, 3);
    const auto base = build_coefficients(t).b;
    for (double c : {1e-3, 0.5, 7.0, 1e6}) {
        CHECK(testing::max_rel_diff(build_coefficients(scale_flows_and_output(t, c)).b, base) <= 1e-14);
    }
}
