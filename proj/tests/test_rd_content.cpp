#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "gvc/error.hpp"
#include "gvc/pipeline.hpp"
#include "gvc/rd_content.hpp"
#include "gvc/synthetic.hpp"
#include "support.hpp"

using namespace gvc;

namespace {

CoefficientMatrix coeffs(const Eigen::MatrixXd& b, int year = 2000) { return {year, b}; }

// Nonnegative B with every column summing to `share`.
Eigen::MatrixXd random_b(std::mt19937_64& rng, Eigen::Index n, double share) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd b(n, n);
    for (Eigen::Index h = 0; h < n; ++h) {
        for (Eigen::Index j = 0; j < n; ++j) b(j, h) = u(rng);
        b.col(h) *= share / b.col(h).sum();
    }
    return b;
}

Eigen::VectorXd random_vec(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::VectorXd v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

const std::vector<Tier> kTiers{Tier::kHigh, Tier::kMiddle, Tier::kLow};

// Random forward/backward tiers per node, group per industry.
ClassLabels random_labels(std::mt19937_64& rng, const NodeIndex& index, int year) {
    ClassLabels labels;
    std::uniform_int_distribution<int> pick(0, 2);
    for (std::size_t h = 0; h < index.industry_count(); ++h) {
        labels.groups[index.industries()[h]] = h % 2 ? IndustryGroup::kB : IndustryGroup::kA;
    }
    for (std::size_t n = 0; n < index.size(); ++n) {
        NodeLabel l;
        l.year = year;
        l.country = index.node(n).country;
        l.industry = index.node(n).industry;
        l.fwd_class = kTiers[static_cast<std::size_t>(pick(rng))];
        l.back_class = kTiers[static_cast<std::size_t>(pick(rng))];
        l.total = total_class(l.fwd_class, l.back_class);
        l.group = labels.groups.at(l.industry);
        labels.nodes.push_back(l);
    }
    std::sort(labels.nodes.begin(), labels.nodes.end(), [](const auto& a, const auto& b) {
        return std::tie(a.year, a.country, a.industry) < std::tie(b.year, b.country, b.industry);
    });
    return labels;
}

struct Fixture {
    NodeIndex index;
    Eigen::MatrixXd b;
    Eigen::VectorXd d, f;
    ClassLabels labels;
};

Fixture random_fixture(std::uint64_t seed, std::size_t countries, std::size_t industries) {
    std::mt19937_64 rng(seed);
    Fixture x;
    x.index = NodeIndex(testing::codes("C", countries), testing::codes("I", industries));
    const auto n = static_cast<Eigen::Index>(x.index.size());
    x.b = random_b(rng, n, 0.5);
    x.d = random_vec(rng, n, 0.0, 0.1);
    x.f = random_vec(rng, n, 1.0, 10.0);
    x.labels = random_labels(rng, x.index, 2000);
    return x;
}

}  // namespace

TEST_CASE("Leontief inverse: zero coefficients and a 2x2 closed form") {
    const LeontiefSolver zero(coeffs(Eigen::MatrixXd::Zero(4, 4)));
    CHECK(zero.inverse().isApprox(Eigen::MatrixXd::Identity(4, 4), 1e-15));

    Eigen::Matrix2d b;
    b << 0.0, 0.2, 0.5, 0.0;
    Eigen::Matrix2d expected;
    expected << 1.0, 0.2, 0.5, 1.0;
    expected /= 0.9;
    CHECK(testing::max_rel_diff(LeontiefSolver(coeffs(b)).inverse(), expected) <= 1e-14);
}

TEST_CASE("content agrees with the truncated power series on a 50-node economy") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        std::mt19937_64 rng(seed);
        const Eigen::MatrixXd b = random_b(rng, 50, 0.6);
        const Eigen::VectorXd d = random_vec(rng, 50, 0.0, 0.2);
        const Eigen::VectorXd f = random_vec(rng, 50, 0.0, 5.0);
        const auto c = rd_content(d, LeontiefSolver(coeffs(b)), f);
        CHECK(testing::max_rel_diff(c.v, oracle_neumann(b, f, d, 80)) <= 1e-10);
    }
}

TEST_CASE("content hand cases") {
    SUBCASE("single node") {
        const auto c = rd_content(Eigen::VectorXd::Constant(1, 0.5), LeontiefSolver(coeffs(Eigen::MatrixXd::Constant(1, 1, 0.5))),
                                  Eigen::VectorXd::Constant(1, 5.0));
        CHECK(std::abs(c.v(0) - 5.0) <= 1e-14);
    }
    SUBCASE("three-node supply chain") {
        // 0 supplies 1, 1 supplies 2; the chain terminates so L = I + B + B^2.
        Eigen::Matrix3d b = Eigen::Matrix3d::Zero();
        b(0, 1) = 0.5;
        b(1, 2) = 0.4;
        const Eigen::Vector3d d(0.3, 0.2, 0.1), f(0.0, 0.0, 10.0);
        const auto c = rd_content(d, LeontiefSolver(coeffs(b)), f);
        CHECK(c.v(0) == 0.0);
        CHECK(c.v(1) == 0.0);
        CHECK(std::abs(c.v(2) - 10.0 * (0.1 + 0.2 * 0.4 + 0.3 * 0.5 * 0.4)) <= 1e-14);
    }
    SUBCASE("zero intensity") {
        std::mt19937_64 rng(3);
        const auto c = rd_content(Eigen::VectorXd::Zero(6), LeontiefSolver(coeffs(random_b(rng, 6, 0.5))),
                                  Eigen::VectorXd::Ones(6));
        CHECK(c.v.isZero(0.0));
    }
    CHECK_THROWS_AS(rd_content(Eigen::VectorXd::Zero(2), LeontiefSolver(coeffs(Eigen::MatrixXd::Zero(3, 3))),
                               Eigen::VectorXd::Zero(3)),
                    ValidationError);
}

TEST_CASE("content is linear in intensity and final demand") {
    std::mt19937_64 rng(8);
    const LeontiefSolver l(coeffs(random_b(rng, 20, 0.5)));
    const Eigen::VectorXd d1 = random_vec(rng, 20, 0, 1), d2 = random_vec(rng, 20, 0, 1);
    const Eigen::VectorXd f = random_vec(rng, 20, 0, 1);
    const Eigen::VectorXd sum = rd_content(d1 + 2.0 * d2, l, f).v;
    CHECK(testing::max_rel_diff(sum, rd_content(d1, l, f).v + 2.0 * rd_content(d2, l, f).v) <= 1e-13);
    // V_h is proportional to f_h alone.
    const Eigen::VectorXd g = random_vec(rng, 20, 0.5, 2);
    const Eigen::VectorXd scaled = rd_content(d1, l, (f.array() * g.array()).matrix()).v;
    CHECK(testing::max_rel_diff(scaled, (rd_content(d1, l, f).v.array() * g.array()).matrix()) <= 1e-13);
}

TEST_CASE("partition is complete and matches a loop oracle") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto x = random_fixture(seed, 4, 3);
        const LeontiefSolver l(coeffs(x.b));
        const auto content = rd_content(x.d, l, x.f);
        const auto parts = partition_content(content, x.d, x.index, x.labels, x.index.countries());
        REQUIRE(parts.size() == 12);
        const auto& inv = l.inverse();
        for (std::size_t k = 0; k < parts.size(); ++k) {
            const auto& p = parts[k];
            const auto c = *x.index.find({p.country, p.industry});
            const auto ci = static_cast<Eigen::Index>(c);
            CHECK(std::abs(p.domestic.total + p.foreign_total().total - p.v) <= 1e-10 * p.v);

            std::array<double, 6> oracle{};
            double dom = 0.0;
            for (std::size_t r = 0; r < x.index.size(); ++r) {
                const auto ri = static_cast<Eigen::Index>(r);
                const double term = x.d(ri) * inv(ri, ci) * x.f(ci);
                if (x.index.country_of(r) == x.index.country_of(c)) {
                    dom += term;
                    continue;
                }
                const auto* lab = x.labels.find(2000, x.index.node(r).country, x.index.node(r).industry);
                oracle[bucket_of(lab->total.total, lab->group)] += term;
            }
            CHECK(std::abs(p.domestic.total - dom) <= 1e-12 * p.v);
            for (std::size_t b = 0; b < 6; ++b) CHECK(std::abs(p.foreign[b].total - oracle[b]) <= 1e-12 * p.v);

            double middle = 0.0;
            for (const auto& m : p.middle) middle += m.total;
            CHECK(std::abs(middle - p.foreign[2].total - p.foreign[3].total) <= 1e-12 * p.v);
        }
    }
}

TEST_CASE("a single High group-B exporter lands in one bucket") {
    auto x = random_fixture(21, 3, 2);
    x.d.setZero();
    // C01/I01 is the only R&D performer.
    const auto src = *x.index.find({"C01", "I01"});
    x.d(static_cast<Eigen::Index>(src)) = 0.05;
    for (auto& n : x.labels.nodes) {
        if (n.country == "C01" && n.industry == "I01") {
            n.fwd_class = n.back_class = Tier::kHigh;
            n.total = total_class(Tier::kHigh, Tier::kHigh);
            n.group = IndustryGroup::kB;
        }
    }
    const LeontiefSolver l(coeffs(x.b));
    const auto parts = partition_content(rd_content(x.d, l, x.f), x.d, x.index, x.labels, {"C00", "C02"});
    REQUIRE(parts.size() == 4);
    for (const auto& p : parts) {
        CHECK(p.domestic.total == 0.0);
        CHECK(p.foreign[1].total > 0.0);
        CHECK(std::abs(p.foreign[1].total - p.v) <= 1e-14 * p.v);
        for (std::size_t b : {0, 2, 3, 4, 5}) CHECK(p.foreign[b].total == 0.0);
    }
}

TEST_CASE("missing exporter labels are an error, unless the exporter has no R&D") {
    auto x = random_fixture(5, 3, 2);
    const LeontiefSolver l(coeffs(x.b));
    auto labels = x.labels;
    labels.nodes.erase(std::remove_if(labels.nodes.begin(), labels.nodes.end(),
                                      [](const auto& n) { return n.country == "C02"; }),
                       labels.nodes.end());
    try {
        partition_content(rd_content(x.d, l, x.f), x.d, x.index, labels, {"C00"});
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("C02/I00") != std::string::npos);
    }
    // A rest-of-world block with zero intensity still carries flows but needs no label.
    x.d.segment(4, 2).setZero();
    const auto parts = partition_content(rd_content(x.d, l, x.f), x.d, x.index, labels, {"C00", "C01"});
    for (const auto& p : parts) CHECK(std::abs(p.domestic.total + p.foreign_total().total - p.v) <= 1e-12 * p.v);
    CHECK_THROWS_AS(partition_content(rd_content(x.d, l, x.f), x.d, x.index, labels, {"XXX"}), ValidationError);
}

TEST_CASE("direct/indirect split: two-node closed form") {
    NodeIndex index({"AAA", "BBB"}, {"M"});
    Eigen::Matrix2d b;
    b << 0.1, 0.2, 0.3, 0.1;
    const Eigen::Vector2d d(0.04, 0.02), f(3.0, 7.0);
    ClassLabels labels;
    labels.groups["M"] = IndustryGroup::kA;
    for (const char* c : {"AAA", "BBB"}) {
        NodeLabel n;
        n.year = 2000;
        n.country = c;
        n.industry = "M";
        n.fwd_class = n.back_class = Tier::kLow;
        n.total = total_class(Tier::kLow, Tier::kLow);
        labels.nodes.push_back(n);
    }
    const LeontiefSolver l(coeffs(b));
    const auto parts = direct_indirect_split(l, d, f, index, labels, {"BBB"});
    REQUIRE(parts.size() == 1);
    const auto& p = parts[0];
    const double det = 0.9 * 0.9 - 0.2 * 0.3;
    const double l01 = 0.2 / det, l11 = 0.9 / det;
    CHECK(std::abs(p.foreign[4].total - 0.04 * l01 * 7.0) <= 1e-15);  // low_A
    CHECK(std::abs(p.foreign[4].direct - 0.04 * 0.2 * 7.0) <= 1e-15);
    CHECK(std::abs(p.foreign[4].indirect - 0.04 * (l01 - 0.2) * 7.0) <= 1e-15);
    CHECK(std::abs(p.domestic.total - 0.02 * l11 * 7.0) <= 1e-15);
    CHECK(std::abs(p.domestic.direct - 0.02 * 1.1 * 7.0) <= 1e-15);
}

TEST_CASE("direct/indirect split: identities") {
    for (std::uint64_t seed = 30; seed < 40; ++seed) {
        const auto x = random_fixture(seed, 10, 5);
        const LeontiefSolver l(coeffs(x.b));
        const auto split = direct_indirect_split(l, x.d, x.f, x.index, x.labels, x.index.countries());
        const auto plain = partition_content(rd_content(x.d, l, x.f), x.d, x.index, x.labels, x.index.countries());
        REQUIRE(split.size() == plain.size());
        for (std::size_t k = 0; k < split.size(); ++k) {
            const auto& s = split[k];
            const double scale = s.v;
            for (std::size_t b = 0; b < 6; ++b) {
                CHECK(std::abs(s.foreign[b].direct + s.foreign[b].indirect - s.foreign[b].total) <= 1e-10 * scale);
                CHECK(std::abs(s.foreign[b].total - plain[k].foreign[b].total) <= 1e-12 * scale);
                CHECK(s.foreign[b].direct >= 0.0);
                CHECK(s.foreign[b].indirect >= -1e-15 * scale);
            }
            CHECK(std::abs(s.domestic.direct + s.domestic.indirect - s.domestic.total) <= 1e-10 * scale);
        }
    }
}

TEST_CASE("block-diagonal economies have no foreign content") {
    auto x = random_fixture(44, 3, 3);
    for (std::size_t r = 0; r < x.index.size(); ++r) {
        for (std::size_t c = 0; c < x.index.size(); ++c) {
            if (x.index.country_of(r) != x.index.country_of(c)) x.b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 0.0;
        }
    }
    const auto parts = direct_indirect_split(LeontiefSolver(coeffs(x.b)), x.d, x.f, x.index, x.labels,
                                             x.index.countries());
    for (const auto& p : parts) {
        const auto t = p.foreign_total();
        CHECK(t.total == 0.0);
        CHECK(t.direct == 0.0);
        CHECK(t.indirect == 0.0);
        CHECK(std::abs(p.domestic.total - p.v) <= 1e-12 * p.v);
    }
}

TEST_CASE("share tables") {
    const auto x = random_fixture(50, 6, 4);
    const LeontiefSolver l(coeffs(x.b));
    const auto split = direct_indirect_split(l, x.d, x.f, x.index, x.labels, x.index.countries());
    const auto by_industry = shares_report(split, ShareGrouping::kIndustry, 2000);
    CHECK(by_industry.columns.size() == 6);
    REQUIRE(by_industry.rows.size() == 4);
    for (const auto& r : by_industry.rows) {
        double s = 0.0;
        for (double p : r.percent) s += p;
        CHECK(std::abs(s - 100.0) <= 0.01);
        CHECK(r.nodes == 6);
    }
    const auto middle = shares_report(split, ShareGrouping::kMiddleSubcategory);
    REQUIRE(middle.rows.size() == 1);
    CHECK(middle.columns == middle_subcategories());
    double s = 0.0;
    for (double p : middle.rows[0].percent) s += p;
    CHECK(std::abs(s - 100.0) <= 0.01);

    CHECK(shares_report(split, ShareGrouping::kIndustry, 1999).rows.empty());
    const auto by_year = shares_report(split, ShareGrouping::kYear, std::nullopt, "I02");
    REQUIRE(by_year.rows.size() == 1);
    CHECK(by_year.rows[0].key == "2000");
    CHECK(by_year.rows[0].nodes == 6);
}

TEST_CASE("share tables: single bucket, zero totals and the fourteen-industry layout") {
    std::vector<ImporterContent> contents;
    const auto industries = manufacturing_industries();
    for (const auto& h : industries) {
        ImporterContent c;
        c.country = "AAA";
        c.industry = h;
        c.year = 1995;
        if (h != "C19") {
            c.foreign[0].total = c.foreign[0].direct = 2.0;
        }
        contents.push_back(c);
    }
    const auto t = shares_report(contents, ShareGrouping::kIndustry, 1995);
    REQUIRE(t.rows.size() == 14);
    for (const auto& r : t.rows) {
        if (r.key == "C19") {
            CHECK(r.zero_total);
            CHECK(r.nodes == 0);
        } else {
            CHECK_FALSE(r.zero_total);
            CHECK(r.percent[0] == 100.0);
        }
    }
    std::ostringstream out;
    write_share_csv(t, "industry", out);
    const auto text = out.str();
    CHECK(text.rfind("industry,direct_High,direct_Middle,direct_Low,indirect_High,indirect_Middle,indirect_Low,nodes,"
                     "zero_total\n",
                     0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 15);
}

TEST_CASE("importer sets") {
    const auto s = ImporterSets::default_sets();
    CHECK(s.all.size() == 21);
    CHECK(s.eur.size() == 17);
    CHECK(s.flags("USA") == "ALL|NA|G5");
    CHECK(s.flags("DEU") == "ALL|EUR|G5");
    CHECK(s.flags("JPN") == "ALL|G5");
    CHECK(s.flags("POL") == "ALL|EUR|nonG5");
    CHECK(s.flags("CHN").empty());
    CHECK_THROWS_AS(s.member("USA", "ASIA"), ValidationError);
}

TEST_CASE("regressor rows and CSV round-trip") {
    ImporterSets sets;
    sets.all = {"AAA", "BBB"};
    sets.na = {"BBB"};
    std::vector<ImporterContent> contents(2);
    contents[0].country = "BBB";
    contents[0].industry = "M";
    contents[0].year = 2001;
    contents[0].v = 3.0;
    contents[0].domestic.total = 1.0;
    contents[0].foreign[0].total = 2.0;
    contents[1].country = "AAA";
    contents[1].industry = "M";
    contents[1].year = 2001;
    const auto rows = regressor_rows(contents, sets);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].country == "AAA");
    CHECK(rows[0].importer_flags == "ALL|nonG5");
    CHECK(rows[1].importer_flags == "ALL|NA|nonG5");
    CHECK(rows[1].total == 3.0);

    testing::TempDir dir;
    {
        std::ofstream out(dir / "r.csv", std::ios::binary);
        write_regressor_csv(rows, out);
    }
    const auto text = testing::slurp(dir / "r.csv");
    CHECK(text.find("AAA,M,2001,ALL|nonG5,,,,,,,,0,") != std::string::npos);
    CHECK(text.find("BBB,M,2001,ALL|NA|nonG5,0,0.6931471805599453,,") != std::string::npos);
    const auto back = read_regressor_csv(dir / "r.csv");
    REQUIRE(back.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(back[k].country == rows[k].country);
        CHECK(back[k].importer_flags == rows[k].importer_flags);
        CHECK(back[k].domestic == rows[k].domestic);
        CHECK(back[k].foreign == rows[k].foreign);
        CHECK(back[k].total == rows[k].total);
    }
}
