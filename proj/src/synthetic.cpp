#include "gvc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "gvc/csv.hpp"
#include "gvc/error.hpp"

namespace gvc {

void SynthConfig::validate() const {
    if (countries.size() < 3) throw ValidationError("synthetic economy needs at least 3 sample countries");
    if (industries.empty()) throw ValidationError("synthetic economy needs at least one industry");
    if (first_year > last_year) throw ValidationError("synthetic year range is empty");
    std::set<std::string> codes(countries.begin(), countries.end());
    if (codes.size() != countries.size()) throw ValidationError("duplicate synthetic country code");
    if (rest_of_world.empty() || anchor.empty() || codes.count(rest_of_world) || codes.count(anchor) ||
        rest_of_world == anchor) {
        throw ValidationError("rest-of-world and anchor codes must be distinct from the sample");
    }
    if (hub_count < 0 || static_cast<std::size_t>(hub_count) > countries.size()) {
        throw ValidationError("hub_count must lie in [0, number of countries]");
    }
    if (hub_strength < 0.0 || domestic_bias <= 0.0) throw ValidationError("hub_strength and domestic_bias must be nonnegative");
    if (!(input_share_min > 0.0 && input_share_min <= input_share_max)) {
        throw ValidationError("input share range must be positive and ordered");
    }
    if (!(input_share_max < max_input_share && max_input_share <= 0.9)) {
        throw ValidationError("input shares must stay below the spectral-radius bound 0.9");
    }
    if (!(rd_intensity_min > 0.0 && rd_intensity_min <= rd_intensity_max)) {
        throw ValidationError("R&D intensity range must be positive and ordered");
    }
    if (!(labor_share > 0.0 && labor_share < 1.0)) throw ValidationError("labor_share must lie in (0, 1)");
    if (noise_sd < 0.0 || rd_growth_sd < 0.0 || weight_drift < 0.0) {
        throw ValidationError("standard deviations must be nonnegative");
    }
}

namespace {

using Engine = std::mt19937_64;

double uniform(Engine& rng, double lo, double hi) { return boost::random::uniform_real_distribution<double>(lo, hi)(rng); }
double normal(Engine& rng, double sd) { return sd == 0.0 ? 0.0 : boost::random::normal_distribution<double>(0.0, sd)(rng); }

}  // namespace

RunConfig SyntheticEconomy::run_config(const std::filesystem::path& dir) const {
    RunConfig cfg;
    cfg.io = {dir / "flows.csv", dir / "final_demand.csv", dir / "output.csv"};
    cfg.sea = dir / "sea.csv";
    cfg.deflators = dir / "deflators.csv";
    cfg.rd = dir / "rd.csv";
    cfg.out_dir = dir / "out";
    cfg.first_year = config.first_year;
    cfg.last_year = config.last_year;
    const auto defaults = ImporterSets::default_sets();
    cfg.importers.all = config.countries;
    std::sort(cfg.importers.all.begin(), cfg.importers.all.end());
    cfg.importers.eur.clear();
    cfg.importers.na.clear();
    cfg.importers.g5.clear();
    for (const auto& c : cfg.importers.all) {
        if (defaults.eur.count(c)) cfg.importers.eur.insert(c);
        if (defaults.na.count(c)) cfg.importers.na.insert(c);
        if (defaults.g5.count(c)) cfg.importers.g5.insert(c);
    }
    cfg.manufacturing = {config.industries.begin(), config.industries.end()};
    cfg.centrality_drop = {config.rest_of_world};
    // A breakpoint outside the window would give all-zero interaction columns.
    if (cfg.breakpoint && !(*cfg.breakpoint > cfg.first_year && *cfg.breakpoint <= cfg.last_year)) {
        cfg.breakpoint.reset();
    }
    return cfg;
}

SyntheticEconomy gen_economy(const SynthConfig& config) {
    config.validate();
    Engine rng(config.seed);
    SyntheticEconomy eco;
    eco.config = config;

    std::vector<std::string> countries = config.countries;
    std::sort(countries.begin(), countries.end());
    std::vector<std::string> all_countries = countries;
    all_countries.push_back(config.rest_of_world);
    std::sort(all_countries.begin(), all_countries.end());
    std::vector<std::string> industries = config.industries;
    std::sort(industries.begin(), industries.end());
    const NodeIndex index(all_countries, industries);
    const auto n = static_cast<Eigen::Index>(index.size());
    const auto nc = index.country_count();
    const auto ng = index.industry_count();
    const int years = config.last_year - config.first_year + 1;

    // Seller attractiveness: hub countries dominate, everyone else is spread by
    // a fraction of the hub strength so tiers are not decided by noise alone.
    std::vector<std::size_t> order(countries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[boost::random::uniform_int_distribution<std::size_t>(0, i - 1)(rng)]);
    }
    std::set<std::string> hubs;
    for (int h = 0; h < config.hub_count; ++h) hubs.insert(countries[order[static_cast<std::size_t>(h)]]);
    std::vector<double> country_pull(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        const double spread = uniform(rng, 0.0, 0.2);
        country_pull[c] = 1.0 + config.hub_strength * (hubs.count(all_countries[c]) ? 1.0 : spread);
    }
    std::vector<double> industry_pull(ng);
    for (auto& p : industry_pull) p = uniform(rng, 0.5, 1.5);

    Eigen::VectorXd log_node(n);
    for (Eigen::Index j = 0; j < n; ++j) log_node(j) = normal(rng, 0.1);
    Eigen::MatrixXd pair(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index h = 0; h < n; ++h) pair(j, h) = std::exp(normal(rng, 0.2));
    }
    Eigen::VectorXd input_share(n);
    for (Eigen::Index h = 0; h < n; ++h) input_share(h) = uniform(rng, config.input_share_min, config.input_share_max);
    Eigen::VectorXd final_base(n);
    for (Eigen::Index j = 0; j < n; ++j) final_base(j) = uniform(rng, 50.0, 150.0);
    std::vector<double> market(nc);
    for (auto& m : market) m = uniform(rng, 0.5, 1.5);

    for (int t = 0; t < years; ++t) {
        const int year = config.first_year + t;
        if (t > 0) {
            for (Eigen::Index j = 0; j < n; ++j) log_node(j) += normal(rng, config.weight_drift);
        }
        Eigen::MatrixXd b(n, n);
        for (Eigen::Index h = 0; h < n; ++h) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const auto cj = index.country_of(static_cast<std::size_t>(j));
                const auto gj = index.industry_of(static_cast<std::size_t>(j));
                double w = country_pull[cj] * industry_pull[gj] * std::exp(log_node(j)) * pair(j, h);
                if (cj == index.country_of(static_cast<std::size_t>(h))) w *= config.domestic_bias;
                b(j, h) = w;
            }
            b.col(h) *= input_share(h) / b.col(h).sum();
        }
        const auto check = check_productive(b);
        if (!check.productive || check.radius_upper_bound >= config.max_input_share) {
            throw ValidationError("synthetic coefficients violate the spectral-radius bound in " +
                                  std::to_string(year));
        }

        IOTable table;
        table.year = year;
        table.index = index;
        table.final_demand.resize(n, static_cast<Eigen::Index>(nc));
        const double growth = std::exp(0.03 * t);
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto cj = index.country_of(static_cast<std::size_t>(j));
            for (std::size_t c = 0; c < nc; ++c) {
                const double home = c == cj ? 3.0 : 1.0;
                table.final_demand(j, static_cast<Eigen::Index>(c)) =
                    final_base(j) * market[c] * home * growth * std::exp(normal(rng, 0.05)) / static_cast<double>(nc);
            }
        }
        const Eigen::VectorXd f = table.final_demand.rowwise().sum();
        table.gross_output = (Eigen::MatrixXd::Identity(n, n) - b).partialPivLu().solve(f);
        table.flows = b * table.gross_output.asDiagonal();
        table.validate();
        eco.tables.emplace(year, std::move(table));
    }

    // Price indices and R&D spending of the sample.
    const std::set<std::string> gdp_only(config.gdp_deflator_only.begin(), config.gdp_deflator_only.end());
    std::vector<std::string> priced = countries;
    priced.push_back(config.anchor);
    for (const auto& c : priced) {
        const double inflation = uniform(rng, 0.01, 0.04);
        if (gdp_only.count(c) || c == config.anchor) {
            for (int t = 0; t < years; ++t) eco.deflators.set(c, "", config.first_year + t, 100.0 * std::exp(inflation * t));
            continue;
        }
        for (const auto& g : industries) {
            const double rate = inflation + uniform(rng, -0.01, 0.01);
            for (int t = 0; t < years; ++t) eco.deflators.set(c, g, config.first_year + t, 100.0 * std::exp(rate * t));
        }
    }
    const auto& base = eco.tables.begin()->second;
    for (const auto& c : countries) {
        const auto ci = *index.country_index(c);
        for (std::size_t g = 0; g < ng; ++g) {
            const double level = uniform(rng, config.rd_intensity_min, config.rd_intensity_max) *
                                 base.gross_output(static_cast<Eigen::Index>(index.at(ci, g)));
            const double trend = uniform(rng, 0.0, 0.06);
            double log_r = std::log(level);
            for (int t = 0; t < years; ++t) {
                if (t > 0) log_r += trend + normal(rng, config.rd_growth_sd);
                const int year = config.first_year + t;
                const double price = *eco.deflators.index(c, industries[g], year);
                eco.rd.push_back({c, industries[g], year, std::exp(log_r) * price / 100.0});
            }
        }
    }

    // The content regressors exactly as the pipeline will rebuild them.
    const RunConfig cfg = eco.run_config({});
    const auto labels = classify(centrality_stage(eco.tables, cfg), cfg.classification());
    const auto stocks = rdstock_stage(eco.rd, eco.deflators, cfg);
    eco.regressors = content_stage(eco.tables, stocks, labels, cfg).regressors;
    std::map<std::tuple<std::string, std::string, int>, const RegressorRow*> by_node;
    for (const auto& r : eco.regressors) by_node[{r.country, r.industry, r.year}] = &r;

    // Socio-economic accounts with planted TFP and a constant labour share.
    std::map<std::pair<std::string, std::string>, double> unit_effect;
    for (const auto& c : countries) {
        for (const auto& g : industries) unit_effect[{c, g}] = normal(rng, 0.3);
    }
    std::vector<double> year_effect(static_cast<std::size_t>(years));
    for (auto& e : year_effect) e = normal(rng, 0.05);

    const double sigma = config.labor_share;
    auto add_record = [&](const std::string& c, const std::string& g, int year, double target) {
        const double ln_l = std::log(uniform(rng, 20.0, 200.0));
        const double ln_k = ln_l + uniform(rng, 0.5, 2.5);
        const double real = std::exp(target + 3.0 + sigma * ln_l + (1.0 - sigma) * ln_k);
        SeaRecord r;
        r.country = c;
        r.industry = g;
        r.year = year;
        r.va_nominal = real * *eco.deflators.index(c, g, year) / 100.0;
        r.employment = std::exp(ln_l);
        r.capital_real = std::exp(ln_k);
        r.labor_comp = sigma * r.va_nominal;
        eco.sea.push_back(std::move(r));
    };
    for (int t = 0; t < years; ++t) {
        const int year = config.first_year + t;
        for (const auto& g : industries) {
            double cell_sum = 0.0;
            for (const auto& c : countries) {
                double target = unit_effect[{c, g}] + year_effect[static_cast<std::size_t>(t)] + normal(rng, config.noise_sd);
                if (auto it = by_node.find({c, g, year}); it != by_node.end()) {
                    const auto& r = *it->second;
                    const std::array<double, 4> raw{r.domestic, r.foreign[1], r.foreign[3], r.foreign[5]};
                    if (std::all_of(raw.begin(), raw.end(), [](double v) { return v > 0.0; })) {
                        for (std::size_t k = 0; k < 4; ++k) target += config.beta[k] * std::log(raw[k]);
                    }
                }
                eco.planted_tfp[{c, g, year}] = target;
                cell_sum += target;
                add_record(c, g, year, target);
            }
            add_record(config.anchor, g, year, -cell_sum);
        }
    }
    return eco;
}

void write_economy(const SyntheticEconomy& economy, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const RunConfig cfg = economy.run_config(dir);
    std::vector<const IOTable*> tables;
    for (const auto& [y, t] : economy.tables) tables.push_back(&t);
    write_io_series(tables, cfg.io);

    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw ValidationError("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open("sea.csv");
        write_sea_csv(economy.sea, out);
    }
    {
        auto out = open("deflators.csv");
        economy.deflators.write_csv(out);
    }
    {
        auto out = open("rd.csv");
        write_rd_csv(economy.rd, out);
    }
    {
        auto out = open("truth.csv");
        csv::Writer w(out);
        w.row(std::vector<std::string>{"term", "value"});
        const char* names[] = {"domestic", "high", "middle", "low"};
        for (std::size_t k = 0; k < 4; ++k) w.row(names[k], economy.config.beta[k]);
        w.row("noise_sd", economy.config.noise_sd);
        w.row("seed", std::to_string(economy.config.seed));
        w.row("hub_count", economy.config.hub_count);
        w.row("hub_strength", economy.config.hub_strength);
    }
    {
        auto out = open("run.cfg");
        out << "flows = flows.csv\nfinal_demand = final_demand.csv\noutput = output.csv\n"
            << "sea = sea.csv\ndeflators = deflators.csv\nrd = rd.csv\nout_dir = out\n";
        static const std::set<std::string> kPathKeys{"flows", "final_demand", "output", "sea",
                                                     "deflators", "rd", "out_dir"};
        for (const auto& [k, v] : cfg.entries()) {
            if (!kPathKeys.count(k)) out << k << " = " << v << '\n';
        }
    }
}

Eigen::VectorXd oracle_neumann(const Eigen::MatrixXd& b, const Eigen::VectorXd& f, const Eigen::VectorXd& d,
                               int order) {
    if (order < 1) throw ValidationError("Neumann order must be at least 1");
    const Eigen::Index n = b.rows();
    // row = D B^k, accumulated into sum
    std::vector<double> row(d.data(), d.data() + n), sum = row, next(static_cast<std::size_t>(n));
    for (int k = 1; k <= order; ++k) {
        for (Eigen::Index h = 0; h < n; ++h) {
            double acc = 0.0;
            for (Eigen::Index g = 0; g < n; ++g) acc += row[static_cast<std::size_t>(g)] * b(g, h);
            next[static_cast<std::size_t>(h)] = acc;
        }
        row.swap(next);
        for (Eigen::Index h = 0; h < n; ++h) sum[static_cast<std::size_t>(h)] += row[static_cast<std::size_t>(h)];
    }
    Eigen::VectorXd v(n);
    for (Eigen::Index h = 0; h < n; ++h) v(h) = sum[static_cast<std::size_t>(h)] * f(h);
    return v;
}

Eigen::VectorXd oracle_katz(const Eigen::MatrixXd& w, double lambda, Direction direction, int order) {
    const Eigen::Index n = w.rows();
    const double eta = 1.0 - lambda;
    std::vector<double> term(static_cast<std::size_t>(n), eta), sum = term, next(static_cast<std::size_t>(n));
    for (int k = 1; k <= order; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double acc = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                const double m = direction == Direction::kForward ? w(i, j) : w(j, i);
                acc += m * term[static_cast<std::size_t>(j)];
            }
            next[static_cast<std::size_t>(i)] = lambda * acc;
        }
        term.swap(next);
        for (Eigen::Index i = 0; i < n; ++i) sum[static_cast<std::size_t>(i)] += term[static_cast<std::size_t>(i)];
    }
    return Eigen::Map<Eigen::VectorXd>(sum.data(), n);
}

namespace {

std::vector<std::vector<double>> gauss_jordan_inverse(std::vector<std::vector<double>> a) {
    const std::size_t k = a.size();
    std::vector<std::vector<double>> inv(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < k; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (a[pivot][col] == 0.0) throw NumericalError("singular cross-product matrix in oracle");
        std::swap(a[pivot], a[col]);
        std::swap(inv[pivot], inv[col]);
        const double p = a[col][col];
        for (std::size_t j = 0; j < k; ++j) {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            const double factor = a[r][col];
            for (std::size_t j = 0; j < k; ++j) {
                a[r][j] -= factor * a[col][j];
                inv[r][j] -= factor * inv[col][j];
            }
        }
    }
    return inv;
}

}  // namespace

Eigen::MatrixXd oracle_sandwich(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals,
                                const std::vector<std::string>& clusters, bool corrected) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto k = static_cast<std::size_t>(x.cols());
    std::vector<std::vector<double>> xtx(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            for (std::size_t i = 0; i < n; ++i) {
                xtx[a][b] += x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) *
                             x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
            }
        }
    }
    const auto bread = gauss_jordan_inverse(xtx);

    std::map<std::string, std::vector<double>> score;
    for (std::size_t i = 0; i < n; ++i) {
        auto& s = score[clusters[i]];
        s.resize(k, 0.0);
        for (std::size_t a = 0; a < k; ++a) {
            s[a] += x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) * residuals(static_cast<Eigen::Index>(i));
        }
    }
    std::vector<std::vector<double>> meat(k, std::vector<double>(k, 0.0));
    for (const auto& [c, s] : score) {
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) meat[a][b] += s[a] * s[b];
        }
    }
    Eigen::MatrixXd cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                for (std::size_t q = 0; q < k; ++q) acc += bread[a][p] * meat[p][q] * bread[q][b];
            }
            cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = acc;
        }
    }
    if (corrected) {
        const double g = static_cast<double>(score.size());
        const double nn = static_cast<double>(n);
        const double kk = static_cast<double>(k);
        cov *= g / (g - 1.0) * (nn - 1.0) / (nn - kk);
    }
    return cov;
}

}  // namespace gvc
