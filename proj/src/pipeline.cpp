#include "gvc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "gvc/csv.hpp"
#include "gvc/error.hpp"

namespace gvc {

const std::vector<std::string>& manufacturing_industries() {
    static const std::vector<std::string> kCodes{"C15t16", "C17t18", "C19",    "C20",    "C21t22",
                                                 "C23",    "C24",    "C25",    "C26",    "C27t28",
                                                 "C29",    "C30t33", "C34t35", "C36t37"};
    return kCodes;
}

namespace {

std::vector<std::string> list(const std::string& value) {
    std::vector<std::string> out;
    if (value.empty()) return out;
    for (auto& s : csv::split(value)) {
        if (!s.empty()) out.push_back(s);
    }
    return out;
}

std::string join(const auto& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ',';
        out += s;
    }
    return out;
}

int to_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("config key '" + key + "' expects an integer, got '" + value + "'");
    }
}

double to_double(const std::string& key, const std::string& value) {
    try {
        return csv::parse_number(value);
    } catch (const ValidationError&) {
        throw ValidationError("config key '" + key + "' expects a number, got '" + value + "'");
    }
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "flows") io.flows = value;
    else if (key == "final_demand") io.final_demand = value;
    else if (key == "output") io.output = value;
    else if (key == "sea") sea = value;
    else if (key == "deflators") deflators = value;
    else if (key == "rd") rd = value;
    else if (key == "out_dir") out_dir = value;
    else if (key == "first_year") first_year = to_int(key, value);
    else if (key == "last_year") last_year = to_int(key, value);
    else if (key == "sample") importers.all = list(value);
    else if (key == "eur") { auto v = list(value); importers.eur = {v.begin(), v.end()}; }
    else if (key == "na") { auto v = list(value); importers.na = {v.begin(), v.end()}; }
    else if (key == "g5") { auto v = list(value); importers.g5 = {v.begin(), v.end()}; }
    else if (key == "manufacturing") { auto v = list(value); manufacturing = {v.begin(), v.end()}; }
    else if (key == "centrality_drop") { auto v = list(value); centrality_drop = {v.begin(), v.end()}; }
    else if (key == "lambda") lambda = to_double(key, value);
    else if (key == "delta") delta = to_double(key, value);
    else if (key == "orientation") {
        if (value == "resolved") orientation = Orientation::kResolved;
        else if (value == "literal") orientation = Orientation::kLiteral;
        else throw ValidationError("orientation must be resolved or literal");
    } else if (key == "classification") {
        if (value == "tertile") mode = ClassificationOptions::Mode::kTertile;
        else if (value == "topk") mode = ClassificationOptions::Mode::kTopK;
        else throw ValidationError("classification must be tertile or topk");
    } else if (key == "k") k = to_int(key, value);
    else if (key == "group_split") {
        if (value == "both") group_direction = GroupSplitDirection::kBoth;
        else if (value == "forward") group_direction = GroupSplitDirection::kForward;
        else if (value == "backward") group_direction = GroupSplitDirection::kBackward;
        else throw ValidationError("group_split must be both, forward or backward");
    } else if (key == "final_demand_scope") {
        if (value == "world") final_demand = FinalDemandScope::kWorld;
        else if (value == "foreign") final_demand = FinalDemandScope::kForeign;
        else throw ValidationError("final_demand_scope must be world or foreign");
    } else if (key == "importer_splits") importer_splits = list(value);
    else if (key == "lag") lag = to_int(key, value);
    else if (key == "breakpoint") {
        if (value == "none" || value.empty()) breakpoint.reset();
        else breakpoint = to_int(key, value);
    } else if (key == "share_industry") share_industry = value;
    else if (key == "workers") workers = static_cast<unsigned>(to_int(key, value));
    else if (key == "sparse_above") solver.sparse_above = static_cast<std::size_t>(to_int(key, value));
    else if (key == "iterative_above") solver.iterative_above = static_cast<std::size_t>(to_int(key, value));
    else throw ValidationError("unknown config key '" + key + "'");
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config " + path.string());
    RunConfig cfg;
    const auto base = path.parent_path();
    std::string line;
    std::size_t line_no = 0;
    static const std::set<std::string> kPathKeys{"flows", "final_demand", "output", "sea", "deflators", "rd", "out_dir"};
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(path.string(), line_no, "expected key = value");
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (kPathKeys.count(key) && !value.empty() && std::filesystem::path(value).is_relative()) {
            value = (base / value).lexically_normal().string();
        }
        try {
            cfg.set(key, value);
        } catch (const ValidationError& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
    }
    return cfg;
}

std::map<std::string, std::string> RunConfig::entries() const {
    std::map<std::string, std::string> e;
    e["flows"] = io.flows.string();
    e["final_demand"] = io.final_demand.string();
    e["output"] = io.output.string();
    e["sea"] = sea.string();
    e["deflators"] = deflators.string();
    e["rd"] = rd.string();
    e["first_year"] = std::to_string(first_year);
    e["last_year"] = std::to_string(last_year);
    e["sample"] = join(importers.all);
    e["eur"] = join(importers.eur);
    e["na"] = join(importers.na);
    e["g5"] = join(importers.g5);
    e["manufacturing"] = join(manufacturing);
    e["centrality_drop"] = join(centrality_drop);
    e["lambda"] = csv::format(lambda);
    e["delta"] = csv::format(delta);
    e["orientation"] = orientation == Orientation::kResolved ? "resolved" : "literal";
    e["classification"] = mode == ClassificationOptions::Mode::kTertile ? "tertile" : "topk";
    e["k"] = std::to_string(k);
    e["group_split"] = group_direction == GroupSplitDirection::kBoth
                           ? "both"
                           : (group_direction == GroupSplitDirection::kForward ? "forward" : "backward");
    e["final_demand_scope"] = final_demand == FinalDemandScope::kWorld ? "world" : "foreign";
    e["importer_splits"] = join(importer_splits);
    e["lag"] = std::to_string(lag);
    e["breakpoint"] = breakpoint ? std::to_string(*breakpoint) : "none";
    e["share_industry"] = share_industry;
    e["sparse_above"] = std::to_string(solver.sparse_above);
    e["iterative_above"] = std::to_string(solver.iterative_above);
    return e;
}

void RunConfig::validate(bool require_inputs) const {
    if (first_year > last_year) throw ValidationError("sample window is empty");
    if (!(lambda > 0.0 && lambda < 1.0)) throw ValidationError("lambda must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
    if (importers.all.size() < 3) throw ValidationError("country sample needs at least 3 countries");
    if (mode == ClassificationOptions::Mode::kTopK && (k < 1 || 2 * static_cast<std::size_t>(k) >= importers.all.size())) {
        throw ValidationError("top-k classification needs 1 <= k and 2k < sample size");
    }
    if (lag < 0) throw ValidationError("lag must be nonnegative");
    for (const auto& s : importer_splits) {
        static const std::set<std::string> kKnown{"ALL", "EUR", "NA", "G5", "nonG5"};
        if (!kKnown.count(s)) throw ValidationError("unknown importer split '" + s + "'");
    }
    if (require_inputs) {
        for (const auto& p : {io.flows, io.final_demand, io.output, sea, deflators, rd}) {
            if (p.empty() || !std::filesystem::exists(p)) {
                throw ValidationError("input file '" + p.string() + "' does not exist");
            }
        }
    }
}

ClassificationOptions RunConfig::classification() const {
    ClassificationOptions o;
    o.mode = mode;
    o.k = k;
    o.sample = importers.all;
    o.group_direction = group_direction;
    return o;
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& f) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::vector<std::exception_ptr> errors(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        f(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::map<int, IOTable> load_window(const RunConfig& config) {
    auto all = load_io_series(config.io);
    std::map<int, IOTable> out;
    for (int y = config.first_year; y <= config.last_year; ++y) {
        auto it = all.find(y);
        if (it == all.end()) throw ValidationError("input-output tables lack year " + std::to_string(y));
        out.emplace(y, std::move(it->second));
    }
    return out;
}

TfpResult tfp_stage(std::vector<SeaRecord> sea, const Deflators& deflators) {
    apply_deflators(sea, deflators);
    const auto shares = smooth_labor_shares(sea);
    auto result = caves_tfp(sea, shares);
    result.diagnostics.insert(result.diagnostics.begin(), shares.diagnostics.begin(), shares.diagnostics.end());
    return result;
}

std::vector<CentralityScores> centrality_stage(const std::map<int, IOTable>& tables, const RunConfig& config) {
    std::vector<const IOTable*> list;
    for (const auto& [y, t] : tables) list.push_back(&t);
    std::vector<CentralityScores> out(list.size());
    MaskSpec mask;
    mask.drop_domestic = true;
    for (const auto& c : config.centrality_drop) {
        if (list.empty() || list.front()->index.country_index(c)) mask.drop_countries.insert(c);
    }
    parallel_for(list.size(), config.workers, [&](std::size_t i) {
        const auto masked = apply_mask(*list[i], mask);
        out[i] = compute_centrality(masked, config.lambda, config.orientation, config.solver);
    });
    return out;
}

std::vector<RDStock> rdstock_stage(const std::vector<RDRecord>& records, const Deflators& deflators,
                                   const RunConfig& config) {
    std::vector<RDStock> out;
    for (const auto& s : deflate_rd(records, deflators)) out.push_back(perpetual_inventory(s, config.delta));
    return out;
}

ContentStage content_stage(const std::map<int, IOTable>& tables, const std::vector<RDStock>& stocks,
                           const ClassLabels& labels, const RunConfig& config) {
    std::vector<const IOTable*> list;
    for (const auto& [y, t] : tables) list.push_back(&t);
    std::vector<std::vector<ImporterContent>> per_year(list.size());
    std::vector<std::vector<std::string>> diag(list.size());
    parallel_for(list.size(), config.workers, [&](std::size_t i) {
        const auto& table = *list[i];
        const auto coefficients = build_coefficients(table, config.solver);
        const auto f = aggregate_final_demand(table, config.final_demand);
        const auto d = intensity(stocks, table, config.manufacturing);
        diag[i] = d.diagnostics;
        const LeontiefSolver leontief(coefficients, config.solver);
        per_year[i] = direct_indirect_split(leontief, d.d, f, table.index, labels, config.importers.all);
    });
    ContentStage out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        out.contents.insert(out.contents.end(), per_year[i].begin(), per_year[i].end());
        out.diagnostics.insert(out.diagnostics.end(), diag[i].begin(), diag[i].end());
    }
    out.regressors = regressor_rows(out.contents, config.importers);
    return out;
}

std::vector<RegressionTable> regression_plan(const RunConfig& config) {
    auto wanted = [&](const std::string& s) {
        return std::find(config.importer_splits.begin(), config.importer_splits.end(), s) !=
               config.importer_splits.end();
    };
    auto grid = [&](const std::string& name, const std::string& title, int lag, std::optional<int> breakpoint) {
        RegressionTable t{name, title, {}, {}};
        for (const char* group : {"A", "B"}) {
            for (const char* set : {"ALL", "EUR", "NA"}) {
                if (!wanted(set)) continue;
                t.specs.push_back({std::string(set) + "/" + group, set, group, lag, breakpoint});
            }
        }
        return t;
    };
    std::vector<RegressionTable> plan;
    if (wanted("ALL")) {
        RegressionTable bench{"benchmark", "Benchmark: ln TFP on ln R&D content of final goods", {}, {}};
        bench.specs.push_back({"ALL", "ALL", "total", 0, std::nullopt});
        plan.push_back(std::move(bench));
    }
    if (config.mode == ClassificationOptions::Mode::kTopK) {
        plan.push_back(grid("table5", "Exporter centrality effects, top-" + std::to_string(config.k) +
                                          " classification", 0, std::nullopt));
    } else {
        plan.push_back(grid("table3", "Exporter centrality effects by importer region", 0, std::nullopt));
        RegressionTable t4{"table4", "Exporter centrality effects, G5 and non-G5 importers", {}, {}};
        for (const char* group : {"A", "B"}) {
            for (const char* set : {"G5", "nonG5"}) {
                if (wanted(set)) t4.specs.push_back({std::string(set) + "/" + group, set, group, 0, std::nullopt});
            }
        }
        plan.push_back(std::move(t4));
        if (config.lag > 0) {
            plan.push_back(grid("table6", std::to_string(config.lag) + "-year lagged regressors", config.lag,
                                std::nullopt));
        }
        if (config.breakpoint) {
            plan.push_back(grid("table8", "Class effects interacted with year >= " + std::to_string(*config.breakpoint),
                                0, config.breakpoint));
        }
    }
    plan.erase(std::remove_if(plan.begin(), plan.end(), [](const auto& t) { return t.specs.empty(); }), plan.end());
    return plan;
}

void run_regressions(std::vector<RegressionTable>& plan, const std::vector<RegressorRow>& regressors,
                     const std::vector<TfpObservation>& tfp, unsigned workers) {
    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (std::size_t t = 0; t < plan.size(); ++t) {
        plan[t].fits.assign(plan[t].specs.size(), FitResult{});
        for (std::size_t s = 0; s < plan[t].specs.size(); ++s) jobs.emplace_back(t, s);
    }
    parallel_for(jobs.size(), workers, [&](std::size_t j) {
        auto [t, s] = jobs[j];
        try {
            plan[t].fits[s] = run_regression(regressors, tfp, plan[t].specs[s]);
        } catch (const SpecificationError& e) {
            throw SpecificationError(plan[t].name + " column " + plan[t].specs[s].label + ": " + e.what());
        }
    });
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string() + " for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return hex.str();
}

namespace {

class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

    template <typename Fn>
    void write(const std::string& name, Fn&& fn) {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ValidationError("cannot write " + path.string());
        fn(out);
        out.close();
        written_.push_back(name);
    }
    const std::vector<std::string>& written() const { return written_; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> written_;
};

template <typename Fn>
auto stage(const std::string& name, const std::filesystem::path& dir, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        std::ofstream flag(dir / "INCOMPLETE", std::ios::binary);
        flag << "stage " << name << " failed: " << e.what() << '\n';
        const std::string msg = "stage " + name + ": " + e.what();
        switch (e.code()) {
            case ExitCode::kNumerical: throw NumericalError(msg);
            case ExitCode::kSpecification: throw SpecificationError(msg);
            default: throw ValidationError(msg);
        }
    }
}

}  // namespace

void run_pipeline(const RunConfig& config) {
    config.validate();
    std::filesystem::create_directories(config.out_dir);
    std::filesystem::remove(config.out_dir / "INCOMPLETE");
    ArtifactWriter out(config.out_dir);
    std::vector<std::string> diagnostics;
    const auto& dir = config.out_dir;

    const auto deflators = stage("load", dir, [&] { return Deflators::read_csv(config.deflators); });
    const auto tables = stage("load", dir, [&] { return load_window(config); });

    const auto tfp = stage("tfp", dir, [&] {
        auto sea = read_sea_csv(config.sea);
        std::erase_if(sea, [&](const SeaRecord& r) { return r.year < config.first_year || r.year > config.last_year; });
        return tfp_stage(std::move(sea), deflators);
    });
    diagnostics.insert(diagnostics.end(), tfp.diagnostics.begin(), tfp.diagnostics.end());
    out.write("tfp.csv", [&](std::ostream& o) { write_tfp_csv(tfp.rows, o); });
    out.write("table1_tfp_summary.csv", [&](std::ostream& o) { write_tfp_summary(tfp.rows, o); });

    const auto labels = stage("centrality", dir, [&] {
        return classify(centrality_stage(tables, config), config.classification());
    });
    out.write("table2_centrality_summary.csv", [&](std::ostream& o) { write_centrality_summary(labels, o); });
    out.write("centrality.csv", [&](std::ostream& o) { write_centrality_csv(labels, o); });
    out.write("industry_groups.csv", [&](std::ostream& o) {
        csv::Writer w(o);
        w.row(std::vector<std::string>{"industry", "industry_group"});
        for (const auto& [ind, g] : labels.groups) w.row(ind, to_string(g));
    });

    const auto stocks = stage("rdstock", dir, [&] {
        return rdstock_stage(read_rd_csv(config.rd), deflators, config);
    });
    for (const auto& s : stocks) diagnostics.insert(diagnostics.end(), s.diagnostics.begin(), s.diagnostics.end());
    out.write("rd_stock.csv", [&](std::ostream& o) { write_stock_csv(stocks, o); });

    const auto content = stage("content", dir, [&] { return content_stage(tables, stocks, labels, config); });
    diagnostics.insert(diagnostics.end(), content.diagnostics.begin(), content.diagnostics.end());
    out.write("regressors.csv", [&](std::ostream& o) { write_regressor_csv(content.regressors, o); });

    auto plan = regression_plan(config);
    stage("regress", dir, [&] {
        run_regressions(plan, content.regressors, tfp.rows, config.workers);
        return 0;
    });
    for (const auto& table : plan) {
        for (std::size_t c = 0; c < table.fits.size(); ++c) {
            out.write(table.name + "_col" + std::to_string(c + 1) + ".csv",
                      [&](std::ostream& o) { write_fit_csv(table.fits[c], o); });
        }
        out.write(table.name + ".txt", [&](std::ostream& o) { write_fit_table(table.title, table.fits, o); });
    }

    const std::optional<std::string> industry =
        config.share_industry.empty() ? std::nullopt : std::optional<std::string>(config.share_industry);
    for (int y : {config.first_year, config.last_year}) {
        out.write("table7_shares_" + std::to_string(y) + ".csv", [&](std::ostream& o) {
            write_share_csv(shares_report(content.contents, ShareGrouping::kIndustry, y), "industry", o);
        });
        if (config.first_year == config.last_year) break;
    }
    out.write("figure3_shares_by_year.csv", [&](std::ostream& o) {
        write_share_csv(shares_report(content.contents, ShareGrouping::kYear, std::nullopt, industry), "year", o);
    });
    out.write("figure4_middle_subcategories.csv", [&](std::ostream& o) {
        write_share_csv(shares_report(content.contents, ShareGrouping::kMiddleSubcategory, std::nullopt, industry),
                        "year", o);
    });
    out.write("diagnostics.log", [&](std::ostream& o) {
        for (const auto& d : diagnostics) o << d << '\n';
        for (const auto& table : plan) {
            for (const auto& s : table.specs) {
                o << table.name << " " << s.label << ": lag " << s.lag << '\n';
            }
        }
    });

    std::ofstream manifest(dir / "manifest.txt", std::ios::binary);
    manifest << "[parameters]\n";
    for (const auto& [k, v] : config.entries()) manifest << k << " = " << v << '\n';
    manifest << "\n[inputs]\n";
    for (const auto& [k, p] : std::vector<std::pair<std::string, std::filesystem::path>>{
             {"flows", config.io.flows}, {"final_demand", config.io.final_demand}, {"output", config.io.output},
             {"sea", config.sea}, {"deflators", config.deflators}, {"rd", config.rd}}) {
        manifest << k << " = " << sha256_file(p) << '\n';
    }
    manifest << "\n[outputs]\n";
    for (const auto& name : out.written()) manifest << name << " = " << sha256_file(dir / name) << '\n';
}

}  // namespace gvc
