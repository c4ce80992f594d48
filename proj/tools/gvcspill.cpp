// Command-line driver: one subcommand per pipeline stage plus the full run.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gvc/csv.hpp"
#include "gvc/error.hpp"
#include "gvc/pipeline.hpp"
#include "gvc/synthetic.hpp"

namespace fs = std::filesystem;
using namespace gvc;

namespace {

// Options shared by every stage: a config file, generic overrides, and named
// flags that map onto config keys. Flags are applied after the file.
struct ConfigOptions {
    std::string file;
    std::vector<std::string> overrides;
    std::map<std::string, std::string> flags;  // key -> value as typed

    void attach(CLI::App* app, const std::vector<std::pair<std::string, std::string>>& named) {
        app->add_option("-c,--config", file, "key = value run configuration")->check(CLI::ExistingFile);
        app->add_option("--set", overrides, "override a config key (key=value), repeatable");
        for (const auto& [flag, key] : named) {
            app->add_option("--" + flag, flags[key], "config key '" + key + "'");
        }
    }

    RunConfig build() const {
        RunConfig cfg = file.empty() ? RunConfig{} : RunConfig::from_file(file);
        for (const auto& [key, value] : flags) {
            if (!value.empty()) cfg.set(key, value);
        }
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        return cfg;
    }
};

const std::vector<std::pair<std::string, std::string>> kIoFlags{
    {"flows", "flows"}, {"final-demand", "final_demand"}, {"output", "output"}};
const std::vector<std::pair<std::string, std::string>> kWindowFlags{
    {"first-year", "first_year"}, {"last-year", "last_year"}, {"workers", "workers"}};

std::vector<std::pair<std::string, std::string>> concat(
    std::initializer_list<std::vector<std::pair<std::string, std::string>>> parts) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + (dir / name).string());
    return out;
}

void require(const fs::path& p, const char* what) {
    if (p.empty()) throw ValidationError(std::string("missing input: ") + what);
    if (!fs::exists(p)) throw ValidationError(std::string(what) + " '" + p.string() + "' does not exist");
}

void write_shares(const std::vector<ImporterContent>& contents, const RunConfig& cfg, const fs::path& dir) {
    const std::optional<std::string> industry =
        cfg.share_industry.empty() ? std::nullopt : std::optional<std::string>(cfg.share_industry);
    for (int y : {cfg.first_year, cfg.last_year}) {
        auto out = open_out(dir, "table7_shares_" + std::to_string(y) + ".csv");
        write_share_csv(shares_report(contents, ShareGrouping::kIndustry, y), "industry", out);
        if (cfg.first_year == cfg.last_year) break;
    }
    auto fig3 = open_out(dir, "figure3_shares_by_year.csv");
    write_share_csv(shares_report(contents, ShareGrouping::kYear, std::nullopt, industry), "year", fig3);
    auto fig4 = open_out(dir, "figure4_middle_subcategories.csv");
    write_share_csv(shares_report(contents, ShareGrouping::kMiddleSubcategory, std::nullopt, industry), "year", fig4);
}

int run(int argc, char** argv) {
    CLI::App app{"Global value chain R&D spillover pipeline"};
    app.require_subcommand(1);

    ConfigOptions ingest_opts, centrality_opts, classify_opts, tfp_opts, rdstock_opts, content_opts, regress_opts,
        pipeline_opts;
    std::string out_dir = ".";

    auto* ingest = app.add_subcommand("ingest", "validate input-output tables and write them canonically");
    ingest_opts.attach(ingest, concat({kIoFlags, kWindowFlags}));
    ingest->add_option("-o,--out", out_dir, "output directory");

    auto* centrality = app.add_subcommand("centrality", "Katz-Bonacich centrality and class labels");
    centrality_opts.attach(centrality, concat({kIoFlags, kWindowFlags,
                                               {{"lambda", "lambda"},
                                                {"orientation", "orientation"},
                                                {"classification", "classification"},
                                                {"k", "k"},
                                                {"group-split", "group_split"},
                                                {"sample", "sample"},
                                                {"drop", "centrality_drop"}}}));
    centrality->add_option("-o,--out", out_dir, "output directory");

    std::string centrality_in;
    auto* classify_cmd = app.add_subcommand("classify", "re-derive class labels from a centrality CSV");
    classify_opts.attach(classify_cmd, {{"classification", "classification"},
                                        {"k", "k"},
                                        {"group-split", "group_split"},
                                        {"sample", "sample"}});
    classify_cmd->add_option("--centrality", centrality_in, "centrality CSV")->required()->check(CLI::ExistingFile);
    classify_cmd->add_option("-o,--out", out_dir, "output directory");

    auto* tfp = app.add_subcommand("tfp", "labour-share smoothing and multilateral TFP");
    tfp_opts.attach(tfp, concat({kWindowFlags, {{"sea", "sea"}, {"deflators", "deflators"}}}));
    tfp->add_option("-o,--out", out_dir, "output directory");

    auto* rdstock = app.add_subcommand("rdstock", "perpetual-inventory R&D stocks");
    rdstock_opts.attach(rdstock, {{"rd", "rd"}, {"deflators", "deflators"}, {"delta", "delta"}});
    rdstock->add_option("-o,--out", out_dir, "output directory");

    std::string stocks_in, labels_in;
    auto* content = app.add_subcommand("content", "R&D content of final goods, regressors and shares");
    content_opts.attach(content, concat({kIoFlags, kWindowFlags,
                                         {{"final-demand-scope", "final_demand_scope"},
                                          {"sample", "sample"},
                                          {"share-industry", "share_industry"}}}));
    content->add_option("--stocks", stocks_in, "R&D stock CSV")->required()->check(CLI::ExistingFile);
    content->add_option("--labels", labels_in, "centrality CSV with labels")->required()->check(CLI::ExistingFile);
    content->add_option("-o,--out", out_dir, "output directory");

    std::string regressors_in, tfp_in;
    auto* regress = app.add_subcommand("regress", "fixed-effects spillover regressions");
    regress_opts.attach(regress, {{"importer-splits", "importer_splits"},
                                  {"classification", "classification"},
                                  {"k", "k"},
                                  {"lag", "lag"},
                                  {"breakpoint", "breakpoint"},
                                  {"workers", "workers"}});
    regress->add_option("--regressors", regressors_in, "regressor CSV")->required()->check(CLI::ExistingFile);
    regress->add_option("--tfp", tfp_in, "TFP CSV")->required()->check(CLI::ExistingFile);
    regress->add_option("-o,--out", out_dir, "output directory");

    SynthConfig synth_cfg;
    auto* synth = app.add_subcommand("synth", "generate a synthetic economy with planted effects");
    synth->add_option("--seed", synth_cfg.seed, "random seed");
    synth->add_option("--hub-count", synth_cfg.hub_count, "number of hub countries");
    synth->add_option("--hub-strength", synth_cfg.hub_strength, "extra seller attractiveness of hubs");
    synth->add_option("--noise", synth_cfg.noise_sd, "standard deviation of ln TFP noise");
    synth->add_option("--beta", synth_cfg.beta, "planted domestic, high, middle, low effects")->expected(4);
    synth->add_option("--first-year", synth_cfg.first_year, "first year");
    synth->add_option("--last-year", synth_cfg.last_year, "last year");
    synth->add_option("--countries", synth_cfg.countries, "sample country codes")->delimiter(',');
    synth->add_option("--industries", synth_cfg.industries, "industry codes")->delimiter(',');
    synth->add_option("-o,--out", out_dir, "output directory")->required();

    auto* pipeline = app.add_subcommand("pipeline", "run every stage and write all tables");
    pipeline_opts.attach(pipeline,
                         concat({kIoFlags, kWindowFlags,
                                 {{"sea", "sea"},
                                  {"deflators", "deflators"},
                                  {"rd", "rd"},
                                  {"out", "out_dir"},
                                  {"lambda", "lambda"},
                                  {"delta", "delta"},
                                  {"classification", "classification"},
                                  {"k", "k"},
                                  {"importer-splits", "importer_splits"},
                                  {"lag", "lag"},
                                  {"breakpoint", "breakpoint"}}}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::kValidation);
    }

    const fs::path out(out_dir);
    if (*ingest) {
        const auto cfg = ingest_opts.build();
        require(cfg.io.flows, "flows");
        require(cfg.io.final_demand, "final demand");
        require(cfg.io.output, "gross output");
        const auto tables = load_window(cfg);
        std::vector<const IOTable*> list;
        for (const auto& [year, t] : tables) {
            const auto coefficients = build_coefficients(t, cfg.solver);
            const auto check = check_productive(coefficients.b, cfg.solver);
            std::cout << year << ": " << t.index.country_count() << " countries x " << t.index.industry_count()
                      << " industries, spectral radius < " << csv::format(check.radius_upper_bound) << '\n';
            list.push_back(&t);
        }
        fs::create_directories(out);
        write_io_series(list, {out / "flows.csv", out / "final_demand.csv", out / "output.csv"});
    } else if (*centrality) {
        const auto cfg = centrality_opts.build();
        const auto labels = classify(centrality_stage(load_window(cfg), cfg), cfg.classification());
        auto o = open_out(out, "centrality.csv");
        write_centrality_csv(labels, o);
        auto s = open_out(out, "table2_centrality_summary.csv");
        write_centrality_summary(labels, s);
    } else if (*classify_cmd) {
        const auto cfg = classify_opts.build();
        const auto labels = reclassify(read_centrality_csv(centrality_in), cfg.classification());
        auto o = open_out(out, "centrality.csv");
        write_centrality_csv(labels, o);
    } else if (*tfp) {
        const auto cfg = tfp_opts.build();
        require(cfg.sea, "socio-economic accounts");
        require(cfg.deflators, "deflators");
        auto sea = read_sea_csv(cfg.sea);
        std::erase_if(sea, [&](const SeaRecord& r) { return r.year < cfg.first_year || r.year > cfg.last_year; });
        const auto result = tfp_stage(std::move(sea), Deflators::read_csv(cfg.deflators));
        auto o = open_out(out, "tfp.csv");
        write_tfp_csv(result.rows, o);
        auto s = open_out(out, "table1_tfp_summary.csv");
        write_tfp_summary(result.rows, s);
        for (const auto& d : result.diagnostics) std::cerr << d << '\n';
    } else if (*rdstock) {
        const auto cfg = rdstock_opts.build();
        require(cfg.rd, "R&D expenditure");
        require(cfg.deflators, "deflators");
        const auto stocks = rdstock_stage(read_rd_csv(cfg.rd), Deflators::read_csv(cfg.deflators), cfg);
        auto o = open_out(out, "rd_stock.csv");
        write_stock_csv(stocks, o);
        for (const auto& s : stocks) {
            for (const auto& d : s.diagnostics) std::cerr << d << '\n';
        }
    } else if (*content) {
        const auto cfg = content_opts.build();
        const auto result =
            content_stage(load_window(cfg), read_stock_csv(stocks_in), read_centrality_csv(labels_in), cfg);
        auto o = open_out(out, "regressors.csv");
        write_regressor_csv(result.regressors, o);
        write_shares(result.contents, cfg, out);
        for (const auto& d : result.diagnostics) std::cerr << d << '\n';
    } else if (*regress) {
        const auto cfg = regress_opts.build();
        auto plan = regression_plan(cfg);
        run_regressions(plan, read_regressor_csv(regressors_in), read_tfp_csv(tfp_in), cfg.workers);
        for (const auto& table : plan) {
            for (std::size_t c = 0; c < table.fits.size(); ++c) {
                auto o = open_out(out, table.name + "_col" + std::to_string(c + 1) + ".csv");
                write_fit_csv(table.fits[c], o);
            }
            auto o = open_out(out, table.name + ".txt");
            write_fit_table(table.title, table.fits, o);
            write_fit_table(table.title, table.fits, std::cout);
        }
    } else if (*synth) {
        write_economy(gen_economy(synth_cfg), out);
        std::cout << "wrote synthetic economy to " << out.string() << '\n';
    } else if (*pipeline) {
        const auto cfg = pipeline_opts.build();
        run_pipeline(cfg);
        std::cout << "artifacts in " << cfg.out_dir.string() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::kValidation);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
