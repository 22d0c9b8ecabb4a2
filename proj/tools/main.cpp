#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tppi/errors.hpp"
#include "tppi/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Community birth-rate analysis and school grant allocation"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, lags, policies, format, out_dir, schools_path;
    std::vector<std::string> rates_paths;
    double budget = 0.0;
    bool plots = false;

    app.add_option("--config", config_path, "JSON run configuration file");
    app.add_option("--budget", budget, "Annual budget in dollars");
    app.add_option("--lags", lags, "Lag depths: a..b or a comma list");
    app.add_option("--policies", policies, "Comma-separated funding policies");
    app.add_option("--format", format, "Report format: csv or json");
    app.add_option("--out", out_dir, "Output directory");
    app.add_flag("--plots", plots, "Also write an SVG of the pooled-fit curves");

    auto* ingest_cmd = app.add_subcommand("ingest", "Parse input CSVs into a dataset bundle");
    ingest_cmd->add_option("--rates", rates_paths, "Birth-rate statistics CSV file(s)");
    ingest_cmd->add_option("--schools", schools_path, "School enrollment CSV file");
    app.add_subcommand("analyze", "Fit per-area models and write ranking reports");
    app.add_subcommand("allocate", "Build funding plans and simulate next-year rates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        tppi::report::RunConfig config;
        if (!config_path.empty()) {
            config = tppi::report::load_config(config_path);
        }
        if (app.count("--budget") > 0) config.annual_budget = budget;
        if (app.count("--lags") > 0) config.lag_set = tppi::report::parse_lag_set(lags);
        if (app.count("--policies") > 0) {
            config.policies = tppi::report::parse_policy_list(policies);
        }
        if (app.count("--format") > 0) config.format = tppi::report::parse_format(format);
        if (app.count("--out") > 0) config.out_dir = out_dir;
        if (plots) config.plots = true;
        if (ingest_cmd->count("--rates") > 0) config.birth_rates_paths = rates_paths;
        if (ingest_cmd->count("--schools") > 0) config.schools_path = schools_path;

        if (app.got_subcommand("ingest")) {
            tppi::report::cmd_ingest(config, std::cout);
        } else if (app.got_subcommand("analyze")) {
            tppi::report::cmd_analyze(config, std::cout);
        } else {
            tppi::report::cmd_allocate(config, std::cout);
        }
        return 0;
    } catch (const tppi::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const tppi::AnalysisError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
