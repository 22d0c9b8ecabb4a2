#ifndef TPPI_REPORT_HPP
#define TPPI_REPORT_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "tppi/alloc.hpp"
#include "tppi/analysis.hpp"
#include "tppi/regress.hpp"

namespace tppi::report {

enum class Format { Csv, Json };

/// Everything one pipeline run needs: input paths, model settings, policy
/// list, and output options. Loaded from a JSON config file; individual
/// command-line flags override single fields afterwards.
struct RunConfig {
    std::vector<std::string> birth_rates_paths;  // one or two statistics files
    std::string schools_path;

    double annual_budget = 3'940'000.0;
    std::vector<int> lag_set = {1, 2, 3, 4, 5};
    std::vector<regress::ArxConfig> arx_configs = analysis::default_arx_configs();
    regress::ArxConfig effect_config{2, 1, 1};  // drives effectiveness + simulation
    int prediction_lag = 2;                     // AR depth behind prediction_based
    std::vector<alloc::PolicyKind> policies = {
        alloc::PolicyKind::EqualPerSchool, alloc::PolicyKind::EqualPerStudent,
        alloc::PolicyKind::PredictionBased, alloc::PolicyKind::EffectivenessBased};
    analysis::WindowMode window = analysis::WindowMode::MaxData;

    std::string out_dir = "out";
    Format format = Format::Csv;
    bool plots = false;
};

/// Reads a JSON config file. Unknown keys and malformed values raise
/// ConfigError; a missing file raises IoError.
RunConfig load_config(const std::string& path);

/// "a..b" (inclusive) or a comma list; every lag must be >= 1.
std::vector<int> parse_lag_set(const std::string& text);
std::vector<alloc::PolicyKind> parse_policy_list(const std::string& text);
Format parse_format(const std::string& text);

std::string dataset_path(const RunConfig& config);
std::string models_path(const RunConfig& config);

/// Parses the input CSVs into per-area rate and grant series plus the
/// school list and writes one self-describing dataset bundle (JSON) to the
/// output directory, exclusion/interpolation notes included.
void cmd_ingest(const RunConfig& config, std::ostream& log);

/// Runs the AR lag sweep and the grant (ARX) sweep over the bundle, then
/// writes the ranking tables, the fitted models used downstream, and
/// (optionally) an SVG of the pooled-fit curves.
void cmd_analyze(const RunConfig& config, std::ostream& log);

/// Builds one funding plan per configured policy, simulates next-year
/// rates under each, and writes plan files plus the scenario report.
void cmd_allocate(const RunConfig& config, std::ostream& log);

}  // namespace tppi::report

#endif  // TPPI_REPORT_HPP
