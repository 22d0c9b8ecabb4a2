#ifndef TPPI_ANALYSIS_HPP
#define TPPI_ANALYSIS_HPP

#include <cstddef>
#include <map>
#include <vector>

#include "tppi/regress.hpp"
#include "tppi/series.hpp"

namespace tppi::analysis {

using regress::ArConfig;
using regress::ArxConfig;
using regress::RegressionFit;
using regress::RSquared;

/// Sample-window policy when sweeping several lag structures over the same
/// data. MaxData keeps every usable row per model, so deeper lags see fewer
/// rows; Aligned restricts every model to the target years feasible for the
/// deepest lag structure in the sweep, making fits comparable across depths
/// (and the pooled R² provably non-decreasing in depth).
enum class WindowMode { MaxData, Aligned };

struct AreaFitResult {
    int area_code = 0;
    RegressionFit fit;
    RSquared r2 = RSquared::undefined();  // from the fit's own fitted-vs-actual
};

/// One model configuration's results across all areas. Areas without enough
/// data are listed in skipped; areas whose own R² is undefined (constant
/// series) keep their fit but stay out of the overall pool.
struct SweepEntry {
    RSquared overall_r2 = RSquared::undefined();
    std::map<int, AreaFitResult> by_area;
    std::vector<int> skipped;
    int n_areas = 0;          // areas contributing to the pool
    long long n_samples = 0;  // pooled sample rows
};

/// Fits an AR(l) model per area for every l in lag_set. The overall R²
/// pools all pooled areas' (actual, fitted) pairs into one computation.
/// Throws EmptyDataset on an empty rates map.
std::map<int, SweepEntry> run_ar_sweep(const std::map<int, Series>& rates,
                                       const std::vector<int>& lag_set,
                                       WindowMode mode = WindowMode::MaxData);

/// Fits an ARX model per area for every lag structure in config_set, using
/// each area's overlap of rate and grant years. Areas missing a grant
/// series, sharing no years, or too short are skipped (listed).
/// Throws EmptyDataset when either map is empty.
std::map<ArxConfig, SweepEntry> run_arx_sweep(const std::map<int, Series>& rates,
                                              const std::map<int, Series>& grants,
                                              const std::vector<ArxConfig>& config_set,
                                              WindowMode mode = WindowMode::MaxData);

struct RankedArea {
    int area_code = 0;
    double r2 = 0.0;
};

/// Areas ordered by descending R²; undefined R² excluded; ties broken by
/// ascending area code; truncated to top_n.
std::vector<RankedArea> rank_by_r2(const SweepEntry& entry, std::size_t top_n);

struct EffectivenessEntry {
    int area_code = 0;
    double coefficient = 0.0;  // rate points per thousand grant dollars
    ArxConfig config;
};

/// Areas ordered by the first exogenous coefficient ascending, so the most
/// negative (grant most strongly associated with a falling rate) ranks
/// first; ties by area code; truncated to top_n.
std::vector<EffectivenessEntry> rank_effectiveness(const SweepEntry& entry,
                                                   const ArxConfig& config, std::size_t top_n);

/// Area codes placing in the effectiveness top_n under every configuration
/// of the sweep, ascending.
std::vector<int> stable_areas(const std::map<ArxConfig, SweepEntry>& sweeps, std::size_t top_n);

/// The four standard grant-analysis configurations: exogenous delay fixed
/// at 1, endogenous and exogenous lag counts each 1 or 2.
std::vector<ArxConfig> default_arx_configs();

}  // namespace tppi::analysis

#endif  // TPPI_ANALYSIS_HPP
