#include "tppi/analysis.hpp"

#include <algorithm>
#include <iterator>
#include <set>
#include <stdexcept>
#include <utility>

#include "tppi/errors.hpp"

namespace tppi::analysis {

namespace {

using regress::DesignMatrix;

/// Computes the per-area R², records the result, and feeds the pooled
/// actual/fitted vectors when that R² is defined.
void absorb(SweepEntry& entry, int area, const DesignMatrix& design, RegressionFit fit,
            std::vector<double>& pooled_actual, std::vector<double>& pooled_fitted) {
    AreaFitResult result;
    result.area_code = area;
    result.fit = std::move(fit);

    const std::vector<double> actual(design.target.begin(), design.target.end());
    const std::vector<double> fitted(result.fit.fitted.begin(), result.fit.fitted.end());
    result.r2 = regress::r_squared(actual, fitted);

    if (result.r2.defined()) {
        pooled_actual.insert(pooled_actual.end(), actual.begin(), actual.end());
        pooled_fitted.insert(pooled_fitted.end(), fitted.begin(), fitted.end());
        entry.n_samples += result.fit.n_samples;
        ++entry.n_areas;
    }
    entry.by_area.emplace(area, std::move(result));
}

void finish(SweepEntry& entry, const std::vector<double>& pooled_actual,
            const std::vector<double>& pooled_fitted) {
    if (!pooled_actual.empty()) {
        entry.overall_r2 = regress::r_squared(pooled_actual, pooled_fitted);
    }
}

}  // namespace

std::map<int, SweepEntry> run_ar_sweep(const std::map<int, Series>& rates,
                                       const std::vector<int>& lag_set, WindowMode mode) {
    if (rates.empty()) {
        throw EmptyDataset("no rate series to fit");
    }
    if (lag_set.empty()) {
        throw std::invalid_argument("lag set must not be empty");
    }
    for (int lag : lag_set) {
        if (lag < 1) throw std::invalid_argument("lag depths must be positive");
    }
    const int deepest = *std::max_element(lag_set.begin(), lag_set.end());

    std::map<int, SweepEntry> out;
    for (const int lag : lag_set) {
        SweepEntry entry;
        std::vector<double> pooled_actual, pooled_fitted;
        for (const auto& [area, series] : rates) {
            DesignMatrix design;
            try {
                design = regress::build_ar_design(series, ArConfig{lag});
                if (mode == WindowMode::Aligned) {
                    design = regress::drop_targets_before(std::move(design),
                                                          series.start_year() + deepest);
                }
            } catch (const SeriesTooShort&) {
                entry.skipped.push_back(area);
                continue;
            }
            absorb(entry, area, design, regress::fit_design(design, lag, 0), pooled_actual,
                   pooled_fitted);
        }
        finish(entry, pooled_actual, pooled_fitted);
        out.emplace(lag, std::move(entry));
    }
    return out;
}

std::map<ArxConfig, SweepEntry> run_arx_sweep(const std::map<int, Series>& rates,
                                              const std::map<int, Series>& grants,
                                              const std::vector<ArxConfig>& config_set,
                                              WindowMode mode) {
    if (rates.empty()) {
        throw EmptyDataset("no rate series to fit");
    }
    if (grants.empty()) {
        throw EmptyDataset("no grant series to fit against");
    }
    if (config_set.empty()) {
        throw std::invalid_argument("configuration set must not be empty");
    }
    int deepest = 0;
    for (const auto& cfg : config_set) {
        if (cfg.endo_lags < 1 || cfg.exo_delay < 1 || cfg.exo_lags < 1) {
            throw std::invalid_argument("lag structure fields must be positive");
        }
        deepest = std::max({deepest, cfg.endo_lags, cfg.exo_delay + cfg.exo_lags - 1});
    }

    std::map<ArxConfig, SweepEntry> out;
    for (const auto& cfg : config_set) {
        SweepEntry entry;
        std::vector<double> pooled_actual, pooled_fitted;
        for (const auto& [area, series] : rates) {
            const auto grant_it = grants.find(area);
            if (grant_it == grants.end()) {
                entry.skipped.push_back(area);
                continue;
            }
            DesignMatrix design;
            try {
                design = regress::build_arx_design(series, grant_it->second, cfg);
                if (mode == WindowMode::Aligned) {
                    const int overlap_start =
                        std::max(series.start_year(), grant_it->second.start_year());
                    design = regress::drop_targets_before(std::move(design),
                                                          overlap_start + deepest);
                }
            } catch (const SeriesTooShort&) {
                entry.skipped.push_back(area);
                continue;
            } catch (const YearMisalignment&) {
                entry.skipped.push_back(area);
                continue;
            }
            absorb(entry, area, design,
                   regress::fit_design(design, cfg.endo_lags, cfg.exo_lags), pooled_actual,
                   pooled_fitted);
        }
        finish(entry, pooled_actual, pooled_fitted);
        out.emplace(cfg, std::move(entry));
    }
    return out;
}

std::vector<RankedArea> rank_by_r2(const SweepEntry& entry, std::size_t top_n) {
    std::vector<RankedArea> ranked;
    for (const auto& [area, result] : entry.by_area) {
        if (result.r2.defined()) {
            ranked.push_back({area, result.r2.value()});
        }
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedArea& a, const RankedArea& b) {
        if (a.r2 != b.r2) return a.r2 > b.r2;
        return a.area_code < b.area_code;
    });
    if (ranked.size() > top_n) ranked.resize(top_n);
    return ranked;
}

std::vector<EffectivenessEntry> rank_effectiveness(const SweepEntry& entry,
                                                   const ArxConfig& config, std::size_t top_n) {
    std::vector<EffectivenessEntry> ranked;
    for (const auto& [area, result] : entry.by_area) {
        if (result.fit.exo_coeffs.size() == 0) {
            throw std::invalid_argument("effectiveness ranking needs fits with a grant term");
        }
        ranked.push_back({area, result.fit.exo_coeffs(0), config});
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const EffectivenessEntry& a, const EffectivenessEntry& b) {
                  if (a.coefficient != b.coefficient) return a.coefficient < b.coefficient;
                  return a.area_code < b.area_code;
              });
    if (ranked.size() > top_n) ranked.resize(top_n);
    return ranked;
}

std::vector<int> stable_areas(const std::map<ArxConfig, SweepEntry>& sweeps, std::size_t top_n) {
    std::set<int> common;
    bool first = true;
    for (const auto& [cfg, entry] : sweeps) {
        std::set<int> here;
        for (const auto& e : rank_effectiveness(entry, cfg, top_n)) {
            here.insert(e.area_code);
        }
        if (first) {
            common = std::move(here);
            first = false;
        } else {
            std::set<int> kept;
            std::set_intersection(common.begin(), common.end(), here.begin(), here.end(),
                                  std::inserter(kept, kept.begin()));
            common = std::move(kept);
        }
    }
    return {common.begin(), common.end()};
}

std::vector<ArxConfig> default_arx_configs() {
    return {{1, 1, 1}, {2, 1, 1}, {1, 1, 2}, {2, 1, 2}};
}

}  // namespace tppi::analysis
