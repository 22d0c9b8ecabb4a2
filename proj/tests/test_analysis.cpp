#include "tppi/analysis.hpp"

#include <random>
#include <set>

#include "doctest.h"
#include "support/synth.hpp"
#include "tppi/errors.hpp"

using namespace tppi;
using namespace tppi::analysis;

namespace {

std::map<int, Series> ar2_dataset(int n_areas, int length, double noise_sd = 0.0,
                                  unsigned seed = 7) {
    std::mt19937 rng(seed);
    std::map<int, Series> out;
    for (int area = 1; area <= n_areas; ++area) {
        const auto w = synth::stable_coeffs(2, rng);
        const auto init = synth::random_values(2, rng, 20.0, 80.0);
        out.emplace(area, synth::ar_series(w, init, 1999, length,
                                           noise_sd > 0.0 ? &rng : nullptr, noise_sd));
    }
    return out;
}

AreaFitResult fake_r2_result(int area, RSquared r2) {
    AreaFitResult r;
    r.area_code = area;
    r.r2 = r2;
    return r;
}

AreaFitResult fake_effect_result(int area, double b1) {
    AreaFitResult r;
    r.area_code = area;
    r.fit.exo_coeffs = Eigen::VectorXd::Constant(1, b1);
    r.r2 = RSquared::of(1.0);
    return r;
}

}  // namespace

TEST_CASE("noise-free AR(2) areas give a perfect pooled fit from lag 2 up") {
    const auto rates = ar2_dataset(8, 16);
    const auto sweep = run_ar_sweep(rates, {1, 2, 3, 4, 5});
    REQUIRE(sweep.size() == 5);
    for (int lag = 2; lag <= 5; ++lag) {
        const SweepEntry& e = sweep.at(lag);
        REQUIRE(e.overall_r2.defined());
        CHECK(e.overall_r2.value() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(e.n_areas == 8);
        CHECK(e.n_samples == 8 * (16 - lag));
        CHECK(e.skipped.empty());
        for (const auto& [area, result] : e.by_area) {
            CHECK(result.r2.value() == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    REQUIRE(sweep.at(1).overall_r2.defined());
    CHECK(sweep.at(1).overall_r2.value() < 1.0);
}

TEST_CASE("a constant-series area keeps its fit but stays out of the pool") {
    std::map<int, Series> rates;
    rates.emplace(3, Series(2000, {5.0, 5.0, 5.0, 5.0, 5.0, 5.0}));
    rates.emplace(9, synth::ar_series({0.8}, {40.0}, 2000, 6));

    const auto sweep = run_ar_sweep(rates, {1});
    const SweepEntry& e = sweep.at(1);
    REQUIRE(e.by_area.size() == 2);
    CHECK_FALSE(e.by_area.at(3).r2.defined());
    CHECK(e.by_area.at(9).r2.value() == doctest::Approx(1.0));
    CHECK(e.n_areas == 1);
    CHECK(e.n_samples == 5);
    CHECK(e.skipped.empty());
    CHECK(e.overall_r2.value() == doctest::Approx(1.0));
}

TEST_CASE("areas with too little history are skipped and listed") {
    std::map<int, Series> rates;
    rates.emplace(1, synth::ar_series({0.8}, {40.0}, 2000, 12));
    rates.emplace(2, Series(2010, {10.0, 11.0, 12.0}));

    const auto sweep = run_ar_sweep(rates, {5});
    const SweepEntry& e = sweep.at(5);
    CHECK(e.by_area.count(1) == 1);
    CHECK(e.by_area.count(2) == 0);
    REQUIRE(e.skipped.size() == 1);
    CHECK(e.skipped[0] == 2);
}

TEST_CASE("sweeps reject empty inputs") {
    CHECK_THROWS_AS(run_ar_sweep({}, {1}), EmptyDataset);
    std::map<int, Series> rates;
    rates.emplace(1, synth::ar_series({0.8}, {40.0}, 2000, 8));
    CHECK_THROWS_AS(run_ar_sweep(rates, {}), std::invalid_argument);
    CHECK_THROWS_AS(run_ar_sweep(rates, {0}), std::invalid_argument);
    CHECK_THROWS_AS(run_arx_sweep(rates, {}, default_arx_configs()), EmptyDataset);
    CHECK_THROWS_AS(run_arx_sweep({}, rates, default_arx_configs()), EmptyDataset);
    CHECK_THROWS_AS(run_arx_sweep(rates, rates, {}), std::invalid_argument);
}

TEST_CASE("aligned windows make the pooled fit non-decreasing in lag depth") {
    const auto rates = ar2_dataset(10, 14, 2.0, 42);
    const auto sweep = run_ar_sweep(rates, {1, 2, 3, 4, 5}, WindowMode::Aligned);

    double previous = -1e300;
    long long samples = -1;
    for (int lag = 1; lag <= 5; ++lag) {
        const SweepEntry& e = sweep.at(lag);
        REQUIRE(e.overall_r2.defined());
        CHECK(e.overall_r2.value() >= previous - 1e-12);
        previous = e.overall_r2.value();
        if (samples < 0) samples = e.n_samples;
        CHECK(e.n_samples == samples);  // same window for every depth
    }
}

TEST_CASE("aligned windows make per-area residuals non-increasing in lag depth") {
    const auto rates = ar2_dataset(6, 12, 1.5, 99);
    const auto sweep = run_ar_sweep(rates, {1, 2, 3}, WindowMode::Aligned);
    for (const auto& [area, base] : sweep.at(1).by_area) {
        double previous = base.fit.residuals.squaredNorm();
        for (int lag = 2; lag <= 3; ++lag) {
            const double now = sweep.at(lag).by_area.at(area).fit.residuals.squaredNorm();
            CHECK(now <= previous + 1e-9 * (1.0 + previous));
            previous = now;
        }
    }
}

TEST_CASE("pooled fit quality does not depend on area ordering") {
    const auto rates = ar2_dataset(7, 13, 1.0, 5);
    std::map<int, Series> relabeled;
    for (const auto& [area, series] : rates) {
        relabeled.emplace(100 - area, series);
    }
    const auto a = run_ar_sweep(rates, {2});
    const auto b = run_ar_sweep(relabeled, {2});
    CHECK(a.at(2).overall_r2.value() ==
          doctest::Approx(b.at(2).overall_r2.value()).epsilon(1e-12));
    CHECK(a.at(2).n_samples == b.at(2).n_samples);
}

TEST_CASE("r2 ranking sorts descending with area-code tie break") {
    SweepEntry entry;
    entry.by_area.emplace(3, fake_r2_result(3, RSquared::of(0.5)));
    entry.by_area.emplace(7, fake_r2_result(7, RSquared::of(0.9)));
    entry.by_area.emplace(1, fake_r2_result(1, RSquared::of(0.5)));

    const auto ranked = rank_by_r2(entry, 10);
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].area_code == 7);
    CHECK(ranked[1].area_code == 1);
    CHECK(ranked[2].area_code == 3);

    const auto top2 = rank_by_r2(entry, 2);
    REQUIRE(top2.size() == 2);
    CHECK(top2[1].area_code == 1);
}

TEST_CASE("undefined R2 never appears in a ranking") {
    SweepEntry entry;
    entry.by_area.emplace(4, fake_r2_result(4, RSquared::undefined()));
    entry.by_area.emplace(5, fake_r2_result(5, RSquared::undefined()));
    CHECK(rank_by_r2(entry, 10).empty());

    entry.by_area.emplace(6, fake_r2_result(6, RSquared::of(0.3)));
    const auto ranked = rank_by_r2(entry, 10);
    REQUIRE(ranked.size() == 1);
    CHECK(ranked[0].area_code == 6);
}

TEST_CASE("every eligible area appears exactly once before truncation") {
    const auto rates = ar2_dataset(9, 12, 0.5, 11);
    const auto sweep = run_ar_sweep(rates, {2});
    const auto ranked = rank_by_r2(sweep.at(2), 1000);
    CHECK(ranked.size() == sweep.at(2).by_area.size());
    std::set<int> seen;
    for (const auto& r : ranked) seen.insert(r.area_code);
    CHECK(seen.size() == ranked.size());
}

TEST_CASE("effectiveness ranking puts the most negative coefficient first") {
    SweepEntry entry;
    entry.by_area.emplace(11, fake_effect_result(11, -0.5));
    entry.by_area.emplace(12, fake_effect_result(12, -5.9));
    entry.by_area.emplace(13, fake_effect_result(13, 0.2));

    const ArxConfig cfg{2, 1, 1};
    const auto ranked = rank_effectiveness(entry, cfg, 10);
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].area_code == 12);
    CHECK(ranked[1].area_code == 11);
    CHECK(ranked[2].area_code == 13);
    CHECK(ranked[0].coefficient == doctest::Approx(-5.9));
    CHECK(ranked[0].config == cfg);
}

TEST_CASE("all-zero coefficients rank in stable area-code order") {
    SweepEntry entry;
    for (int area : {9, 2, 31}) entry.by_area.emplace(area, fake_effect_result(area, 0.0));
    const auto ranked = rank_effectiveness(entry, ArxConfig{1, 1, 1}, 10);
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].area_code == 2);
    CHECK(ranked[1].area_code == 9);
    CHECK(ranked[2].area_code == 31);
}

TEST_CASE("effectiveness ranking rejects grant-free fits") {
    SweepEntry entry;
    entry.by_area.emplace(1, fake_r2_result(1, RSquared::of(0.5)));
    CHECK_THROWS_AS(rank_effectiveness(entry, ArxConfig{1, 1, 1}, 10), std::invalid_argument);
}

TEST_CASE("noise-free grant-driven areas give a perfect pooled fit") {
    std::mt19937 rng(123);
    std::map<int, Series> rates, grants;
    for (int area = 1; area <= 6; ++area) {
        Series grant(2010, synth::random_values(5, rng, 10.0, 120.0));
        const double w = 0.4 + 0.05 * area;
        const double b = -0.2 - 0.03 * area;
        rates.emplace(area, synth::arx_series({w}, {b}, 1, grant,
                                              synth::random_values(1, rng, 30.0, 60.0), 2010,
                                              2014));
        grants.emplace(area, std::move(grant));
    }
    const auto sweep = run_arx_sweep(rates, grants, {{1, 1, 1}});
    const SweepEntry& e = sweep.at({1, 1, 1});
    REQUIRE(e.overall_r2.defined());
    CHECK(e.overall_r2.value() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.n_areas == 6);
    CHECK(e.n_samples == 6 * 4);
}

TEST_CASE("five overlap years saturate configurations with enough parameters") {
    std::mt19937 rng(321);
    std::map<int, Series> rates, grants;
    for (int area = 1; area <= 5; ++area) {
        rates.emplace(area, Series(1999, synth::random_values(16, rng, 20.0, 90.0)));
        grants.emplace(area, Series(2010, synth::random_values(5, rng, 5.0, 150.0)));
    }
    const auto sweep = run_arx_sweep(rates, grants, default_arx_configs());
    // ⟨l=2,v=2⟩ over a five-year overlap: 3 samples, 4 parameters per area.
    const SweepEntry& e = sweep.at({2, 1, 2});
    REQUIRE(e.overall_r2.defined());
    CHECK(e.overall_r2.value() >= 0.999);
    for (const auto& [area, result] : e.by_area) {
        CHECK(result.fit.n_samples == 3);
        CHECK(result.fit.n_params == 4);
    }
}

TEST_CASE("areas without grants or without shared years are skipped") {
    std::mt19937 rng(55);
    std::map<int, Series> rates, grants;
    rates.emplace(1, Series(1999, synth::random_values(16, rng, 20.0, 90.0)));
    rates.emplace(2, Series(1999, synth::random_values(7, rng, 20.0, 90.0)));  // ends 2005
    rates.emplace(3, Series(1999, synth::random_values(16, rng, 20.0, 90.0)));
    grants.emplace(1, Series(2010, synth::random_values(5, rng, 5.0, 150.0)));
    grants.emplace(2, Series(2010, synth::random_values(5, rng, 5.0, 150.0)));

    const auto sweep = run_arx_sweep(rates, grants, {{1, 1, 1}});
    const SweepEntry& e = sweep.at({1, 1, 1});
    CHECK(e.by_area.size() == 1);
    CHECK(e.by_area.count(1) == 1);
    REQUIRE(e.skipped.size() == 2);
    CHECK(e.skipped[0] == 2);  // no shared years
    CHECK(e.skipped[1] == 3);  // no grant series
}

TEST_CASE("stable areas are those ranking high under every configuration") {
    std::map<ArxConfig, SweepEntry> sweeps;
    SweepEntry first;
    first.by_area.emplace(5, fake_effect_result(5, -9.0));
    first.by_area.emplace(6, fake_effect_result(6, -8.0));
    first.by_area.emplace(7, fake_effect_result(7, -1.0));
    SweepEntry second;
    second.by_area.emplace(5, fake_effect_result(5, -9.0));
    second.by_area.emplace(6, fake_effect_result(6, -0.5));
    second.by_area.emplace(7, fake_effect_result(7, -8.0));
    sweeps.emplace(ArxConfig{1, 1, 1}, std::move(first));
    sweeps.emplace(ArxConfig{2, 1, 1}, std::move(second));

    const auto stable = stable_areas(sweeps, 2);
    REQUIRE(stable.size() == 1);
    CHECK(stable[0] == 5);
    CHECK(stable_areas({}, 2).empty());
    CHECK(stable_areas(sweeps, 3) == std::vector<int>{5, 6, 7});
}

TEST_CASE("the default grant configurations fix the delay at one") {
    const auto configs = default_arx_configs();
    REQUIRE(configs.size() == 4);
    for (const auto& cfg : configs) {
        CHECK(cfg.exo_delay == 1);
        CHECK(cfg.endo_lags >= 1);
        CHECK(cfg.endo_lags <= 2);
        CHECK(cfg.exo_lags >= 1);
        CHECK(cfg.exo_lags <= 2);
    }
}
