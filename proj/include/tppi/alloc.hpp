#ifndef TPPI_ALLOC_HPP
#define TPPI_ALLOC_HPP

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tppi/ingest.hpp"
#include "tppi/regress.hpp"
#include "tppi/series.hpp"

namespace tppi::alloc {

/// The four funding strategies: two policy-neutral (equal split over
/// schools or students) and two policy-focused (weights from fitted
/// models).
enum class PolicyKind { EqualPerSchool, EqualPerStudent, PredictionBased, EffectivenessBased };

std::string to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view name);

struct PolicySpec {
    PolicyKind kind = PolicyKind::EqualPerSchool;
    double budget = 0.0;  // dollars per year
    // EffectivenessBased only: when every coefficient is nonnegative, fall
    // back to EqualPerStudent instead of failing.
    bool allow_fallback = true;
};

/// One year's funding split. school_amounts always covers every school
/// (possibly with 0); area_amounts is its exact aggregation by area.
struct AllocationPlan {
    PolicySpec policy;
    int year = 0;  // latest enrollment year the split is based on
    std::map<std::string, double> school_amounts;
    std::map<int, double> area_amounts;
    bool used_fallback = false;
};

/// Model outputs the policy-focused strategies draw on.
struct AnalysisInputs {
    std::map<int, double> predicted_rates;  // next-year birth rate per area
    std::map<int, double> effectiveness;    // first grant coefficient per area
};

/// Latest-year enrollment summed per area (each school counted at the most
/// recent year it reports).
std::map<int, long long> latest_area_enrollment(const std::vector<ingest::SchoolRecord>& schools);

/// Splits the policy's budget over the given schools.
/// EqualPerSchool: budget / school count each.
/// EqualPerStudent: proportional to latest-year enrollment.
/// PredictionBased: area weight = max(0, predicted rate) x area enrollment,
/// split within the area by enrollment.
/// EffectivenessBased: area weight = max(0, -coefficient), so only areas
/// where grants reduce rates receive funds; split within area by enrollment.
/// Throws ConfigError (bad budget), EmptyDataset (no schools), MissingModel
/// (area lacking the needed model output), ZeroEnrollment, NoEligibleAreas
/// (all weights zero and fallback disabled).
AllocationPlan allocate(const PolicySpec& policy, const std::vector<ingest::SchoolRecord>& schools,
                        const AnalysisInputs& inputs);

/// A fitted grant-response model for one area.
struct AreaModel {
    regress::ArxConfig config;
    regress::RegressionFit fit;
};

/// Per-area next-year predictions: the historical baseline and one rate per
/// plan, plus the citywide enrollment-weighted means.
struct ScenarioReport {
    struct Area {
        int area_code = 0;
        double baseline = 0.0;
        std::vector<double> rates;   // parallel to plan_names
        std::vector<bool> floored;   // raw prediction was negative
        bool baseline_floored = false;
    };

    std::vector<std::string> plan_names;  // in input order
    std::vector<Area> areas;              // ascending area code
    double citywide_baseline = 0.0;
    std::vector<double> citywide_means;   // parallel to plan_names
};

/// Predicts each modeled area's next-year rate under every plan by
/// substituting the plan's area grant (in thousands) for the most recent
/// exogenous lag; the baseline uses the historical grant series unchanged.
/// Negative predictions are floored at 0 and flagged. Throws MissingModel
/// when a modeled area lacks the histories its lag structure needs.
ScenarioReport simulate(const std::vector<AllocationPlan>& plans,
                        const std::map<int, AreaModel>& models,
                        const std::map<int, Series>& rate_histories,
                        const std::map<int, Series>& grant_histories,
                        const std::map<int, long long>& area_enrollment);

struct PolicyOutcome {
    std::string plan_name;
    double citywide_mean = 0.0;
    int areas_led = 0;  // areas where this plan has the strictly-or-tied lowest rate,
                        // ties credited to the earliest plan in input order
};

/// Plans ordered by citywide mean predicted rate, lowest first; ties keep
/// input order. Requires at least two plans.
std::vector<PolicyOutcome> compare(const ScenarioReport& report);

}  // namespace tppi::alloc

#endif  // TPPI_ALLOC_HPP
