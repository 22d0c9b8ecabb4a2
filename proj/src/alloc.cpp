#include "tppi/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "tppi/errors.hpp"

namespace tppi::alloc {

namespace {

long long latest_enrollment(const ingest::SchoolRecord& school) {
    if (school.enrollment_by_year.empty()) return 0;
    return school.enrollment_by_year.rbegin()->second;
}

/// budget x enrollment share for every school. Total enrollment must be
/// positive.
std::map<std::string, double> per_student_split(
    const std::vector<ingest::SchoolRecord>& schools, double budget) {
    long long total = 0;
    for (const auto& s : schools) total += latest_enrollment(s);
    if (total <= 0) {
        throw ZeroEnrollment("no students enrolled in the latest year");
    }
    std::map<std::string, double> amounts;
    for (const auto& s : schools) {
        amounts[s.school_id] =
            budget * static_cast<double>(latest_enrollment(s)) / static_cast<double>(total);
    }
    return amounts;
}

/// Splits per-area amounts over each area's schools in proportion to
/// enrollment. Weights must be zero for areas without students.
std::map<std::string, double> weighted_area_split(
    const std::vector<ingest::SchoolRecord>& schools, double budget,
    const std::map<int, double>& weights, const std::map<int, long long>& area_enrollment) {
    double total_weight = 0.0;
    for (const auto& [area, w] : weights) total_weight += w;
    if (total_weight <= 0.0) {
        throw NoEligibleAreas("every area weight is zero");
    }
    std::map<std::string, double> amounts;
    for (const auto& s : schools) {
        const double w = weights.at(s.area_code);
        if (w <= 0.0) {
            amounts[s.school_id] = 0.0;
            continue;
        }
        const double area_amount = budget * w / total_weight;
        const long long enrolled = area_enrollment.at(s.area_code);
        amounts[s.school_id] = area_amount * static_cast<double>(latest_enrollment(s)) /
                               static_cast<double>(enrolled);
    }
    return amounts;
}

double model_output(const std::map<int, double>& outputs, int area, const char* what) {
    const auto it = outputs.find(area);
    if (it == outputs.end()) {
        throw MissingModel(std::string("no ") + what + " for area " + std::to_string(area));
    }
    return it->second;
}

}  // namespace

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::EqualPerSchool: return "equal_per_school";
        case PolicyKind::EqualPerStudent: return "equal_per_student";
        case PolicyKind::PredictionBased: return "prediction_based";
        case PolicyKind::EffectivenessBased: return "effectiveness_based";
    }
    throw std::logic_error("unknown policy kind");
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
    if (name == "equal_per_school") return PolicyKind::EqualPerSchool;
    if (name == "equal_per_student") return PolicyKind::EqualPerStudent;
    if (name == "prediction_based") return PolicyKind::PredictionBased;
    if (name == "effectiveness_based") return PolicyKind::EffectivenessBased;
    return std::nullopt;
}

std::map<int, long long> latest_area_enrollment(
    const std::vector<ingest::SchoolRecord>& schools) {
    std::map<int, long long> out;
    for (const auto& s : schools) out[s.area_code] += latest_enrollment(s);
    return out;
}

AllocationPlan allocate(const PolicySpec& policy,
                        const std::vector<ingest::SchoolRecord>& schools,
                        const AnalysisInputs& inputs) {
    if (!(policy.budget > 0.0) || !std::isfinite(policy.budget)) {
        throw ConfigError("budget must be a positive dollar amount");
    }
    if (schools.empty()) {
        throw EmptyDataset("no schools to fund");
    }

    AllocationPlan plan;
    plan.policy = policy;
    for (const auto& s : schools) {
        if (!s.enrollment_by_year.empty()) {
            plan.year = std::max(plan.year, s.enrollment_by_year.rbegin()->first);
        }
    }

    const auto area_enrollment = latest_area_enrollment(schools);

    switch (policy.kind) {
        case PolicyKind::EqualPerSchool: {
            const double each = policy.budget / static_cast<double>(schools.size());
            for (const auto& s : schools) plan.school_amounts[s.school_id] = each;
            break;
        }
        case PolicyKind::EqualPerStudent: {
            plan.school_amounts = per_student_split(schools, policy.budget);
            break;
        }
        case PolicyKind::PredictionBased: {
            std::map<int, double> weights;
            for (const auto& [area, enrolled] : area_enrollment) {
                const double rate = model_output(inputs.predicted_rates, area, "predicted rate");
                weights[area] = std::max(0.0, rate) * static_cast<double>(enrolled);
            }
            plan.school_amounts =
                weighted_area_split(schools, policy.budget, weights, area_enrollment);
            break;
        }
        case PolicyKind::EffectivenessBased: {
            std::map<int, double> weights;
            double total = 0.0;
            for (const auto& [area, enrolled] : area_enrollment) {
                const double coeff = model_output(inputs.effectiveness, area, "grant coefficient");
                const double w = enrolled > 0 ? std::max(0.0, -coeff) : 0.0;
                weights[area] = w;
                total += w;
            }
            if (total <= 0.0 && policy.allow_fallback) {
                plan.school_amounts = per_student_split(schools, policy.budget);
                plan.used_fallback = true;
            } else {
                plan.school_amounts =
                    weighted_area_split(schools, policy.budget, weights, area_enrollment);
            }
            break;
        }
    }

    for (const auto& s : schools) {
        plan.area_amounts[s.area_code] += plan.school_amounts.at(s.school_id);
    }
    return plan;
}

ScenarioReport simulate(const std::vector<AllocationPlan>& plans,
                        const std::map<int, AreaModel>& models,
                        const std::map<int, Series>& rate_histories,
                        const std::map<int, Series>& grant_histories,
                        const std::map<int, long long>& area_enrollment) {
    if (models.empty()) {
        throw MissingModel("no fitted grant-response models");
    }

    ScenarioReport report;
    for (const auto& plan : plans) report.plan_names.push_back(to_string(plan.policy.kind));

    double total_enrolled = 0.0;
    double baseline_sum = 0.0;
    std::vector<double> plan_sums(plans.size(), 0.0);

    for (const auto& [area, model] : models) {
        const auto rate_it = rate_histories.find(area);
        const auto grant_it = grant_histories.find(area);
        if (rate_it == rate_histories.end() || grant_it == grant_histories.end()) {
            throw MissingModel("area " + std::to_string(area) + " has a model but no history");
        }
        const Series& rates = rate_it->second;
        const Series& grants = grant_it->second;
        const auto& cfg = model.config;

        const int target_year = rates.end_year() + 1;
        const int substituted_year = target_year - cfg.exo_delay;
        const int earliest_needed = target_year - cfg.exo_delay - cfg.exo_lags + 1;
        if (!grants.covers(substituted_year) || !grants.covers(earliest_needed)) {
            throw MissingModel("area " + std::to_string(area) +
                               " lacks grant history for year " +
                               std::to_string(substituted_year));
        }

        ScenarioReport::Area row;
        row.area_code = area;

        const double raw_baseline = regress::predict_next(model.fit, rates, grants, cfg);
        row.baseline_floored = raw_baseline < 0.0;
        row.baseline = std::max(0.0, raw_baseline);

        for (std::size_t p = 0; p < plans.size(); ++p) {
            const auto amount_it = plans[p].area_amounts.find(area);
            const double dollars =
                amount_it == plans[p].area_amounts.end() ? 0.0 : amount_it->second;
            const Series adjusted = grants.with_value_at(substituted_year, dollars / 1000.0);
            const double raw = regress::predict_next(model.fit, rates, adjusted, cfg);
            row.floored.push_back(raw < 0.0);
            row.rates.push_back(std::max(0.0, raw));
        }

        const auto enr_it = area_enrollment.find(area);
        const double enrolled =
            enr_it == area_enrollment.end() ? 0.0 : static_cast<double>(enr_it->second);
        total_enrolled += enrolled;
        baseline_sum += enrolled * row.baseline;
        for (std::size_t p = 0; p < plans.size(); ++p) plan_sums[p] += enrolled * row.rates[p];

        report.areas.push_back(std::move(row));
    }

    if (total_enrolled <= 0.0) {
        throw ZeroEnrollment("modeled areas have no enrolled students to weight by");
    }
    report.citywide_baseline = baseline_sum / total_enrolled;
    for (double s : plan_sums) report.citywide_means.push_back(s / total_enrolled);
    return report;
}

std::vector<PolicyOutcome> compare(const ScenarioReport& report) {
    if (report.plan_names.size() < 2) {
        throw std::invalid_argument("comparison needs at least two plans");
    }

    std::vector<PolicyOutcome> outcomes;
    for (std::size_t p = 0; p < report.plan_names.size(); ++p) {
        outcomes.push_back({report.plan_names[p], report.citywide_means[p], 0});
    }
    for (const auto& area : report.areas) {
        std::size_t best = 0;
        for (std::size_t p = 1; p < area.rates.size(); ++p) {
            if (area.rates[p] < area.rates[best]) best = p;
        }
        ++outcomes[best].areas_led;
    }
    std::stable_sort(outcomes.begin(), outcomes.end(),
                     [](const PolicyOutcome& a, const PolicyOutcome& b) {
                         return a.citywide_mean < b.citywide_mean;
                     });
    return outcomes;
}

}  // namespace tppi::alloc
