#include "tppi/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "tppi/csv.hpp"
#include "tppi/errors.hpp"

namespace tppi::ingest {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

/// Maps required column names to their positions; SchemaError on missing or
/// duplicated names. Extra columns are tolerated and ignored.
std::map<std::string, std::size_t> index_header(const std::vector<std::string>& header,
                                                const std::vector<std::string>& required) {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name = trim(header[i]);
        if (pos.count(name)) {
            throw SchemaError("duplicate column '" + name + "' in header");
        }
        pos[name] = i;
    }
    for (const auto& name : required) {
        if (!pos.count(name)) {
            throw SchemaError("missing column '" + name + "' in header");
        }
    }
    return pos;
}

long long parse_int(std::size_t row, const std::string& column, const std::string& raw,
                    long long min_value, long long max_value) {
    const std::string s = trim(raw);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ParseError(row, column, "'" + raw + "' is not an integer");
    }
    if (value < min_value || value > max_value) {
        throw ParseError(row, column, "value " + std::to_string(value) + " out of range " +
                                          std::to_string(min_value) + ".." +
                                          std::to_string(max_value));
    }
    return value;
}

double parse_real(std::size_t row, const std::string& column, const std::string& raw,
                  double min_value) {
    const std::string s = trim(raw);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ParseError(row, column, "'" + raw + "' is not a number");
    }
    if (!std::isfinite(value)) {
        throw ParseError(row, column, "value must be finite");
    }
    if (value < min_value) {
        throw ParseError(row, column, "value " + std::to_string(value) + " must be >= " +
                                          std::to_string(min_value));
    }
    return value;
}

std::optional<double> parse_optional_real(std::size_t row, const std::string& column,
                                          const std::string& raw, double min_value) {
    if (trim(raw).empty()) return std::nullopt;
    return parse_real(row, column, raw, min_value);
}

const std::string& field_at(const std::vector<std::string>& fields, std::size_t index) {
    static const std::string empty;
    return index < fields.size() ? fields[index] : empty;
}

void require_width(std::size_t row, const std::vector<std::string>& fields,
                   std::size_t expected) {
    if (fields.size() != expected) {
        throw ParseError(row, "(row)", "expected " + std::to_string(expected) + " fields, got " +
                                           std::to_string(fields.size()));
    }
}

}  // namespace

std::vector<BirthRateRecord> parse_birth_rates(std::istream& in) {
    static const std::vector<std::string> kColumns = {
        "area_code", "area_name",     "year",         "teen_births",
        "birth_rate", "rate_ci_lower", "rate_ci_upper"};

    csv::Reader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) {
        throw SchemaError("empty file: no header row");
    }
    const auto pos = index_header(fields, kColumns);

    std::vector<BirthRateRecord> records;
    while (reader.next(fields)) {
        const std::size_t row = reader.row_number();
        require_width(row, fields, pos.size());

        BirthRateRecord rec;
        rec.area_code = static_cast<int>(parse_int(row, "area_code",
                                                   field_at(fields, pos.at("area_code")),
                                                   kMinAreaCode, kMaxAreaCode));
        rec.area_name = trim(field_at(fields, pos.at("area_name")));
        rec.year = static_cast<int>(parse_int(row, "year", field_at(fields, pos.at("year")),
                                              kFirstRateYear, kLastRateYear));

        const std::string births_raw = trim(field_at(fields, pos.at("teen_births")));
        if (!births_raw.empty()) {
            rec.teen_births = parse_int(row, "teen_births", births_raw, 0,
                                        std::numeric_limits<long long>::max());
        }
        rec.birth_rate =
            parse_optional_real(row, "birth_rate", field_at(fields, pos.at("birth_rate")), 0.0);
        rec.rate_ci_lower = parse_optional_real(row, "rate_ci_lower",
                                                field_at(fields, pos.at("rate_ci_lower")), 0.0);
        rec.rate_ci_upper = parse_optional_real(row, "rate_ci_upper",
                                                field_at(fields, pos.at("rate_ci_upper")), 0.0);

        if (rec.birth_rate && rec.rate_ci_lower && rec.rate_ci_upper) {
            if (!(*rec.rate_ci_lower <= *rec.birth_rate && *rec.birth_rate <= *rec.rate_ci_upper)) {
                throw ParseError(row, "rate_ci_lower",
                                 "confidence interval does not bracket the rate");
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<SchoolRecord> parse_schools(std::istream& in) {
    static const std::vector<std::string> kColumns = {"school_id", "school_name", "area_code",
                                                      "year", "enrollment"};

    csv::Reader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) {
        throw SchemaError("empty file: no header row");
    }
    const auto pos = index_header(fields, kColumns);

    std::map<std::string, SchoolRecord> by_id;
    while (reader.next(fields)) {
        const std::size_t row = reader.row_number();
        require_width(row, fields, pos.size());

        const std::string id = trim(field_at(fields, pos.at("school_id")));
        if (id.empty()) {
            throw ParseError(row, "school_id", "school id must not be empty");
        }
        const std::string name = trim(field_at(fields, pos.at("school_name")));
        const int area = static_cast<int>(parse_int(
            row, "area_code", field_at(fields, pos.at("area_code")), kMinAreaCode, kMaxAreaCode));
        const int year = static_cast<int>(parse_int(row, "year", field_at(fields, pos.at("year")),
                                                    kFirstSchoolYear, kLastSchoolYear));
        const long long enrollment =
            parse_int(row, "enrollment", field_at(fields, pos.at("enrollment")), 0,
                      std::numeric_limits<long long>::max());

        auto [it, inserted] = by_id.try_emplace(id);
        SchoolRecord& rec = it->second;
        if (inserted) {
            rec.school_id = id;
            rec.name = name;
            rec.area_code = area;
        } else {
            if (rec.name != name || rec.area_code != area) {
                throw SchemaError("school '" + id + "' appears with conflicting name or area (row " +
                                  std::to_string(row) + ")");
            }
            if (rec.enrollment_by_year.count(year)) {
                throw SchemaError("duplicate school-year " + id + "/" + std::to_string(year) +
                                  " (row " + std::to_string(row) + ")");
            }
        }
        rec.enrollment_by_year[year] = enrollment;
    }

    std::vector<SchoolRecord> out;
    out.reserve(by_id.size());
    for (auto& [id, rec] : by_id) out.push_back(std::move(rec));
    return out;
}

void write_birth_rates(std::ostream& out, const std::vector<BirthRateRecord>& records) {
    std::vector<const BirthRateRecord*> sorted;
    sorted.reserve(records.size());
    for (const auto& r : records) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
        return std::tie(a->area_code, a->year) < std::tie(b->area_code, b->year);
    });

    csv::write_row(out, {"area_code", "area_name", "year", "teen_births", "birth_rate",
                         "rate_ci_lower", "rate_ci_upper"});
    for (const auto* r : sorted) {
        auto opt_real = [](const std::optional<double>& v) {
            return v ? csv::format_double(*v) : std::string();
        };
        csv::write_row(out, {std::to_string(r->area_code), r->area_name, std::to_string(r->year),
                             r->teen_births ? std::to_string(*r->teen_births) : std::string(),
                             opt_real(r->birth_rate), opt_real(r->rate_ci_lower),
                             opt_real(r->rate_ci_upper)});
    }
}

void write_schools(std::ostream& out, const std::vector<SchoolRecord>& schools) {
    csv::write_row(out, {"school_id", "school_name", "area_code", "year", "enrollment"});
    std::vector<const SchoolRecord*> sorted;
    sorted.reserve(schools.size());
    for (const auto& s : schools) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->school_id < b->school_id; });
    for (const auto* s : sorted) {
        for (const auto& [year, enrollment] : s->enrollment_by_year) {
            csv::write_row(out, {s->school_id, s->name, std::to_string(s->area_code),
                                 std::to_string(year), std::to_string(enrollment)});
        }
    }
}

std::vector<BirthRateRecord> merge_birth_records(const std::vector<BirthRateRecord>& a,
                                                 const std::vector<BirthRateRecord>& b) {
    std::map<std::pair<int, int>, BirthRateRecord> merged;
    auto add = [&merged](const BirthRateRecord& rec) {
        const auto key = std::make_pair(rec.area_code, rec.year);
        auto [it, inserted] = merged.try_emplace(key, rec);
        if (inserted) return;
        const BirthRateRecord& seen = it->second;
        const bool same = seen.teen_births == rec.teen_births &&
                          seen.birth_rate == rec.birth_rate &&
                          seen.rate_ci_lower == rec.rate_ci_lower &&
                          seen.rate_ci_upper == rec.rate_ci_upper;
        if (!same) {
            throw ConflictError("conflicting records for area " + std::to_string(rec.area_code) +
                                ", year " + std::to_string(rec.year));
        }
    };
    for (const auto& rec : a) add(rec);
    for (const auto& rec : b) add(rec);

    std::vector<BirthRateRecord> out;
    out.reserve(merged.size());
    for (auto& [key, rec] : merged) out.push_back(std::move(rec));
    return out;
}

RateSeriesResult build_rate_series(const std::vector<BirthRateRecord>& records) {
    // Defensive re-merge so duplicate keys are collapsed (or rejected) even
    // when the caller skipped merge_birth_records.
    const auto clean = merge_birth_records(records, {});

    RateSeriesResult result;
    std::map<int, std::map<int, double>> known;  // area -> year -> rate
    for (const auto& rec : clean) {
        if (!result.area_names.count(rec.area_code) || result.area_names[rec.area_code].empty()) {
            result.area_names[rec.area_code] = rec.area_name;
        }
        if (!rec.missing()) {
            known[rec.area_code][rec.year] = *rec.birth_rate;
        } else if (!known.count(rec.area_code)) {
            known[rec.area_code];  // keep the area visible for the exclusion report
        }
    }

    for (const auto& [area, years] : known) {
        if (static_cast<int>(years.size()) < kMinUsableYears) {
            result.notes.push_back({area, std::nullopt, "excluded",
                                    "only " + std::to_string(years.size()) +
                                        " usable years, need " +
                                        std::to_string(kMinUsableYears)});
            continue;
        }
        const int first = years.begin()->first;
        const int last = years.rbegin()->first;
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(last - first + 1));

        auto next_known = years.begin();
        auto prev_known = years.begin();
        for (int year = first; year <= last; ++year) {
            auto hit = years.find(year);
            if (hit != years.end()) {
                values.push_back(hit->second);
                prev_known = hit;
                continue;
            }
            // interior gap: interpolate between the bracketing observations
            next_known = years.upper_bound(year);
            const int a = prev_known->first;
            const double ra = prev_known->second;
            const int b = next_known->first;
            const double rb = next_known->second;
            const double value = ra + (rb - ra) * static_cast<double>(year - a) /
                                          static_cast<double>(b - a);
            values.push_back(value);
            result.notes.push_back({area, year, "interpolated",
                                    "between " + std::to_string(a) + " and " +
                                        std::to_string(b)});
        }
        result.by_area.emplace(area, Series(first, std::move(values)));
    }
    return result;
}

std::map<int, Series> build_grant_series(const std::vector<SchoolRecord>& schools,
                                         double annual_budget, const std::vector<int>& years,
                                         const std::set<int>& include_areas) {
    if (!(annual_budget > 0.0) || !std::isfinite(annual_budget)) {
        throw std::invalid_argument("annual budget must be positive");
    }
    if (years.empty()) {
        throw std::invalid_argument("at least one grant year is required");
    }
    for (std::size_t i = 1; i < years.size(); ++i) {
        if (years[i] != years[i - 1] + 1) {
            throw std::invalid_argument("grant years must be contiguous ascending");
        }
    }

    std::set<int> areas = include_areas;
    for (const auto& s : schools) areas.insert(s.area_code);

    std::map<int, std::vector<double>> sums;  // area -> per-year thousands
    for (int area : areas) sums[area] = std::vector<double>(years.size(), 0.0);

    for (std::size_t yi = 0; yi < years.size(); ++yi) {
        const int year = years[yi];
        long long total = 0;
        for (const auto& s : schools) {
            auto it = s.enrollment_by_year.find(year);
            if (it != s.enrollment_by_year.end()) total += it->second;
        }
        if (total <= 0) {
            throw ZeroEnrollment("no enrollment recorded for year " + std::to_string(year));
        }
        for (const auto& s : schools) {
            auto it = s.enrollment_by_year.find(year);
            if (it == s.enrollment_by_year.end()) continue;
            const double share =
                annual_budget * static_cast<double>(it->second) / static_cast<double>(total);
            sums[s.area_code][yi] += share / 1000.0;  // store thousands
        }
    }

    std::map<int, Series> out;
    for (auto& [area, values] : sums) {
        out.emplace(area, Series(years.front(), std::move(values)));
    }
    return out;
}

double implied_cost_per_student(double annual_budget, long long total_students) {
    if (!(annual_budget >= 0.0) || !std::isfinite(annual_budget)) {
        throw std::invalid_argument("annual budget must be a finite nonnegative amount");
    }
    if (total_students <= 0) {
        throw ZeroEnrollment("cannot divide budget over " + std::to_string(total_students) +
                             " students");
    }
    return annual_budget / static_cast<double>(total_students);
}

}  // namespace tppi::ingest
