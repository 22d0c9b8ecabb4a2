#ifndef TPPI_INGEST_HPP
#define TPPI_INGEST_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tppi/series.hpp"

namespace tppi::ingest {

// Community areas are numbered 1..76; the statistics files span 1999..2014,
// school enrollment 2010..2014.
inline constexpr int kMinAreaCode = 1;
inline constexpr int kMaxAreaCode = 76;
inline constexpr int kFirstRateYear = 1999;
inline constexpr int kLastRateYear = 2014;
inline constexpr int kFirstSchoolYear = 2010;
inline constexpr int kLastSchoolYear = 2014;
inline constexpr int kMinUsableYears = 4;

/// One (area, year) row of a public-health statistics file. Empty value
/// fields stay unset; a record with no birth rate is "missing".
struct BirthRateRecord {
    int area_code = 0;
    std::string area_name;
    int year = 0;
    std::optional<long long> teen_births;
    std::optional<double> birth_rate;  // births per 1,000 females 15-19
    std::optional<double> rate_ci_lower;
    std::optional<double> rate_ci_upper;

    bool missing() const { return !birth_rate.has_value(); }
    bool operator==(const BirthRateRecord&) const = default;
};

/// One school aggregated from its long-format enrollment rows.
struct SchoolRecord {
    std::string school_id;
    std::string name;
    int area_code = 0;
    std::map<int, long long> enrollment_by_year;

    bool operator==(const SchoolRecord&) const = default;
};

/// Parses `area_code,area_name,year,teen_births,birth_rate,rate_ci_lower,rate_ci_upper`.
/// SchemaError on a bad header; ParseError (with row and column) on bad rows.
std::vector<BirthRateRecord> parse_birth_rates(std::istream& in);

/// Parses `school_id,school_name,area_code,year,enrollment` (one row per
/// school-year) into one record per school, sorted by id.
std::vector<SchoolRecord> parse_schools(std::istream& in);

/// Inverse of parse_birth_rates, byte-stable ordering (area, then year).
void write_birth_rates(std::ostream& out, const std::vector<BirthRateRecord>& records);

/// Inverse of parse_schools: long format, ordered by (id, year).
void write_schools(std::ostream& out, const std::vector<SchoolRecord>& schools);

/// Combines the 1999-2009 and 2010-2014 statistics files. Identical
/// duplicate (area, year) rows collapse; conflicting ones raise
/// ConflictError. Result ordered by (area, year).
std::vector<BirthRateRecord> merge_birth_records(const std::vector<BirthRateRecord>& a,
                                                 const std::vector<BirthRateRecord>& b);

/// One line of the ingest report (JSON lines downstream).
struct SeriesNote {
    int area_code = 0;
    std::optional<int> year;  // unset for whole-area notes
    std::string kind;         // "interpolated" or "excluded"
    std::string detail;

    bool operator==(const SeriesNote&) const = default;
};

struct RateSeriesResult {
    std::map<int, Series> by_area;            // birth-rate series x per area
    std::map<int, std::string> area_names;    // every area seen, even excluded
    std::vector<SeriesNote> notes;
};

/// Builds per-area birth-rate series: edge gaps trimmed, interior gaps
/// linearly interpolated (flagged), areas with fewer than kMinUsableYears
/// observed years excluded (flagged, never fatal).
RateSeriesResult build_rate_series(const std::vector<BirthRateRecord>& records);

/// Splits annual_budget across schools in proportion to each year's
/// enrollment and aggregates by community area. Values are stored in
/// thousands of dollars. `years` must be contiguous ascending.
/// `include_areas` adds zero-valued series for areas without schools.
/// Throws ZeroEnrollment when a year has no students at all.
std::map<int, Series> build_grant_series(const std::vector<SchoolRecord>& schools,
                                         double annual_budget, const std::vector<int>& years,
                                         const std::set<int>& include_areas = {});

/// annual_budget / total_students; ZeroEnrollment when total_students == 0.
double implied_cost_per_student(double annual_budget, long long total_students);

}  // namespace tppi::ingest

#endif  // TPPI_INGEST_HPP
