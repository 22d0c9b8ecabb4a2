#include "tppi/ingest.hpp"

#include <random>
#include <sstream>

#include "doctest.h"
#include "tppi/errors.hpp"

using namespace tppi;
using namespace tppi::ingest;

namespace {

std::vector<BirthRateRecord> parse_rates(const std::string& text) {
    std::istringstream in(text);
    return parse_birth_rates(in);
}

std::vector<SchoolRecord> parse_school_text(const std::string& text) {
    std::istringstream in(text);
    return parse_schools(in);
}

const std::string kRateHeader =
    "area_code,area_name,year,teen_births,birth_rate,rate_ci_lower,rate_ci_upper\n";
const std::string kSchoolHeader = "school_id,school_name,area_code,year,enrollment\n";

}  // namespace

TEST_CASE("birth rate row parses into a full record") {
    const auto records = parse_rates(kRateHeader + "35,Douglas,2005,45,57.2,50.1,64.3\n");
    REQUIRE(records.size() == 1);
    const auto& r = records[0];
    CHECK(r.area_code == 35);
    CHECK(r.area_name == "Douglas");
    CHECK(r.year == 2005);
    CHECK(r.teen_births == 45);
    CHECK(r.birth_rate == doctest::Approx(57.2));
    CHECK(r.rate_ci_lower == doctest::Approx(50.1));
    CHECK(r.rate_ci_upper == doctest::Approx(64.3));
    CHECK_FALSE(r.missing());
}

TEST_CASE("header-only file yields an empty record list") {
    CHECK(parse_rates(kRateHeader).empty());
}

TEST_CASE("missing value fields leave the record flagged missing") {
    const auto records = parse_rates(kRateHeader + "22,Logan Square,2012,,,,\n");
    REQUIRE(records.size() == 1);
    CHECK(records[0].missing());
    CHECK_FALSE(records[0].teen_births.has_value());
    CHECK_FALSE(records[0].rate_ci_lower.has_value());
}

TEST_CASE("columns are matched by name, not position") {
    const auto records = parse_rates(
        "year,area_code,rate_ci_upper,rate_ci_lower,birth_rate,teen_births,area_name\n"
        "2005,35,64.3,50.1,57.2,45,Douglas\n");
    REQUIRE(records.size() == 1);
    CHECK(records[0].area_code == 35);
    CHECK(records[0].year == 2005);
    CHECK(records[0].birth_rate == doctest::Approx(57.2));
}

TEST_CASE("bad birth rate headers raise SchemaError") {
    CHECK_THROWS_AS(parse_rates("area_code,area_name,year\n"), SchemaError);
    CHECK_THROWS_AS(parse_rates("area_code,area_code,area_name,year,teen_births,birth_rate,"
                                "rate_ci_lower,rate_ci_upper\n"),
                    SchemaError);
    CHECK_THROWS_AS(parse_rates(""), SchemaError);
}

TEST_CASE("bad birth rate rows raise ParseError with row and column") {
    try {
        parse_rates(kRateHeader + "35,Douglas,2005,45,57.2,50.1,64.3\n" +
                    "99,Nowhere,2005,1,10,9,11\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.row() == 3);
        CHECK(e.column() == "area_code");
    }

    CHECK_THROWS_AS(parse_rates(kRateHeader + "35,Douglas,1995,45,57.2,50.1,64.3\n"), ParseError);
    CHECK_THROWS_AS(parse_rates(kRateHeader + "35,Douglas,abc,45,57.2,50.1,64.3\n"), ParseError);
    CHECK_THROWS_AS(parse_rates(kRateHeader + "35,Douglas,2005,45,-3.0,50.1,64.3\n"), ParseError);
    CHECK_THROWS_AS(parse_rates(kRateHeader + "35,Douglas,2005,45,57.2\n"), ParseError);
    CHECK_THROWS_AS(parse_rates(kRateHeader + "35,Douglas,2005,-4,57.2,50.1,64.3\n"), ParseError);
}

TEST_CASE("confidence interval must bracket the rate") {
    CHECK_THROWS_AS(parse_rates(kRateHeader + "35,Douglas,2005,45,57.2,58.0,64.3\n"), ParseError);
    CHECK_THROWS_AS(parse_rates(kRateHeader + "35,Douglas,2005,45,57.2,50.1,56.0\n"), ParseError);
    CHECK_NOTHROW(parse_rates(kRateHeader + "35,Douglas,2005,45,57.2,57.2,57.2\n"));
}

TEST_CASE("birth rate records survive a write/parse round trip") {
    std::mt19937 rng(20260815);
    std::uniform_real_distribution<double> rate(0.0, 120.0);
    std::uniform_int_distribution<int> births(0, 400);

    std::vector<BirthRateRecord> records;
    for (int area = 1; area <= 10; ++area) {
        for (int year = 1999; year <= 2014; ++year) {
            BirthRateRecord r;
            r.area_code = area;
            r.area_name = "Area " + std::to_string(area);
            r.year = year;
            if ((area + year) % 7 != 0) {
                const double mid = rate(rng);
                r.teen_births = births(rng);
                r.birth_rate = mid;
                r.rate_ci_lower = mid * 0.9;
                r.rate_ci_upper = mid * 1.1 + 0.1;
            }
            records.push_back(r);
        }
    }

    std::ostringstream out;
    write_birth_rates(out, records);
    const auto reparsed = parse_rates(out.str());
    CHECK(reparsed == records);

    std::ostringstream again;
    write_birth_rates(again, reparsed);
    CHECK(again.str() == out.str());
}

TEST_CASE("school rows aggregate per school across years") {
    const auto schools = parse_school_text(kSchoolHeader +
                                           "610158,Dunbar HS,35,2012,950\n"
                                           "610158,Dunbar HS,35,2013,940\n"
                                           "609749,Kelly HS,58,2012,2100\n");
    REQUIRE(schools.size() == 2);
    CHECK(schools[0].school_id == "609749");
    CHECK(schools[0].area_code == 58);
    CHECK(schools[1].school_id == "610158");
    CHECK(schools[1].name == "Dunbar HS");
    REQUIRE(schools[1].enrollment_by_year.size() == 2);
    CHECK(schools[1].enrollment_by_year.at(2012) == 950);
    CHECK(schools[1].enrollment_by_year.at(2013) == 940);
}

TEST_CASE("a 130-school file yields 130 records") {
    std::string text = kSchoolHeader;
    for (int i = 0; i < 130; ++i) {
        text += "id" + std::to_string(1000 + i) + ",School " + std::to_string(i) + "," +
                std::to_string(i % 76 + 1) + ",2014," + std::to_string(200 + i) + "\n";
    }
    CHECK(parse_school_text(text).size() == 130);
}

TEST_CASE("bad school rows raise the documented errors") {
    CHECK_THROWS_AS(parse_school_text(kSchoolHeader + "a,School A,1,2012,100\n"
                                                      "a,School A,1,2012,100\n"),
                    SchemaError);  // duplicate school-year
    CHECK_THROWS_AS(parse_school_text(kSchoolHeader + "a,School A,1,2012,100\n"
                                                      "a,School B,1,2013,100\n"),
                    SchemaError);  // same id, different name
    CHECK_THROWS_AS(parse_school_text(kSchoolHeader + "a,School A,1,2012,100\n"
                                                      "a,School A,2,2013,100\n"),
                    SchemaError);  // same id, different area
    CHECK_THROWS_AS(parse_school_text(kSchoolHeader + "a,School A,1,2012,-5\n"), ParseError);
    CHECK_THROWS_AS(parse_school_text(kSchoolHeader + "a,School A,1,2009,100\n"), ParseError);
    CHECK_THROWS_AS(parse_school_text(kSchoolHeader + ",School A,1,2012,100\n"), ParseError);
    CHECK_THROWS_AS(parse_school_text("school_id,school_name,area_code,year\n"), SchemaError);
}

TEST_CASE("school records survive a write/parse round trip") {
    const std::string text = kSchoolHeader +
                             "b2,Beta HS,12,2010,400\n"
                             "b2,Beta HS,12,2011,410\n"
                             "a1,Alpha HS,3,2010,900\n";
    const auto schools = parse_school_text(text);
    std::ostringstream out;
    write_schools(out, schools);
    CHECK(parse_school_text(out.str()) == schools);
}

TEST_CASE("merge collapses identical records and rejects conflicts") {
    const auto first = parse_rates(kRateHeader + "1,Rogers Park,2005,30,40.0,35.0,45.0\n" +
                                   "1,Rogers Park,2006,28,38.0,33.0,43.0\n");
    const auto second = parse_rates(kRateHeader + "1,Rogers Park,2006,28,38.0,33.0,43.0\n" +
                                    "2,West Ridge,2010,20,25.0,21.0,29.0\n");

    const auto merged = merge_birth_records(first, second);
    REQUIRE(merged.size() == 3);
    CHECK(merged[0].year == 2005);
    CHECK(merged[1].year == 2006);
    CHECK(merged[2].area_code == 2);

    const auto conflicting = parse_rates(kRateHeader + "1,Rogers Park,2006,29,38.0,33.0,43.0\n");
    CHECK_THROWS_AS(merge_birth_records(first, conflicting), ConflictError);
}

TEST_CASE("a fully observed area becomes one contiguous series") {
    std::string text = kRateHeader;
    for (int year = 1999; year <= 2014; ++year) {
        text += "5,North Center," + std::to_string(year) + ",10," + std::to_string(30 + year % 5) +
                ",,\n";
    }
    const auto result = build_rate_series(parse_rates(text));
    REQUIRE(result.by_area.count(5) == 1);
    const Series& s = result.by_area.at(5);
    CHECK(s.start_year() == 1999);
    CHECK(s.size() == 16);
    CHECK(result.notes.empty());
    CHECK(result.area_names.at(5) == "North Center");
}

TEST_CASE("an interior gap is linearly interpolated and flagged") {
    const auto result = build_rate_series(parse_rates(kRateHeader +
                                                      "7,Lincoln Park,2004,5,20.0,,\n"
                                                      "7,Lincoln Park,2005,5,24.0,,\n"
                                                      "7,Lincoln Park,2006,,,,\n"
                                                      "7,Lincoln Park,2007,5,30.0,,\n"
                                                      "7,Lincoln Park,2008,5,28.0,,\n"));
    const Series& s = result.by_area.at(7);
    CHECK(s.start_year() == 2004);
    CHECK(s.size() == 5);
    CHECK(s.at_year(2006) == doctest::Approx(27.0));
    REQUIRE(result.notes.size() == 1);
    CHECK(result.notes[0].kind == "interpolated");
    CHECK(result.notes[0].area_code == 7);
    CHECK(result.notes[0].year == 2006);
}

TEST_CASE("a two year gap interpolates both missing points") {
    const auto result = build_rate_series(parse_rates(kRateHeader +
                                                      "7,Lincoln Park,2004,5,10.0,,\n"
                                                      "7,Lincoln Park,2005,5,12.0,,\n"
                                                      "7,Lincoln Park,2008,5,18.0,,\n"
                                                      "7,Lincoln Park,2009,5,17.0,,\n"));
    const Series& s = result.by_area.at(7);
    CHECK(s.at_year(2006) == doctest::Approx(14.0));
    CHECK(s.at_year(2007) == doctest::Approx(16.0));
    CHECK(result.notes.size() == 2);
}

TEST_CASE("missing edge years are trimmed, not extrapolated") {
    const auto result = build_rate_series(parse_rates(kRateHeader +
                                                      "9,Edison Park,1999,,,,\n"
                                                      "9,Edison Park,2000,5,11.0,,\n"
                                                      "9,Edison Park,2001,5,12.0,,\n"
                                                      "9,Edison Park,2002,5,13.0,,\n"
                                                      "9,Edison Park,2003,5,14.0,,\n"
                                                      "9,Edison Park,2004,,,,\n"));
    const Series& s = result.by_area.at(9);
    CHECK(s.start_year() == 2000);
    CHECK(s.end_year() == 2003);
    CHECK(result.notes.empty());
}

TEST_CASE("areas with too few observed years are excluded with a note") {
    const auto result = build_rate_series(parse_rates(kRateHeader +
                                                      "12,Forest Glen,2010,5,11.0,,\n"
                                                      "12,Forest Glen,2011,5,12.0,,\n"
                                                      "12,Forest Glen,2012,5,13.0,,\n"
                                                      "13,North Park,2010,6,14.0,,\n"
                                                      "13,North Park,2011,6,15.0,,\n"
                                                      "13,North Park,2012,6,16.0,,\n"
                                                      "13,North Park,2013,6,17.0,,\n"));
    CHECK(result.by_area.count(12) == 0);
    CHECK(result.by_area.count(13) == 1);
    CHECK(result.area_names.count(12) == 1);
    REQUIRE(result.notes.size() == 1);
    CHECK(result.notes[0].area_code == 12);
    CHECK(result.notes[0].kind == "excluded");
    CHECK_FALSE(result.notes[0].year.has_value());
}

TEST_CASE("grant shares follow enrollment proportions") {
    const auto schools = parse_school_text(kSchoolHeader +
                                           "a,Alpha HS,1,2012,600\n"
                                           "b,Beta HS,2,2012,400\n");
    const auto grants = build_grant_series(schools, 100000.0, {2012});
    REQUIRE(grants.size() == 2);
    CHECK(grants.at(1).at_year(2012) == doctest::Approx(60.0));  // thousands
    CHECK(grants.at(2).at_year(2012) == doctest::Approx(40.0));
}

TEST_CASE("schools in the same area pool their grants") {
    const auto schools = parse_school_text(kSchoolHeader +
                                           "a,Alpha HS,1,2012,300\n"
                                           "b,Beta HS,1,2012,300\n"
                                           "c,Gamma HS,2,2012,400\n");
    const auto grants = build_grant_series(schools, 100000.0, {2012});
    CHECK(grants.at(1).at_year(2012) == doctest::Approx(60.0));
    CHECK(grants.at(2).at_year(2012) == doctest::Approx(40.0));
}

TEST_CASE("grant series conserve the annual budget") {
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> enr(50, 3000);
    std::string text = kSchoolHeader;
    for (int i = 0; i < 60; ++i) {
        for (int year = 2010; year <= 2014; ++year) {
            text += "s" + std::to_string(i) + ",School " + std::to_string(i) + "," +
                    std::to_string(i % 20 + 1) + "," + std::to_string(year) + "," +
                    std::to_string(enr(rng)) + "\n";
        }
    }
    const double budget = 3.94e6;
    const auto grants = build_grant_series(parse_school_text(text), budget,
                                           {2010, 2011, 2012, 2013, 2014});
    for (int year = 2010; year <= 2014; ++year) {
        double total = 0.0;
        for (const auto& [area, series] : grants) total += series.at_year(year);
        CHECK(total * 1000.0 == doctest::Approx(budget).epsilon(1e-9));
    }
}

TEST_CASE("areas without schools can be padded with zero series") {
    const auto schools = parse_school_text(kSchoolHeader + "a,Alpha HS,1,2012,600\n");
    const auto grants = build_grant_series(schools, 50000.0, {2012}, {1, 2, 3});
    REQUIRE(grants.size() == 3);
    CHECK(grants.at(2).at_year(2012) == 0.0);
    CHECK(grants.at(3).at_year(2012) == 0.0);
}

TEST_CASE("grant building rejects bad inputs") {
    const auto schools = parse_school_text(kSchoolHeader + "a,Alpha HS,1,2012,600\n");
    CHECK_THROWS_AS(build_grant_series(schools, 50000.0, {2012, 2013}), ZeroEnrollment);
    CHECK_THROWS_AS(build_grant_series(schools, 50000.0, {2012, 2014}), std::invalid_argument);
    CHECK_THROWS_AS(build_grant_series(schools, 0.0, {2012}), std::invalid_argument);
    CHECK_THROWS_AS(build_grant_series(schools, 50000.0, {}), std::invalid_argument);
    const auto empty = parse_school_text(kSchoolHeader + "a,Alpha HS,1,2012,0\n");
    CHECK_THROWS_AS(build_grant_series(empty, 50000.0, {2012}), ZeroEnrollment);
}

TEST_CASE("implied cost per student matches the citywide figures") {
    CHECK(implied_cost_per_student(3.94e6, 101008) == doctest::Approx(39.01).epsilon(1e-4));
    CHECK(implied_cost_per_student(3.94e6, 130) == doctest::Approx(30307.69).epsilon(1e-6));
    CHECK_THROWS_AS(implied_cost_per_student(3.94e6, 0), ZeroEnrollment);
}
