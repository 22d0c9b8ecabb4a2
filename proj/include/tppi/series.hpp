#ifndef TPPI_SERIES_HPP
#define TPPI_SERIES_HPP

#include <cstddef>
#include <vector>

namespace tppi {

/// A year-indexed series of real values. Index i holds the value for year
/// start_year() + i. Immutable after construction; at least one value, all
/// values finite.
class Series {
public:
    Series(int start_year, std::vector<double> values);

    int start_year() const { return start_year_; }
    int end_year() const { return start_year_ + static_cast<int>(values_.size()) - 1; }
    std::size_t size() const { return values_.size(); }

    const std::vector<double>& values() const { return values_; }

    bool covers(int year) const { return year >= start_year() && year <= end_year(); }

    /// Value for a calendar year; throws std::out_of_range if not covered.
    double at_year(int year) const;

    double front() const { return values_.front(); }
    double back() const { return values_.back(); }

    /// Sub-series clipped to [first_year, last_year]. Throws SeriesTooShort
    /// if the clip is empty.
    Series slice(int first_year, int last_year) const;

    /// Copy with the value at `year` replaced; throws std::out_of_range if
    /// the year is not covered.
    Series with_value_at(int year, double value) const;

private:
    int start_year_;
    std::vector<double> values_;
};

}  // namespace tppi

#endif  // TPPI_SERIES_HPP
