#include "tppi/series.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "tppi/errors.hpp"

namespace tppi {

Series::Series(int start_year, std::vector<double> values)
    : start_year_(start_year), values_(std::move(values)) {
    if (values_.empty()) {
        throw std::invalid_argument("Series needs at least one value");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw std::invalid_argument("Series value for year " +
                                        std::to_string(start_year_ + static_cast<int>(i)) +
                                        " is not finite");
        }
    }
}

double Series::at_year(int year) const {
    if (!covers(year)) {
        throw std::out_of_range("Series has no value for year " + std::to_string(year) +
                                " (covers " + std::to_string(start_year()) + ".." +
                                std::to_string(end_year()) + ")");
    }
    return values_[static_cast<std::size_t>(year - start_year_)];
}

Series Series::slice(int first_year, int last_year) const {
    const int lo = std::max(first_year, start_year());
    const int hi = std::min(last_year, end_year());
    if (lo > hi) {
        throw SeriesTooShort("empty slice " + std::to_string(first_year) + ".." +
                             std::to_string(last_year) + " of series covering " +
                             std::to_string(start_year()) + ".." + std::to_string(end_year()));
    }
    auto first = values_.begin() + (lo - start_year_);
    return Series(lo, std::vector<double>(first, first + (hi - lo + 1)));
}

Series Series::with_value_at(int year, double value) const {
    if (!covers(year)) {
        throw std::out_of_range("cannot replace value for year " + std::to_string(year) +
                                " outside " + std::to_string(start_year()) + ".." +
                                std::to_string(end_year()));
    }
    std::vector<double> copy = values_;
    copy[static_cast<std::size_t>(year - start_year_)] = value;
    return Series(start_year_, std::move(copy));
}

}  // namespace tppi
