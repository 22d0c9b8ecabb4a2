#ifndef TPPI_CSV_HPP
#define TPPI_CSV_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace tppi::csv {

/// Incremental CSV record reader. Handles quoted fields (embedded commas,
/// doubled quotes, newlines) and CRLF endings; lenient about malformed
/// quoting so that validation happens on field content, not here.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Reads the next record into `fields`. Returns false at end of input.
    /// Records that are completely blank lines are skipped.
    bool next(std::vector<std::string>& fields);

    /// 1-based index of the record most recently returned (header row is 1).
    std::size_t row_number() const { return row_; }

private:
    std::istream& in_;
    std::size_t row_ = 0;
};

/// Quotes a field if it contains a comma, quote, or line break.
std::string escape(const std::string& field);

/// Writes one record terminated by '\n'.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

/// Fixed-point with the given number of decimals (money uses 2).
std::string format_fixed(double value, int decimals);

}  // namespace tppi::csv

#endif  // TPPI_CSV_HPP
