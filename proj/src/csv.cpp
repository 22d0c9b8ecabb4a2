#include "tppi/csv.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>

namespace tppi::csv {

bool Reader::next(std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool saw_any = false;

    int ch;
    while ((ch = in_.get()) != std::char_traits<char>::eof()) {
        const char c = static_cast<char>(ch);
        saw_any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                // Opening quote only honored at field start; stray quotes kept.
                if (field.empty()) {
                    in_quotes = true;
                } else {
                    field.push_back(c);
                }
                break;
            case ',':
                fields.push_back(field);
                field.clear();
                break;
            case '\r':
                if (in_.peek() == '\n') in_.get();
                [[fallthrough]];
            case '\n':
                if (fields.empty() && field.empty()) {
                    // blank line: skip, keep scanning
                    saw_any = false;
                    continue;
                }
                fields.push_back(field);
                ++row_;
                return true;
            default:
                field.push_back(c);
        }
    }

    if (!saw_any || (fields.empty() && field.empty())) return false;
    fields.push_back(field);  // final record without trailing newline
    ++row_;
    return true;
}

std::string escape(const std::string& field) {
    bool needs_quotes = false;
    for (char c : field) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << escape(fields[i]);
    }
    out << '\n';
}

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return std::string(buf);
}

}  // namespace tppi::csv
