#pragma once

#include <coopreg/types.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace coopreg {

/// Formats with 12 significant digits; non-finite values become "NA".
std::string format_number(double v);

/// RFC-4180-style table with a mandatory header row.
struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    Index num_rows() const noexcept { return static_cast<Index>(rows.size()); }
    /// Column position by name, or -1.
    Index find(const std::string& name) const;
    std::vector<std::string> column(Index c) const;
    Vector numeric_column(Index c) const;
};

CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(const std::string& field);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

} // namespace coopreg
