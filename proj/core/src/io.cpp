#include <coopreg/io.hpp>
#include <coopreg/error.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

namespace coopreg {

std::string format_number(double v)
{
    if (!std::isfinite(v)) return "NA";
    if (v == 0.0) return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

Index CsvTable::find(const std::string& name) const
{
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == name) return static_cast<Index>(c);
    }
    return -1;
}

std::vector<std::string> CsvTable::column(Index c) const
{
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

Vector CsvTable::numeric_column(Index c) const
{
    Vector out(num_rows());
    for (Index i = 0; i < num_rows(); ++i) {
        const std::string& s = rows[i][c];
        try {
            std::size_t used = 0;
            out[i] = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, "row " + std::to_string(i + 2) + ", column '" + header[c] +
                                                   "': not a number: '" + s + "'");
        }
    }
    return out;
}

namespace {

// Reads one record; returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields)
{
    fields.clear();
    if (in.peek() == std::char_traits<char>::eof()) return false;
    std::string field;
    bool quoted = false;
    bool any = false;
    char ch;
    while (in.get(ch)) {
        any = true;
        if (quoted) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            break;
        } else if (ch != '\r') {
            field.push_back(ch);
        }
    }
    if (quoted) throw Error(ErrorCode::ParseError, "unterminated quoted field");
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

} // namespace

CsvTable parse_csv(std::istream& in)
{
    CsvTable t;
    std::vector<std::string> fields;
    if (!read_record(in, fields)) throw Error(ErrorCode::ParseError, "missing header row");
    for (auto& f : fields) t.header.push_back(trim(f));
    std::size_t line = 1;
    while (read_record(in, fields)) {
        ++line;
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        if (fields.size() != t.header.size()) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + " has " + std::to_string(fields.size()) +
                                                   " fields, header has " + std::to_string(t.header.size()));
        }
        for (auto& f : fields) f = trim(f);
        t.rows.push_back(fields);
    }
    return t;
}

CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    return parse_csv(in);
}

std::string csv_escape(const std::string& field)
{
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_text_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << contents;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace coopreg
