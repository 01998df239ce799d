#include "captionprobe/csv.hpp"

#include "captionprobe/error.hpp"

#include <istream>

namespace captionprobe::csv {

bool read_row(std::istream &in, std::vector<std::string> &row) {
    row.clear();
    if (in.peek() == std::char_traits<char>::eof()) return false;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (;;) {
        const int ch = in.get();
        if (ch == std::char_traits<char>::eof()) {
            if (quoted) throw DataError("csv: unterminated quoted field");
            break;
        }
        any = true;
        const char c = static_cast<char>(ch);
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field += '"';
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            break;
        } else if (c == '\r') {
            if (in.peek() == '\n') in.get();
            break;
        } else {
            field += c;
        }
    }
    if (!any) return false;
    row.push_back(std::move(field));
    return true;
}

std::vector<std::vector<std::string>> read_all(std::istream &in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    while (read_row(in, row)) {
        if (row.size() == 1 && row.front().empty()) continue;
        rows.push_back(row);
    }
    return rows;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_row(const std::vector<std::string> &row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += escape(row[i]);
    }
    return out;
}

} // namespace captionprobe::csv
