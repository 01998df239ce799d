#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace captionprobe::csv {

// RFC 4180 reading: quoted fields may contain commas, doubled quotes and line
// breaks. Trailing CR is stripped. Returns false at end of input.
bool read_row(std::istream &in, std::vector<std::string> &row);

std::vector<std::vector<std::string>> read_all(std::istream &in);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

std::string format_row(const std::vector<std::string> &row);

} // namespace captionprobe::csv
