#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace uniqshap::csv {

using Record = std::vector<std::string>;

/// Parse comma-delimited text with RFC 4180 quoting. A trailing newline does
/// not produce an empty record; CR before LF is dropped.
std::vector<Record> parse(std::istream& in);

/// Quote a field only when it needs it.
std::string escape(std::string_view field);

void write_record(std::ostream& out, const Record& record);

}  // namespace uniqshap::csv
