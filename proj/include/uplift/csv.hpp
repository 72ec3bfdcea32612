#pragma once

#include <cstdio>
#include <istream>
#include <string>
#include <vector>

namespace uplift::csv {

/// Shortest decimal form that parses back to the exact same double.
/// Keeps CSV artifacts byte-stable and round-trippable.
std::string format_double(double v);

/// Parse one CSV record (handles quoted fields with "" escapes).
/// Returns false at end of stream. Rows may span lines inside quotes.
bool read_row(std::istream& in, std::vector<std::string>& fields);

/// Quote a field only when it needs it.
std::string escape(const std::string& field);

/// Join fields into one CSV line (no trailing newline).
std::string join(const std::vector<std::string>& fields);

/// Strict double parse of a whole field; returns false on any trailing junk.
bool parse_double(const std::string& s, double& out);

}  // namespace uplift::csv
