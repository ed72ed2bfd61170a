#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace botracle::csv {

/// Reads one RFC-4180 record (quoted fields may span lines).
/// Returns false at end of stream.
bool read_record(std::istream& in, std::vector<std::string>& fields);

/// Writes one record, quoting fields that contain commas, quotes or newlines.
void write_record(std::ostream& out, const std::vector<std::string>& fields);

std::string escape_field(const std::string& field);

}  // namespace botracle::csv
