#ifndef RULEFUSE_CSV_HPP
#define RULEFUSE_CSV_HPP

#include <string>
#include <vector>

namespace rulefuse {

// RFC 4180 reader: quoted fields, doubled-quote escapes, embedded commas
// and newlines. Returns one vector of fields per record.
std::vector<std::vector<std::string>> read_csv(const std::string& path);
std::vector<std::vector<std::string>> parse_csv(const std::string& content);

// Quotes a field only when needed.
std::string csv_escape(const std::string& field);

}  // namespace rulefuse

#endif
