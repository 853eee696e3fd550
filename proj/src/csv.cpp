#include "rulefuse/csv.hpp"

#include <fstream>
#include <sstream>

#include "rulefuse/error.hpp"

namespace rulefuse {

std::vector<std::vector<std::string>> parse_csv(const std::string& content) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    std::size_t i = 0;
    const std::size_t n = content.size();
    while (i < n) {
        char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && content[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && !field_started && field.empty()) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r') {
            // swallow; \r\n handled by the \n branch
        } else if (c == '\n') {
            end_record();
        } else {
            field += c;
            field_started = true;
        }
        ++i;
    }
    if (in_quotes) throw ParseError("unterminated quoted CSV field");
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

std::string csv_escape(const std::string& field) {
    bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace rulefuse
