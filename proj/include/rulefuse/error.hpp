#ifndef RULEFUSE_ERROR_HPP
#define RULEFUSE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace rulefuse {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration values, impossible budgets, invalid CLI combinations.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// A referenced column/feature does not exist or has the wrong kind.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};

// Malformed input text (CSV cells, rule DSL). Carries a position when known.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line = 0, int column = 0)
        : Error(format(msg, line, column)), line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    static std::string format(const std::string& msg, int line, int column) {
        if (line <= 0) return msg;
        std::string out = "line " + std::to_string(line);
        if (column > 0) out += ":" + std::to_string(column);
        return out + ": " + msg;
    }
    int line_;
    int column_;
};

// Runtime failures on otherwise well-formed data (degenerate splits, empty sets).
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

}  // namespace rulefuse

#endif
