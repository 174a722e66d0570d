#ifndef BEAMSCHED_ERRORS_HPP
#define BEAMSCHED_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace beamsched {

// Malformed input text (CSV tables, declaration blocks). Carries a 1-based
// line number when one is known.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, long line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                      : message),
          line_(line) {}

    long line() const { return line_; }

private:
    long line_;
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& message) : std::runtime_error(message) {}
};

class NetError : public std::runtime_error {
public:
    explicit NetError(const std::string& message) : std::runtime_error(message) {}
};

} // namespace beamsched

#endif
