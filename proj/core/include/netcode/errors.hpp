#ifndef NETCODE_ERRORS_HPP
#define NETCODE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace netcode {

/// Caller violated a precondition (mismatched fields, bad dimensions, ...).
class UsageError : public std::invalid_argument {
  public:
    explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

/// A guarded capacity (table size, enumeration budget) would be exceeded.
class CapacityError : public std::runtime_error {
  public:
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file; carries a 1-based line number.
class ParseError : public std::runtime_error {
  public:
    ParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

  private:
    int line_;
};

} // namespace netcode

#endif
