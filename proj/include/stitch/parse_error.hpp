#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stitch {

/// Malformed text input; the message reads `source:line: what`.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace stitch
