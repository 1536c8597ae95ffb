#pragma once

#include <stdexcept>
#include <string>

#include "btq/observable.hpp"

namespace btq {

// Error with the 0-based character offset of the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, const std::string& message)
      : std::runtime_error(message + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Grammar (whitespace-insensitive):
//   expr   := term (('+' | '-') term)*
//   term   := factor ('*' factor)*
//   factor := number | atom | '(' expr ')' | '-' factor
//   atom   := 'x1' | 'x2' | 'x3'                      (sphere)
//           | ('c' | 's') '(' integer ',' integer ')'  (torus)
Observable parse_observable(const std::string& text, ModelKind kind);

}  // namespace btq
