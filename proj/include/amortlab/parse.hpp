#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "amortlab/syntax.hpp"

namespace amortlab {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Compound expressions in value positions are bound to fresh `$N` names by
// let, left to right, immediately around the enclosing construct. Entries of
// the (heap ...) block must be pure values.
Program parse(std::string_view text);
ExprPtr parse_expr(std::string_view text);

using PointerNamer = std::function<std::string(const Pointer&)>;

// Default rendering of a pointer outside a program: "@3.0.1".
std::string pointer_display(const Pointer& p);

std::string print(const Program& p);
std::string print(const ValuePtr& v, const PointerNamer& names = pointer_display);
std::string print(const ExprPtr& e, const PointerNamer& names = pointer_display);
std::string print(const HeapValue& h, const PointerNamer& names = pointer_display);

}  // namespace amortlab
