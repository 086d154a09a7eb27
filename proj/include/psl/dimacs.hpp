#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "psl/formula.hpp"

namespace psl {

/// Parse/read failure with the 1-based input line it was detected on.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads DIMACS CNF ("p cnf V C", clauses terminated by 0, 'c' comment lines).
/// The result is a conjunction of C disjunctions, one per clause.
Formula parse_dimacs(std::istream& in);
Formula parse_dimacs_string(const std::string& text);

/// True when f is a conjunction of clauses (or a single clause/literal/constant).
bool is_cnf(const Formula& f);

/// Throws FormulaError if f is not in CNF shape.
void write_dimacs(const Formula& f, std::ostream& out);
std::string write_dimacs_string(const Formula& f);

}  // namespace psl
