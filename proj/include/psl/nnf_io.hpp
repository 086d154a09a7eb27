#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "psl/circuit.hpp"
#include "psl/dimacs.hpp"

namespace psl {

/// Text format, one node per line in arena order after the header
/// "nnf <numNodes> <numEdges> <numVars>":
///   L <lit>                      leaf, 1-based signed variable
///   T / F                        constants
///   A <count> <ids...>           conjunction
///   O <decisionVar> <count> <ids...>  disjunction, decisionVar 0 when absent
/// Ids are 0-based line indices and must precede their use. The last node is the root.
void write_nnf(const Circuit& c, std::ostream& out);
std::string write_nnf_string(const Circuit& c);

/// Throws ParseError with the offending line number.
Circuit read_nnf(std::istream& in);
Circuit read_nnf_string(const std::string& text);

}  // namespace psl
