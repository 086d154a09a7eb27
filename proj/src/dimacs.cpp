#include "psl/dimacs.hpp"

#include <charconv>
#include <sstream>
#include <vector>

namespace psl {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

bool parse_int(const std::string& tok, long long& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

Formula parse_dimacs(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  long long num_vars = 0;
  long long num_clauses = 0;
  std::vector<Expr> clauses;
  std::vector<Expr> current;
  std::size_t clause_start_line = 0;

  while (std::getline(in, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "c" || toks[0][0] == 'c') continue;
    if (toks[0] == "%") break;  // SATLIB trailer
    if (toks[0] == "p") {
      if (have_header) throw ParseError(line_no, "duplicate header");
      if (toks.size() != 4 || toks[1] != "cnf" || !parse_int(toks[2], num_vars) || !parse_int(toks[3], num_clauses) ||
          num_vars < 0 || num_clauses < 0)
        throw ParseError(line_no, "malformed header, expected 'p cnf <vars> <clauses>'");
      have_header = true;
      continue;
    }
    if (!have_header) throw ParseError(line_no, "clause before 'p cnf' header");
    for (const auto& tok : toks) {
      long long lit = 0;
      if (!parse_int(tok, lit)) throw ParseError(line_no, "malformed literal '" + tok + "'");
      if (lit == 0) {
        clauses.push_back(Expr::disj(std::move(current)));
        current.clear();
        continue;
      }
      long long v = lit < 0 ? -lit : lit;
      if (v > num_vars)
        throw ParseError(line_no, "variable " + std::to_string(v) + " out of range (header declares " +
                                      std::to_string(num_vars) + ")");
      if (current.empty()) clause_start_line = line_no;
      current.push_back(Expr::literal({VarId{static_cast<std::uint32_t>(v - 1)}, lit > 0}));
    }
  }
  if (!have_header) throw ParseError(line_no, "missing 'p cnf' header");
  if (!current.empty()) throw ParseError(clause_start_line, "unterminated clause (missing trailing 0)");
  if (static_cast<long long>(clauses.size()) != num_clauses)
    throw ParseError(line_no, "header declares " + std::to_string(num_clauses) + " clauses, found " +
                                  std::to_string(clauses.size()));
  return Formula(Expr::conj(std::move(clauses)), static_cast<std::size_t>(num_vars));
}

Formula parse_dimacs_string(const std::string& text) {
  std::istringstream in(text);
  return parse_dimacs(in);
}

namespace {

bool is_clause(const Expr& e) {
  if (e.kind() == ExprKind::literal || e.kind() == ExprKind::constant_false) return true;
  if (e.kind() != ExprKind::disjunction) return false;
  for (const auto& c : e.children())
    if (c.kind() != ExprKind::literal) return false;
  return true;
}

void append_clause(const Expr& e, std::vector<std::vector<std::int64_t>>& out) {
  std::vector<std::int64_t> clause;
  if (e.kind() == ExprKind::literal) clause.push_back(e.lit().dimacs());
  for (const auto& c : e.children()) clause.push_back(c.lit().dimacs());
  out.push_back(std::move(clause));
}

}  // namespace

bool is_cnf(const Formula& f) {
  const auto& r = f.root();
  if (r.kind() == ExprKind::constant_true || is_clause(r)) return true;
  if (r.kind() != ExprKind::conjunction) return false;
  for (const auto& c : r.children())
    if (!is_clause(c)) return false;
  return true;
}

void write_dimacs(const Formula& f, std::ostream& out) {
  if (!is_cnf(f)) throw FormulaError("formula is not in CNF");
  std::vector<std::vector<std::int64_t>> clauses;
  const auto& r = f.root();
  if (r.kind() == ExprKind::conjunction) {
    for (const auto& c : r.children()) append_clause(c, clauses);
  } else if (r.kind() != ExprKind::constant_true) {
    append_clause(r, clauses);
  }
  out << "p cnf " << f.var_count() << ' ' << clauses.size() << '\n';
  for (const auto& clause : clauses) {
    for (auto lit : clause) out << lit << ' ';
    out << "0\n";
  }
}

std::string write_dimacs_string(const Formula& f) {
  std::ostringstream os;
  write_dimacs(f, os);
  return os.str();
}

}  // namespace psl
