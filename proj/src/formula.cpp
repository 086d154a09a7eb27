#include "psl/formula.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace psl {

namespace {

const Expr& shared_true() {
  static const Expr e = Expr::top();
  return e;
}

std::size_t var_bound_rec(const Expr& e, std::unordered_map<const ExprNode*, std::size_t>& memo) {
  if (auto it = memo.find(e.get()); it != memo.end()) return it->second;
  std::size_t bound = 0;
  switch (e.kind()) {
    case ExprKind::literal:
      bound = e.lit().var.index + std::size_t{1};
      break;
    case ExprKind::constant_true:
    case ExprKind::constant_false:
      break;
    default:
      for (const auto& c : e.children()) bound = std::max(bound, var_bound_rec(c, memo));
  }
  memo.emplace(e.get(), bound);
  return bound;
}

}  // namespace

Expr::Expr() : Expr(shared_true()) {}

Expr Expr::top() {
  return Expr(std::make_shared<const ExprNode>(ExprNode{ExprKind::constant_true, {}, {}}));
}

Expr Expr::bottom() {
  return Expr(std::make_shared<const ExprNode>(ExprNode{ExprKind::constant_false, {}, {}}));
}

Expr Expr::literal(Literal l) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{ExprKind::literal, l, {}}));
}

Expr Expr::conj(std::vector<Expr> children) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{ExprKind::conjunction, {}, std::move(children)}));
}

Expr Expr::disj(std::vector<Expr> children) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{ExprKind::disjunction, {}, std::move(children)}));
}

Expr Expr::negate(Expr child) {
  std::vector<Expr> ch;
  ch.push_back(std::move(child));
  return Expr(std::make_shared<const ExprNode>(ExprNode{ExprKind::negation, {}, std::move(ch)}));
}

std::size_t referenced_var_bound(const Expr& e) {
  std::unordered_map<const ExprNode*, std::size_t> memo;
  return var_bound_rec(e, memo);
}

Formula::Formula(Expr root, std::size_t var_count) : root_(std::move(root)), var_count_(var_count) {
  auto bound = referenced_var_bound(root_);
  if (bound > var_count_) {
    throw FormulaError("formula references variable " + std::to_string(bound) + " but declares only " +
                       std::to_string(var_count_) + " variables");
  }
}

CategoricalSpace::CategoricalSpace(std::size_t steps, std::size_t categories)
    : steps_(steps), categories_(categories) {
  if (steps == 0 || categories == 0) throw FormulaError("categorical space needs n >= 1 and k >= 1");
}

VarId CategoricalSpace::var(std::size_t step, std::size_t category) const {
  if (step >= steps_ || category >= categories_) throw FormulaError("categorical index out of range");
  return VarId{static_cast<std::uint32_t>(step * categories_ + category)};
}

Assignment Assignment::from_bits(std::uint64_t bits, std::size_t var_count) {
  Assignment a;
  a.values.resize(var_count);
  for (std::size_t v = 0; v < var_count; ++v) a.values[v] = (bits >> v) & 1U;
  return a;
}

Assignment Assignment::from_categories(const CategoricalSpace& space, const Sequence& seq) {
  if (seq.size() != space.steps()) throw FormulaError("sequence length does not match the categorical space");
  Assignment a;
  a.values.assign(space.var_count(), false);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] < 0 || static_cast<std::size_t>(seq[i]) >= space.categories())
      throw FormulaError("category " + std::to_string(seq[i]) + " out of range at step " + std::to_string(i));
    a.values[space.var(i, static_cast<std::size_t>(seq[i])).index] = true;
  }
  a.categories = seq;
  return a;
}

bool evaluate(const Expr& e, const std::vector<bool>& values) {
  switch (e.kind()) {
    case ExprKind::constant_true:
      return true;
    case ExprKind::constant_false:
      return false;
    case ExprKind::literal:
      return values[e.lit().var.index] == e.lit().positive;
    case ExprKind::negation:
      return !evaluate(e.children()[0], values);
    case ExprKind::conjunction:
      return std::all_of(e.children().begin(), e.children().end(),
                         [&](const Expr& c) { return evaluate(c, values); });
    case ExprKind::disjunction:
      return std::any_of(e.children().begin(), e.children().end(),
                         [&](const Expr& c) { return evaluate(c, values); });
  }
  return false;
}

bool evaluate(const Formula& f, const Assignment& a) {
  if (a.values.size() < f.var_count()) {
    throw FormulaError("assignment covers " + std::to_string(a.values.size()) + " variables, formula needs " +
                       std::to_string(f.var_count()));
  }
  return evaluate(f.root(), a.values);
}

Expr at_most_one(std::span<const VarId> vars) {
  std::vector<Expr> clauses;
  for (std::size_t i = 0; i < vars.size(); ++i)
    for (std::size_t j = i + 1; j < vars.size(); ++j)
      clauses.push_back(Expr::disj({Expr::literal({vars[i], false}), Expr::literal({vars[j], false})}));
  return Expr::conj(std::move(clauses));
}

Expr exactly_one(std::span<const VarId> vars) {
  if (vars.empty()) throw FormulaError("exactly_one needs at least one variable");
  std::unordered_set<std::uint32_t> seen;
  for (auto v : vars)
    if (!seen.insert(v.index).second) throw FormulaError("exactly_one: duplicate variable " + std::to_string(v.index));

  std::vector<Expr> alo;
  for (auto v : vars) alo.push_back(Expr::literal({v, true}));
  std::vector<Expr> parts;
  parts.push_back(Expr::disj(std::move(alo)));
  parts.push_back(at_most_one(vars));
  return Expr::conj(std::move(parts));
}

Expr one_hot_domain(const CategoricalSpace& space) {
  std::vector<Expr> parts;
  std::vector<VarId> block(space.categories());
  for (std::size_t i = 0; i < space.steps(); ++i) {
    for (std::size_t c = 0; c < space.categories(); ++c) block[c] = space.var(i, c);
    parts.push_back(exactly_one(block));
  }
  return Expr::conj(std::move(parts));
}

std::uint64_t count_models_brute_force(const Formula& f) {
  if (f.var_count() > 30) throw FormulaError("brute-force counting limited to 30 variables");
  std::uint64_t count = 0;
  std::vector<bool> values(f.var_count());
  const std::uint64_t worlds = std::uint64_t{1} << f.var_count();
  for (std::uint64_t bits = 0; bits < worlds; ++bits) {
    for (std::size_t v = 0; v < values.size(); ++v) values[v] = (bits >> v) & 1U;
    if (evaluate(f.root(), values)) ++count;
  }
  return count;
}

namespace {

void print(const Expr& e, std::ostream& os) {
  auto list = [&](const char* op) {
    os << '(' << op;
    for (const auto& c : e.children()) {
      os << ' ';
      print(c, os);
    }
    os << ')';
  };
  switch (e.kind()) {
    case ExprKind::constant_true:
      os << "T";
      break;
    case ExprKind::constant_false:
      os << "F";
      break;
    case ExprKind::literal:
      os << e.lit().dimacs();
      break;
    case ExprKind::negation:
      list("not");
      break;
    case ExprKind::conjunction:
      list("and");
      break;
    case ExprKind::disjunction:
      list("or");
      break;
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(e, os);
  return os.str();
}

}  // namespace psl
