#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace psl {

/// 0-based Boolean variable index.
struct VarId {
  std::uint32_t index = 0;

  constexpr auto operator<=>(const VarId&) const = default;
};

struct Literal {
  VarId var;
  bool positive = true;

  constexpr Literal negated() const { return {var, !positive}; }
  /// DIMACS-style signed 1-based encoding.
  constexpr std::int64_t dimacs() const {
    auto v = static_cast<std::int64_t>(var.index) + 1;
    return positive ? v : -v;
  }
  constexpr auto operator<=>(const Literal&) const = default;
};

inline constexpr Literal pos(std::uint32_t v) { return {VarId{v}, true}; }
inline constexpr Literal neg(std::uint32_t v) { return {VarId{v}, false}; }

enum class ExprKind : std::uint8_t { constant_true, constant_false, literal, conjunction, disjunction, negation };

class Expr;

struct ExprNode {
  ExprKind kind;
  Literal lit{};
  std::vector<Expr> children;
};

/// Immutable, shareable handle onto a formula node. Subtrees may be shared
/// between parents; the structure is always acyclic.
class Expr {
 public:
  Expr();  // constant true

  static Expr top();
  static Expr bottom();
  static Expr literal(Literal l);
  static Expr conj(std::vector<Expr> children);
  static Expr disj(std::vector<Expr> children);
  static Expr negate(Expr child);

  ExprKind kind() const { return node_->kind; }
  Literal lit() const { return node_->lit; }
  std::span<const Expr> children() const { return node_->children; }
  const ExprNode* get() const { return node_.get(); }

 private:
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const ExprNode> node_;
};

class FormulaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Boolean constraint over variables [0, var_count).
class Formula {
 public:
  Formula() = default;
  /// Throws FormulaError if any referenced variable is >= var_count.
  Formula(Expr root, std::size_t var_count);

  const Expr& root() const { return root_; }
  std::size_t var_count() const { return var_count_; }

 private:
  Expr root_;
  std::size_t var_count_ = 0;
};

/// Largest variable index referenced plus one (0 for variable-free expressions).
std::size_t referenced_var_bound(const Expr& e);

/// n steps of k categories, encoded one-hot as Boolean variable i*k + c.
class CategoricalSpace {
 public:
  CategoricalSpace(std::size_t steps, std::size_t categories);

  std::size_t steps() const { return steps_; }
  std::size_t categories() const { return categories_; }
  std::size_t var_count() const { return steps_ * categories_; }

  VarId var(std::size_t step, std::size_t category) const;
  std::size_t step_of(VarId v) const { return v.index / categories_; }
  std::size_t category_of(VarId v) const { return v.index % categories_; }

  bool operator==(const CategoricalSpace&) const = default;

 private:
  std::size_t steps_;
  std::size_t categories_;
};

using Sequence = std::vector<int>;

/// Total truth assignment, optionally carrying the categorical view it was built from.
struct Assignment {
  std::vector<bool> values;
  std::optional<Sequence> categories;

  static Assignment from_bits(std::uint64_t bits, std::size_t var_count);
  /// One-hot encoding of seq; throws FormulaError when a category is out of range.
  static Assignment from_categories(const CategoricalSpace& space, const Sequence& seq);

  bool operator[](VarId v) const { return values[v.index]; }
};

/// Throws FormulaError when the assignment does not cover the formula's variables.
bool evaluate(const Formula& f, const Assignment& a);
bool evaluate(const Expr& e, const std::vector<bool>& values);

/// Exactly one of vars is true: one at-least-one clause plus pairwise exclusions.
Expr exactly_one(std::span<const VarId> vars);
Expr at_most_one(std::span<const VarId> vars);

/// Conjunction of exactly_one over each step's indicator block.
Expr one_hot_domain(const CategoricalSpace& space);

/// Brute-force count of satisfying assignments; var_count must be <= 30.
std::uint64_t count_models_brute_force(const Formula& f);

std::string to_string(const Expr& e);

}  // namespace psl
