#include "psl/templates.hpp"

#include <cmath>
#include <functional>
#include <map>

namespace psl {

namespace {

std::size_t exact_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  return r * r == n ? r : 0;
}

}  // namespace

Template latin_square(std::size_t n, bool boxes) {
  if (n == 0) throw FormulaError("latin_square needs n >= 1");
  const std::size_t box = exact_sqrt(n);
  if (boxes && box == 0) throw FormulaError("box uniqueness needs a perfect-square n");

  CategoricalSpace space(n * n, n);
  std::vector<Expr> parts{one_hot_domain(space)};
  auto cell = [&](std::size_t r, std::size_t c, std::size_t v) { return space.var(r * n + c, v); };

  std::vector<VarId> group(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) group[c] = cell(r, c, v);
      parts.push_back(at_most_one(group));
    }
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t r = 0; r < n; ++r) group[r] = cell(r, c, v);
      parts.push_back(at_most_one(group));
    }
    if (!boxes) continue;
    for (std::size_t br = 0; br < n; br += box) {
      for (std::size_t bc = 0; bc < n; bc += box) {
        std::size_t idx = 0;
        for (std::size_t r = br; r < br + box; ++r)
          for (std::size_t c = bc; c < bc + box; ++c) group[idx++] = cell(r, c, v);
        parts.push_back(at_most_one(group));
      }
    }
  }
  return {boxes ? "sudoku" : "latin_square", Formula(Expr::conj(std::move(parts)), space.var_count()), space};
}

namespace {

template <typename Visit>
void for_each_grid_path(std::size_t rows, std::size_t cols, Visit&& visit) {
  GridEdges edges{rows, cols};
  std::vector<bool> visited(rows * cols, false);
  std::vector<bool> used(edges.count(), false);
  const std::size_t goal = rows * cols - 1;

  std::function<void(std::size_t)> dfs = [&](std::size_t v) {
    if (v == goal) {
      visit(used);
      return;
    }
    const std::size_t r = v / cols;
    const std::size_t c = v % cols;
    auto step = [&](std::size_t next, std::size_t edge) {
      if (visited[next]) return;
      visited[next] = true;
      used[edge] = true;
      dfs(next);
      used[edge] = false;
      visited[next] = false;
    };
    if (c + 1 < cols) step(v + 1, edges.right_of(r, c));
    if (r + 1 < rows) step(v + cols, edges.below(r, c));
    if (c > 0) step(v - 1, edges.right_of(r, c - 1));
    if (r > 0) step(v - cols, edges.below(r - 1, c));
  };
  visited[0] = true;
  dfs(0);
}

}  // namespace

std::size_t count_grid_paths(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw FormulaError("grid needs at least one vertex per side");
  std::size_t count = 0;
  for_each_grid_path(rows, cols, [&](const std::vector<bool>&) { ++count; });
  return count;
}

Template grid_path(std::size_t rows, std::size_t cols, std::size_t max_paths) {
  if (rows == 0 || cols == 0) throw FormulaError("grid needs at least one vertex per side");
  GridEdges edges{rows, cols};
  std::vector<Expr> terms;
  for_each_grid_path(rows, cols, [&](const std::vector<bool>& used) {
    if (terms.size() == max_paths)
      throw FormulaError("grid_path: more than " + std::to_string(max_paths) + " paths; grid too large to enumerate");
    std::vector<Expr> lits;
    lits.reserve(used.size());
    for (std::size_t e = 0; e < used.size(); ++e)
      lits.push_back(Expr::literal({VarId{static_cast<std::uint32_t>(e)}, used[e]}));
    terms.push_back(Expr::conj(std::move(lits)));
  });
  return {"grid_path", Formula(Expr::disj(std::move(terms)), edges.count()), std::nullopt};
}

Template choose_k(std::size_t n, std::size_t k) {
  if (k > n) throw FormulaError("choose_k needs k <= n");
  // count(i, j): exactly j of variables i..n-1 are true. Shared sub-expressions keep this O(n*k).
  std::map<std::pair<std::size_t, std::size_t>, Expr> memo;
  std::function<Expr(std::size_t, std::size_t)> count = [&](std::size_t i, std::size_t j) -> Expr {
    if (j > n - i) return Expr::bottom();
    if (i == n) return Expr::top();
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const VarId v{static_cast<std::uint32_t>(i)};
    std::vector<Expr> branches;
    if (j > 0) branches.push_back(Expr::conj({Expr::literal({v, true}), count(i + 1, j - 1)}));
    branches.push_back(Expr::conj({Expr::literal({v, false}), count(i + 1, j)}));
    Expr e = Expr::disj(std::move(branches));
    memo.emplace(key, e);
    return e;
  };
  return {"choose_k", Formula(count(0, k), n), std::nullopt};
}

Template banned_patterns(std::size_t alphabet_size, const std::vector<Sequence>& patterns, std::size_t seq_len) {
  CategoricalSpace space(seq_len, alphabet_size);
  std::vector<Expr> parts{one_hot_domain(space)};
  for (const auto& pattern : patterns) {
    if (pattern.empty()) throw FormulaError("banned_patterns: empty pattern");
    if (pattern.size() > seq_len) throw FormulaError("banned_patterns: pattern longer than seq_len");
    for (int sym : pattern)
      if (sym < 0 || static_cast<std::size_t>(sym) >= alphabet_size)
        throw FormulaError("banned_patterns: symbol " + std::to_string(sym) + " outside the alphabet");
    for (std::size_t offset = 0; offset + pattern.size() <= seq_len; ++offset) {
      std::vector<Expr> clause;
      for (std::size_t j = 0; j < pattern.size(); ++j)
        clause.push_back(Expr::literal({space.var(offset + j, static_cast<std::size_t>(pattern[j])), false}));
      parts.push_back(Expr::disj(std::move(clause)));
    }
  }
  return {"banned_patterns", Formula(Expr::conj(std::move(parts)), space.var_count()), space};
}

Template lift_binary(const Formula& f, std::string name) {
  const CategoricalSpace space(f.var_count(), 2);
  std::map<const void*, Expr> memo;
  std::function<Expr(const Expr&)> lift = [&](const Expr& e) -> Expr {
    if (auto it = memo.find(e.get()); it != memo.end()) return it->second;
    Expr out = e;
    switch (e.kind()) {
      case ExprKind::constant_true:
      case ExprKind::constant_false:
        break;
      case ExprKind::literal:
        out = Expr::literal(pos(space.var(e.lit().var.index, e.lit().positive ? 1 : 0).index));
        break;
      case ExprKind::negation:
        out = Expr::negate(lift(e.children()[0]));
        break;
      case ExprKind::conjunction:
      case ExprKind::disjunction: {
        std::vector<Expr> ch;
        for (const auto& c : e.children()) ch.push_back(lift(c));
        out = e.kind() == ExprKind::conjunction ? Expr::conj(std::move(ch)) : Expr::disj(std::move(ch));
        break;
      }
    }
    memo.emplace(e.get(), out);
    return out;
  };
  Expr body = lift(f.root());
  if (f.var_count() > 0) body = Expr::conj({one_hot_domain(space), body});
  return {std::move(name), Formula(std::move(body), space.var_count()), space};
}

}  // namespace psl
