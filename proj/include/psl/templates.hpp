#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psl/formula.hpp"

namespace psl {

/// A generated constraint plus the categorical layout its variables follow
/// (absent for purely Boolean families such as grid_path and choose_k).
struct Template {
  std::string name;
  Formula formula;
  std::optional<CategoricalSpace> space;
};

/// n x n grid of n-ary cells (cell (r, c) is step r*n + c) with one-hot cells
/// and row/column uniqueness. With boxes = true and n a perfect square, the
/// sqrt(n) x sqrt(n) boxes must also be unique (Sudoku).
Template latin_square(std::size_t n, bool boxes = false);

/// Edge indicators of a rows x cols vertex grid: horizontal edges in
/// row-major order first, then vertical edges in row-major order.
struct GridEdges {
  std::size_t rows;
  std::size_t cols;
  std::size_t horizontal() const { return rows * (cols - 1); }
  std::size_t vertical() const { return (rows - 1) * cols; }
  std::size_t count() const { return horizontal() + vertical(); }
  std::size_t right_of(std::size_t r, std::size_t c) const { return r * (cols - 1) + c; }
  std::size_t below(std::size_t r, std::size_t c) const { return horizontal() + r * cols + c; }
};

/// Simple paths from the top-left to the bottom-right vertex, as a DNF with
/// one full edge assignment per path. Throws when more than max_paths exist.
Template grid_path(std::size_t rows, std::size_t cols, std::size_t max_paths = 200000);

/// Number of simple corner-to-corner paths (same enumeration as grid_path).
std::size_t count_grid_paths(std::size_t rows, std::size_t cols);

/// Exactly k of n Boolean variables are true.
Template choose_k(std::size_t n, std::size_t k);

/// Sequences of seq_len symbols over alphabet_size categories (one-hot) that
/// contain none of the patterns as a contiguous run at any offset.
Template banned_patterns(std::size_t alphabet_size, const std::vector<Sequence>& patterns, std::size_t seq_len);

/// Boolean variable v becomes a binary categorical step: v -> Y_{v,1} and
/// not v -> Y_{v,0}, conjoined with one-hot steps. Makes Boolean families
/// usable with the pseudo-semantic loss.
Template lift_binary(const Formula& f, std::string name = "lifted");

}  // namespace psl
