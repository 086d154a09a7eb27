#pragma once

#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "psl/formula.hpp"

namespace psl {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Seeded 64-bit Mersenne Twister with a portable uniform draw.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) built from the top 53 bits of one engine output.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal(double mean, double stddev);
  /// Index i drawn with probability exp(log_probs[i]); log_probs must be normalized.
  std::size_t categorical(std::span<const double> log_probs);

 private:
  std::mt19937_64 engine_;
};

/// A distribution over length-n sequences of k categories factored by the
/// chain rule p(y) = prod_i p(y_i | y_<i).
class SequenceModel {
 public:
  virtual ~SequenceModel() = default;

  virtual const CategoricalSpace& space() const = 0;

  /// Writes log p(y_i = c | y_<i = prefix) for every category c into out.
  virtual void step_log_probs(std::size_t i, std::span<const int> prefix, std::span<double> out) const = 0;

  /// Sum of the step conditionals along y. Throws ModelError for invalid sequences.
  virtual double log_joint(std::span<const int> y) const;

  /// Exact ancestral sample. Positions with clamp[i] >= 0 are fixed to that value.
  Sequence sample(Rng& rng, std::span<const int> clamp = {}) const;
  Sequence sample(std::uint64_t seed) const;

  void validate(std::span<const int> y) const;
};

/// A model whose step conditionals are the softmax of one logit row chosen by
/// (position, context). Parameters are the concatenated logit rows.
class LogitTableModel : public SequenceModel {
 public:
  const CategoricalSpace& space() const override { return space_; }
  void step_log_probs(std::size_t i, std::span<const int> prefix, std::span<double> out) const override;

  std::size_t parameter_count() const { return logits_.size(); }
  std::span<const double> parameters() const { return logits_; }
  std::span<double> parameters() { return logits_; }
  std::size_t slot_count() const { return logits_.size() / space_.categories(); }
  std::span<const double> slot_logits(std::size_t slot) const;

  /// Row of the logit table used at step i after prefix y_<i.
  virtual std::size_t slot(std::size_t i, std::span<const int> prefix) const = 0;

  /// grad += scale * d log_joint(y) / d parameters.
  void accumulate_log_joint_gradient(std::span<const int> y, double scale, std::span<double> grad) const;

 protected:
  LogitTableModel(CategoricalSpace space, std::size_t slots);

  CategoricalSpace space_;
  std::vector<double> logits_;
};

/// Independent categorical steps (one logit row per position).
class FactorizedModel : public LogitTableModel {
 public:
  explicit FactorizedModel(CategoricalSpace space);
  FactorizedModel(CategoricalSpace space, std::vector<double> logits);

  std::size_t slot(std::size_t i, std::span<const int>) const override { return i; }
};

/// Autoregressive model conditioning on the last min(m, i) categories.
/// Rows are ordered by position, then by the context read as a base-k number
/// with the oldest symbol most significant. m = n - 1 is the full tabular model.
class MarkovARModel : public LogitTableModel {
 public:
  MarkovARModel(CategoricalSpace space, std::size_t window);
  MarkovARModel(CategoricalSpace space, std::size_t window, std::vector<double> logits);

  std::size_t window() const { return window_; }
  std::size_t slot(std::size_t i, std::span<const int> prefix) const override;

  static std::size_t slots_needed(const CategoricalSpace& space, std::size_t window);

 private:
  std::size_t window_;
  std::vector<std::size_t> offset_;
};

/// Fills parameters with independent N(0, stddev^2) draws.
void randomize(LogitTableModel& model, Rng& rng, double stddev = 1.0);

/// Model file: "model <factorized|markov> n=<n> k=<k> m=<m>" then one line of
/// k logits per row in slot order.
void write_model(const LogitTableModel& model, std::ostream& out);
std::unique_ptr<LogitTableModel> read_model(std::istream& in);

/// Visits every sequence of the space in lexicographic order (k^n must fit in 2^30).
template <typename Visit>
void for_each_sequence(const CategoricalSpace& space, Visit&& visit) {
  Sequence y(space.steps(), 0);
  const int k = static_cast<int>(space.categories());
  while (true) {
    visit(static_cast<const Sequence&>(y));
    std::size_t i = y.size();
    while (i > 0) {
      --i;
      if (++y[i] < k) break;
      y[i] = 0;
      if (i == 0) return;
    }
    if (y.empty()) return;
  }
}

/// Number of sequences k^n, or 0 if it exceeds 2^62.
std::uint64_t sequence_count(const CategoricalSpace& space);

}  // namespace psl
