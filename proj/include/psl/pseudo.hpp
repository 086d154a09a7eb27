#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "psl/circuit.hpp"
#include "psl/models.hpp"
#include "psl/wmc.hpp"

namespace psl {

class PslError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// n x k matrix of log p(y_i = c | y_-i) around an anchor sequence, with the
/// neighborhood log-joints it was normalized from.
struct ConditionalTable {
  std::size_t steps = 0;
  std::size_t categories = 0;
  std::vector<double> log_cond;    // row-major, steps x categories
  std::vector<double> log_joints;  // same layout
  Sequence anchor;                 // empty when built from bare joints

  double operator()(std::size_t i, std::size_t c) const { return log_cond[i * categories + c]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(log_cond).subspan(i * categories, categories);
  }
};

/// The n*k sequences at Hamming distance <= 1 from y, ordered by (position, category).
/// Entry (i, y_i) is y itself.
std::vector<Sequence> expand_neighborhood(const Sequence& y, const CategoricalSpace& space);

/// Model log-joints of the expanded neighborhood, same (position, category) layout.
std::vector<double> neighborhood_log_joints(const SequenceModel& model, const Sequence& y);

/// Row-wise normalization L[i][c] = J[i][c] - logsumexp_c' J[i][c'].
/// Throws PslError when a row is entirely -inf or contains NaN / +inf.
ConditionalTable conditionals_from_joints(std::size_t steps, std::size_t categories,
                                          std::span<const double> log_joints, Sequence anchor = {});

ConditionalTable conditional_table(const SequenceModel& model, const Sequence& y);

/// sum_i log p(y_i | y_-i).
double pseudo_loglik(const SequenceModel& model, const Sequence& y);

/// Leaf weights of the local product distribution over one-hot indicators:
/// Y_ic gets log_cond[i][c] and every negative literal gets log 1. Exact
/// for circuits that enforce one-hot steps.
WeightMap categorical_weights(const CategoricalSpace& space, std::span<const double> log_cond);

struct PslConfig {
  std::size_t samples = 1;
  /// Keep only the top-k conditionals per row (plus the anchor's own category).
  std::optional<std::size_t> top_k;
  std::uint64_t seed = 0;
  /// Penalize the constraint instead: loss = -log(1 - p~(alpha)).
  bool minimize = false;

  void validate(std::size_t categories) const;
};

struct PslSample {
  ConditionalTable table;            // conditionals fed to the circuit (after restriction)
  std::vector<bool> retained;        // per entry; false = weight forced to zero
  double log_wmc = 0.0;              // log p~_y(alpha)
  std::vector<double> grad_log_cond;    // d loss / d table.log_cond
  std::vector<double> grad_log_joints;  // d loss / d table.log_joints, through the normalization
};

struct PslResult {
  double loss = 0.0;
  bool infinite = false;
  std::vector<PslSample> samples;
};

/// Draws cfg.samples anchors from the model (positions with clamp[i] >= 0
/// fixed) and evaluates -log mean_s p~_{y_s}(alpha). The circuit must be over
/// the model space's indicator variables and should enforce one-hot steps.
/// Sampling is not differentiated through.
PslResult pseudo_semantic_loss(const Circuit& c, const SequenceModel& model, const PslConfig& cfg,
                               std::span<const int> clamp = {});

/// Same computation for caller-supplied anchors.
PslResult pseudo_semantic_loss_at(const Circuit& c, const SequenceModel& model, std::span<const Sequence> anchors,
                                  const PslConfig& cfg, std::span<const int> clamp = {});

/// grad += scale * d loss / d logits, chaining through every neighborhood log-joint.
void accumulate_parameter_gradient(const PslResult& r, const LogitTableModel& model, double scale,
                                   std::span<double> grad);

/// One row per step, k decimal probabilities (exp of the log-conditionals).
void write_table(const ConditionalTable& t, std::ostream& out);

}  // namespace psl
