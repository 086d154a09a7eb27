#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "psl/circuit.hpp"
#include "psl/models.hpp"

namespace psl {

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  double step_size = 0.1;
  std::size_t steps = 1000;
  double lambda = 0.0;     // weight of the pseudo-semantic loss
  double ce_weight = 1.0;  // weight of the dataset cross-entropy
  std::uint64_t seed = 0;
  std::size_t samples = 1;  // PSL anchors per dataset item and step
  std::optional<std::size_t> top_k;
  double momentum = 0.0;
  std::size_t log_every = 0;     // 0: log only the final step
  std::size_t eval_samples = 0;  // completions drawn per log entry for the consistency rate

  void validate() const;
};

/// One training example. context[i] marks positions copied from target and
/// held fixed; the rest are predicted.
struct DataItem {
  std::vector<bool> context;
  Sequence target;

  std::vector<int> clamp() const;  // target value at context positions, -1 elsewhere
};

/// Whitespace-separated categories, one item per line; a trailing '*' marks a
/// context position ("0* 1 1 0"). Blank lines and '#' comments are skipped.
std::vector<DataItem> read_dataset(std::istream& in, const CategoricalSpace& space);
void write_dataset(std::span<const DataItem> items, std::ostream& out);

struct TrainMetrics {
  std::size_t step = 0;
  double loss = 0.0;
  double cross_entropy = 0.0;
  double psl = 0.0;
  std::optional<double> constraint_probability;  // exact, when k^n <= 2^16
  std::optional<double> consistency;             // fraction of sampled completions satisfying the circuit
};

/// Mean over items of -sum of log p(y_i | y_<i) over non-context positions,
/// and its gradient (added with the given scale).
double cross_entropy(const LogitTableModel& model, std::span<const DataItem> items, double scale,
                     std::span<double> grad);

/// Exact p(alpha) = sum over sequences y satisfying c of p(y). Requires k^n <= 2^20.
double constraint_probability(const Circuit& c, const SequenceModel& model);

/// Fraction of `count` completions (cycling through the items' contexts) that satisfy c.
double sampled_consistency(const Circuit& c, const SequenceModel& model, std::span<const DataItem> items,
                           std::size_t count, Rng& rng);

/// -log p(alpha) under the factorized model's marginals and its logit gradient.
double semantic_loss_factorized(const Circuit& c, const FactorizedModel& model, double scale,
                                std::span<double> grad);

/// Full-batch gradient descent on ce_weight * CE + lambda * mean item PSL.
/// Mutates the model; returns the metrics log.
std::vector<TrainMetrics> train_toy(LogitTableModel& model, const Circuit& c, std::span<const DataItem> items,
                                    const TrainConfig& cfg,
                                    const std::function<void(const TrainMetrics&)>& on_log = {});

/// Objective value and logit gradient for fixed PSL anchors (one list per item);
/// used by train_toy and by gradient checks.
double training_objective(const LogitTableModel& model, const Circuit& c, std::span<const DataItem> items,
                          std::span<const std::vector<Sequence>> anchors, const TrainConfig& cfg,
                          std::span<double> grad, double* ce_out = nullptr, double* psl_out = nullptr);

}  // namespace psl
