#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "psl/circuit.hpp"

namespace psl {

class WmcError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Natural-log weights of the positive and negative literal of each variable.
/// -inf encodes weight zero.
struct WeightMap {
  std::vector<double> pos;
  std::vector<double> neg;
  /// When set, exp(pos) + exp(neg) = 1 per variable (checked by validate()).
  bool probabilistic = false;

  std::size_t size() const { return pos.size(); }

  /// Bernoulli literals: pos = log p, neg = log(1 - p).
  static WeightMap from_probabilities(std::span<const double> p_true);
  /// All literal weights 1 (log weight 0): WMC becomes the model count.
  static WeightMap unit(std::size_t var_count);

  /// Throws WmcError on NaN, +inf, size mismatch or (when tagged) unnormalized pairs.
  void validate() const;
};

/// log of the sum over models of the product of literal weights, by one upward
/// pass (leaves emit weights, AND adds, OR log-sum-exps). Variables outside
/// the root's scope contribute log(w+ + w-).
double log_wmc(const Circuit& c, const WeightMap& w);

/// Evaluates many weight maps; results are in input order regardless of threads.
std::vector<double> log_wmc_batch(const Circuit& c, std::span<const WeightMap> ws, unsigned threads = 1);

struct SemanticLoss {
  double loss;     // -log_wmc, +inf when the constraint has probability zero
  bool infinite;
};

SemanticLoss semantic_loss(const Circuit& c, const WeightMap& w);

/// Partial derivatives of log WMC with respect to each literal's log-weight
/// (equivalently, the weighted fraction of models containing the literal).
struct WmcGradient {
  double log_wmc;
  std::vector<double> d_pos;
  std::vector<double> d_neg;
};

/// Upward pass plus one downward pass. Throws WmcError when WMC is zero.
WmcGradient grad_log_wmc(const Circuit& c, const WeightMap& w);

/// Weights file: one "<1-based var> <prob_true>" line per variable.
WeightMap read_weights(std::istream& in, std::size_t var_count);
void write_weights(const WeightMap& w, std::ostream& out);

}  // namespace psl
