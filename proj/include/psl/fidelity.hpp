#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "psl/models.hpp"
#include "psl/pseudo.hpp"

namespace psl {

class FidelityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FidelityReport {
  std::size_t sample_id = 0;
  Sequence anchor;
  double entropy_approx_bits = 0.0;
  std::optional<double> entropy_model_bits;
  double kl_bits = 0.0;
  bool support_violation = false;
  std::vector<double> step_entropy_bits;
};

/// Entropy of each row in bits. Rows must sum to 1 within 1e-9.
std::vector<double> step_entropies(const ConditionalTable& t);

/// Entropy in bits of the product distribution defined by the table.
double entropy_product(const ConditionalTable& t);

/// -sum_y p(y) log2 p(y) by enumeration (k^n <= 2^20).
double entropy_model_exact(const SequenceModel& model);

struct KlResult {
  double bits = 0.0;
  bool support_violation = false;  // bits is +inf
};

/// KL(p~_y || p) in bits over the full sequence space (k^n <= 2^20).
KlResult kl_local(const ConditionalTable& t, const SequenceModel& model);

FidelityReport fidelity_report(const SequenceModel& model, const Sequence& anchor, std::size_t sample_id,
                               bool with_model_entropy = true);

}  // namespace psl
