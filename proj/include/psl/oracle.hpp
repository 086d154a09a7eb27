#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "psl/circuit.hpp"
#include "psl/models.hpp"
#include "psl/pseudo.hpp"
#include "psl/wmc.hpp"

// Slow reference implementations by exhaustive enumeration. They avoid the
// circuit structure entirely (only Boolean evaluation is used) so they can
// cross-check the fast paths.
namespace psl::oracle {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxVars = 24;

/// sum over satisfying assignments of prod exp(w). Linear space; var_count <= 24.
double wmc(const Circuit& c, const WeightMap& w);

/// Conditionals around y from direct joint ratios, without the log-space pipeline.
std::vector<double> conditionals(const SequenceModel& model, const Sequence& y);

/// p~_y(alpha) = sum over sequences satisfying c of prod_i L[i][y~_i]; k^n <= 2^20.
double local_probability(const Circuit& c, const CategoricalSpace& space, std::span<const double> cond);

/// -log mean_s p~_{y_s}(alpha) for the given anchors.
double psl_loss(const Circuit& c, const SequenceModel& model, std::span<const Sequence> anchors);

/// KL(p~_y || p) in bits over the full space.
double kl_bits(std::span<const double> cond, const SequenceModel& model);

}  // namespace psl::oracle
