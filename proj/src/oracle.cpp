#include "psl/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace psl::oracle {

namespace {

void require_small_space(const CategoricalSpace& space) {
  const auto total = sequence_count(space);
  if (total == 0 || total > (std::uint64_t{1} << 20)) throw OracleError("sequence space too large to enumerate");
}

double product(const Sequence& y, std::size_t k, std::span<const double> cond) {
  double p = 1.0;
  for (std::size_t i = 0; i < y.size(); ++i) p *= cond[i * k + static_cast<std::size_t>(y[i])];
  return p;
}

}  // namespace

double wmc(const Circuit& c, const WeightMap& w) {
  const std::size_t n = c.var_count();
  if (n > kMaxVars) throw OracleError("oracle WMC supports at most 24 variables, got " + std::to_string(n));
  if (w.size() != n) throw OracleError("weight map does not match the circuit");
  double total = 0.0;
  std::vector<bool> values(n);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    for (std::size_t v = 0; v < n; ++v) values[v] = (bits >> v) & 1U;
    if (!c.evaluate(values)) continue;
    double prod = 1.0;
    for (std::size_t v = 0; v < n; ++v) prod *= std::exp(values[v] ? w.pos[v] : w.neg[v]);
    total += prod;
  }
  return total;
}

std::vector<double> conditionals(const SequenceModel& model, const Sequence& y) {
  const auto& sp = model.space();
  const std::size_t n = sp.steps(), k = sp.categories();
  std::vector<double> out(n * k);
  Sequence z = y;
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      z[i] = static_cast<int>(c);
      out[i * k + c] = std::exp(model.log_joint(z));
      denom += out[i * k + c];
    }
    if (!(denom > 0.0)) throw OracleError("neighborhood row " + std::to_string(i) + " has zero mass");
    for (std::size_t c = 0; c < k; ++c) out[i * k + c] /= denom;
    z[i] = y[i];
  }
  return out;
}

double local_probability(const Circuit& c, const CategoricalSpace& space, std::span<const double> cond) {
  require_small_space(space);
  if (c.var_count() != space.var_count()) throw OracleError("circuit does not match the space");
  double total = 0.0;
  for_each_sequence(space, [&](const Sequence& y) {
    if (c.evaluate(Assignment::from_categories(space, y).values)) total += product(y, space.categories(), cond);
  });
  return total;
}

double psl_loss(const Circuit& c, const SequenceModel& model, std::span<const Sequence> anchors) {
  if (anchors.empty()) throw OracleError("no anchors");
  double mean = 0.0;
  for (const auto& y : anchors) mean += local_probability(c, model.space(), conditionals(model, y));
  mean /= static_cast<double>(anchors.size());
  return mean > 0.0 ? -std::log(mean) : std::numeric_limits<double>::infinity();
}

double kl_bits(std::span<const double> cond, const SequenceModel& model) {
  const auto& sp = model.space();
  require_small_space(sp);
  double kl = 0.0;
  bool violated = false;
  for_each_sequence(sp, [&](const Sequence& y) {
    const double q = product(y, sp.categories(), cond);
    if (q == 0.0) return;
    const double p = std::exp(model.log_joint(y));
    if (p == 0.0) violated = true;
    else kl += q * std::log2(q / p);
  });
  return violated ? std::numeric_limits<double>::infinity() : kl;
}

}  // namespace psl::oracle
