#include "psl/fidelity.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace psl {

namespace {

constexpr double kInvLn2 = 1.4426950408889634;

void require_enumerable(const CategoricalSpace& space) {
  const auto total = sequence_count(space);
  if (total == 0 || total > (std::uint64_t{1} << 20))
    throw FidelityError("sequence space of " + std::to_string(space.categories()) + "^" +
                        std::to_string(space.steps()) + " is too large to enumerate");
}

}  // namespace

std::vector<double> step_entropies(const ConditionalTable& t) {
  std::vector<double> out(t.steps, 0.0);
  for (std::size_t i = 0; i < t.steps; ++i) {
    double mass = 0.0, h = 0.0;
    for (double l : t.row(i)) {
      const double p = std::exp(l);
      mass += p;
      if (p > 0.0) h -= p * l;
    }
    if (std::abs(mass - 1.0) > 1e-9) throw FidelityError("row " + std::to_string(i) + " is not normalized");
    out[i] = std::max(0.0, h * kInvLn2);
  }
  return out;
}

double entropy_product(const ConditionalTable& t) {
  double total = 0.0;
  for (double h : step_entropies(t)) total += h;
  return total;
}

double entropy_model_exact(const SequenceModel& model) {
  require_enumerable(model.space());
  double h = 0.0;
  for_each_sequence(model.space(), [&](const Sequence& y) {
    const double l = model.log_joint(y);
    if (l > -std::numeric_limits<double>::infinity()) h -= std::exp(l) * l;
  });
  return std::max(0.0, h * kInvLn2);
}

KlResult kl_local(const ConditionalTable& t, const SequenceModel& model) {
  const auto& sp = model.space();
  if (t.steps != sp.steps() || t.categories != sp.categories()) throw FidelityError("table does not match the model");
  require_enumerable(sp);
  KlResult r;
  double kl = 0.0;
  for_each_sequence(sp, [&](const Sequence& y) {
    if (r.support_violation) return;
    double lq = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) lq += t(i, static_cast<std::size_t>(y[i]));
    if (lq == -std::numeric_limits<double>::infinity()) return;
    const double lp = model.log_joint(y);
    if (lp == -std::numeric_limits<double>::infinity()) {
      r.support_violation = true;
      return;
    }
    kl += std::exp(lq) * (lq - lp);
  });
  r.bits = r.support_violation ? std::numeric_limits<double>::infinity() : kl * kInvLn2;
  return r;
}

FidelityReport fidelity_report(const SequenceModel& model, const Sequence& anchor, std::size_t sample_id,
                               bool with_model_entropy) {
  FidelityReport rep;
  rep.sample_id = sample_id;
  rep.anchor = anchor;
  const auto t = conditional_table(model, anchor);
  rep.step_entropy_bits = step_entropies(t);
  for (double h : rep.step_entropy_bits) rep.entropy_approx_bits += h;
  if (with_model_entropy) rep.entropy_model_bits = entropy_model_exact(model);
  const auto kl = kl_local(t, model);
  rep.kl_bits = kl.bits;
  rep.support_violation = kl.support_violation;
  return rep;
}

}  // namespace psl
