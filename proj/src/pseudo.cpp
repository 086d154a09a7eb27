#include "psl/pseudo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <numeric>

#include "psl/logmath.hpp"

namespace psl {

std::vector<Sequence> expand_neighborhood(const Sequence& y, const CategoricalSpace& space) {
  Assignment::from_categories(space, y);  // validates the categorical view
  std::vector<Sequence> out;
  out.reserve(space.steps() * space.categories());
  for (std::size_t i = 0; i < space.steps(); ++i) {
    for (std::size_t c = 0; c < space.categories(); ++c) {
      Sequence z = y;
      z[i] = static_cast<int>(c);
      out.push_back(std::move(z));
    }
  }
  return out;
}

std::vector<double> neighborhood_log_joints(const SequenceModel& model, const Sequence& y) {
  model.validate(y);
  const auto& sp = model.space();
  std::vector<double> out(sp.steps() * sp.categories());
  Sequence z = y;
  const double own = model.log_joint(y);
  for (std::size_t i = 0; i < sp.steps(); ++i) {
    for (std::size_t c = 0; c < sp.categories(); ++c) {
      if (static_cast<int>(c) == y[i]) {
        out[i * sp.categories() + c] = own;
        continue;
      }
      z[i] = static_cast<int>(c);
      out[i * sp.categories() + c] = model.log_joint(z);
    }
    z[i] = y[i];
  }
  return out;
}

namespace {

// Normalizes row i of joints over the entries with keep[c] set; others become -inf.
void normalize_row(std::span<const double> joints, const std::vector<bool>* keep, std::size_t offset,
                   std::span<double> out, std::size_t row_index) {
  std::vector<double> kept;
  kept.reserve(joints.size());
  for (std::size_t c = 0; c < joints.size(); ++c) {
    const double x = joints[c];
    if (std::isnan(x) || x == std::numeric_limits<double>::infinity())
      throw PslError("row " + std::to_string(row_index) + ": joint is NaN or +inf");
    if (!keep || (*keep)[offset + c]) kept.push_back(x);
  }
  const double z = log_sum_exp(kept);
  if (z == kNegInf) throw PslError("row " + std::to_string(row_index) + ": every joint is zero");
  for (std::size_t c = 0; c < joints.size(); ++c)
    out[c] = (!keep || (*keep)[offset + c]) ? joints[c] - z : kNegInf;
}

}  // namespace

ConditionalTable conditionals_from_joints(std::size_t steps, std::size_t categories,
                                          std::span<const double> log_joints, Sequence anchor) {
  if (log_joints.size() != steps * categories) throw PslError("joint matrix has the wrong shape");
  ConditionalTable t;
  t.steps = steps;
  t.categories = categories;
  t.log_joints.assign(log_joints.begin(), log_joints.end());
  t.log_cond.resize(log_joints.size());
  t.anchor = std::move(anchor);
  for (std::size_t i = 0; i < steps; ++i)
    normalize_row(log_joints.subspan(i * categories, categories), nullptr, 0,
                  std::span<double>(t.log_cond).subspan(i * categories, categories), i);
  return t;
}

ConditionalTable conditional_table(const SequenceModel& model, const Sequence& y) {
  const auto& sp = model.space();
  return conditionals_from_joints(sp.steps(), sp.categories(), neighborhood_log_joints(model, y), y);
}

double pseudo_loglik(const SequenceModel& model, const Sequence& y) {
  auto t = conditional_table(model, y);
  double total = 0.0;
  for (std::size_t i = 0; i < t.steps; ++i) total += t(i, static_cast<std::size_t>(y[i]));
  return total;
}

WeightMap categorical_weights(const CategoricalSpace& space, std::span<const double> log_cond) {
  if (log_cond.size() != space.var_count()) throw PslError("conditional table does not match the space");
  WeightMap w;
  w.pos.assign(log_cond.begin(), log_cond.end());
  w.neg.assign(space.var_count(), 0.0);
  return w;
}

void PslConfig::validate(std::size_t categories) const {
  if (samples < 1) throw PslError("sample count must be at least 1");
  if (top_k && (*top_k < 1 || *top_k > categories)) throw PslError("top-k must lie in [1, k]");
}

namespace {

// Entries kept per row: everything, or the top-k conditionals plus the anchor's
// category (clamped rows keep only the clamped value). Empty result = unrestricted.
std::vector<bool> retained_entries(const ConditionalTable& full, const PslConfig& cfg, std::span<const int> clamp) {
  const std::size_t n = full.steps, k = full.categories;
  const bool restrict_topk = cfg.top_k && *cfg.top_k < k;
  bool any_clamp = false;
  for (int v : clamp) any_clamp = any_clamp || v >= 0;
  if (!restrict_topk && !any_clamp) return {};
  std::vector<bool> keep(n * k, true);
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < n; ++i) {
    if (!clamp.empty() && clamp[i] >= 0) {
      for (std::size_t c = 0; c < k; ++c) keep[i * k + c] = static_cast<int>(c) == clamp[i];
      continue;
    }
    if (!restrict_topk) continue;
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return full(i, a) > full(i, b); });
    for (std::size_t c = 0; c < k; ++c) keep[i * k + c] = false;
    for (std::size_t r = 0; r < *cfg.top_k; ++r) keep[i * k + idx[r]] = true;
    keep[i * k + static_cast<std::size_t>(full.anchor[i])] = true;
  }
  return keep;
}

PslSample evaluate_anchor(const Circuit& c, const SequenceModel& model, const Sequence& y, const PslConfig& cfg,
                          std::span<const int> clamp) {
  const auto& sp = model.space();
  const std::size_t n = sp.steps(), k = sp.categories();
  PslSample s;
  s.table = conditional_table(model, y);
  auto keep = retained_entries(s.table, cfg, clamp);
  if (!keep.empty()) {
    for (std::size_t i = 0; i < n; ++i)
      normalize_row(std::span<const double>(s.table.log_joints).subspan(i * k, k), &keep, i * k,
                    std::span<double>(s.table.log_cond).subspan(i * k, k), i);
    s.retained = std::move(keep);
  } else {
    s.retained.assign(n * k, true);
  }
  s.log_wmc = log_wmc(c, categorical_weights(sp, s.table.log_cond));
  return s;
}

}  // namespace

PslResult pseudo_semantic_loss_at(const Circuit& c, const SequenceModel& model, std::span<const Sequence> anchors,
                                  const PslConfig& cfg, std::span<const int> clamp) {
  const auto& sp = model.space();
  cfg.validate(sp.categories());
  if (anchors.empty()) throw PslError("at least one anchor sequence is required");
  if (c.var_count() != sp.var_count())
    throw PslError("circuit has " + std::to_string(c.var_count()) + " variables but the model space has " +
                   std::to_string(sp.var_count()) + " indicators");
  if (!clamp.empty() && clamp.size() != sp.steps()) throw PslError("clamp length does not match the model");
  require_tractable(c);

  PslResult r;
  std::vector<double> lws;
  for (const auto& y : anchors) {
    for (std::size_t i = 0; i < clamp.size(); ++i)
      if (clamp[i] >= 0 && y[i] != clamp[i]) throw PslError("anchor disagrees with the clamped context");
    r.samples.push_back(evaluate_anchor(c, model, y, cfg, clamp));
    lws.push_back(r.samples.back().log_wmc);
  }

  const double log_s = std::log(static_cast<double>(anchors.size()));
  const double log_mean = log_sum_exp(lws) - log_s;
  // d loss / d log_wmc_s
  std::vector<double> dlw(lws.size(), 0.0);
  if (!cfg.minimize) {
    if (log_mean == kNegInf) {
      r.loss = std::numeric_limits<double>::infinity();
      r.infinite = true;
    } else {
      r.loss = -log_mean;
      for (std::size_t s = 0; s < lws.size(); ++s) dlw[s] = -std::exp(lws[s] - log_s - log_mean);
    }
  } else {
    const double log_complement = log1m_exp(std::min(log_mean, 0.0));
    if (log_complement == kNegInf) {
      r.loss = std::numeric_limits<double>::infinity();
      r.infinite = true;
    } else {
      r.loss = -log_complement;
      for (std::size_t s = 0; s < lws.size(); ++s) dlw[s] = std::exp(lws[s] - log_s - log_complement);
    }
  }

  const std::size_t n = sp.steps(), k = sp.categories();
  for (std::size_t s = 0; s < r.samples.size(); ++s) {
    auto& smp = r.samples[s];
    smp.grad_log_cond.assign(n * k, 0.0);
    smp.grad_log_joints.assign(n * k, 0.0);
    if (dlw[s] == 0.0 || smp.log_wmc == kNegInf) continue;
    auto g = grad_log_wmc(c, categorical_weights(sp, smp.table.log_cond));
    for (std::size_t i = 0; i < n; ++i) {
      const bool clamped = !clamp.empty() && clamp[i] >= 0;
      double row_sum = 0.0;
      for (std::size_t col = 0; col < k; ++col) {
        const std::size_t e = i * k + col;
        if (!smp.retained[e]) continue;
        smp.grad_log_cond[e] = dlw[s] * g.d_pos[sp.var(i, col).index];
        row_sum += smp.grad_log_cond[e];
      }
      if (clamped) continue;
      for (std::size_t col = 0; col < k; ++col) {
        const std::size_t e = i * k + col;
        if (!smp.retained[e]) continue;
        smp.grad_log_joints[e] = smp.grad_log_cond[e] - std::exp(smp.table.log_cond[e]) * row_sum;
      }
    }
  }
  return r;
}

PslResult pseudo_semantic_loss(const Circuit& c, const SequenceModel& model, const PslConfig& cfg,
                               std::span<const int> clamp) {
  cfg.validate(model.space().categories());
  Rng rng(cfg.seed);
  std::vector<Sequence> anchors;
  for (std::size_t s = 0; s < cfg.samples; ++s) anchors.push_back(model.sample(rng, clamp));
  return pseudo_semantic_loss_at(c, model, anchors, cfg, clamp);
}

void accumulate_parameter_gradient(const PslResult& r, const LogitTableModel& model, double scale,
                                   std::span<double> grad) {
  const auto& sp = model.space();
  const std::size_t n = sp.steps(), k = sp.categories();
  for (const auto& smp : r.samples) {
    Sequence z = smp.table.anchor;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t col = 0; col < k; ++col) {
        const double g = smp.grad_log_joints[i * k + col];
        if (g == 0.0) continue;
        z[i] = static_cast<int>(col);
        model.accumulate_log_joint_gradient(z, scale * g, grad);
      }
      z[i] = smp.table.anchor[i];
    }
  }
}

void write_table(const ConditionalTable& t, std::ostream& out) {
  char buf[40];
  for (std::size_t i = 0; i < t.steps; ++i) {
    for (std::size_t c = 0; c < t.categories; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", std::exp(t(i, c)));
      out << (c ? " " : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace psl
