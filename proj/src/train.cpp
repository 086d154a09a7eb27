#include "psl/train.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "psl/dimacs.hpp"
#include "psl/logmath.hpp"
#include "psl/pseudo.hpp"
#include "psl/wmc.hpp"

namespace psl {

void TrainConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) throw TrainError("step size must be positive");
  if (!(lambda >= 0.0) || !(ce_weight >= 0.0)) throw TrainError("loss weights must be non-negative");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw TrainError("momentum must lie in [0, 1)");
  if (samples < 1) throw TrainError("sample count must be at least 1");
}

std::vector<int> DataItem::clamp() const {
  std::vector<int> out(target.size(), -1);
  for (std::size_t i = 0; i < target.size() && i < context.size(); ++i)
    if (context[i]) out[i] = target[i];
  return out;
}

std::vector<DataItem> read_dataset(std::istream& in, const CategoricalSpace& space) {
  std::vector<DataItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    DataItem item;
    while (ls >> tok) {
      bool ctx = false;
      if (tok.back() == '*') {
        ctx = true;
        tok.pop_back();
      }
      int v = -1;
      try {
        std::size_t used = 0;
        v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError(line_no, "malformed category '" + tok + "'");
      }
      if (v < 0 || static_cast<std::size_t>(v) >= space.categories())
        throw ParseError(line_no, "category " + std::to_string(v) + " out of range");
      item.target.push_back(v);
      item.context.push_back(ctx);
    }
    if (item.target.empty()) continue;
    if (item.target.size() != space.steps())
      throw ParseError(line_no, "expected " + std::to_string(space.steps()) + " categories, got " +
                                    std::to_string(item.target.size()));
    items.push_back(std::move(item));
  }
  return items;
}

void write_dataset(std::span<const DataItem> items, std::ostream& out) {
  for (const auto& item : items) {
    for (std::size_t i = 0; i < item.target.size(); ++i)
      out << (i ? " " : "") << item.target[i] << (item.context[i] ? "*" : "");
    out << '\n';
  }
}

double cross_entropy(const LogitTableModel& model, std::span<const DataItem> items, double scale,
                     std::span<double> grad) {
  if (items.empty()) return 0.0;
  const std::size_t k = model.space().categories();
  const double inv = 1.0 / static_cast<double>(items.size());
  double total = 0.0;
  std::vector<double> lp(k);
  for (const auto& item : items) {
    const auto& y = item.target;
    model.validate(y);
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (item.context[i]) continue;
      const auto prefix = std::span<const int>(y).first(i);
      model.step_log_probs(i, prefix, lp);
      const auto yi = static_cast<std::size_t>(y[i]);
      total -= lp[yi];
      if (grad.empty()) continue;
      const std::size_t s = model.slot(i, prefix);
      for (std::size_t c = 0; c < k; ++c)
        grad[s * k + c] += scale * inv * (std::exp(lp[c]) - (c == yi ? 1.0 : 0.0));
    }
  }
  return total * inv;
}

namespace {

std::vector<bool> one_hot(const CategoricalSpace& space, const Sequence& y) {
  return Assignment::from_categories(space, y).values;
}

void require_small(const CategoricalSpace& space, std::uint64_t limit) {
  const auto total = sequence_count(space);
  if (total == 0 || total > limit) throw TrainError("sequence space too large for exhaustive enumeration");
}

}  // namespace

double constraint_probability(const Circuit& c, const SequenceModel& model) {
  const auto& sp = model.space();
  require_small(sp, std::uint64_t{1} << 20);
  if (c.var_count() != sp.var_count()) throw TrainError("circuit does not match the model space");
  double total = 0.0;
  for_each_sequence(sp, [&](const Sequence& y) {
    if (c.evaluate(one_hot(sp, y))) total += std::exp(model.log_joint(y));
  });
  return total;
}

double sampled_consistency(const Circuit& c, const SequenceModel& model, std::span<const DataItem> items,
                           std::size_t count, Rng& rng) {
  if (count == 0) return 0.0;
  const auto& sp = model.space();
  std::size_t ok = 0;
  for (std::size_t s = 0; s < count; ++s) {
    std::vector<int> clamp;
    if (!items.empty()) clamp = items[s % items.size()].clamp();
    if (c.evaluate(one_hot(sp, model.sample(rng, clamp)))) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(count);
}

double semantic_loss_factorized(const Circuit& c, const FactorizedModel& model, double scale,
                                std::span<double> grad) {
  const auto& sp = model.space();
  const std::size_t n = sp.steps(), k = sp.categories();
  std::vector<double> logp(n * k);
  for (std::size_t i = 0; i < n; ++i) model.step_log_probs(i, {}, std::span<double>(logp).subspan(i * k, k));
  const auto w = categorical_weights(sp, logp);
  const double lw = log_wmc(c, w);
  if (lw == kNegInf) throw WmcError("semantic loss is infinite: the constraint has probability zero");
  if (!grad.empty()) {
    auto g = grad_log_wmc(c, w);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t col = 0; col < k; ++col) row += g.d_pos[i * k + col];
      for (std::size_t col = 0; col < k; ++col) {
        const double dlogp = g.d_pos[i * k + col];
        grad[i * k + col] -= scale * (dlogp - std::exp(logp[i * k + col]) * row);
      }
    }
  }
  return -lw;
}

double training_objective(const LogitTableModel& model, const Circuit& c, std::span<const DataItem> items,
                          std::span<const std::vector<Sequence>> anchors, const TrainConfig& cfg,
                          std::span<double> grad, double* ce_out, double* psl_out) {
  double ce = 0.0, psl_total = 0.0;
  if (cfg.ce_weight > 0.0) ce = cross_entropy(model, items, cfg.ce_weight, grad);
  if (cfg.lambda > 0.0) {
    if (anchors.size() != items.size()) throw TrainError("one anchor list per dataset item is required");
    PslConfig pc;
    pc.samples = cfg.samples;
    pc.top_k = cfg.top_k;
    const double per_item = cfg.lambda / static_cast<double>(items.size());
    for (std::size_t j = 0; j < items.size(); ++j) {
      const auto clamp = items[j].clamp();
      auto r = pseudo_semantic_loss_at(c, model, anchors[j], pc, clamp);
      if (r.infinite) throw TrainError("pseudo-semantic loss is infinite for dataset item " + std::to_string(j));
      psl_total += r.loss;
      if (!grad.empty()) accumulate_parameter_gradient(r, model, per_item, grad);
    }
    psl_total /= static_cast<double>(items.size());
  }
  if (ce_out) *ce_out = ce;
  if (psl_out) *psl_out = psl_total;
  return cfg.ce_weight * ce + cfg.lambda * psl_total;
}

std::vector<TrainMetrics> train_toy(LogitTableModel& model, const Circuit& c, std::span<const DataItem> items,
                                    const TrainConfig& cfg, const std::function<void(const TrainMetrics&)>& on_log) {
  cfg.validate();
  if (items.empty()) throw TrainError("dataset is empty");
  if (c.var_count() != model.space().var_count()) throw TrainError("circuit does not match the model space");
  for (const auto& item : items) model.validate(item.target);
  if (cfg.lambda > 0.0) require_tractable(c);

  const auto total = sequence_count(model.space());
  const bool exact = total != 0 && total <= (std::uint64_t{1} << 16);
  Rng rng(cfg.seed);
  Rng eval_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  const std::size_t p = model.parameter_count();
  std::vector<double> grad(p), velocity(p, 0.0);
  std::vector<std::vector<Sequence>> anchors(items.size());
  std::vector<TrainMetrics> log;

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    if (cfg.lambda > 0.0)
      for (std::size_t j = 0; j < items.size(); ++j) {
        const auto clamp = items[j].clamp();
        anchors[j].clear();
        for (std::size_t s = 0; s < cfg.samples; ++s) anchors[j].push_back(model.sample(rng, clamp));
      }
    std::fill(grad.begin(), grad.end(), 0.0);
    TrainMetrics m;
    m.step = step;
    m.loss = training_objective(model, c, items, anchors, cfg, grad, &m.cross_entropy, &m.psl);
    for (std::size_t q = 0; q < p; ++q)
      if (!std::isfinite(grad[q]))
        throw TrainError("non-finite gradient at step " + std::to_string(step) + ", parameter " + std::to_string(q) +
                         " (loss " + std::to_string(m.loss) + ")");

    const bool last = step + 1 == cfg.steps;
    if (last || (cfg.log_every && step % cfg.log_every == 0)) {
      if (exact) m.constraint_probability = constraint_probability(c, model);
      if (cfg.eval_samples) m.consistency = sampled_consistency(c, model, items, cfg.eval_samples, eval_rng);
      log.push_back(m);
      if (on_log) on_log(log.back());
    }

    auto params = model.parameters();
    for (std::size_t q = 0; q < p; ++q) {
      velocity[q] = cfg.momentum * velocity[q] - cfg.step_size * grad[q];
      params[q] += velocity[q];
    }
  }
  return log;
}

}  // namespace psl
