#include "psl/models.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "psl/dimacs.hpp"
#include "psl/logmath.hpp"

namespace psl {

double Rng::normal(double mean, double stddev) {
  // Box-Muller on two portable uniforms.
  double u1 = uniform();
  double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::size_t Rng::categorical(std::span<const double> log_probs) {
  const double u = uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t c = 0; c < log_probs.size(); ++c) {
    const double p = std::exp(log_probs[c]);
    if (p > 0.0) last_positive = c;
    acc += p;
    if (u < acc) return c;
  }
  return last_positive;
}

void SequenceModel::validate(std::span<const int> y) const {
  const auto& sp = space();
  if (y.size() != sp.steps())
    throw ModelError("sequence length " + std::to_string(y.size()) + " does not match n = " + std::to_string(sp.steps()));
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= sp.categories())
      throw ModelError("category " + std::to_string(y[i]) + " out of range at step " + std::to_string(i));
}

double SequenceModel::log_joint(std::span<const int> y) const {
  validate(y);
  std::vector<double> lp(space().categories());
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    step_log_probs(i, y.first(i), lp);
    total += lp[static_cast<std::size_t>(y[i])];
  }
  return total;
}

Sequence SequenceModel::sample(Rng& rng, std::span<const int> clamp) const {
  const auto& sp = space();
  if (!clamp.empty() && clamp.size() != sp.steps()) throw ModelError("clamp length does not match the model");
  Sequence y(sp.steps(), 0);
  std::vector<double> lp(sp.categories());
  for (std::size_t i = 0; i < sp.steps(); ++i) {
    if (!clamp.empty() && clamp[i] >= 0) {
      y[i] = clamp[i];
      continue;
    }
    step_log_probs(i, std::span<const int>(y).first(i), lp);
    y[i] = static_cast<int>(rng.categorical(lp));
  }
  return y;
}

Sequence SequenceModel::sample(std::uint64_t seed) const {
  Rng rng(seed);
  return sample(rng);
}

LogitTableModel::LogitTableModel(CategoricalSpace space, std::size_t slots)
    : space_(space), logits_(slots * space.categories(), 0.0) {}

std::span<const double> LogitTableModel::slot_logits(std::size_t s) const {
  return std::span<const double>(logits_).subspan(s * space_.categories(), space_.categories());
}

void LogitTableModel::step_log_probs(std::size_t i, std::span<const int> prefix, std::span<double> out) const {
  auto row = slot_logits(slot(i, prefix));
  const double z = log_sum_exp(row);
  for (std::size_t c = 0; c < row.size(); ++c) out[c] = row[c] - z;
}

void LogitTableModel::accumulate_log_joint_gradient(std::span<const int> y, double scale,
                                                    std::span<double> grad) const {
  validate(y);
  const std::size_t k = space_.categories();
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t s = slot(i, y.first(i));
    auto row = slot_logits(s);
    const double z = log_sum_exp(row);
    for (std::size_t c = 0; c < k; ++c) {
      const double indicator = static_cast<std::size_t>(y[i]) == c ? 1.0 : 0.0;
      grad[s * k + c] += scale * (indicator - std::exp(row[c] - z));
    }
  }
}

FactorizedModel::FactorizedModel(CategoricalSpace space) : LogitTableModel(space, space.steps()) {}

FactorizedModel::FactorizedModel(CategoricalSpace space, std::vector<double> logits)
    : LogitTableModel(space, space.steps()) {
  if (logits.size() != logits_.size()) throw ModelError("factorized model: expected n*k logits");
  logits_ = std::move(logits);
}

std::size_t MarkovARModel::slots_needed(const CategoricalSpace& space, std::size_t window) {
  std::size_t total = 0;
  for (std::size_t i = 0; i < space.steps(); ++i) {
    std::size_t ctx = 1;
    for (std::size_t j = 0; j < std::min(window, i); ++j) {
      ctx *= space.categories();
      if (ctx > (std::size_t{1} << 24)) throw ModelError("markov model: context table too large");
    }
    total += ctx;
  }
  return total;
}

MarkovARModel::MarkovARModel(CategoricalSpace space, std::size_t window)
    : LogitTableModel(space, slots_needed(space, window)), window_(window) {
  std::size_t acc = 0;
  for (std::size_t i = 0; i < space.steps(); ++i) {
    offset_.push_back(acc);
    std::size_t ctx = 1;
    for (std::size_t j = 0; j < std::min(window, i); ++j) ctx *= space.categories();
    acc += ctx;
  }
}

MarkovARModel::MarkovARModel(CategoricalSpace space, std::size_t window, std::vector<double> logits)
    : MarkovARModel(space, window) {
  if (logits.size() != logits_.size()) throw ModelError("markov model: wrong number of logits");
  logits_ = std::move(logits);
}

std::size_t MarkovARModel::slot(std::size_t i, std::span<const int> prefix) const {
  const std::size_t len = std::min(window_, i);
  std::size_t code = 0;
  for (std::size_t j = i - len; j < i; ++j) code = code * space_.categories() + static_cast<std::size_t>(prefix[j]);
  return offset_[i] + code;
}

void randomize(LogitTableModel& model, Rng& rng, double stddev) {
  for (auto& x : model.parameters()) x = rng.normal(0.0, stddev);
}

void write_model(const LogitTableModel& model, std::ostream& out) {
  const auto& sp = model.space();
  const auto* markov = dynamic_cast<const MarkovARModel*>(&model);
  out << "model " << (markov ? "markov" : "factorized") << " n=" << sp.steps() << " k=" << sp.categories()
      << " m=" << (markov ? markov->window() : 0) << '\n';
  char buf[40];
  for (std::size_t s = 0; s < model.slot_count(); ++s) {
    auto row = model.slot_logits(s);
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", row[c]);
      out << (c ? " " : "") << buf;
    }
    out << '\n';
  }
}

namespace {

std::size_t parse_field(const std::string& tok, const std::string& name, std::size_t line) {
  if (tok.rfind(name + "=", 0) != 0) throw ParseError(line, "expected " + name + "=<value>");
  try {
    std::size_t used = 0;
    auto v = std::stoull(tok.substr(name.size() + 1), &used);
    if (used != tok.size() - name.size() - 1) throw std::invalid_argument(tok);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError(line, "malformed " + name);
  }
}

}  // namespace

std::unique_ptr<LogitTableModel> read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty model file");
  std::istringstream hs(line);
  std::string magic, type, nt, kt, mt, extra;
  if (!(hs >> magic >> type >> nt >> kt >> mt) || magic != "model" || (hs >> extra))
    throw ParseError(1, "expected 'model <factorized|markov> n=<n> k=<k> m=<m>'");
  const auto n = parse_field(nt, "n", 1);
  const auto k = parse_field(kt, "k", 1);
  const auto m = parse_field(mt, "m", 1);
  if (n == 0 || k == 0) throw ParseError(1, "n and k must be positive");
  CategoricalSpace space(n, k);
  std::unique_ptr<LogitTableModel> model;
  if (type == "factorized") {
    if (m != 0) throw ParseError(1, "factorized model requires m=0");
    model = std::make_unique<FactorizedModel>(space);
  } else if (type == "markov") {
    model = std::make_unique<MarkovARModel>(space, m);
  } else {
    throw ParseError(1, "unknown model type '" + type + "'");
  }
  auto params = model->parameters();
  std::size_t line_no = 1;
  for (std::size_t s = 0; s < model->slot_count(); ++s) {
    if (!std::getline(in, line)) throw ParseError(line_no + 1, "missing logit row " + std::to_string(s));
    ++line_no;
    std::istringstream rs(line);
    for (std::size_t c = 0; c < k; ++c) {
      std::string tok;
      if (!(rs >> tok)) throw ParseError(line_no, "expected " + std::to_string(k) + " logits");
      try {
        std::size_t used = 0;
        params[s * k + c] = std::stod(tok, &used);
        if (used != tok.size() || !std::isfinite(params[s * k + c])) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError(line_no, "malformed logit '" + tok + "'");
      }
    }
    if (rs >> extra) throw ParseError(line_no, "trailing tokens");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) throw ParseError(line_no, "content after the last row");
  }
  return model;
}

std::uint64_t sequence_count(const CategoricalSpace& space) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < space.steps(); ++i) {
    if (total > (std::uint64_t{1} << 62) / space.categories()) return 0;
    total *= space.categories();
  }
  return total;
}

}  // namespace psl
