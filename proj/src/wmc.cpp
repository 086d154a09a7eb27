#include "psl/wmc.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <thread>

#include "psl/dimacs.hpp"
#include "psl/logmath.hpp"

namespace psl {

WeightMap WeightMap::from_probabilities(std::span<const double> p_true) {
  WeightMap w;
  w.probabilistic = true;
  for (double p : p_true) {
    if (!(p >= 0.0 && p <= 1.0)) throw WmcError("probability outside [0, 1]");
    w.pos.push_back(std::log(p));
    w.neg.push_back(std::log1p(-p));
  }
  return w;
}

WeightMap WeightMap::unit(std::size_t var_count) {
  WeightMap w;
  w.pos.assign(var_count, 0.0);
  w.neg.assign(var_count, 0.0);
  return w;
}

void WeightMap::validate() const {
  if (pos.size() != neg.size()) throw WmcError("weight map: positive/negative size mismatch");
  for (std::size_t v = 0; v < pos.size(); ++v) {
    for (double x : {pos[v], neg[v]})
      if (std::isnan(x) || x == std::numeric_limits<double>::infinity())
        throw WmcError("weight map: non-finite weight for variable " + std::to_string(v + 1));
    if (probabilistic && std::abs(std::exp(pos[v]) + std::exp(neg[v]) - 1.0) > 1e-12)
      throw WmcError("weight map: literal weights of variable " + std::to_string(v + 1) + " do not sum to 1");
  }
}

namespace {

void check_inputs(const Circuit& c, const WeightMap& w) {
  require_tractable(c);
  if (w.size() < c.var_count()) throw WmcError("weight map does not cover every circuit variable");
  w.validate();
}

double leaf_weight(const Node& n, const WeightMap& w) {
  return n.lit.positive ? w.pos[n.lit.var.index] : w.neg[n.lit.var.index];
}

// Upward pass into `val` (resized to root + 1). Returns the root value including free variables.
double upward(const Circuit& c, const WeightMap& w, std::vector<double>& val) {
  val.assign(c.root() + std::size_t{1}, 0.0);
  std::vector<double> buf;
  for (std::size_t id = 0; id <= c.root(); ++id) {
    const Node& n = c.node(static_cast<NodeId>(id));
    switch (n.kind) {
      case NodeKind::leaf:
        val[id] = leaf_weight(n, w);
        break;
      case NodeKind::constant_true:
        val[id] = 0.0;
        break;
      case NodeKind::constant_false:
        val[id] = kNegInf;
        break;
      case NodeKind::conjunction: {
        double s = 0.0;
        for (NodeId ch : n.children) s += val[ch];
        val[id] = s;
        break;
      }
      case NodeKind::disjunction:
        buf.clear();
        for (NodeId ch : n.children) buf.push_back(val[ch]);
        val[id] = log_sum_exp(buf);
        break;
    }
  }
  double root = val[c.root()];
  const auto& scope = c.scope(c.root());
  for (std::uint32_t v = 0; v < c.var_count(); ++v)
    if (!scope.contains(v)) root += log_add(w.pos[v], w.neg[v]);
  if (std::isnan(root)) throw WmcError("NaN encountered during circuit evaluation");
  return root;
}

}  // namespace

double log_wmc(const Circuit& c, const WeightMap& w) {
  check_inputs(c, w);
  std::vector<double> val;
  return upward(c, w, val);
}

std::vector<double> log_wmc_batch(const Circuit& c, std::span<const WeightMap> ws, unsigned threads) {
  require_tractable(c);
  std::vector<double> out(ws.size());
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(ws.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < ws.size(); ++i) out[i] = log_wmc(c, ws[i]);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < ws.size(); i += threads) out[i] = log_wmc(c, ws[i]);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

SemanticLoss semantic_loss(const Circuit& c, const WeightMap& w) {
  double lw = log_wmc(c, w);
  if (lw == kNegInf) return {std::numeric_limits<double>::infinity(), true};
  return {-lw, false};
}

WmcGradient grad_log_wmc(const Circuit& c, const WeightMap& w) {
  check_inputs(c, w);
  std::vector<double> val;
  const double total = upward(c, w, val);
  if (total == kNegInf) throw WmcError("gradient undefined: constraint has zero weighted model count");

  // ctx[n] = log d(root value)/d(value of n), both in linear space.
  std::vector<double> ctx(val.size(), kNegInf);
  ctx[c.root()] = 0.0;
  std::vector<std::size_t> zero_children;
  for (std::size_t id = c.root() + std::size_t{1}; id-- > 0;) {
    if (ctx[id] == kNegInf) continue;
    const Node& n = c.node(static_cast<NodeId>(id));
    if (n.kind == NodeKind::disjunction) {
      for (NodeId ch : n.children) ctx[ch] = log_add(ctx[ch], ctx[id]);
    } else if (n.kind == NodeKind::conjunction) {
      // Product of siblings: divide out the child when it is non-zero, otherwise recompute.
      zero_children.clear();
      double finite_sum = 0.0;
      for (std::size_t j = 0; j < n.children.size(); ++j) {
        double v = val[n.children[j]];
        if (v == kNegInf) {
          zero_children.push_back(j);
        } else {
          finite_sum += v;
        }
      }
      if (zero_children.size() >= 2) continue;
      for (std::size_t j = 0; j < n.children.size(); ++j) {
        const NodeId ch = n.children[j];
        double others;
        if (zero_children.empty()) {
          others = finite_sum - val[ch];
        } else if (zero_children[0] == j) {
          others = finite_sum;
        } else {
          continue;
        }
        ctx[ch] = log_add(ctx[ch], ctx[id] + others);
      }
    }
  }

  WmcGradient g;
  g.log_wmc = total;
  std::vector<double> lpos(c.var_count(), kNegInf), lneg(c.var_count(), kNegInf);
  for (std::size_t id = 0; id <= c.root(); ++id) {
    const Node& n = c.node(static_cast<NodeId>(id));
    if (n.kind != NodeKind::leaf || ctx[id] == kNegInf) continue;
    auto& slot = n.lit.positive ? lpos[n.lit.var.index] : lneg[n.lit.var.index];
    slot = log_add(slot, ctx[id] + val[id]);
  }
  const double root_val = val[c.root()];
  g.d_pos.resize(c.var_count());
  g.d_neg.resize(c.var_count());
  const auto& scope = c.scope(c.root());
  for (std::uint32_t v = 0; v < c.var_count(); ++v) {
    if (scope.contains(v)) {
      g.d_pos[v] = std::exp(lpos[v] - root_val);
      g.d_neg[v] = std::exp(lneg[v] - root_val);
    } else {
      const double z = log_add(w.pos[v], w.neg[v]);
      g.d_pos[v] = z == kNegInf ? 0.0 : std::exp(w.pos[v] - z);
      g.d_neg[v] = z == kNegInf ? 0.0 : std::exp(w.neg[v] - z);
    }
  }
  return g;
}

WeightMap read_weights(std::istream& in, std::size_t var_count) {
  std::vector<double> p(var_count, -1.0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream is(line);
    long long var = 0;
    double prob = 0.0;
    if (!(is >> var)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ParseError(line_no, "expected '<var> <prob_true>'");
    }
    if (!(is >> prob)) throw ParseError(line_no, "missing probability");
    std::string extra;
    if (is >> extra) throw ParseError(line_no, "trailing tokens");
    if (var < 1 || static_cast<std::size_t>(var) > var_count) throw ParseError(line_no, "variable out of range");
    if (!(prob >= 0.0 && prob <= 1.0)) throw ParseError(line_no, "probability outside [0, 1]");
    if (p[static_cast<std::size_t>(var - 1)] >= 0.0) throw ParseError(line_no, "duplicate variable");
    p[static_cast<std::size_t>(var - 1)] = prob;
  }
  for (std::size_t v = 0; v < var_count; ++v)
    if (p[v] < 0.0) throw ParseError(line_no, "no weight given for variable " + std::to_string(v + 1));
  return WeightMap::from_probabilities(p);
}

void write_weights(const WeightMap& w, std::ostream& out) {
  char buf[64];
  for (std::size_t v = 0; v < w.size(); ++v) {
    std::snprintf(buf, sizeof buf, "%zu %.17g\n", v + 1, std::exp(w.pos[v]));
    out << buf;
  }
}

}  // namespace psl
