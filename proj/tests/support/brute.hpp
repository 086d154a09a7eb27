#pragma once

// Test-side reference code. Deliberately independent of the library's
// evaluation paths: clauses are checked directly, conditionals come from
// plain linear-space ratios, distributions are enumerated.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "psl/formula.hpp"
#include "psl/models.hpp"

namespace testsupport {

using Clause = std::vector<int>;  // DIMACS literals
using Cnf = std::vector<Clause>;

inline Cnf random_cnf(std::mt19937_64& rng, int vars, int clauses, int max_len = 3) {
  std::uniform_int_distribution<int> var(1, vars), len(1, max_len), sign(0, 1);
  Cnf cnf;
  for (int c = 0; c < clauses; ++c) {
    Clause cl;
    const int l = len(rng);
    for (int j = 0; j < l; ++j) cl.push_back(sign(rng) ? var(rng) : -var(rng));
    cnf.push_back(cl);
  }
  return cnf;
}

inline psl::Formula to_formula(const Cnf& cnf, std::size_t vars) {
  std::vector<psl::Expr> cls;
  for (const auto& c : cnf) {
    std::vector<psl::Expr> lits;
    for (int l : c) lits.push_back(psl::Expr::literal(l > 0 ? psl::pos(l - 1) : psl::neg(-l - 1)));
    cls.push_back(psl::Expr::disj(lits));
  }
  return psl::Formula(psl::Expr::conj(cls), vars);
}

inline bool satisfies(const Cnf& cnf, std::uint64_t bits) {
  for (const auto& c : cnf) {
    bool sat = false;
    for (int l : c) {
      const bool v = (bits >> (std::abs(l) - 1)) & 1U;
      if ((l > 0) == v) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

inline std::uint64_t count_models(const Cnf& cnf, int vars) {
  std::uint64_t n = 0;
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << vars); ++b) n += satisfies(cnf, b);
  return n;
}

/// sum over models of prod p^x (1-p)^(1-x).
inline double wmc(const Cnf& cnf, const std::vector<double>& p) {
  const int n = static_cast<int>(p.size());
  double total = 0.0;
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
    if (!satisfies(cnf, b)) continue;
    double w = 1.0;
    for (int v = 0; v < n; ++v) w *= ((b >> v) & 1U) ? p[v] : 1.0 - p[v];
    total += w;
  }
  return total;
}

inline std::vector<double> random_probs(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.02, 0.98);
  std::vector<double> p(n);
  for (auto& x : p) x = u(rng);
  return p;
}

inline std::vector<double> random_logits(std::mt19937_64& rng, std::size_t count, double stddev = 1.0) {
  std::normal_distribution<double> g(0.0, stddev);
  std::vector<double> out(count);
  for (auto& x : out) x = g(rng);
  return out;
}

/// Bits of the one-hot encoding of a sequence, var = i*k + c.
inline std::uint64_t one_hot_bits(const psl::Sequence& y, std::size_t k) {
  std::uint64_t b = 0;
  for (std::size_t i = 0; i < y.size(); ++i) b |= std::uint64_t{1} << (i * k + static_cast<std::size_t>(y[i]));
  return b;
}

inline std::vector<bool> one_hot_values(const psl::Sequence& y, std::size_t k) {
  std::vector<bool> v(y.size() * k, false);
  for (std::size_t i = 0; i < y.size(); ++i) v[i * k + static_cast<std::size_t>(y[i])] = true;
  return v;
}

/// All k^n sequences in lexicographic order.
inline std::vector<psl::Sequence> all_sequences(std::size_t n, std::size_t k) {
  std::vector<psl::Sequence> out;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= k;
  for (std::size_t code = 0; code < total; ++code) {
    psl::Sequence y(n);
    std::size_t rest = code;
    for (std::size_t i = n; i-- > 0;) {
      y[i] = static_cast<int>(rest % k);
      rest /= k;
    }
    out.push_back(y);
  }
  return out;
}

/// p(y) for a Markov model computed straight from its logit table.
inline double markov_prob(const std::vector<double>& logits, std::size_t n, std::size_t k, std::size_t m,
                          const psl::Sequence& y) {
  double p = 1.0;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = std::min(m, i);
    std::size_t code = 0;
    for (std::size_t j = i - len; j < i; ++j) code = code * k + static_cast<std::size_t>(y[j]);
    const double* row = &logits[(offset + code) * k];
    double z = 0.0;
    for (std::size_t c = 0; c < k; ++c) z += std::exp(row[c]);
    p *= std::exp(row[static_cast<std::size_t>(y[i])]) / z;
    std::size_t ctx = 1;
    for (std::size_t j = 0; j < len; ++j) ctx *= k;
    offset += ctx;
  }
  return p;
}

/// p(y_i = c | y_-i) in linear space from exp(log_joint) ratios.
inline std::vector<double> conditionals(const psl::SequenceModel& model, const psl::Sequence& y) {
  const std::size_t n = model.space().steps(), k = model.space().categories();
  std::vector<double> out(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    double z = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      auto w = y;
      w[i] = static_cast<int>(c);
      out[i * k + c] = std::exp(model.log_joint(w));
      z += out[i * k + c];
    }
    for (std::size_t c = 0; c < k; ++c) out[i * k + c] /= z;
  }
  return out;
}

/// sum over sequences satisfying pred of prod_i cond[i][y~_i].
template <typename Pred>
double product_mass(const std::vector<double>& cond, std::size_t n, std::size_t k, Pred&& pred) {
  double total = 0.0;
  for (const auto& y : all_sequences(n, k)) {
    if (!pred(y)) continue;
    double w = 1.0;
    for (std::size_t i = 0; i < n; ++i) w *= cond[i * k + static_cast<std::size_t>(y[i])];
    total += w;
  }
  return total;
}

/// Relative/absolute closeness used by the finite-difference checks.
inline bool grad_close(double analytic, double numeric, double rel = 1e-4, double abs_floor = 1e-8) {
  return std::abs(analytic - numeric) <= rel * std::max(std::abs(analytic), std::abs(numeric)) + abs_floor;
}

}  // namespace testsupport
