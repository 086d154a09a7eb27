// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "psl/compiler.hpp"
#include "psl/fidelity.hpp"
#include "psl/logmath.hpp"
#include "psl/pseudo.hpp"
#include "psl/templates.hpp"
#include "psl/train.hpp"
#include "psl/wmc.hpp"
#include "support/brute.hpp"

using namespace psl;
namespace ts = testsupport;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Formula with_one_hot(const CategoricalSpace& sp, const ts::Cnf& cnf) {
  return Formula(Expr::conj({one_hot_domain(sp), ts::to_formula(cnf, sp.var_count()).root()}), sp.var_count());
}

Outcome wmc_oracle() {
  Outcome o;
  std::mt19937_64 rng(101);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10);
    const int m = static_cast<int>(rng() % 21);
    const auto cnf = ts::random_cnf(rng, n, m);
    const auto p = ts::random_probs(rng, static_cast<std::size_t>(n));
    const auto c = compile(ts::to_formula(cnf, static_cast<std::size_t>(n)));
    const double got = std::exp(log_wmc(c, WeightMap::from_probabilities(p)));
    const double diff = std::abs(got - ts::wmc(cnf, p));
    worst = std::max(worst, diff);
    if (diff > 1e-9) o.fail(fmt("trial %.0f: diff %.3g", trial, diff));
  }
  const double secs = seconds_since(t0);
  if (secs > 60.0) o.fail(fmt("runtime %.1fs", secs));
  if (o.pass) o.detail = fmt("max diff %.3g, %.2fs", worst, secs);
  return o;
}

Outcome compilation_equivalence() {
  Outcome o;
  std::mt19937_64 rng(202);
  int circuits = 0;
  auto check = [&](const Formula& f, const Circuit& c, const std::string& label) {
    ++circuits;
    const auto report = check_properties(c);
    if (!report.all()) o.fail(label + ": property check failed (" + report.note + ")");
    const std::size_t n = f.var_count();
    if (n > 15) return;
    std::vector<bool> values(n);
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
      for (std::size_t v = 0; v < n; ++v) values[v] = (b >> v) & 1U;
      if (evaluate(f.root(), values) != c.evaluate(values)) {
        o.fail(label + ": disagrees on assignment " + std::to_string(b));
        return;
      }
    }
  };
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 15);
    const auto f = ts::to_formula(ts::random_cnf(rng, n, static_cast<int>(rng() % 25)), static_cast<std::size_t>(n));
    check(f, compile(f), "cnf " + std::to_string(trial));
    check(f, compile(f, VarOrder::lexicographic(f.var_count())), "cnf lex " + std::to_string(trial));
  }
  const std::vector<Template> small{latin_square(2), latin_square(3), choose_k(5, 2), grid_path(2, 2),
                                    grid_path(2, 3), banned_patterns(3, {{0, 1}, {2, 2}}, 4)};
  for (const auto& t : small) check(t.formula, compile(t.formula), t.name);

  const auto expect_count = [&](const Template& t, unsigned expected) {
    const auto c = compile(t.formula);
    check(t.formula, c, t.name);
    const auto count = model_count(c);
    if (count != expected) o.fail(t.name + ": model count " + count.str());
  };
  expect_count(latin_square(4), 576);
  expect_count(choose_k(5, 2), 10);
  expect_count(grid_path(2, 2), 2);
  if (o.pass) o.detail = std::to_string(circuits) + " circuits; latin_square(4)=576, choose_k(5,2)=10, grid_path(2,2)=2";
  return o;
}

struct MarkovCase {
  std::unique_ptr<MarkovARModel> model;
  Formula formula;
  Circuit circuit;
};

MarkovCase random_markov_case(std::mt19937_64& rng, std::size_t max_n, std::size_t max_k) {
  const std::size_t n = 1 + rng() % max_n, k = 2 + rng() % (max_k - 1), m = rng() % n;
  CategoricalSpace sp(n, k);
  auto model = std::make_unique<MarkovARModel>(sp, m);
  Rng r(rng());
  randomize(*model, r, 1.5);
  auto f = with_one_hot(sp, ts::random_cnf(rng, static_cast<int>(sp.var_count()), 1 + static_cast<int>(rng() % 5)));
  auto c = compile(f);
  return {std::move(model), f, std::move(c)};
}

// Local product mass of the formula around y, from enumerated neighbourhood joints.
double brute_local_probability(const SequenceModel& model, const Formula& f, const Sequence& y) {
  const auto& sp = model.space();
  return ts::product_mass(ts::conditionals(model, y), sp.steps(), sp.categories(),
                          [&](const Sequence& z) { return evaluate(f, Assignment::from_categories(sp, z)); });
}

Outcome psl_oracle() {
  Outcome o;
  std::mt19937_64 rng(303);
  double worst = 0.0;
  int finite = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto cs = random_markov_case(rng, 6, 3);
    PslConfig cfg;
    cfg.samples = 1 + rng() % 3;
    cfg.seed = rng();
    const auto r = pseudo_semantic_loss(cs.circuit, *cs.model, cfg);
    double mean = 0.0;
    for (const auto& s : r.samples) {
      const auto y = s.table.anchor;
      mean += brute_local_probability(*cs.model, cs.formula, y);
    }
    mean /= static_cast<double>(r.samples.size());
    const double got = r.infinite ? 0.0 : std::exp(-r.loss);
    if (!r.infinite) ++finite;
    const double diff = std::abs(got - mean);
    worst = std::max(worst, diff);
    if (diff > 1e-9) o.fail(fmt("trial %.0f: exp(-loss) %.12g vs %.12g", trial, got, mean));
  }
  if (o.pass) o.detail = fmt("max diff %.3g over 100 cases (%.0f finite)", worst, finite);
  return o;
}

Outcome factorized_reduction() {
  Outcome o;
  std::mt19937_64 rng(404);
  double worst = 0.0;
  int cases = 0;
  while (cases < 50) {
    const std::size_t n = 1 + rng() % 6, k = 2 + rng() % 2;
    CategoricalSpace sp(n, k);
    FactorizedModel m(sp, ts::random_logits(rng, n * k, 1.5));
    const auto c = compile(with_one_hot(sp, ts::random_cnf(rng, static_cast<int>(sp.var_count()),
                                                           1 + static_cast<int>(rng() % 4))));
    if (log_wmc(c, WeightMap::unit(sp.var_count())) == kNegInf) continue;  // unsatisfiable; both sides infinite
    ++cases;
    PslConfig cfg;
    cfg.samples = 1 + rng() % 3;
    cfg.seed = rng();
    std::vector<double> none;
    const double psl = pseudo_semantic_loss(c, m, cfg).loss;
    const double sl = semantic_loss_factorized(c, m, 0.0, none);
    const double diff = std::abs(psl - sl);
    worst = std::max(worst, diff);
    if (!(diff <= 1e-9)) o.fail(fmt("case %.0f: psl %.12g vs sl %.12g", cases, psl, sl));
  }
  if (o.pass) o.detail = fmt("max diff %.3g over 50 cases", worst);
  return o;
}

// Central differences on every parameter; returns the number of mismatches.
int fd_check(std::span<double> params, std::span<const double> analytic, const std::function<double()>& loss,
             double& worst_rel, double h = 1e-5) {
  int bad = 0;
  for (std::size_t q = 0; q < params.size(); ++q) {
    const double orig = params[q];
    params[q] = orig + h;
    const double up = loss();
    params[q] = orig - h;
    const double down = loss();
    params[q] = orig;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max(std::abs(analytic[q]), std::abs(numeric));
    if (scale > 1e-8) worst_rel = std::max(worst_rel, std::abs(analytic[q] - numeric) / scale);
    if (!ts::grad_close(analytic[q], numeric)) ++bad;
  }
  return bad;
}

Outcome gradients() {
  Outcome o;
  std::mt19937_64 rng(505);
  double worst = 0.0;
  int sl_cases = 0, psl_cases = 0, ill_conditioned_cases = 0;
  std::size_t params_checked = 0;

  while (sl_cases < 20) {
    const std::size_t n = 1 + rng() % 5, k = 2 + rng() % 3;
    CategoricalSpace sp(n, k);
    FactorizedModel m(sp, ts::random_logits(rng, n * k));
    const auto c = compile(with_one_hot(sp, ts::random_cnf(rng, static_cast<int>(sp.var_count()),
                                                           1 + static_cast<int>(rng() % 4))));
    if (log_wmc(c, WeightMap::unit(sp.var_count())) == kNegInf) continue;
    ++sl_cases;
    std::vector<double> g(m.parameter_count(), 0.0), none;
    semantic_loss_factorized(c, m, 1.0, g);
    const int bad = fd_check(m.parameters(), g, [&] { return semantic_loss_factorized(c, m, 0.0, none); }, worst);
    params_checked += g.size();
    if (bad) o.fail("semantic loss case " + std::to_string(sl_cases) + ": " + std::to_string(bad) + " mismatches");
  }

  while (psl_cases < 30) {
    auto cs = random_markov_case(rng, 5, 3);
    if (cs.model->parameter_count() > 200) continue;
    PslConfig cfg;
    cfg.samples = 1 + rng() % 3;
    cfg.minimize = psl_cases % 4 == 1;
    if (psl_cases % 4 == 2) cfg.top_k = 1 + rng() % cs.model->space().categories();
    std::vector<Sequence> anchors;
    for (std::size_t s = 0; s < cfg.samples; ++s) anchors.push_back(cs.model->sample(rng()));
    const auto r = pseudo_semantic_loss_at(cs.circuit, *cs.model, anchors, cfg);
    if (r.infinite) continue;
    ++psl_cases;
    std::vector<double> g(cs.model->parameter_count(), 0.0);
    accumulate_parameter_gradient(r, *cs.model, 1.0, g);
    // -log(1 - p~) with p~ near 1 magnifies evaluation roundoff by ~e^loss,
    // which swamps a 1e-5 central difference; those cases use a wider step.
    const bool ill_conditioned = cfg.minimize && r.loss > 8.0;
    ill_conditioned_cases += ill_conditioned;
    const int bad = fd_check(cs.model->parameters(), g,
                             [&] { return pseudo_semantic_loss_at(cs.circuit, *cs.model, anchors, cfg).loss; }, worst,
                             ill_conditioned ? 1e-3 : 1e-5);
    params_checked += g.size();
    if (bad) o.fail("pseudo-semantic loss case " + std::to_string(psl_cases) + ": " + std::to_string(bad) +
                    " mismatches");
  }
  if (o.pass)
    o.detail = std::to_string(sl_cases) + " SL + " + std::to_string(psl_cases) + " PSL cases, " +
               std::to_string(params_checked) + " parameters, worst rel err " + fmt("%.2g", worst) + "; " +
               std::to_string(ill_conditioned_cases) + " near-certain minimize case(s) at step 1e-3";
  return o;
}

Outcome figure_two() {
  Outcome o;
  // rows: (flipped, anchor) joints for a, b, c around the all-true anchor
  const std::vector<double> joints{std::log(0.15), std::log(0.13), std::log(0.21),
                                   std::log(0.13), std::log(0.16), std::log(0.13)};
  const auto t = conditionals_from_joints(3, 2, joints, {1, 1, 1});
  const double expected[3] = {0.4643, 0.3824, 0.4483};
  for (std::size_t i = 0; i < 3; ++i)
    if (std::abs(std::exp(t(i, 1)) - expected[i]) > 5e-3)
      o.fail(fmt("conditional %.0f is %.6f", static_cast<double>(i), std::exp(t(i, 1))));

  const auto lifted = lift_binary(ts::to_formula({{-1, 3}, {-2, 3}}, 3));
  const auto c = compile(lifted.formula);
  const auto brute = [](const std::vector<double>& p_true) {
    return ts::wmc({{-1, 3}, {-2, 3}}, p_true);
  };
  // The figure's leaf values are the conditionals rounded to two places.
  const std::vector<double> rounded{0.46, 0.38, 0.45};
  std::vector<double> log_cond;
  for (double p : rounded) {
    log_cond.push_back(std::log(1.0 - p));
    log_cond.push_back(std::log(p));
  }
  const double value = std::exp(log_wmc(c, categorical_weights(*lifted.space, log_cond)));
  if (std::abs(value - 0.63414) > 1e-6) o.fail(fmt("WMC %.8f, expected 0.63414", value));
  if (std::abs(brute(rounded) - 0.63414) > 1e-6) o.fail(fmt("brute force %.8f", brute(rounded)));
  if (std::abs(value - 0.71) < 1e-3) o.fail("reproduced 0.71");

  const double exact_value = std::exp(log_wmc(c, categorical_weights(*lifted.space, t.log_cond)));
  std::vector<double> exact_p;
  for (std::size_t i = 0; i < 3; ++i) exact_p.push_back(std::exp(t(i, 1)));
  if (std::abs(exact_value - brute(exact_p)) > 1e-12) o.fail("unrounded conditionals disagree with brute force");
  if (o.pass)
    o.detail = fmt("conditionals %.4f %.4f %.4f", std::exp(t(0, 1)), std::exp(t(1, 1)), std::exp(t(2, 1))) +
               fmt("; WMC %.6f at rounded leaves (0.71 fails the oracle), %.6f unrounded", value, exact_value);
  return o;
}

// Entropy in bits of the product distribution, by enumerating every sequence.
double brute_product_entropy(const ConditionalTable& t) {
  double h = 0.0;
  for (const auto& y : ts::all_sequences(t.steps, t.categories)) {
    double p = 1.0;
    for (std::size_t i = 0; i < t.steps; ++i) p *= std::exp(t(i, static_cast<std::size_t>(y[i])));
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

Outcome fidelity() {
  Outcome o;
  std::mt19937_64 rng(707);
  double min_kl = 1e300, worst_fact = 0.0, worst_entropy = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 6, k = 2 + rng() % 3;
    CategoricalSpace sp(n, k);
    MarkovARModel m(sp, rng() % n);
    Rng r(rng());
    randomize(m, r, 2.0);
    const auto t = conditional_table(m, m.sample(r));
    const double kl = kl_local(t, m).bits;
    min_kl = std::min(min_kl, kl);
    if (kl < -1e-12) o.fail(fmt("trial %.0f: KL %.3g < 0", trial, kl));
    const double he = std::abs(entropy_product(t) - brute_product_entropy(t));
    worst_entropy = std::max(worst_entropy, he);

    FactorizedModel f(sp, ts::random_logits(rng, n * k, 1.5));
    const auto tf = conditional_table(f, f.sample(r));
    const double klf = kl_local(tf, f).bits;
    worst_fact = std::max(worst_fact, std::abs(klf));
    if (std::abs(klf) > 1e-9) o.fail(fmt("trial %.0f: factorized KL %.3g", trial, klf));
    worst_entropy = std::max(worst_entropy, std::abs(entropy_product(tf) - brute_product_entropy(tf)));
    worst_entropy = std::max(worst_entropy, std::abs(entropy_product(tf) - entropy_model_exact(f)));
  }
  // larger spaces up to k^n = 2^16
  for (const auto& [n, k] : std::vector<std::pair<std::size_t, std::size_t>>{{16, 2}, {8, 4}, {4, 16}}) {
    MarkovARModel m(CategoricalSpace(n, k), 2);
    Rng r(n * 31 + k);
    randomize(m, r);
    const auto t = conditional_table(m, m.sample(r));
    worst_entropy = std::max(worst_entropy, std::abs(entropy_product(t) - brute_product_entropy(t)));
  }
  if (worst_entropy > 1e-9) o.fail(fmt("entropy differs from enumeration by %.3g", worst_entropy));
  if (o.pass)
    o.detail = fmt("min KL %.3g bits, max factorized |KL| %.3g, max entropy diff %.3g", min_kl, worst_fact,
                   worst_entropy);
  return o;
}

Outcome toy_training() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto ls = latin_square(2);
  const auto c = compile(ls.formula);
  const CategoricalSpace& sp = *ls.space;
  // Completion from the first cell. The valid squares are 0110 and 1001;
  // 40% of the targets carry a wrong last cell.
  const std::vector<bool> ctx{true, false, false, false};
  std::vector<DataItem> items;
  for (int r = 0; r < 3; ++r) {
    items.push_back({ctx, {0, 1, 1, 0}});
    items.push_back({ctx, {1, 0, 0, 1}});
  }
  for (int r = 0; r < 2; ++r) {
    items.push_back({ctx, {0, 1, 1, 1}});
    items.push_back({ctx, {1, 0, 0, 0}});
  }

  double total_gain = 0.0;
  std::string per_seed;
  for (std::uint64_t seed : {11u, 22u, 33u}) {
    double rate[2] = {0.0, 0.0};
    for (int arm = 0; arm < 2; ++arm) {
      MarkovARModel m(sp, 1);
      Rng init(seed);
      randomize(m, init, 0.1);
      TrainConfig cfg;
      cfg.lambda = arm == 0 ? 0.0 : 0.5;
      cfg.steps = 1000;
      cfg.step_size = 0.5;
      cfg.samples = 2;
      cfg.seed = seed;
      cfg.eval_samples = 4000;
      const auto log = train_toy(m, c, items, cfg);
      rate[arm] = log.back().consistency.value_or(0.0);
    }
    const double gain = rate[1] - rate[0];
    total_gain += gain;
    if (!(gain > 0.0)) o.fail(fmt("seed %.0f: lambda 0.5 rate %.4f not above %.4f", static_cast<double>(seed), rate[1], rate[0]));
    per_seed += fmt(" seed %.0f: %.3f -> %.3f;", static_cast<double>(seed), rate[0], rate[1]);
  }
  const double mean_gain = total_gain / 3.0;
  const double secs = seconds_since(t0);
  if (mean_gain < 0.10) o.fail(fmt("mean gain %.1f pp", 100 * mean_gain));
  if (secs > 300.0) o.fail(fmt("runtime %.1fs", secs));
  if (o.pass) o.detail = per_seed + fmt(" mean gain %.1f pp, %.1fs", 100 * mean_gain, secs);
  return o;
}

Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / ("pslkit_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto path = [&](const char* name) { return (dir / name).string(); };
  {
    std::ofstream(path("m.model")) << "model markov n=4 k=2 m=1\n0.1 -0.3\n0.2 0.4\n-0.5 0.1\n0.3 0.3\n"
                                      "-0.2 0.6\n0.0 0.9\n0.4 -0.1\n";
    std::ofstream(path("d.txt")) << "0* 1 1 0\n1* 0 0 1\n0* 1 1 1\n";
  }
  std::ostringstream sink;
  if (cli::run({"compile", "--template", "latin_square", "--n", "2", "--out", path("ls2.nnf")}, sink, sink) != 0) {
    o.fail("compile failed: " + sink.str());
    fs::remove_all(dir);
    return o;
  }
  const std::vector<std::vector<std::string>> cmds{
      {"psl", "--circuit", path("ls2.nnf"), "--model", path("m.model"), "--samples", "8", "--seed", "7", "--table-out",
       path("t.txt")},
      {"psl", "--circuit", path("ls2.nnf"), "--model", path("m.model"), "--samples", "4", "--topk", "2", "--minimize",
       "--seed", "9"},
      {"sample", "--model", path("m.model"), "--count", "20", "--seed", "2"},
      {"fidelity", "--model", path("m.model"), "--circuit", path("ls2.nnf"), "--samples", "10", "--seed", "3"},
      {"train", "--circuit", path("ls2.nnf"), "--model-out", path("o.model"), "--data", path("d.txt"), "--lambda",
       "0.5", "--steps", "40", "--seed", "7", "--log-every", "10", "--eval-samples", "200"},
      {"train", "--circuit", path("ls2.nnf"), "--model-out", path("o.model"), "--type", "markov", "--window", "1",
       "--k", "2", "--init-std", "0.5", "--lambda", "1", "--ce-weight", "0", "--steps", "20", "--seed", "5"},
      {"oracle", "--circuit", path("ls2.nnf"), "--model", path("m.model"), "--samples", "3", "--seed", "4",
       "--verify"}};
  const auto slurp = [](const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::vector<std::string> side_files{path("t.txt"), path("o.model")};
  for (const auto& cmd : cmds) {
    std::string outputs[2];
    int codes[2];
    for (int rep = 0; rep < 2; ++rep) {
      for (const auto& f : side_files) fs::remove(f);
      std::ostringstream out, err;
      codes[rep] = cli::run(cmd, out, err);
      outputs[rep] = out.str();
      for (const auto& f : side_files) outputs[rep] += "\n--\n" + slurp(f);
    }
    if (codes[0] != 0) o.fail(cmd[0] + " exited " + std::to_string(codes[0]));
    if (codes[0] != codes[1] || outputs[0] != outputs[1]) o.fail(cmd[0] + " output differs between runs");
  }
  fs::remove_all(dir);
  if (o.pass) o.detail = std::to_string(cmds.size()) + " invocations (psl, sample, fidelity, train, oracle) repeated byte-identically";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"wmc oracle", wmc_oracle},
      {"compilation equivalence", compilation_equivalence},
      {"psl oracle", psl_oracle},
      {"factorized reduction", factorized_reduction},
      {"gradients", gradients},
      {"figure-2 vector", figure_two},
      {"fidelity", fidelity},
      {"toy training", toy_training},
      {"determinism", determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
