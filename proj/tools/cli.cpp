#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include "psl/compiler.hpp"
#include "psl/dimacs.hpp"
#include "psl/fidelity.hpp"
#include "psl/logmath.hpp"
#include "psl/nnf_io.hpp"
#include "psl/oracle.hpp"
#include "psl/pseudo.hpp"
#include "psl/templates.hpp"
#include "psl/train.hpp"
#include "psl/wmc.hpp"

namespace psl::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised after the result line is printed, for results that count as failures
// (infinite loss, oracle mismatch).
class ResultError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Output {
  std::ostream& out;
  bool human = false;

  void emit(const json& j) const {
    if (!human) {
      out << j.dump() << '\n';
      return;
    }
    auto plain = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (j.is_object() && j.size() == 1) {
      out << plain(j.begin().value()) << '\n';
      return;
    }
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      out << (first ? "" : " ") << it.key() << '=' << plain(it.value());
      first = false;
    }
    out << '\n';
  }
};

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json big_to_json(const BigCount& n) {
  if (n <= std::numeric_limits<std::uint64_t>::max()) return json(static_cast<std::uint64_t>(n));
  return json(n.str());
}

std::ifstream open_in(const std::string& flag, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(flag + ": cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& flag, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError(flag + ": cannot write '" + path + "'");
  return out;
}

Circuit load_circuit(const std::string& path) {
  auto in = open_in("--circuit", path);
  return read_nnf(in);
}

std::unique_ptr<LogitTableModel> load_model(const std::string& flag, const std::string& path) {
  auto in = open_in(flag, path);
  return read_model(in);
}

void require_seed(const std::optional<std::uint64_t>& seed) {
  if (!seed) throw UsageError("--seed is required for stochastic subcommands");
}

std::vector<Sequence> parse_patterns(const std::vector<std::string>& raw) {
  std::vector<Sequence> out;
  for (const auto& p : raw) {
    Sequence s;
    for (char ch : p) {
      if (ch == ',' || ch == ' ') continue;
      if (ch < '0' || ch > '9') throw UsageError("--pattern: expected digits, got '" + p + "'");
      s.push_back(ch - '0');
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---- compile ----

struct CompileArgs {
  std::string in, tmpl, order = "lex", out;
  std::size_t n = 0, k = 0, rows = 0, cols = 0, alphabet = 2, seq_len = 0, one_hot_k = 0;
  std::vector<std::string> patterns;
  bool lift = false;
  std::size_t budget = CompileOptions{}.node_budget;
};

Template build_template(const CompileArgs& a) {
  if (a.tmpl == "latin_square" || a.tmpl == "sudoku") {
    if (a.n == 0) throw UsageError("--n is required for " + a.tmpl);
    return latin_square(a.n, a.tmpl == "sudoku");
  }
  if (a.tmpl == "grid_path") {
    if (a.rows == 0 || a.cols == 0) throw UsageError("--rows and --cols are required for grid_path");
    return grid_path(a.rows, a.cols);
  }
  if (a.tmpl == "choose_k") {
    if (a.n == 0) throw UsageError("--n is required for choose_k");
    return choose_k(a.n, a.k);
  }
  if (a.tmpl == "banned_patterns") {
    if (a.seq_len == 0 || a.patterns.empty()) throw UsageError("--seq-len and --pattern are required for banned_patterns");
    return banned_patterns(a.alphabet, parse_patterns(a.patterns), a.seq_len);
  }
  throw UsageError("--template: unknown template '" + a.tmpl + "'");
}

void cmd_compile(const CompileArgs& a, const Output& o) {
  if (a.in.empty() == a.tmpl.empty()) throw UsageError("exactly one of --in and --template is required");
  if (a.order != "lex" && a.order != "freq") throw UsageError("--order: expected lex or freq");
  std::optional<std::ofstream> out_file;
  if (!a.out.empty()) out_file = open_out("--out", a.out);

  Formula f;
  std::optional<CategoricalSpace> space;
  std::string name;
  if (!a.in.empty()) {
    auto in = open_in("--in", a.in);
    f = parse_dimacs(in);
    name = a.in;
  } else {
    auto t = build_template(a);
    f = t.formula;
    space = t.space;
    name = t.name;
  }
  if (a.lift) {
    auto t = lift_binary(f, name);
    f = t.formula;
    space = t.space;
  }
  if (a.one_hot_k) {
    if (f.var_count() % a.one_hot_k != 0)
      throw UsageError("--one-hot-k: " + std::to_string(f.var_count()) + " variables are not a multiple of " +
                       std::to_string(a.one_hot_k));
    space = CategoricalSpace(f.var_count() / a.one_hot_k, a.one_hot_k);
    f = Formula(Expr::conj({one_hot_domain(*space), f.root()}), f.var_count());
  }

  const auto order = a.order == "lex" ? VarOrder::lexicographic(f.var_count()) : VarOrder::most_frequent_first(f);
  CompileOptions opts;
  opts.node_budget = a.budget;
  const auto c = compile(f, order, opts);
  if (out_file) write_nnf(c, *out_file);

  json j{{"nodes", c.size()}, {"edges", c.edge_count()}, {"vars", c.var_count()}, {"model_count", big_to_json(model_count(c))}};
  if (space) {
    j["steps"] = space->steps();
    j["categories"] = space->categories();
  }
  o.emit(j);
}

// ---- circuit queries ----

void cmd_check(const std::string& path, const Output& o) {
  const auto c = load_circuit(path);
  const auto& r = c.properties();
  json j{{"decomposable", r.decomposable},
         {"smooth", r.smooth},
         {"deterministic", to_string(r.deterministic)},
         {"tractable", r.all()},
         {"nodes", c.size()},
         {"edges", c.edge_count()},
         {"vars", c.var_count()}};
  if (!r.note.empty()) j["note"] = r.note;
  o.emit(j);
}

void cmd_count(const std::string& path, const Output& o) {
  const auto c = load_circuit(path);
  o.emit({{"model_count", big_to_json(model_count(c))}});
}

void cmd_enumerate(const std::string& path, std::uint64_t limit, const Output& o) {
  const auto c = load_circuit(path);
  std::uint64_t count = 0;
  enumerate_models(c, limit, [&](const Assignment& a) {
    json lits = json::array();
    for (std::size_t v = 0; v < a.values.size(); ++v) {
      const auto d = static_cast<std::int64_t>(v + 1);
      lits.push_back(a.values[v] ? d : -d);
    }
    o.emit({{"model", lits}});
    ++count;
  });
  o.emit({{"count", count}});
}

WeightMap load_weights(const std::string& path, std::optional<double> uniform_p, std::size_t var_count) {
  if (path.empty() == !uniform_p) throw UsageError("exactly one of --weights and --uniform-p is required");
  if (uniform_p) {
    if (!(*uniform_p >= 0.0 && *uniform_p <= 1.0)) throw UsageError("--uniform-p: expected a value in [0, 1]");
    std::vector<double> p(var_count, *uniform_p);
    return WeightMap::from_probabilities(p);
  }
  auto in = open_in("--weights", path);
  return read_weights(in, var_count);
}

void cmd_wmc(const std::string& path, const std::string& weights, std::optional<double> p, const Output& o) {
  const auto c = load_circuit(path);
  const auto w = load_weights(weights, p, c.var_count());
  const double lw = log_wmc(c, w);
  o.emit({{"log_wmc", number_or_null(lw)}, {w.probabilistic ? "probability" : "wmc", std::exp(lw)}});
}

void cmd_sl(const std::string& path, const std::string& weights, std::optional<double> p, const Output& o) {
  const auto c = load_circuit(path);
  const auto sl = semantic_loss(c, load_weights(weights, p, c.var_count()));
  o.emit({{"loss", number_or_null(sl.loss)}, {"infinite", sl.infinite}});
  if (sl.infinite) throw ResultError("semantic loss is infinite: the constraint has probability zero");
}

// ---- model-based commands ----

struct PslArgs {
  std::string circuit, model, table_out;
  std::size_t samples = 1;
  std::optional<std::size_t> topk;
  std::optional<std::uint64_t> seed;
  bool minimize = false;
};

void cmd_psl(const PslArgs& a, const Output& o) {
  require_seed(a.seed);
  const auto c = load_circuit(a.circuit);
  const auto model = load_model("--model", a.model);
  std::optional<std::ofstream> table_file;
  if (!a.table_out.empty()) table_file = open_out("--table-out", a.table_out);

  PslConfig cfg;
  cfg.samples = a.samples;
  cfg.top_k = a.topk;
  cfg.seed = *a.seed;
  cfg.minimize = a.minimize;
  const auto r = pseudo_semantic_loss(c, *model, cfg);

  json lws = json::array(), samples = json::array();
  double entropy = 0.0;
  for (std::size_t s = 0; s < r.samples.size(); ++s) {
    const auto& smp = r.samples[s];
    lws.push_back(number_or_null(smp.log_wmc));
    samples.push_back(smp.table.anchor);
    entropy += entropy_product(smp.table);
    if (table_file) {
      if (s) *table_file << '\n';
      write_table(smp.table, *table_file);
    }
  }
  o.emit({{"loss", number_or_null(r.loss)},
          {"infinite", r.infinite},
          {"per_sample_log_wmc", lws},
          {"entropy_bits", entropy / static_cast<double>(r.samples.size())},
          {"samples", samples}});
  if (r.infinite) throw ResultError("pseudo-semantic loss is infinite: every sample gives the constraint probability zero");
}

void cmd_sample(const std::string& path, std::size_t count, std::optional<std::uint64_t> seed, const Output& o) {
  require_seed(seed);
  const auto model = load_model("--model", path);
  Rng rng(*seed);
  for (std::size_t s = 0; s < count; ++s) {
    const auto y = model->sample(rng);
    o.emit({{"sample", y}, {"log_joint", model->log_joint(y)}});
  }
}

struct TrainArgs {
  std::string circuit, model_in, model_out, data, type = "markov";
  std::size_t window = 1, k = 2;
  double init_std = 0.0;
  std::optional<double> ce_weight;
  std::optional<std::uint64_t> seed;
  TrainConfig cfg;
};

void cmd_train(TrainArgs a, const Output& o) {
  require_seed(a.seed);
  a.cfg.seed = *a.seed;
  const auto c = load_circuit(a.circuit);
  auto out_file = open_out("--model-out", a.model_out);

  std::unique_ptr<LogitTableModel> model;
  if (!a.model_in.empty()) {
    model = load_model("--model-in", a.model_in);
  } else {
    if (a.k == 0 || c.var_count() % a.k != 0)
      throw UsageError("--k: circuit has " + std::to_string(c.var_count()) + " variables, not a multiple of k");
    const CategoricalSpace space(c.var_count() / a.k, a.k);
    if (a.type == "markov") model = std::make_unique<MarkovARModel>(space, a.window);
    else if (a.type == "factorized") model = std::make_unique<FactorizedModel>(space);
    else throw UsageError("--type: expected markov or factorized");
    if (a.init_std > 0.0) {
      Rng init(a.cfg.seed);
      randomize(*model, init, a.init_std);
    }
  }

  std::vector<DataItem> items;
  if (!a.data.empty()) {
    auto in = open_in("--data", a.data);
    items = read_dataset(in, model->space());
    if (items.empty()) throw UsageError("--data: no items in '" + a.data + "'");
    a.cfg.ce_weight = a.ce_weight.value_or(1.0);
  } else {
    if (a.ce_weight && *a.ce_weight > 0.0) throw UsageError("--ce-weight needs a dataset (--data)");
    const auto n = model->space().steps();
    items.push_back({std::vector<bool>(n, false), Sequence(n, 0)});
    a.cfg.ce_weight = 0.0;
  }

  auto metrics_json = [](const TrainMetrics& m) {
    json j{{"step", m.step}, {"loss", number_or_null(m.loss)}, {"cross_entropy", m.cross_entropy}, {"psl", m.psl}};
    if (m.constraint_probability) j["constraint_probability"] = *m.constraint_probability;
    if (m.consistency) j["consistency"] = *m.consistency;
    return j;
  };
  const auto log = train_toy(*model, c, items, a.cfg, [&](const TrainMetrics& m) { o.emit(metrics_json(m)); });
  write_model(*model, out_file);
  json fin{{"model_out", a.model_out}, {"steps", a.cfg.steps}};
  if (!log.empty()) fin["final_loss"] = number_or_null(log.back().loss);
  o.emit(fin);
}

struct Summary {
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  void add(double x) { sum += x; sq += x * x; ++n; }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double stddev() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, (sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1)));
  }
};

void cmd_fidelity(const std::string& model_path, const std::string& circuit_path, std::size_t samples,
                  std::optional<std::uint64_t> seed, const Output& o) {
  require_seed(seed);
  const auto model = load_model("--model", model_path);
  std::optional<Circuit> c;
  if (!circuit_path.empty()) {
    c = load_circuit(circuit_path);
    if (c->var_count() != model->space().var_count()) throw PslError("circuit does not match the model space");
  }
  const double h_model = entropy_model_exact(*model);
  Rng rng(*seed);
  Summary h, kl, lw;
  std::size_t violations = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto y = model->sample(rng);
    auto rep = fidelity_report(*model, y, s, false);
    rep.entropy_model_bits = h_model;
    json j{{"sample_id", rep.sample_id},
           {"anchor", rep.anchor},
           {"entropy_approx_bits", rep.entropy_approx_bits},
           {"entropy_model_bits", h_model},
           {"kl_bits", number_or_null(rep.kl_bits)},
           {"support_violation", rep.support_violation},
           {"step_entropy_bits", rep.step_entropy_bits}};
    if (c) {
      const auto t = conditional_table(*model, y);
      const double l = log_wmc(*c, categorical_weights(model->space(), t.log_cond));
      j["log_wmc"] = number_or_null(l);
      lw.add(std::exp(l));
    }
    o.emit(j);
    h.add(rep.entropy_approx_bits);
    if (rep.support_violation) ++violations;
    else kl.add(rep.kl_bits);
  }
  json agg{{"aggregate", true},
           {"samples", samples},
           {"entropy_model_bits", h_model},
           {"entropy_approx_bits_mean", h.mean()},
           {"entropy_approx_bits_std", h.stddev()},
           {"kl_bits_mean", kl.mean()},
           {"kl_bits_std", kl.stddev()},
           {"support_violations", violations}};
  if (c) {
    agg["local_probability_mean"] = lw.mean();
    agg["local_probability_std"] = lw.stddev();
  }
  o.emit(agg);
}

struct OracleArgs {
  std::string circuit, weights, model;
  std::optional<double> uniform_p;
  std::size_t samples = 1;
  std::optional<std::uint64_t> seed;
  bool verify = false;
};

void cmd_oracle(const OracleArgs& a, const Output& o) {
  const auto c = load_circuit(a.circuit);
  bool all_ok = true;
  auto report = [&](json j, double oracle_value, std::optional<double> fast, double tol) {
    j["oracle"] = number_or_null(oracle_value);
    if (fast) {
      const double diff = (std::isinf(oracle_value) && oracle_value == *fast) ? 0.0 : std::abs(oracle_value - *fast);
      const bool ok = diff <= tol;
      all_ok = all_ok && ok;
      j["fast"] = number_or_null(*fast);
      j["abs_diff"] = number_or_null(diff);
      j["tolerance"] = tol;
      j["ok"] = ok;
    }
    o.emit(j);
  };

  if (c.var_count() <= oracle::kMaxVars) {
    const double brute = static_cast<double>(count_satisfying_brute_force(c));
    std::optional<double> fast;
    if (a.verify) fast = static_cast<double>(model_count(c));
    report({{"check", "count"}}, brute, fast, 0.0);
  }
  if (!a.weights.empty() || a.uniform_p) {
    const auto w = load_weights(a.weights, a.uniform_p, c.var_count());
    std::optional<double> fast;
    if (a.verify) fast = std::exp(log_wmc(c, w));
    report({{"check", "wmc"}}, oracle::wmc(c, w), fast, 1e-9);
  }
  if (!a.model.empty()) {
    require_seed(a.seed);
    const auto model = load_model("--model", a.model);
    PslConfig cfg;
    cfg.samples = a.samples;
    cfg.seed = *a.seed;
    const auto r = pseudo_semantic_loss(c, *model, cfg);
    std::vector<Sequence> anchors;
    for (const auto& s : r.samples) anchors.push_back(s.table.anchor);
    // Compare probabilities rather than losses so large losses get a sensible tolerance.
    std::optional<double> fast;
    if (a.verify) fast = std::exp(-r.loss);
    report({{"check", "psl_probability"}}, std::exp(-oracle::psl_loss(c, *model, anchors)), fast, 1e-9);
    for (std::size_t s = 0; s < anchors.size(); ++s) {
      const auto cond = oracle::conditionals(*model, anchors[s]);
      std::optional<double> kl_fast;
      if (a.verify) kl_fast = kl_local(r.samples[s].table, *model).bits;
      report({{"check", "kl_bits"}, {"sample_id", s}}, oracle::kl_bits(cond, *model), kl_fast, 1e-9);
    }
  }
  if (a.verify && !all_ok) throw ResultError("oracle disagrees with the fast path");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge compilation and pseudo-semantic loss toolkit", "pslkit"};
  app.require_subcommand(1);
  app.fallthrough();
  bool human = false;
  app.add_flag("--human", human, "Plain text instead of JSON lines");

  std::function<void(const Output&)> action;

  CompileArgs ca;
  auto* compile_cmd = app.add_subcommand("compile", "Compile a CNF file or a template into a smooth d-DNNF");
  compile_cmd->add_option("--in", ca.in, "DIMACS CNF input");
  compile_cmd->add_option("--template", ca.tmpl, "latin_square|sudoku|grid_path|choose_k|banned_patterns");
  compile_cmd->add_option("--n", ca.n, "Template size");
  compile_cmd->add_option("--k", ca.k, "choose_k: number of true variables");
  compile_cmd->add_option("--rows", ca.rows);
  compile_cmd->add_option("--cols", ca.cols);
  compile_cmd->add_option("--alphabet", ca.alphabet, "banned_patterns: alphabet size");
  compile_cmd->add_option("--pattern", ca.patterns, "banned_patterns: digits of one banned run (repeatable)");
  compile_cmd->add_option("--seq-len", ca.seq_len);
  compile_cmd->add_option("--order", ca.order, "lex|freq");
  compile_cmd->add_option("--out", ca.out, "NNF output file");
  compile_cmd->add_option("--one-hot-k", ca.one_hot_k, "Read variables as steps of K one-hot categories");
  compile_cmd->add_flag("--lift-binary", ca.lift, "Turn each Boolean variable into a binary categorical step");
  compile_cmd->add_option("--budget", ca.budget, "Node budget");
  compile_cmd->callback([&] { action = [&](const Output& o) { cmd_compile(ca, o); }; });

  std::string circuit;
  std::uint64_t limit = 1000;
  auto* check_cmd = app.add_subcommand("check", "Report decomposability, smoothness and determinism");
  check_cmd->add_option("--circuit", circuit)->required();
  check_cmd->callback([&] { action = [&](const Output& o) { cmd_check(circuit, o); }; });

  auto* count_cmd = app.add_subcommand("count", "Exact model count");
  count_cmd->add_option("--circuit", circuit)->required();
  count_cmd->callback([&] { action = [&](const Output& o) { cmd_count(circuit, o); }; });

  auto* enum_cmd = app.add_subcommand("enumerate", "List models as signed DIMACS literals");
  enum_cmd->add_option("--circuit", circuit)->required();
  enum_cmd->add_option("--limit", limit, "Fail when more models exist");
  enum_cmd->callback([&] { action = [&](const Output& o) { cmd_enumerate(circuit, limit, o); }; });

  std::string weights;
  std::optional<double> uniform_p;
  auto* wmc_cmd = app.add_subcommand("wmc", "Weighted model count");
  wmc_cmd->add_option("--circuit", circuit)->required();
  wmc_cmd->add_option("--weights", weights, "Lines of '<var> <p_true>'");
  wmc_cmd->add_option("--uniform-p", uniform_p, "Same probability for every variable");
  wmc_cmd->callback([&] { action = [&](const Output& o) { cmd_wmc(circuit, weights, uniform_p, o); }; });

  auto* sl_cmd = app.add_subcommand("sl", "Semantic loss under a factorized distribution");
  sl_cmd->add_option("--circuit", circuit)->required();
  sl_cmd->add_option("--weights", weights);
  sl_cmd->add_option("--uniform-p", uniform_p);
  sl_cmd->callback([&] { action = [&](const Output& o) { cmd_sl(circuit, weights, uniform_p, o); }; });

  PslArgs pa;
  auto* psl_cmd = app.add_subcommand("psl", "Pseudo-semantic loss of a sequence model");
  psl_cmd->add_option("--circuit", pa.circuit)->required();
  psl_cmd->add_option("--model", pa.model)->required();
  psl_cmd->add_option("--samples", pa.samples);
  psl_cmd->add_option("--topk", pa.topk);
  psl_cmd->add_option("--seed", pa.seed);
  psl_cmd->add_flag("--minimize", pa.minimize, "Use -log(1 - p) to push the constraint probability down");
  psl_cmd->add_option("--table-out", pa.table_out, "Write the conditional tables");
  psl_cmd->callback([&] { action = [&](const Output& o) { cmd_psl(pa, o); }; });

  std::string model;
  std::size_t count = 1;
  std::optional<std::uint64_t> seed;
  auto* sample_cmd = app.add_subcommand("sample", "Ancestral samples from a model");
  sample_cmd->add_option("--model", model)->required();
  sample_cmd->add_option("--count", count);
  sample_cmd->add_option("--seed", seed);
  sample_cmd->callback([&] { action = [&](const Output& o) { cmd_sample(model, count, seed, o); }; });

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Gradient descent on cross-entropy plus pseudo-semantic loss");
  train_cmd->add_option("--circuit", ta.circuit)->required();
  train_cmd->add_option("--model-out", ta.model_out)->required();
  train_cmd->add_option("--model-in", ta.model_in, "Start from this model");
  train_cmd->add_option("--type", ta.type, "markov|factorized (fresh model)");
  train_cmd->add_option("--window", ta.window, "Markov context length");
  train_cmd->add_option("--k", ta.k, "Categories per step (fresh model)");
  train_cmd->add_option("--init-std", ta.init_std, "Random logit initialization");
  train_cmd->add_option("--data", ta.data, "Dataset file");
  train_cmd->add_option("--lambda", ta.cfg.lambda);
  train_cmd->add_option("--ce-weight", ta.ce_weight);
  train_cmd->add_option("--steps", ta.cfg.steps);
  train_cmd->add_option("--step-size", ta.cfg.step_size);
  train_cmd->add_option("--samples", ta.cfg.samples);
  train_cmd->add_option("--topk", ta.cfg.top_k);
  train_cmd->add_option("--momentum", ta.cfg.momentum);
  train_cmd->add_option("--log-every", ta.cfg.log_every);
  train_cmd->add_option("--eval-samples", ta.cfg.eval_samples);
  train_cmd->add_option("--seed", ta.seed);
  train_cmd->callback([&] { action = [&](const Output& o) { cmd_train(ta, o); }; });

  std::size_t fid_samples = 100;
  auto* fid_cmd = app.add_subcommand("fidelity", "Entropy and KL of the local approximation");
  fid_cmd->add_option("--model", model)->required();
  fid_cmd->add_option("--circuit", circuit);
  fid_cmd->add_option("--samples", fid_samples);
  fid_cmd->add_option("--seed", seed);
  fid_cmd->callback([&] { action = [&](const Output& o) { cmd_fidelity(model, circuit, fid_samples, seed, o); }; });

  OracleArgs oa;
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force counting, WMC, PSL and KL");
  oracle_cmd->add_option("--circuit", oa.circuit)->required();
  oracle_cmd->add_option("--weights", oa.weights);
  oracle_cmd->add_option("--uniform-p", oa.uniform_p);
  oracle_cmd->add_option("--model", oa.model);
  oracle_cmd->add_option("--samples", oa.samples);
  oracle_cmd->add_option("--seed", oa.seed);
  oracle_cmd->add_flag("--verify", oa.verify, "Also run the fast path and compare");
  oracle_cmd->callback([&] { action = [&](const Output& o) { cmd_oracle(oa, o); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  }

  const Output o{out, human};
  try {
    action(o);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return computation_error;
  }
  return ok;
}

}  // namespace psl::cli
