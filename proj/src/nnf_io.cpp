#include "psl/nnf_io.hpp"

#include <charconv>
#include <sstream>
#include <vector>

namespace psl {

void write_nnf(const Circuit& c, std::ostream& out) {
  if (c.root() + std::size_t{1} != c.size()) throw CircuitError("write_nnf: root must be the last node");
  out << "nnf " << c.size() << ' ' << c.edge_count() << ' ' << c.var_count() << '\n';
  for (const Node& n : c.nodes()) {
    switch (n.kind) {
      case NodeKind::leaf:
        out << "L " << n.lit.dimacs();
        break;
      case NodeKind::constant_true:
        out << 'T';
        break;
      case NodeKind::constant_false:
        out << 'F';
        break;
      case NodeKind::conjunction:
        out << "A " << n.children.size();
        break;
      case NodeKind::disjunction:
        out << "O " << (n.decision ? n.decision->index + 1 : 0) << ' ' << n.children.size();
        break;
    }
    for (NodeId ch : n.children) out << ' ' << ch;
    out << '\n';
  }
}

std::string write_nnf_string(const Circuit& c) {
  std::ostringstream os;
  write_nnf(c, os);
  return os.str();
}

namespace {

struct LineReader {
  std::vector<std::string> toks;
  std::size_t pos = 0;
  std::size_t line;

  long long next_int(const char* what) {
    if (pos >= toks.size()) throw ParseError(line, std::string("missing ") + what);
    long long v = 0;
    const auto& t = toks[pos++];
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) throw ParseError(line, std::string("malformed ") + what);
    return v;
  }
  void expect_end() const {
    if (pos != toks.size()) throw ParseError(line, "trailing tokens");
  }
};

LineReader tokenize(const std::string& text, std::size_t line) {
  LineReader r{{}, 0, line};
  std::istringstream is(text);
  std::string t;
  while (is >> t) r.toks.push_back(t);
  return r;
}

}  // namespace

Circuit read_nnf(std::istream& in) {
  std::string text;
  std::size_t line_no = 0;
  long long num_nodes = -1, num_edges = -1, num_vars = -1;
  while (std::getline(in, text)) {
    ++line_no;
    auto r = tokenize(text, line_no);
    if (r.toks.empty() || r.toks[0] == "c") continue;
    if (r.toks[0] != "nnf") throw ParseError(line_no, "expected 'nnf <nodes> <edges> <vars>' header");
    r.pos = 1;
    num_nodes = r.next_int("node count");
    num_edges = r.next_int("edge count");
    num_vars = r.next_int("variable count");
    r.expect_end();
    if (num_nodes < 1 || num_edges < 0 || num_vars < 0) throw ParseError(line_no, "malformed header");
    break;
  }
  if (num_nodes < 0) throw ParseError(line_no, "missing nnf header");

  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(num_nodes));
  long long edges = 0;
  while (static_cast<long long>(nodes.size()) < num_nodes && std::getline(in, text)) {
    ++line_no;
    auto r = tokenize(text, line_no);
    if (r.toks.empty()) continue;
    const auto id = static_cast<long long>(nodes.size());
    Node n;
    const std::string& tag = r.toks[0];
    r.pos = 1;
    auto read_children = [&] {
      long long count = r.next_int("child count");
      if (count < 1) throw ParseError(line_no, "gate needs at least one child");
      for (long long i = 0; i < count; ++i) {
        long long ch = r.next_int("child id");
        if (ch < 0 || ch >= num_nodes) throw ParseError(line_no, "child id out of range");
        if (ch >= id) throw ParseError(line_no, "forward reference to node " + std::to_string(ch));
        n.children.push_back(static_cast<NodeId>(ch));
      }
      edges += count;
    };
    if (tag == "L") {
      n.kind = NodeKind::leaf;
      long long lit = r.next_int("literal");
      long long v = lit < 0 ? -lit : lit;
      if (lit == 0 || v > num_vars) throw ParseError(line_no, "variable out of range");
      n.lit = {VarId{static_cast<std::uint32_t>(v - 1)}, lit > 0};
    } else if (tag == "T") {
      n.kind = NodeKind::constant_true;
    } else if (tag == "F") {
      n.kind = NodeKind::constant_false;
    } else if (tag == "A") {
      n.kind = NodeKind::conjunction;
      read_children();
    } else if (tag == "O") {
      n.kind = NodeKind::disjunction;
      long long dv = r.next_int("decision variable");
      if (dv < 0 || dv > num_vars) throw ParseError(line_no, "decision variable out of range");
      if (dv > 0) n.decision = VarId{static_cast<std::uint32_t>(dv - 1)};
      read_children();
    } else {
      throw ParseError(line_no, "unknown node tag '" + tag + "'");
    }
    r.expect_end();
    nodes.push_back(std::move(n));
  }
  if (static_cast<long long>(nodes.size()) != num_nodes)
    throw ParseError(line_no, "expected " + std::to_string(num_nodes) + " nodes, found " + std::to_string(nodes.size()));
  if (edges != num_edges)
    throw ParseError(line_no, "header declares " + std::to_string(num_edges) + " edges, found " + std::to_string(edges));
  while (std::getline(in, text)) {
    ++line_no;
    if (!tokenize(text, line_no).toks.empty()) throw ParseError(line_no, "content after the last node");
  }
  auto root = static_cast<NodeId>(nodes.size() - 1);
  return Circuit(std::move(nodes), root, static_cast<std::size_t>(num_vars));
}

Circuit read_nnf_string(const std::string& text) {
  std::istringstream in(text);
  return read_nnf(in);
}

}  // namespace psl
