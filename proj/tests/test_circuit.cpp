#include <gtest/gtest.h>

#include "psl/circuit.hpp"
#include "support/brute.hpp"

using namespace psl;

namespace {

// Smooth d-DNNF for (A => C) & (B => C) built by hand:
// C & (A | !A) & (B | !B)   or   !C & !A & !B
Circuit implies_c() {
  CircuitBuilder b(3);
  auto a = b.leaf(pos(0)), na = b.leaf(neg(0)), bb = b.leaf(pos(1)), nb = b.leaf(neg(1));
  auto c = b.leaf(pos(2)), nc = b.leaf(neg(2));
  auto left = b.conjunction({c, b.disjunction({a, na}, VarId{0}), b.disjunction({bb, nb}, VarId{1})});
  auto right = b.conjunction({nc, na, nb});
  return std::move(b).finish(b.disjunction({left, right}, VarId{2}));
}

}  // namespace

TEST(Circuit, HandBuiltExampleIsTractable) {
  auto c = implies_c();
  const auto& r = c.properties();
  EXPECT_TRUE(r.decomposable);
  EXPECT_TRUE(r.smooth);
  EXPECT_EQ(r.deterministic, Determinism::yes);
  EXPECT_NO_THROW(require_tractable(c));
  EXPECT_EQ(model_count(c), 5);
  EXPECT_EQ(count_satisfying_brute_force(c), 5u);
  EXPECT_EQ(c.node(c.root()).kind, NodeKind::disjunction);
  EXPECT_EQ(c.root(), c.size() - 1);
}

TEST(Circuit, DetectsNonDecomposableAnd) {
  CircuitBuilder b(1);
  auto root = b.conjunction({b.leaf(pos(0)), b.leaf(neg(0))});
  auto c = std::move(b).finish(root);
  EXPECT_FALSE(c.properties().decomposable);
  EXPECT_THROW(require_tractable(c), CircuitError);
}

TEST(Circuit, DetectsNonSmoothOr) {
  CircuitBuilder b(2);
  auto root = b.disjunction({b.leaf(pos(0)), b.conjunction({b.leaf(neg(0)), b.leaf(pos(1))})});
  auto c = std::move(b).finish(root);
  EXPECT_TRUE(c.properties().decomposable);
  EXPECT_FALSE(c.properties().smooth);
  EXPECT_EQ(c.properties().deterministic, Determinism::yes);
}

TEST(Circuit, DetectsOverlappingOr) {
  // (A & B) | (A & !B) | (A & B): the last child overlaps the first
  CircuitBuilder b(2, false);
  auto x = b.conjunction({b.leaf(pos(0)), b.leaf(pos(1))});
  auto y = b.conjunction({b.leaf(pos(0)), b.leaf(neg(1))});
  auto z = b.conjunction({b.leaf(pos(0)), b.leaf(pos(1))});
  auto c = std::move(b).finish(b.disjunction({x, y, z}));
  EXPECT_EQ(c.properties().deterministic, Determinism::no);
  EXPECT_THROW(require_tractable(c), CircuitError);
}

TEST(Circuit, LargeCircuitsFallBackToWitnesses) {
  const std::uint32_t n = 24;
  CircuitBuilder good(n), bad(n);
  std::vector<NodeId> g, h;
  for (std::uint32_t v = 0; v < n; ++v) {
    g.push_back(good.disjunction({good.leaf(pos(v)), good.leaf(neg(v))}, VarId{v}));
    h.push_back(bad.disjunction({bad.leaf(pos(v)), bad.leaf(neg(v))}));
  }
  auto cg = std::move(good).finish(good.conjunction(g));
  auto cb = std::move(bad).finish(bad.conjunction(h));
  EXPECT_EQ(cg.properties().deterministic, Determinism::yes);
  EXPECT_EQ(cb.properties().deterministic, Determinism::unverifiable);
  EXPECT_FALSE(cb.properties().note.empty());
  EXPECT_THROW(require_tractable(cb), CircuitError);
  EXPECT_EQ(model_count(cg), BigCount(1) << n);
}

TEST(Circuit, ConstructorValidates) {
  std::vector<Node> forward{{NodeKind::conjunction, {}, {1}, std::nullopt}, {NodeKind::leaf, pos(0), {}, std::nullopt}};
  EXPECT_THROW(Circuit(forward, 0, 1), CircuitError);
  std::vector<Node> out_of_range{{NodeKind::leaf, pos(3), {}, std::nullopt}};
  EXPECT_THROW(Circuit(out_of_range, 0, 2), CircuitError);
  std::vector<Node> empty_gate{{NodeKind::disjunction, {}, {}, std::nullopt}};
  EXPECT_THROW(Circuit(empty_gate, 0, 1), CircuitError);
  EXPECT_THROW(Circuit({}, 0, 1), CircuitError);
}

TEST(Circuit, FreeVariablesMultiplyTheCount) {
  CircuitBuilder b(5);
  auto c = std::move(b).finish(b.leaf(pos(2)));
  EXPECT_EQ(model_count(c), 16);
  EXPECT_EQ(enumerate_models(c, 100).size(), 16u);
  EXPECT_EQ(model_count(Circuit::constant(true, 3)), 8);
  EXPECT_EQ(model_count(Circuit::constant(false, 3)), 0);
  EXPECT_EQ(model_count(Circuit::constant(true, 0)), 1);
}

TEST(Circuit, EnumerationListsExactlyTheModels) {
  auto c = implies_c();
  auto models = enumerate_models(c, 5);
  ASSERT_EQ(models.size(), 5u);
  std::set<std::vector<bool>> seen;
  for (const auto& m : models) {
    EXPECT_TRUE(c.evaluate(m.values));
    seen.insert(m.values);
  }
  EXPECT_EQ(seen.size(), 5u);
  EXPECT_THROW(enumerate_models(c, 4), CircuitError);
}

TEST(Circuit, LaneEvaluationMatchesScalar) {
  auto c = implies_c();
  std::vector<std::uint64_t> lanes(3, 0);
  for (std::uint64_t w = 0; w < 8; ++w)
    for (int v = 0; v < 3; ++v)
      if ((w >> v) & 1U) lanes[v] |= std::uint64_t{1} << w;
  auto out = c.evaluate_lanes(lanes);
  for (std::uint64_t w = 0; w < 8; ++w)
    EXPECT_EQ(((out[c.root()] >> w) & 1U) != 0, c.evaluate(Assignment::from_bits(w, 3).values));
}

TEST(Circuit, BuilderSimplifiesTrivialGates) {
  CircuitBuilder b(2);
  auto x = b.leaf(pos(0));
  EXPECT_EQ(b.conjunction({x}), x);
  EXPECT_EQ(b.node(b.conjunction({})).kind, NodeKind::constant_true);
  EXPECT_EQ(b.node(b.disjunction({})).kind, NodeKind::constant_false);
  EXPECT_EQ(b.leaf(pos(0)), x);  // hash consing
}

TEST(Circuit, ScopesAndEdges) {
  auto c = implies_c();
  EXPECT_EQ(c.scope(c.root()).size(), 3u);
  EXPECT_EQ(c.edge_count(), 2u + 3u + 3u + 2u + 2u);
  EXPECT_STREQ(to_string(Determinism::unverifiable), "unverifiable");
}
