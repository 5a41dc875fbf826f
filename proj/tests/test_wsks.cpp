#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "clverify/checker.hpp"
#include "clverify/wsks_build.hpp"
#include "clverify/wsks_export.hpp"
#include "helpers.hpp"

using namespace clv;
using clvtest::load_spec;
using F = WsksFormula;

namespace {

const AnalyzedSpec& ring() {
  static AnalyzedSpec as = analyze(load_spec("token_ring.clspec"));
  return as;
}

RewritingTree ring_tree(int which, int max_nodes) {
  auto trees = enumerate_trees(make_query(ring(), "Ring"), max_nodes);
  return trees[which];
}

Valuation ring_valuation(const RewritingTree& t) {
  Valuation nu;
  add_tree_valuation(nu, t, ring().spec.sid.rules.size());
  auto c = canonical_model(t, ring());
  add_marking_valuation(nu, ring().spec.signature, c.marking, "X");
  return nu;
}

}  // namespace

TEST_CASE("eval basics: equality, membership, quantifiers") {
  Universe U = Universe::of({Index{1}, Index{2}}, 2);
  Valuation nu;
  CHECK(eval(F::term_eq(WTerm::eps(), WTerm::eps()), nu, U));
  CHECK(!eval(F::term_eq(WTerm::eps(), WTerm::eps().child(1)), nu, U));
  CHECK(eval(F::exists1("x", F::term_eq(WTerm::v("x"), WTerm::eps())), nu, U));
  nu.so["A"] = {Index{1}};
  CHECK(eval(F::member("A", WTerm::eps().child(1)), nu, U));
  CHECK(!eval(F::member("A", WTerm::eps()), nu, U));
  CHECK(eval(F::exists2("B", F::conj({F::member("B", WTerm::eps()),
                                      F::neg(F::member("B", WTerm::v("y")))})),
             Valuation{{{"y", Index{2}}}, {}}, U));
  CHECK_THROWS_AS(eval(F::member("Z", WTerm::eps()), nu, U), WsksUnboundVariable);
}

TEST_CASE("sugar expansion preserves evaluation") {
  Universe U = Universe::of({Index{1}, Index{2}, Index{1, 1}}, 2);
  std::mt19937 rng(3);
  for (int iter = 0; iter < 20; ++iter) {
    Valuation nu;
    auto& A = nu.so["A"];
    for (auto& u : U.nodes)
      if (rng() % 2) A.insert(u);
    for (int n = 0; n <= 3; ++n) {
      F geq = F::card_geq("A", n);
      F eq = F::card_eq("A", n);
      CHECK(eval(geq, nu, U) == eval(expand_sugar(geq), nu, U));
      CHECK(eval(eq, nu, U) == eval(expand_sugar(eq), nu, U));
      CHECK(eval(geq, nu, U) == ((int)A.size() >= n));
      CHECK(eval(eq, nu, U) == ((int)A.size() == n));
    }
    F enumq = F::set_enum_eq("A", {WTerm::v("u"), WTerm::v("v")});
    Valuation nu2 = nu;
    nu2.fo["u"] = U.nodes[rng() % U.size()];
    nu2.fo["v"] = U.nodes[rng() % U.size()];
    CHECK(eval(enumq, nu2, U) == eval(expand_sugar(enumq), nu2, U));
  }
}

TEST_CASE("bounded_sat finds witnesses and respects contradictions") {
  Universe U = Universe::of({Index{1}}, 2);
  auto w = bounded_sat(F::exists1("x", F::term_eq(WTerm::v("x"), WTerm::eps())), U);
  CHECK(w.has_value());
  F contra = F::conj({F::member("X", WTerm::eps()), F::neg(F::member("X", WTerm::eps()))});
  CHECK(!bounded_sat(contra, U).has_value());
  auto m = bounded_sat(F::member("X", WTerm::eps()), U);
  REQUIRE(m.has_value());
  CHECK(m->so.at("X").count(Index{}) == 1);
}

TEST_CASE("rewrtree formula accepts enumerated trees, rejects mutations") {
  auto& as = ring();
  for (auto& t : enumerate_trees(make_query(as, "Ring"), 6)) {
    Universe U = Universe::from_tree(t, as.spec.sid.kappa());
    Valuation nu;
    add_tree_valuation(nu, t, as.spec.sid.rules.size());
    F rt = rewrtree_formula(as);
    CHECK(eval(rt, nu, U));
    // relabel one node with a head-mismatched rule
    for (auto& [w, ri] : t.label) {
      for (int other = 0; other < (int)as.spec.sid.rules.size(); ++other) {
        if (as.spec.sid.rules[other].head == as.spec.sid.rules[ri].head) continue;
        RewritingTree bad = t;
        bad.label[w] = other;
        Valuation nb;
        add_tree_valuation(nb, bad, as.spec.sid.rules.size());
        CHECK(!eval(rt, nb, U));
        break;
      }
      break;  // one mutation per tree is plenty
    }
  }
  // empty R-sets fail the root clause
  Universe U = Universe::of({Index{}}, 2);
  Valuation empty;
  add_tree_valuation(empty, RewritingTree{}, as.spec.sid.rules.size());
  CHECK(!eval(rewrtree_formula(as), empty, U));
}

TEST_CASE("bounded_sat of the rewrtree formula recovers a tree labeling") {
  auto& as = ring();
  auto t = ring_tree(0, 4);
  Universe U = Universe::from_tree(t, as.spec.sid.kappa());
  // constrain the R-partition to cover the universe: here, the 2-ring tree
  std::vector<F> cover;
  for (auto& u : U.nodes) {
    std::vector<F> any;
    for (size_t i = 0; i < as.spec.sid.rules.size(); ++i) {
      WTerm tm = WTerm::eps();
      for (int d : u) tm = tm.child(d);
      any.push_back(F::member(rvar((int)i), tm));
    }
    cover.push_back(F::disj(std::move(any)));
  }
  F query = F::conj({rewrtree_formula(as), F::conj(std::move(cover))});
  auto sol = bounded_sat(query, U);
  REQUIRE(sol.has_value());
  // the solution must itself be a valid rewriting tree over the universe
  RewritingTree got;
  for (size_t i = 0; i < as.spec.sid.rules.size(); ++i)
    for (auto& u : sol->so.at(rvar((int)i))) got.label[u] = (int)i;
  CHECK(got.size() == U.size());
  CHECK(validate_tree(got, as.spec.sid, "Ring"));
}

TEST_CASE("mark formula: canonical valuations pass, corrupted ones fail") {
  auto& as = ring();
  auto t = ring_tree(1, 4);
  Universe U = Universe::from_tree(t, as.spec.sid.kappa());
  Valuation nu = ring_valuation(t);
  F mk = mark_formula(as, "X");
  CHECK(eval(mk, nu, U));
  // two states marked for one node
  Valuation two = nu;
  two.so[fam("X", "n")].insert(*two.so[fam("X", "t")].begin());
  CHECK(!eval(mk, two, U));
  // a token deleted
  Valuation gone = nu;
  gone.so[fam("X", "t")].clear();
  CHECK(!eval(mk, gone, U));
}

TEST_CASE("mark formula agrees with is_precise over a full sweep") {
  auto& as = ring();
  auto t = ring_tree(0, 4);
  Universe U = Universe::from_tree(t, as.spec.sid.kappa());
  auto c = canonical_model(t, as);
  F mk = mark_formula(as, "X");
  // sweep all assignments of X_n, X_t over subsets of the two component nodes
  std::vector<Index> comps(c.architecture.of_component("S").begin(),
                           c.architecture.of_component("S").end());
  for (int mn = 0; mn < (1 << comps.size()); ++mn)
    for (int mt = 0; mt < (1 << comps.size()); ++mt) {
      Valuation nu;
      add_tree_valuation(nu, t, as.spec.sid.rules.size());
      Marking m;
      for (size_t i = 0; i < comps.size(); ++i) {
        if (mn >> i & 1) m.insert({"n", comps[i]});
        if (mt >> i & 1) m.insert({"t", comps[i]});
      }
      add_marking_valuation(nu, as.spec.signature, m, "X");
      CHECK(eval(mk, nu, U) == is_precise(as.spec.signature, c.architecture, m));
    }
}

TEST_CASE("flow formula: pre/post pairs of the 2-ring, and nothing else") {
  auto& as = ring();
  auto t = ring_tree(0, 4);
  Universe U = Universe::from_tree(t, as.spec.sid.kappa());
  auto c = canonical_model(t, as);
  auto net = build_net(as.spec.signature, c.architecture);
  F flow = flow_formula(as, "X", "Xp");

  Valuation base;
  add_tree_valuation(base, t, as.spec.sid.rules.size());
  // a true transition
  {
    Valuation nu = base;
    add_marking_valuation(nu, as.spec.signature, net.to_marking(net.transitions[0].pre), "X");
    add_marking_valuation(nu, as.spec.signature, net.to_marking(net.transitions[0].post), "Xp");
    CHECK(eval(flow, nu, U));
  }
  // a mismatched pair
  {
    Valuation nu = base;
    add_marking_valuation(nu, as.spec.signature, net.to_marking(net.transitions[0].pre), "X");
    add_marking_valuation(nu, as.spec.signature, net.to_marking(net.transitions[0].pre), "Xp");
    CHECK(!eval(flow, nu, U));
  }
  // solution set = exactly the transitions
  auto sols = bounded_sat_all(flow, U, {}, base);
  std::set<std::pair<Marking, Marking>> got, want;
  for (auto& s : sols) {
    Marking pre, post;
    for (auto& q : all_states(as.spec.signature)) {
      for (auto& u : s.so.at(fam("X", q))) pre.insert({q, u});
      for (auto& u : s.so.at(fam("Xp", q))) post.insert({q, u});
    }
    got.insert({pre, post});
  }
  for (auto& tr : net.transitions)
    want.insert({net.to_marking(tr.pre), net.to_marking(tr.post)});
  CHECK(got == want);
}

TEST_CASE("flow formula of an interaction-free SID is constant false") {
  Spec sp = parse_spec(
      "component S { ports: p; states: a; a -p-> a; }\n"
      "interaction U = (S.p);\n"
      "P(x) <= S@a(x);\n");
  auto as = analyze(sp);
  REQUIRE(as.normal_form.ok());
  F flow = flow_formula(as, "X", "Xp");
  CHECK(flow.kind == WK::Or);
  CHECK(flow.kids.empty());
}

TEST_CASE("init formula forces the canonical marking exactly") {
  auto& as = ring();
  for (int which : {0, 3}) {
    auto t = ring_tree(which, 4);
    Universe U = Universe::from_tree(t, as.spec.sid.kappa());
    auto c = canonical_model(t, as);
    Valuation base;
    add_tree_valuation(base, t, as.spec.sid.rules.size());
    auto sols = bounded_sat_all(init_formula(as, "Y"), U, {}, base);
    REQUIRE(sols.size() == 1);
    Marking got;
    for (auto& q : all_states(as.spec.signature))
      for (auto& u : sols[0].so.at(fam("Y", q))) got.insert({q, u});
    CHECK(got == c.marking);
  }
}

TEST_CASE("sexpr dumps are stable") {
  auto& as = ring();
  F rt = rewrtree_formula(as);
  CHECK(sexpr(rt) == sexpr(rewrtree_formula(as)));
  CHECK(sexpr(rt).substr(0, 5) == "(and ");
  F dl = deadlock_vc(as, "Ring").formula;
  CHECK(sexpr(dl) == sexpr(deadlock_vc(as, "Ring").formula));
}

TEST_CASE("deadlock VC is satisfiable over the 2-ring universe") {
  auto& as = ring();
  auto vc = deadlock_vc(as, "Ring");
  auto t = ring_tree(0, 4);
  Universe U = Universe::from_tree(t, vc.arranged.spec.sid.kappa());
  EvalCaps caps;
  auto sol = bounded_sat(vc.formula, U, caps);
  REQUIRE(sol.has_value());
  // the witness decodes to a tree whose initial marking admits the deadlock X
  RewritingTree got;
  for (size_t i = 0; i < vc.arranged.spec.sid.rules.size(); ++i)
    for (auto& u : sol->so.at(rvar((int)i))) got.label[u] = (int)i;
  CHECK(validate_tree(got, vc.arranged.spec.sid, "Ring"));
}

TEST_CASE("reach VC for (t,t) is unsatisfiable over one-token chains") {
  auto as = analyze(load_spec("chain.clspec"));
  REQUIRE(as.normal_form.ok());
  auto vc = reach_vc(as, "OneToken", {"t", "t"});
  auto q = make_query(as, "OneToken");
  for (auto& t : enumerate_trees(q, 4)) {
    Universe U = Universe::from_tree(t, vc.arranged.spec.sid.kappa());
    CHECK(!bounded_sat(vc.formula, U).has_value());
  }
}

TEST_CASE("errset with an empty tuple is trivially true") {
  auto& as = ring();
  F e = errset_formula(as, {}, "X");
  Universe U = Universe::of({Index{}}, 2);
  Valuation nu;
  add_marking_valuation(nu, as.spec.signature, {}, "X");
  CHECK(eval(e, nu, U));
}

TEST_CASE("solver export passes the grammar check and is deterministic") {
  auto& as = ring();
  auto vc = deadlock_vc(as, "Ring");
  std::string text = export_solver(vc.formula, vc.arranged.spec.sid.kappa(), "ring deadlock VC");
  CHECK(text == export_solver(vc.formula, vc.arranged.spec.sid.kappa(), "ring deadlock VC"));
  CHECK(export_grammar_ok(text));
  CHECK(text.substr(0, 5) == "ws2s;");
}

TEST_CASE("kappa > 2 exports use the first-child/next-sibling encoding") {
  F f = F::exists1("x", F::term_eq(WTerm::v("x"), WTerm::eps().child(3)));
  std::string text = export_solver(f, 3);
  CHECK(export_grammar_ok(text));
  CHECK(text.find("first-child/next-sibling") != std::string::npos);
  CHECK(text.find("vroot.0.1.1") != std::string::npos);
}

TEST_CASE("universe guards: valuations must be covered, caps respected") {
  Universe U = Universe::of({Index{1}}, 2);
  Valuation nu;
  nu.so["A"] = {Index{2, 2}};
  CHECK_THROWS_AS(eval(F::member("A", WTerm::eps()), nu, U), UniverseMismatch);
  EvalCaps tiny;
  tiny.max_universe = 1;
  CHECK_THROWS_AS(eval(F::exists2("B", F::member("B", WTerm::eps())), Valuation{}, U, tiny),
                  UniverseCapExceeded);
}

TEST_CASE("exact deadlocks imply a satisfiable VC over the instance universe") {
  auto& as = ring();
  auto q = make_query(as, "Ring");
  auto verdict = check_deadlock_bounded(q, 6, "exact");
  auto vc = deadlock_vc(as, "Ring");
  for (auto& inst : verdict.instances) {
    Universe U = Universe::from_tree(inst.tree, vc.arranged.spec.sid.kappa());
    bool sat = bounded_sat(vc.formula, U).has_value();
    if (inst.answer == Answer::Yes) CHECK(sat);
  }
}
