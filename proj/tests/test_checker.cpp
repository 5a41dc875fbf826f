#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "clverify/checker.hpp"
#include "helpers.hpp"

using namespace clv;
using clvtest::load_spec;

namespace {

const AnalyzedSpec& ring_spec() {
  static AnalyzedSpec as = analyze(load_spec("token_ring.clspec"));
  return as;
}

const AnalyzedSpec& variants_spec() {
  static AnalyzedSpec as = analyze(load_spec("ring_variants.clspec"));
  return as;
}

int token_count(const RewritingTree& t, const AnalyzedSpec& as) {
  int n = 0;
  for (auto& [w, ri] : t.label) {
    auto nv = normal_view(as.spec.sid.rules[ri], ri);
    if (nv.component && *nv.component->state == "t") ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("deadlock exact: yes exactly at zero or all tokens") {
  auto q = make_query(ring_spec(), "Ring");
  for (int n : {2, 3, 4}) {
    auto v = check_deadlock_bounded(q, 2 * n, "exact");
    CHECK(v.summary == Answer::Yes);
    for (auto& inst : v.instances) {
      if ((int)inst.tree.size() != 2 * n) continue;
      int comps = component_count(inst.tree, q.analyzed.spec.sid);
      int toks = token_count(inst.tree, q.analyzed);
      bool expect = (toks == 0 || toks == comps);
      CHECK(inst.answer == (expect ? Answer::Yes : Answer::No));
      if (expect && toks == 0)
        // the all-n instance deadlocks immediately: initial marking witness
        CHECK(inst.witness.at("firing").empty());
    }
  }
}

TEST_CASE("deadlock witnesses replay") {
  auto q = make_query(ring_spec(), "Ring");
  auto v = check_deadlock_bounded(q, 6, "exact");
  for (auto& inst : v.instances) {
    if (inst.answer != Answer::Yes) continue;
    auto ni = detail::instantiate(inst.tree, q.analyzed);
    Bits m = ni.m0;
    for (auto& tname : inst.witness.at("firing")) {
      bool fired = false;
      for (int t = 0; t < (int)ni.net.transitions.size() && !fired; ++t)
        if (ni.net.transitions[t].to_string() == tname.get<std::string>() &&
            transition_enabled(ni.net, m, t)) {
          m = fire(ni.net, m, t);
          fired = true;
        }
      CHECK(fired);
    }
    CHECK(is_deadlock(ni.net, m));
  }
}

TEST_CASE("deadlock invariant mode is sound against exact mode") {
  auto q = make_query(ring_spec(), "Ring");
  for (int n : {2, 3}) {
    auto ve = check_deadlock_bounded(q, 2 * n, "exact");
    auto vi = check_deadlock_bounded(q, 2 * n, "invariant");
    REQUIRE(ve.instances.size() == vi.instances.size());
    for (size_t i = 0; i < ve.instances.size(); ++i) {
      if (ve.instances[i].answer == Answer::Yes)
        CHECK(vi.instances[i].answer == Answer::Yes);
    }
  }
}

TEST_CASE("reach: a token state is reachable from any tokened ring") {
  auto q = make_query(ring_spec(), "Ring");
  auto v = check_reach_bounded(q, {"t"}, 6, "exact");
  CHECK(v.summary == Answer::Yes);
  for (auto& inst : v.instances) {
    bool has_token = token_count(inst.tree, q.analyzed) > 0;
    CHECK(inst.answer == (has_token ? Answer::Yes : Answer::No));
    if (has_token) CHECK(inst.witness.at("firing").empty());  // initial marking qualifies
  }
}

TEST_CASE("reach (t,t) is impossible from one-token instances") {
  auto q = make_query(variants_spec(), "RingOne");
  auto v = check_reach_bounded(q, {"t", "t"}, 8, "exact");
  CHECK(v.summary == Answer::No);
  for (auto& inst : v.instances) CHECK(inst.answer == Answer::No);
}

TEST_CASE("reach with an empty tuple is vacuously satisfied") {
  auto q = make_query(ring_spec(), "Ring");
  auto v = check_reach_bounded(q, {}, 4, "exact");
  CHECK(v.summary == Answer::Yes);
  for (auto& inst : v.instances) CHECK(inst.answer == Answer::Yes);
}

TEST_CASE("reach rejects unknown states") {
  auto q = make_query(ring_spec(), "Ring");
  CHECK_THROWS_AS(check_reach_bounded(q, {"zz"}, 4, "exact"), UnknownState);
}

TEST_CASE("safe: any ring stays a ring") {
  auto q = make_query(ring_spec(), "Ring");
  auto v = check_safe_bounded(q, q, 6);
  CHECK(v.summary == Answer::Yes);
}

TEST_CASE("safe: one-token rings stay one-token rings") {
  auto phi = make_query(variants_spec(), "RingOne");
  auto v = check_safe_bounded(phi, phi, 8);
  CHECK(v.summary == Answer::Yes);
  for (auto& inst : v.instances) CHECK(inst.answer == Answer::Yes);
}

TEST_CASE("safe: a one-token ring never satisfies the adjacent-pair sentence") {
  auto phi = make_query(variants_spec(), "RingOne");
  auto psi = make_query(variants_spec(), "RingAdj");
  auto v = check_safe_bounded(phi, psi, 6);
  CHECK(v.summary == Answer::No);
  // the initial configuration itself is the witness
  for (auto& inst : v.instances)
    if (inst.answer == Answer::No) CHECK(!inst.witness.is_null());
}

TEST_CASE("inductive: rings and full rings are inductive") {
  auto v1 = check_inductive_bounded(make_query(ring_spec(), "Ring"), 6);
  CHECK(v1.summary == Answer::Yes);
  auto v2 = check_inductive_bounded(make_query(variants_spec(), "RingFull"), 8);
  CHECK(v2.summary == Answer::Yes);  // vacuous: no step exists
}

TEST_CASE("inductive: the adjacent-pair pattern breaks at a 4-ring") {
  auto v = check_inductive_bounded(make_query(variants_spec(), "RingAdj"), 8);
  CHECK(v.summary == Answer::No);
  bool found = false;
  for (auto& inst : v.instances)
    if (inst.answer == Answer::No && component_count(inst.tree, variants_spec().spec.sid) == 4)
      found = true;
  CHECK(found);
}

TEST_CASE("verdict JSON carries the schema and per-instance answers") {
  auto q = make_query(ring_spec(), "Ring");
  auto v = check_deadlock_bounded(q, 4, "exact");
  auto j = v.to_json();
  CHECK(j["schema"] == "clverify/1");
  CHECK(j["query"] == "deadlock");
  CHECK(j["summary"] == "yes");
  CHECK(j["instances"].size() == 4);
}

TEST_CASE("jobs > 1 yields the same verdict") {
  auto q = make_query(ring_spec(), "Ring");
  CheckCaps caps;
  caps.jobs = 4;
  auto a = check_deadlock_bounded(q, 8, "exact");
  auto b = check_deadlock_bounded(q, 8, "exact", caps);
  REQUIRE(a.instances.size() == b.instances.size());
  for (size_t i = 0; i < a.instances.size(); ++i) {
    CHECK(a.instances[i].answer == b.instances[i].answer);
    CHECK(a.instances[i].tree == b.instances[i].tree);
  }
}

TEST_CASE("bfs cap produces inconclusive, never a silent no") {
  auto q = make_query(ring_spec(), "Ring");
  CheckCaps caps;
  caps.bfs_cap = 1;
  auto v = check_deadlock_bounded(q, 6, "exact", caps);
  bool some_inconclusive = false;
  for (auto& inst : v.instances)
    if (inst.answer == Answer::Inconclusive) some_inconclusive = true;
  CHECK(some_inconclusive);
}

// --- bounded satisfaction (models) ---------------------------------------

TEST_CASE("models: canonical models satisfy their own sentence") {
  auto q = make_query(ring_spec(), "Ring");
  for (auto& t : enumerate_trees(q, 6)) {
    auto c = canonical_model(t, q.analyzed);
    auto r = models(c, q, 8);
    CHECK(r.verdict == ModelsResult::Verdict::Yes);
  }
}

TEST_CASE("models: a 3-ring over naturals with one token satisfies Ring") {
  auto q = make_query(ring_spec(), "Ring");
  auto c = clvtest::ring_config(3, {2});
  auto r = models(c, q, 6);
  REQUIRE(r.verdict == ModelsResult::Verdict::Yes);
  REQUIRE(r.tree.has_value());
  // the witness replays: renaming the canonical model gives back c
  auto canon = canonical_model(*r.tree, q.analyzed);
  CHECK(rename_indices(canon, *r.renaming, q.analyzed.spec.signature) == c);
}

TEST_CASE("models: an extra chord interaction breaks satisfaction") {
  auto q = make_query(ring_spec(), "Ring");
  auto c = clvtest::ring_config(4, {1});
  c.architecture.interactions["T"].insert(std::vector<Index>{Index{1}, Index{3}});
  auto r = models(c, q, 100);
  CHECK(r.verdict == ModelsResult::Verdict::No);  // pruning certifies the no
}

TEST_CASE("models: renamed canonical models still satisfy the sentence") {
  auto q = make_query(ring_spec(), "Ring");
  std::mt19937 rng(5);
  for (auto& t : enumerate_trees(q, 6)) {
    auto c = canonical_model(t, q.analyzed);
    for (int k = 0; k < 3; ++k) {
      auto f = clvtest::random_renaming(c, rng);
      auto rc = rename_indices(c, f, q.analyzed.spec.signature);
      CHECK(models(rc, q, 8).verdict == ModelsResult::Verdict::Yes);
    }
  }
}

TEST_CASE("models: desugared and raw specs agree") {
  Spec raw = load_spec("chain.clspec");
  AnalyzedSpec as1 = analyze(raw);
  Spec pre = raw;
  pre.sid = desugar_stateless_atoms(raw.sid, raw.signature);
  AnalyzedSpec as2 = analyze(pre);
  auto q1 = make_query(as1, "SomeToken");
  auto q2 = make_query(as2, "SomeToken");
  for (auto& t : enumerate_trees(q1, 6)) {
    auto c = canonical_model(t, as1);
    CHECK(models(c, q1, 8).verdict == models(c, q2, 8).verdict);
  }
}

TEST_CASE("models: bound exhaustion is distinct from a definite no") {
  auto q = make_query(ring_spec(), "Ring");
  auto c = clvtest::ring_config(3, {1});
  auto r = models(c, q, 3);  // a 3-ring needs a 6-node tree
  CHECK(r.verdict == ModelsResult::Verdict::BoundExhausted);
  // two-token ring vs the one-token sentence: component pruning certifies no
  auto qv = make_query(variants_spec(), "RingOne");
  auto r2 = models(clvtest::ring_config(3, {1, 2}), qv, 1000);
  CHECK(r2.verdict == ModelsResult::Verdict::No);
}

TEST_CASE("models rejects non-tight inputs") {
  auto q = make_query(ring_spec(), "Ring");
  auto c = clvtest::ring_config(2, {1});
  c.architecture.interactions["T"].insert(std::vector<Index>{Index{7}, Index{8}});  // dangling endpoints
  CHECK_THROWS_AS(models(c, q, 8), NotTight);
}

TEST_CASE("reach witnesses replay and satisfy the request") {
  auto q = make_query(ring_spec(), "Ring");
  auto v = check_reach_bounded(q, {"t", "t"}, 8, "exact");
  for (auto& inst : v.instances) {
    if (inst.answer != Answer::Yes) continue;
    auto ni = detail::instantiate(inst.tree, q.analyzed);
    Bits m = ni.m0;
    for (auto& tname : inst.witness.at("firing")) {
      bool fired = false;
      for (int t = 0; t < (int)ni.net.transitions.size() && !fired; ++t)
        if (ni.net.transitions[t].to_string() == tname.get<std::string>() &&
            transition_enabled(ni.net, m, t)) {
          m = fire(ni.net, m, t);
          fired = true;
        }
      REQUIRE(fired);
    }
    int tokens = 0;
    for (auto& p : ni.net.to_marking(m))
      if (p.state == "t") ++tokens;
    CHECK(tokens >= 2);
  }
}

TEST_CASE("safe counterexample markings indeed fail the target sentence") {
  auto phi = make_query(variants_spec(), "RingOne");
  auto psi = make_query(variants_spec(), "RingAdj");
  auto v = check_safe_bounded(phi, psi, 6);
  REQUIRE(v.summary == Answer::No);
  for (auto& inst : v.instances) {
    if (inst.answer != Answer::No) continue;
    auto ni = detail::instantiate(inst.tree, phi.analyzed);
    Marking m;
    for (auto& p : inst.witness.at("marking"))
      m.insert({p[0].get<std::string>(), index_from_string(p[1].get<std::string>())});
    Configuration c{ni.canon.architecture, m};
    CHECK(models(c, psi, 12).verdict == ModelsResult::Verdict::No);
  }
}
