#pragma once

#include "clverify/pathauto.hpp"
#include "clverify/wsks_eval.hpp"

namespace clv {

// Builders for the verification-condition formula family. Rule sets index the
// designated second-order variables R1..RP in SID order; markings are encoded
// by one set variable per behavior state, named <family>_<state>.

inline std::string fam(const std::string& family, const std::string& state) {
  return family + "_" + state;
}

inline std::vector<std::string> all_states(const Signature& sig) {
  std::vector<std::string> out;
  for (auto& c : sig.components)
    for (auto& q : c.states) out.push_back(q);
  return out;
}

inline std::string rvar(int rule_index) { return "R" + std::to_string(rule_index + 1); }

// valuation fragments used by the tests and the bounded checks
inline void add_tree_valuation(Valuation& nu, const RewritingTree& t, size_t rule_count) {
  for (size_t i = 0; i < rule_count; ++i) nu.so[rvar((int)i)];
  for (auto& [w, ri] : t.label) nu.so[rvar(ri)].insert(w);
}

inline void add_marking_valuation(Valuation& nu, const Signature& sig, const Marking& m,
                                  const std::string& family) {
  for (auto& q : all_states(sig)) nu.so[fam(family, q)];
  for (auto& p : m) nu.so[fam(family, p.state)].insert(p.index);
}

// ---------------------------------------------------------------------------
// RewrTree: R-sets are disjoint, R1 = {eps}, prefix-closed, children follow
// the predicate atoms of the labeling rule, and nothing else is a child.

inline WsksFormula rewrtree_formula(const AnalyzedSpec& as) {
  using F = WsksFormula;
  const Sid& sid = as.spec.sid;
  int P = (int)sid.rules.size();
  int kappa = sid.kappa();
  std::vector<F> conj;

  {  // disjointness and the root
    std::vector<F> per;
    for (int i = 0; i < P; ++i)
      for (int j = i + 1; j < P; ++j)
        per.push_back(F::disj({F::neg(F::member(rvar(i), WTerm::v("x"))),
                               F::neg(F::member(rvar(j), WTerm::v("x")))}));
    per.push_back(F::iff(F::member(rvar(0), WTerm::v("x")),
                         F::term_eq(WTerm::v("x"), WTerm::eps())));
    conj.push_back(F::forall1("x", F::conj(std::move(per))));
  }
  {  // prefix closure
    std::vector<F> per;
    for (int i = 0; i < P; ++i)
      for (int l = 1; l <= kappa; ++l) {
        std::vector<F> any;
        for (int j = 0; j < P; ++j) any.push_back(F::member(rvar(j), WTerm::v("x")));
        per.push_back(F::implies(F::member(rvar(i), WTerm::v("x").child(l)),
                                 F::disj(std::move(any))));
      }
    conj.push_back(F::forall1("x", F::conj(std::move(per))));
  }
  {  // children named by the predicate atoms
    std::vector<F> per;
    for (int i = 0; i < P; ++i) {
      NormalRule nv = normal_view(sid.rules[i], i);
      int j = 0;
      for (auto* p : nv.predicates) {
        ++j;
        std::vector<F> opts;
        for (int l : sid.rules_of(p->name))
          opts.push_back(F::member(rvar(l), WTerm::v("x").child(j)));
        per.push_back(
            F::implies(F::member(rvar(i), WTerm::v("x")), F::disj(std::move(opts))));
      }
    }
    conj.push_back(F::forall1("x", F::conj(std::move(per))));
  }
  {  // no extra children
    std::vector<F> per;
    for (int i = 0; i < P; ++i) {
      int np = npred(sid.rules[i].body);
      for (int j = np + 1; j <= kappa; ++j) {
        std::vector<F> none;
        for (int l = 0; l < P; ++l)
          none.push_back(F::neg(F::member(rvar(l), WTerm::v("x").child(j))));
        per.push_back(F::implies(F::member(rvar(i), WTerm::v("x")), F::conj(std::move(none))));
      }
    }
    conj.push_back(F::forall1("x", F::conj(std::move(per))));
  }
  return F::conj(std::move(conj));
}

// ---------------------------------------------------------------------------
// mark: X encodes a precise marking of the canonical net of the tree in R

inline WsksFormula mark_formula(const AnalyzedSpec& as, const std::string& x_family = "X",
                                const std::string& r_prefix = "R") {
  using F = WsksFormula;
  const Sid& sid = as.spec.sid;
  std::vector<F> per;
  for (auto& c : as.spec.signature.components) {
    for (size_t a = 0; a < c.states.size(); ++a)
      for (size_t b = a + 1; b < c.states.size(); ++b)
        per.push_back(F::disj({F::neg(F::member(fam(x_family, c.states[a]), WTerm::v("x"))),
                               F::neg(F::member(fam(x_family, c.states[b]), WTerm::v("x")))}));
    std::vector<F> some_state;
    for (auto& q : c.states) some_state.push_back(F::member(fam(x_family, q), WTerm::v("x")));
    std::vector<F> inst;
    for (size_t i = 0; i < sid.rules.size(); ++i) {
      NormalRule nv = normal_view(sid.rules[i], (int)i);
      if (nv.component && nv.component->name == c.name)
        inst.push_back(F::member(r_prefix + std::to_string(i + 1), WTerm::v("x")));
    }
    per.push_back(F::iff(F::disj(std::move(some_state)), F::disj(std::move(inst))));
  }
  return F::forall1("x", F::conj(std::move(per)));
}

// ---------------------------------------------------------------------------
// flow: (X, X') ranges exactly over the pre/post place sets of the canonical
// net's transitions

inline WsksFormula flow_formula(const AnalyzedSpec& as, const std::string& pre_family = "X",
                                const std::string& post_family = "Xp",
                                const std::string& r_prefix = "R") {
  using F = WsksFormula;
  const Sid& sid = as.spec.sid;
  const Signature& sig = as.spec.signature;
  std::vector<std::string> states = all_states(sig);
  std::vector<F> disjuncts;

  for (size_t l = 0; l < sid.rules.size(); ++l) {
    NormalRule nv = normal_view(sid.rules[l], (int)l);
    for (auto* atom : nv.interactions) {
      const InteractionType* it = sig.interaction(atom->name);
      int k = (int)atom->vars.size();
      auto yname = [&](int i) { return "y" + std::to_string(i); };

      std::vector<F> body;
      body.push_back(F::member(r_prefix + std::to_string(l + 1), WTerm::v(yname(0))));
      for (int i = 1; i <= k; ++i)
        body.push_back(path_formula(as, (int)l, atom->vars[i - 1], yname(0), yname(i), r_prefix,
                                    "P" + std::to_string(i)));

      // one disjunct per synchronizing transition tuple
      std::vector<std::vector<ComponentType::Transition>> per_port;
      for (auto& [ct, p] : it->ports) per_port.push_back(sig.transitions_of_port(p));
      std::vector<F> tuple_disj;
      bool empty = false;
      for (auto& v : per_port)
        if (v.empty()) empty = true;
      if (!empty) {
        std::vector<size_t> choice(k, 0);
        for (;;) {
          std::vector<F> eqs;
          for (auto& q : states) {
            std::vector<WTerm> pre_ys, post_ys;
            for (int i = 0; i < k; ++i) {
              if (per_port[i][choice[i]].from == q) pre_ys.push_back(WTerm::v(yname(i + 1)));
              if (per_port[i][choice[i]].to == q) post_ys.push_back(WTerm::v(yname(i + 1)));
            }
            eqs.push_back(F::set_enum_eq(fam(pre_family, q), std::move(pre_ys)));
            eqs.push_back(F::set_enum_eq(fam(post_family, q), std::move(post_ys)));
          }
          tuple_disj.push_back(F::conj(std::move(eqs)));
          size_t i = k;
          bool done = true;
          while (i > 0) {
            --i;
            if (++choice[i] < per_port[i].size()) { done = false; break; }
            choice[i] = 0;
          }
          if (done) break;
        }
      }
      body.push_back(F::disj(std::move(tuple_disj)));

      // pairwise-distinct endpoints for positions of the same component type
      for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
          const ComponentType* ci = sig.position_type(*it, i);
          const ComponentType* cj = sig.position_type(*it, j);
          if (ci && cj && ci->name == cj->name)
            body.push_back(F::neg(F::term_eq(WTerm::v(yname(i + 1)), WTerm::v(yname(j + 1)))));
        }

      F psi = F::conj(std::move(body));
      for (int i = k; i >= 0; --i) psi = F::exists1(yname(i), std::move(psi));
      disjuncts.push_back(std::move(psi));
    }
  }
  return F::disj(std::move(disjuncts));
}

// ---------------------------------------------------------------------------
// family-level shorthands, expanded per state

namespace vcdetail {
using F = WsksFormula;

inline F fam_intersects(const std::vector<std::string>& states, const std::string& a,
                        const std::string& b) {
  std::vector<F> per;
  for (auto& q : states)
    per.push_back(F::conj({F::member(fam(a, q), WTerm::v("xi")),
                           F::member(fam(b, q), WTerm::v("xi"))}));
  return F::exists1("xi", F::disj(std::move(per)));
}

inline F fam_subset(const std::vector<std::string>& states, const std::string& a,
                    const std::string& b) {
  std::vector<F> per;
  for (auto& q : states)
    per.push_back(F::implies(F::member(fam(a, q), WTerm::v("xs")),
                             F::member(fam(b, q), WTerm::v("xs"))));
  return F::forall1("xs", F::conj(std::move(per)));
}

// the intersection of two families contains exactly one place
inline F fam_single(const std::vector<std::string>& states, const std::string& a,
                    const std::string& b) {
  std::vector<F> outer;
  for (auto& q : states) {
    std::vector<F> unique;
    for (auto& q2 : states) {
      F both = F::conj({F::member(fam(a, q2), WTerm::v("xu")),
                        F::member(fam(b, q2), WTerm::v("xu"))});
      unique.push_back(F::implies(
          std::move(both), q2 == q ? F::term_eq(WTerm::v("xu"), WTerm::v("xo")) : F::fls()));
    }
    outer.push_back(F::conj({F::member(fam(a, q), WTerm::v("xo")),
                             F::member(fam(b, q), WTerm::v("xo")),
                             F::forall1("xu", F::conj(std::move(unique)))}));
  }
  return F::exists1("xo", F::disj(std::move(outer)));
}

inline F close_family(WK k, const std::vector<std::string>& states, const std::string& family,
                      F body) {
  for (auto it = states.rbegin(); it != states.rend(); ++it)
    body = F::quant(k, fam(family, *it), std::move(body));
  return body;
}

}  // namespace vcdetail

// ---------------------------------------------------------------------------
// initial configurations and the structural invariants

inline WsksFormula init_formula(const AnalyzedSpec& as, const std::string& y_family = "Y",
                                const std::string& r_prefix = "R") {
  using F = WsksFormula;
  std::vector<F> per;
  for (auto& q : all_states(as.spec.signature)) {
    std::vector<F> sources;
    for (size_t l = 0; l < as.spec.sid.rules.size(); ++l) {
      NormalRule nv = normal_view(as.spec.sid.rules[l], (int)l);
      if (nv.component && *nv.component->state == q)
        sources.push_back(F::member(r_prefix + std::to_string(l + 1), WTerm::v("x")));
    }
    per.push_back(F::iff(F::member(fam(y_family, q), WTerm::v("x")), F::disj(std::move(sources))));
  }
  return F::conj({mark_formula(as, y_family, r_prefix), F::forall1("x", F::conj(std::move(per)))});
}

// trap condition on a place-set family X
inline WsksFormula trap_condition_formula(const AnalyzedSpec& as, const std::string& x_family = "X",
                                          const std::string& r_prefix = "R") {
  using F = WsksFormula;
  auto states = all_states(as.spec.signature);
  F body = F::implies(flow_formula(as, "TY", "TZ", r_prefix),
                      F::implies(vcdetail::fam_intersects(states, x_family, "TY"),
                                 vcdetail::fam_intersects(states, x_family, "TZ")));
  body = vcdetail::close_family(WK::ForallSO, states, "TZ", std::move(body));
  return vcdetail::close_family(WK::ForallSO, states, "TY", std::move(body));
}

// trap invariant membership of X, for initial marking Y
inline WsksFormula trap_invariant_formula(const AnalyzedSpec& as, const std::string& x_family = "X",
                                          const std::string& y_family = "Y",
                                          const std::string& r_prefix = "R") {
  using F = WsksFormula;
  auto states = all_states(as.spec.signature);
  F body = F::implies(F::conj({vcdetail::fam_intersects(states, y_family, "SZ"),
                               trap_condition_formula(as, "SZ", r_prefix)}),
                      vcdetail::fam_intersects(states, x_family, "SZ"));
  body = vcdetail::close_family(WK::ForallSO, states, "SZ", std::move(body));
  return F::conj({mark_formula(as, x_family, r_prefix), std::move(body)});
}

// mutex condition on a place-set family X
inline WsksFormula mutex_condition_formula(const AnalyzedSpec& as,
                                           const std::string& x_family = "X",
                                           const std::string& r_prefix = "R") {
  using F = WsksFormula;
  auto states = all_states(as.spec.signature);
  F noY = F::neg(vcdetail::fam_intersects(states, x_family, "MY"));
  F noZ = F::neg(vcdetail::fam_intersects(states, x_family, "MZ"));
  F oneY = vcdetail::fam_single(states, x_family, "MY");
  F oneZ = vcdetail::fam_single(states, x_family, "MZ");
  F body = F::implies(flow_formula(as, "MY", "MZ", r_prefix),
                      F::conj({F::iff(std::move(noY), std::move(noZ)),
                               F::iff(std::move(oneY), std::move(oneZ))}));
  body = vcdetail::close_family(WK::ForallSO, states, "MZ", std::move(body));
  return vcdetail::close_family(WK::ForallSO, states, "MY", std::move(body));
}

// mutex invariant membership of X, for initial marking Y
inline WsksFormula mutex_invariant_formula(const AnalyzedSpec& as,
                                           const std::string& x_family = "X",
                                           const std::string& y_family = "Y",
                                           const std::string& r_prefix = "R") {
  using F = WsksFormula;
  auto states = all_states(as.spec.signature);
  F body = F::implies(F::conj({vcdetail::fam_single(states, y_family, "SZ"),
                               mutex_condition_formula(as, "SZ", r_prefix)}),
                      vcdetail::fam_single(states, x_family, "SZ"));
  body = vcdetail::close_family(WK::ForallSO, states, "SZ", std::move(body));
  return F::conj({mark_formula(as, x_family, r_prefix), std::move(body)});
}

// deadlock: no transition's pre-set fits inside X
inline WsksFormula deadlock_formula(const AnalyzedSpec& as, const std::string& x_family = "X",
                                    const std::string& r_prefix = "R") {
  using F = WsksFormula;
  auto states = all_states(as.spec.signature);
  F body = F::implies(flow_formula(as, "DY", "DZ", r_prefix),
                      F::neg(vcdetail::fam_subset(states, "DY", x_family)));
  body = vcdetail::close_family(WK::ForallSO, states, "DZ", std::move(body));
  return vcdetail::close_family(WK::ForallSO, states, "DY", std::move(body));
}

// error set for a reachability query: per-state cardinality thresholds
inline WsksFormula errset_formula(const AnalyzedSpec& as, const std::vector<std::string>& states_q,
                                  const std::string& x_family = "X") {
  using F = WsksFormula;
  std::map<std::string, int> mult;
  for (auto& q : states_q) ++mult[q];
  std::vector<F> per;
  for (auto& q : all_states(as.spec.signature))
    per.push_back(F::card_geq(fam(x_family, q), mult.count(q) ? mult[q] : 0));
  return F::conj(std::move(per));
}

// ---------------------------------------------------------------------------
// VC assembly. The sentence rule must carry index 1 for the root clause; the
// SID is rearranged (or a wrapper rule registered) accordingly.

inline AnalyzedSpec arrange_for_vc(const AnalyzedSpec& base, const std::string& sentence) {
  auto it = base.spec.predicate_arity.find(sentence);
  if (it == base.spec.predicate_arity.end() || it->second != 0)
    throw std::runtime_error("unknown sentence '" + sentence + "'");

  // restrict to the rules reachable from the sentence: trees cannot label
  // nodes with the rest, and their R-sets would be forced empty anyway
  std::set<std::string> reach{sentence};
  for (bool grew = true; grew;) {
    grew = false;
    for (auto& r : base.spec.sid.rules) {
      if (!reach.count(r.head)) continue;
      auto [b, m] = strip_exists(r.body);
      for (auto* a : atoms_of(*m))
        if (a->kind == ClKind::Predicate && reach.insert(a->name).second) grew = true;
    }
  }
  AnalyzedSpec out = base;
  out.spec.sid.rules.clear();
  for (auto& r : base.spec.sid.rules)
    if (reach.count(r.head)) out.spec.sid.rules.push_back(r);

  std::vector<int> roots = out.spec.sid.rules_of(sentence);
  bool used_in_bodies = false;
  for (auto& r : out.spec.sid.rules) {
    auto [b, m] = strip_exists(r.body);
    for (auto* a : atoms_of(*m))
      if (a->kind == ClKind::Predicate && a->name == sentence) used_in_bodies = true;
  }
  if (roots.size() == 1 && !used_in_bodies) {
    // the sentence rule itself heads the SID
    std::rotate(out.spec.sid.rules.begin(), out.spec.sid.rules.begin() + roots[0],
                out.spec.sid.rules.begin() + roots[0] + 1);
  } else {
    Rule wrapper;
    wrapper.head = "__vc_" + sentence;
    wrapper.body = ClFormula::predicate(sentence, {});
    out.spec.sid.rules.insert(out.spec.sid.rules.begin(), wrapper);
    out.spec.predicate_arity[wrapper.head] = 0;
  }
  return out;
}

struct VerificationCondition {
  AnalyzedSpec arranged;  // rule order used for the R-variables
  WsksFormula formula;
};

inline VerificationCondition deadlock_vc(const AnalyzedSpec& base, const std::string& sentence) {
  using F = WsksFormula;
  VerificationCondition vc;
  vc.arranged = arrange_for_vc(base, sentence);
  vc.formula = F::conj({deadlock_formula(vc.arranged, "X"),
                        trap_invariant_formula(vc.arranged, "X", "Y"),
                        mutex_invariant_formula(vc.arranged, "X", "Y"),
                        init_formula(vc.arranged, "Y"), rewrtree_formula(vc.arranged)});
  return vc;
}

inline VerificationCondition reach_vc(const AnalyzedSpec& base, const std::string& sentence,
                                      const std::vector<std::string>& states_q) {
  using F = WsksFormula;
  for (auto& q : states_q)
    if (!base.spec.signature.owner_of_state(q))
      throw std::runtime_error("unknown state '" + q + "' in reach query");
  VerificationCondition vc;
  vc.arranged = arrange_for_vc(base, sentence);
  vc.formula = F::conj({errset_formula(vc.arranged, states_q, "X"),
                        trap_invariant_formula(vc.arranged, "X", "Y"),
                        mutex_invariant_formula(vc.arranged, "X", "Y"),
                        init_formula(vc.arranged, "Y"), rewrtree_formula(vc.arranged)});
  return vc;
}

}  // namespace clv
