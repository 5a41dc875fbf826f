#pragma once

#include <array>
#include <set>

#include "clverify/rewriting.hpp"
#include "clverify/wsks.hpp"

namespace clv {

// Path automata track a variable's substitutions down a rewriting tree, from
// the rule that introduces it to the rule whose component atom instantiates
// it. States are (rule, variable) pairs over the whole SID.

struct PathAutomaton {
  struct State {
    int rule;          // SID rule index
    std::string var;   // variable of the rule's quantifier-stripped body
    bool operator==(const State&) const = default;
  };
  std::vector<State> states;              // deterministic: rule asc, declaration order
  int initial = -1;
  std::vector<char> final_;
  std::vector<std::array<int, 3>> transitions;  // (from, direction, to)

  int state_of(int rule, const std::string& var) const {
    for (int i = 0; i < (int)states.size(); ++i)
      if (states[i].rule == rule && states[i].var == var) return i;
    return -1;
  }
  std::string state_name(int i) const {
    return "r" + std::to_string(states[i].rule + 1) + "_" + states[i].var;
  }
};

struct UnknownVariable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StartRuleMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline PathAutomaton build_path_automaton(const AnalyzedSpec& as, int rule_index,
                                          const std::string& var) {
  const Sid& sid = as.spec.sid;
  PathAutomaton a;
  for (int ri = 0; ri < (int)sid.rules.size(); ++ri)
    for (auto& v : rule_vars(sid.rules[ri])) a.states.push_back({ri, v});
  a.initial = a.state_of(rule_index, var);
  if (a.initial < 0)
    throw UnknownVariable("variable '" + var + "' is not free in the body of rule " +
                          std::to_string(rule_index + 1));
  a.final_.assign(a.states.size(), 0);
  for (int i = 0; i < (int)a.states.size(); ++i) {
    NormalRule nv = normal_view(sid.rules[a.states[i].rule], a.states[i].rule);
    if (nv.component && nv.component->vars[0] == a.states[i].var) a.final_[i] = 1;
  }
  for (int ri = 0; ri < (int)sid.rules.size(); ++ri) {
    NormalRule nv = normal_view(sid.rules[ri], ri);
    int d = 0;
    for (auto* p : nv.predicates) {
      ++d;
      for (int rj : sid.rules_of(p->name)) {
        const Rule& child = sid.rules[rj];
        for (size_t j = 0; j < p->vars.size(); ++j) {
          int from = a.state_of(ri, p->vars[j]);
          int to = a.state_of(rj, child.params[j]);
          if (from >= 0 && to >= 0) a.transitions.push_back({from, d, to});
        }
      }
    }
  }
  std::sort(a.transitions.begin(), a.transitions.end());
  a.transitions.erase(std::unique(a.transitions.begin(), a.transitions.end()),
                      a.transitions.end());
  return a;
}

// all nodes start.w reached by an accepting run whose states' rules match the
// tree labels along the path
inline std::set<Index> run(const PathAutomaton& a, const RewritingTree& t, const Index& start) {
  if (!t.has(start) || t.rule_at(start) != a.states[a.initial].rule)
    throw StartRuleMismatch("tree labels node " + index_to_string(start) +
                            " with a different rule than the automaton's initial state");
  std::set<Index> out;
  std::set<std::pair<Index, int>> seen;
  std::vector<std::pair<Index, int>> queue{{start, a.initial}};
  seen.insert(queue[0]);
  while (!queue.empty()) {
    auto [node, s] = queue.back();
    queue.pop_back();
    if (a.final_[s]) out.insert(node);
    for (auto& [from, d, to] : a.transitions) {
      if (from != s) continue;
      Index child = index_child(node, d);
      if (!t.has(child) || t.rule_at(child) != a.states[to].rule) continue;
      if (seen.insert({child, to}).second) queue.push_back({child, to});
    }
  }
  return out;
}

// acceptance over bare paths inside a node set, ignoring rule labels (the
// label consistency is a separate conjunct in the path formula)
inline std::set<Index> run_paths(const PathAutomaton& a, const std::set<Index>& nodes,
                                 const Index& start) {
  std::set<Index> out;
  if (!nodes.count(start)) return out;
  std::set<std::pair<Index, int>> seen;
  std::vector<std::pair<Index, int>> queue{{start, a.initial}};
  seen.insert(queue[0]);
  while (!queue.empty()) {
    auto [node, s] = queue.back();
    queue.pop_back();
    if (a.final_[s]) out.insert(node);
    for (auto& [from, d, to] : a.transitions) {
      if (from != s) continue;
      Index child = index_child(node, d);
      if (!nodes.count(child)) continue;
      if (seen.insert({child, to}).second) queue.push_back({child, to});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// The automaton formula: disjoint state sets, initial at x, final at y, plus
// forward and reverse flow along the path.

inline std::string path_state_var(const PathAutomaton& a, int i, const std::string& prefix) {
  return prefix + "_" + a.state_name(i);
}

inline WsksFormula to_formula(const PathAutomaton& a, const std::string& x, const std::string& y,
                              const std::string& prefix = "P") {
  using F = WsksFormula;
  int L = (int)a.states.size();
  auto Y = [&](int i) { return path_state_var(a, i, prefix); };
  std::vector<F> conj;

  // pairwise disjointness
  {
    std::vector<F> per;
    for (int i = 0; i < L; ++i)
      for (int j = i + 1; j < L; ++j)
        per.push_back(F::disj({F::neg(F::member(Y(i), WTerm::v("z"))),
                               F::neg(F::member(Y(j), WTerm::v("z")))}));
    conj.push_back(F::forall1("z", F::conj(std::move(per))));
  }
  // the run starts at x in the initial state and ends at y in a final state
  conj.push_back(F::member(Y(a.initial), WTerm::v(x)));
  {
    std::vector<F> fin;
    for (int j = 0; j < L; ++j)
      if (a.final_[j]) fin.push_back(F::member(Y(j), WTerm::v(y)));
    conj.push_back(F::disj(std::move(fin)));
  }
  // forward flow: every non-final-position node has a successor on the run
  {
    std::vector<F> per;
    for (int i = 0; i < L; ++i) {
      std::vector<F> succ;
      for (auto& [from, d, to] : a.transitions)
        if (from == i) succ.push_back(F::member(Y(to), WTerm::v("z").child(d)));
      per.push_back(F::implies(
          F::conj({F::neg(F::term_eq(WTerm::v("z"), WTerm::v(y))), F::member(Y(i), WTerm::v("z"))}),
          F::disj(std::move(succ))));
    }
    conj.push_back(F::forall1("z", F::conj(std::move(per))));
  }
  // reverse flow: every non-initial-position node has a predecessor on the run
  {
    std::vector<F> per;
    for (int j = 0; j < L; ++j) {
      std::vector<F> pred;
      for (auto& [from, d, to] : a.transitions)
        if (to == j)
          pred.push_back(F::exists1(
              "zp", F::conj({F::term_eq(WTerm::v("zp").child(d), WTerm::v("z")),
                             F::member(Y(from), WTerm::v("zp"))})));
      per.push_back(F::implies(
          F::conj({F::neg(F::term_eq(WTerm::v("z"), WTerm::v(x))), F::member(Y(j), WTerm::v("z"))}),
          F::disj(std::move(pred))));
    }
    conj.push_back(F::forall1("z", F::conj(std::move(per))));
  }
  return F::conj(std::move(conj));
}

// Path formula: existentially closes the state sets and conjoins the
// rule-consistency condition (run states only on matching tree labels).
inline WsksFormula path_formula(const AnalyzedSpec& as, const PathAutomaton& a,
                                const std::string& x, const std::string& y,
                                const std::string& r_prefix = "R",
                                const std::string& y_prefix = "P") {
  using F = WsksFormula;
  F phi = to_formula(a, x, y, y_prefix);
  std::vector<F> upsilon;
  for (int i = 0; i < (int)a.states.size(); ++i) {
    std::string R = r_prefix + std::to_string(a.states[i].rule + 1);
    upsilon.push_back(F::forall1(
        "z", F::implies(F::member(path_state_var(a, i, y_prefix), WTerm::v("z")),
                        F::member(R, WTerm::v("z")))));
  }
  F body = F::conj({std::move(phi), F::conj(std::move(upsilon))});
  for (int i = (int)a.states.size() - 1; i >= 0; --i)
    body = F::exists2(path_state_var(a, i, y_prefix), std::move(body));
  return body;
}

inline WsksFormula path_formula(const AnalyzedSpec& as, int rule_index, const std::string& var,
                                const std::string& x, const std::string& y,
                                const std::string& r_prefix = "R",
                                const std::string& y_prefix = "P") {
  return path_formula(as, build_path_automaton(as, rule_index, var), x, y, r_prefix, y_prefix);
}

inline std::string to_dot(const PathAutomaton& a) {
  std::ostringstream os;
  os << "digraph path_automaton {\n  rankdir=LR;\n";
  for (int i = 0; i < (int)a.states.size(); ++i) {
    os << "  s" << i << " [label=\"" << (a.states[i].rule + 1) << "/" << a.states[i].var << "\"";
    if (a.final_[i]) os << " shape=doublecircle";
    if (i == a.initial) os << " style=bold";
    os << "];\n";
  }
  for (auto& [from, d, to] : a.transitions)
    os << "  s" << from << " -> s" << to << " [label=\"" << d << "\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace clv
