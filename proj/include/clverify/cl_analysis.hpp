#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "clverify/cl.hpp"

namespace clv {

// ---------------------------------------------------------------------------
// Desugaring: a stateless atom C(x) means "C in some state"; each rule with
// stateless atoms is replaced by one copy per state choice, in declared state
// order, leftmost atom varying slowest.

inline Sid desugar_stateless_atoms(const Sid& sid, const Signature& sig) {
  Sid out;
  for (auto& r : sid.rules) {
    // collect stateless component atom sites
    std::vector<ClFormula*> sites;
    std::vector<Rule> pending{r};
    auto find_sites = [&](ClFormula& f, auto&& self) -> void {
      if (f.kind == ClKind::Component && !f.state) sites.push_back(&f);
      for (auto& k : f.kids) self(k, self);
    };
    sites.clear();
    find_sites(pending[0].body, find_sites);
    if (sites.empty()) {
      out.rules.push_back(r);
      continue;
    }
    std::vector<const ComponentType*> types;
    for (auto* s : sites) types.push_back(sig.component(s->name));
    std::vector<size_t> choice(sites.size(), 0);
    for (;;) {
      Rule copy = r;
      std::vector<ClFormula*> csites;
      auto refind = [&](ClFormula& f, auto&& self) -> void {
        if (f.kind == ClKind::Component && !f.state) csites.push_back(&f);
        for (auto& k : f.kids) self(k, self);
      };
      refind(copy.body, refind);
      for (size_t i = 0; i < csites.size(); ++i)
        csites[i]->state = types[i]->states[choice[i]];
      out.rules.push_back(copy);
      // odometer, last site fastest
      size_t i = sites.size();
      while (i > 0) {
        --i;
        if (++choice[i] < types[i]->states.size()) break;
        choice[i] = 0;
        if (i == 0) goto done;
      }
      if (sites.empty()) break;
      continue;
    done:
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normal form (each rule: exists y*. [component atom over a head param?] *
// interactions * predicate atoms, with the predicate-atom variable sets
// pairwise disjoint and covering (params \ fv(comp)) + existentials)

struct NormalRule {
  int rule_index = -1;
  std::vector<std::string> params;
  std::vector<std::string> existentials;
  const ClFormula* component = nullptr;            // at most one
  std::vector<const ClFormula*> interactions;
  std::vector<const ClFormula*> predicates;        // left-to-right order
};

// structural split of a rule body; does not enforce the normal form
inline NormalRule normal_view(const Rule& r, int idx) {
  NormalRule nr;
  nr.rule_index = idx;
  nr.params = r.params;
  auto [binders, matrix] = strip_exists(r.body);
  nr.existentials = binders;
  for (auto* a : atoms_of(*matrix)) {
    if (a->kind == ClKind::Component) {
      if (!nr.component) nr.component = a;
    } else if (a->kind == ClKind::Interaction) {
      nr.interactions.push_back(a);
    } else if (a->kind == ClKind::Predicate) {
      nr.predicates.push_back(a);
    }
  }
  return nr;
}

// all variables of the quantifier-stripped body: params then existentials
inline std::vector<std::string> rule_vars(const Rule& r) {
  std::vector<std::string> vs;
  std::set<std::string> seen;
  for (auto& p : r.params)
    if (seen.insert(p).second) vs.push_back(p);
  auto [binders, matrix] = strip_exists(r.body);
  for (auto& b : binders)
    if (seen.insert(b).second) vs.push_back(b);
  return vs;
}

inline ValidationReport validate_normal_form(const Sid& sid) {
  ValidationReport rep;
  for (size_t i = 0; i < sid.rules.size(); ++i) {
    const Rule& r = sid.rules[i];
    std::string where = "rule " + std::to_string(i + 1) + " (" + r.head + ")";
    auto [binders, matrix] = strip_exists(r.body);

    // the quantifier prefix must be leading: no inner exists
    auto check_inner = [&](const ClFormula& f, auto&& self) -> void {
      if (f.kind == ClKind::Exists)
        rep.error(where, "existential quantifier not in prefix position");
      for (auto& k : f.kids) self(k, self);
    };
    check_inner(*matrix, check_inner);

    // zero-arity heads (Assumption-1 sentence rules) get a relaxed coverage
    // check: the component atom, if any, may sit on an existential
    bool sentence_rule = r.params.empty();
    int ncomp = 0;
    std::vector<const ClFormula*> preds;
    for (auto* a : atoms_of(*matrix)) {
      if (a->kind == ClKind::Component) {
        ++ncomp;
        if (!a->state) rep.error(where, "stateless component atom (desugar first)");
        if (!sentence_rule && a->vars[0] != r.params[0])
          rep.error(where, "component atom must be over the first head parameter");
      } else if (a->kind == ClKind::Predicate) {
        preds.push_back(a);
      }
    }
    if (ncomp > 1) rep.error(where, "more than one component atom");

    // predicate-atom variable sets: pairwise disjoint, no repeats inside
    std::set<std::string> zunion;
    std::set<std::string> overlap_reported;
    for (auto* p : preds) {
      std::set<std::string> zs;
      for (auto& v : p->vars) {
        if (!zs.insert(v).second)
          rep.error(where, "variable '" + v + "' repeated inside predicate atom " + p->name);
        if (!zunion.insert(v).second && overlap_reported.insert(v).second)
          rep.error(where, "variable '" + v + "' occurs in two predicate atoms");
      }
    }

    // coverage: union of predicate-atom vars = (params \ fv(comp)) + existentials
    std::set<std::string> expected;
    std::set<std::string> compfv;
    NormalRule nr = normal_view(r, (int)i);
    if (nr.component) compfv.insert(nr.component->vars[0]);
    for (auto& p : r.params)
      if (!compfv.count(p)) expected.insert(p);
    for (auto& b : binders) {
      if (compfv.count(b)) {
        if (!sentence_rule)
          rep.error(where, "component atom over existential variable '" + b + "'");
        continue;
      }
      expected.insert(b);
    }
    if (zunion != expected) {
      for (auto& v : expected)
        if (!zunion.count(v))
          rep.error(where, "variable '" + v + "' reaches no predicate atom (coverage)");
      for (auto& v : zunion)
        if (!expected.count(v))
          rep.error(where,
                    "variable '" + v + "' occurs both in the component atom and a predicate atom");
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Profiles (least fixpoint assignment of component types to predicate
// parameter positions, via union-find over positions and rule variables)

using Profile = std::map<std::string, std::vector<std::string>>;

struct ProfileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
struct UnionFind {
  std::vector<int> parent;
  int make() {
    parent.push_back((int)parent.size());
    return (int)parent.size() - 1;
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};
}  // namespace detail

inline Profile infer_profiles(const Sid& sid, const Signature& sig) {
  detail::UnionFind uf;
  std::map<std::pair<std::string, int>, int> pos_node;   // (pred, position)
  std::map<std::pair<int, std::string>, int> var_node;   // (rule, variable)
  std::map<std::string, int> arity;

  for (auto& r : sid.rules) {
    auto it = arity.find(r.head);
    if (it == arity.end()) arity[r.head] = (int)r.params.size();
  }
  auto pos_of = [&](const std::string& pred, int k) {
    auto key = std::make_pair(pred, k);
    auto it = pos_node.find(key);
    if (it == pos_node.end()) it = pos_node.emplace(key, uf.make()).first;
    return it->second;
  };
  auto var_of = [&](int rule, const std::string& v) {
    auto key = std::make_pair(rule, v);
    auto it = var_node.find(key);
    if (it == var_node.end()) it = var_node.emplace(key, uf.make()).first;
    return it->second;
  };

  for (size_t ri = 0; ri < sid.rules.size(); ++ri) {
    const Rule& r = sid.rules[ri];
    for (size_t k = 0; k < r.params.size(); ++k)
      uf.unite(pos_of(r.head, (int)k), var_of((int)ri, r.params[k]));
    auto [binders, matrix] = strip_exists(r.body);
    for (auto* a : atoms_of(*matrix)) {
      if (a->kind == ClKind::Predicate)
        for (size_t k = 0; k < a->vars.size(); ++k)
          uf.unite(pos_of(a->name, (int)k), var_of((int)ri, a->vars[k]));
    }
  }

  // assign component types from component atoms
  std::map<int, std::string> type_of;
  for (size_t ri = 0; ri < sid.rules.size(); ++ri) {
    auto [binders, matrix] = strip_exists(sid.rules[ri].body);
    for (auto* a : atoms_of(*matrix)) {
      if (a->kind != ClKind::Component) continue;
      int root = uf.find(var_of((int)ri, a->vars[0]));
      auto [it, fresh] = type_of.emplace(root, a->name);
      if (!fresh && it->second != a->name)
        throw ProfileError("profile conflict: position constrained to both '" + it->second +
                           "' and '" + a->name + "' (rule " + std::to_string(ri + 1) + ")");
    }
  }

  Profile prof;
  for (auto& [pred, ar] : arity) {
    std::vector<std::string> tup;
    for (int k = 0; k < ar; ++k) {
      int root = uf.find(pos_of(pred, k));
      auto it = type_of.find(root);
      if (it == type_of.end())
        throw ProfileError("profile position unconstrained: " + pred + " position " +
                           std::to_string(k + 1));
      tup.push_back(it->second);
    }
    prof[pred] = tup;
  }
  return prof;
}

// ---------------------------------------------------------------------------
// Tightness of formulae and rules for a given profile

namespace detail {
inline void check_tight_body(const ClFormula& matrix, const Signature& sig, const Profile& prof,
                             const std::string& where, ValidationReport& rep) {
  auto atoms = atoms_of(matrix);
  for (auto* a : atoms) {
    if (a->kind != ClKind::Interaction) continue;
    const InteractionType* it = sig.interaction(a->name);
    if (!it) continue;
    for (size_t k = 0; k < a->vars.size(); ++k) {
      const ComponentType* want = sig.position_type(*it, k);
      if (!want) continue;
      bool ok = false;
      for (auto* b : atoms) {
        if (b->kind == ClKind::Component && b->vars[0] == a->vars[k] && b->name == want->name)
          ok = true;
        if (b->kind == ClKind::Predicate) {
          auto pit = prof.find(b->name);
          if (pit == prof.end()) continue;
          for (size_t l = 0; l < b->vars.size(); ++l)
            if (b->vars[l] == a->vars[k] && pit->second[l] == want->name) ok = true;
        }
        if (ok) break;
      }
      if (!ok)
        rep.error(where, "loose interaction endpoint: " + a->name + " position " +
                             std::to_string(k + 1) + " (variable '" + a->vars[k] + "')");
    }
  }
}
}  // namespace detail

inline ValidationReport check_tight(const ClFormula& sentence, const Spec& spec,
                                    const Profile& prof) {
  ValidationReport rep;
  auto [b0, m0] = strip_exists(sentence);
  detail::check_tight_body(*m0, spec.signature, prof, "sentence", rep);
  for (size_t i = 0; i < spec.sid.rules.size(); ++i) {
    auto [b, m] = strip_exists(spec.sid.rules[i].body);
    detail::check_tight_body(*m, spec.signature, prof,
                             "rule " + std::to_string(i + 1) + " (" + spec.sid.rules[i].head + ")",
                             rep);
  }
  return rep;
}

// desugar + normal form + profiles, the standard pipeline before trees
struct AnalyzedSpec {
  Spec spec;          // with desugared SID
  Profile profile;
  ValidationReport normal_form;
};

inline AnalyzedSpec analyze(const Spec& sp) {
  AnalyzedSpec a;
  a.spec = sp;
  a.spec.sid = desugar_stateless_atoms(sp.sid, sp.signature);
  a.normal_form = validate_normal_form(a.spec.sid);
  if (a.normal_form.ok()) a.profile = infer_profiles(a.spec.sid, a.spec.signature);
  return a;
}

}  // namespace clv
