#pragma once

#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "clverify/cl_analysis.hpp"
#include "clverify/index.hpp"

namespace clv {

// ---------------------------------------------------------------------------
// Rewriting trees: rule-labeled kappa-ary trees (Def. of rewriting trees);
// nodes double as component indices.

struct RewritingTree {
  std::map<Index, int> label;  // node -> rule index (0-based into the SID)

  bool operator==(const RewritingTree&) const = default;
  bool operator<(const RewritingTree& o) const { return label < o.label; }
  size_t size() const { return label.size(); }
  int rule_at(const Index& w) const { return label.at(w); }
  bool has(const Index& w) const { return label.count(w) != 0; }
};

struct NormalFormViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Queries: a sentence is either a named zero-arity predicate or an ad-hoc
// closed formula; ad-hoc formulas get a fresh rule registered (Assumption-1
// style), appended after the file rules so dump indices stay stable.

struct SentenceQuery {
  AnalyzedSpec analyzed;
  std::string pred;          // sentence predicate
  std::vector<int> roots;    // rule indices usable at the root
};

inline SentenceQuery make_query(const AnalyzedSpec& base, const std::string& sentenceName) {
  SentenceQuery q;
  q.analyzed = base;
  q.pred = sentenceName;
  auto it = base.spec.predicate_arity.find(sentenceName);
  if (it == base.spec.predicate_arity.end() || it->second != 0)
    throw std::runtime_error("unknown sentence '" + sentenceName + "' (zero-arity predicate expected)");
  q.roots = q.analyzed.spec.sid.rules_of(sentenceName);
  return q;
}

inline SentenceQuery make_query(const AnalyzedSpec& base, const ClFormula& sentence) {
  if (sentence.kind == ClKind::Predicate && sentence.vars.empty())
    return make_query(base, sentence.name);
  if (!free_vars(sentence).empty())
    throw std::runtime_error("query formula is not a sentence (free variables)");
  SentenceQuery q;
  q.analyzed = base;
  std::string fresh = "__query";
  int n = 0;
  while (q.analyzed.spec.predicate_arity.count(fresh)) fresh = "__query" + std::to_string(++n);
  Rule r;
  r.head = fresh;
  r.body = sentence;
  Sid one;
  one.rules.push_back(r);
  Sid des = desugar_stateless_atoms(one, base.spec.signature);
  for (auto& dr : des.rules) {
    q.analyzed.spec.sid.rules.push_back(dr);
    q.roots.push_back((int)q.analyzed.spec.sid.rules.size() - 1);
  }
  q.analyzed.spec.predicate_arity[fresh] = 0;
  q.pred = fresh;
  auto rep = validate_normal_form(q.analyzed.spec.sid);
  if (!rep.ok()) throw NormalFormViolation("query sentence violates the rule normal form:\n" + rep.to_string());
  return q;
}

// ---------------------------------------------------------------------------
// Enumeration: depth-first over rule choices, one open slot at a time in BFS
// order, pruned by the remaining node budget (each open slot needs >= 1
// node). Choices ascend by rule index, so trees come out in lexicographic
// order of the label word read in BFS node order.

namespace detail {

struct TreeEnum {
  const Sid& sid;
  int max_nodes;
  const std::function<bool(const RewritingTree&)>& emit;  // false = stop
  std::vector<std::pair<Index, std::string>> slots;       // BFS order
  RewritingTree current;
  bool stopped = false;

  TreeEnum(const Sid& s, int mn, const std::function<bool(const RewritingTree&)>& e)
      : sid(s), max_nodes(mn), emit(e) {}

  void go(size_t qi) {
    if (stopped) return;
    if (qi == slots.size()) {
      if (!emit(current)) stopped = true;
      return;
    }
    // labeled so far: root + slots[0..qi)
    Index node = slots[qi].first;
    std::string pred = slots[qi].second;
    for (int ri : sid.rules_of(pred)) {
      const Rule& r = sid.rules[ri];
      int p = npred(r.body);
      // minimum final size: labeled + this node + other open slots + new slots
      int min_final = (int)qi + 2 + ((int)slots.size() - (int)qi - 1) + p;
      if (min_final > max_nodes) continue;
      current.label[node] = ri;
      size_t added = 0;
      auto [binders, matrix] = strip_exists(r.body);
      int child = 0;
      for (auto* a : atoms_of(*matrix)) {
        if (a->kind != ClKind::Predicate) continue;
        ++child;
        slots.push_back({index_child(node, child), a->name});
        ++added;
      }
      go(qi + 1);
      for (size_t k = 0; k < added; ++k) slots.pop_back();
      current.label.erase(node);
      if (stopped) return;
    }
  }
};

}  // namespace detail

inline void for_each_tree(const SentenceQuery& q, int max_nodes,
                          const std::function<bool(const RewritingTree&)>& emit) {
  if (max_nodes < 1) return;
  const Sid& sid = q.analyzed.spec.sid;
  for (int root : q.roots) {
    detail::TreeEnum e(sid, max_nodes, emit);
    const Rule& r = sid.rules[root];
    auto [binders, matrix] = strip_exists(r.body);
    int child = 0;
    for (auto* a : atoms_of(*matrix)) {
      if (a->kind != ClKind::Predicate) continue;
      ++child;
      e.slots.push_back({index_child({}, child), a->name});
    }
    if (1 + (int)e.slots.size() > max_nodes) continue;
    e.current.label[{}] = root;
    e.go(0);
    if (e.stopped) return;
  }
}

inline std::vector<RewritingTree> enumerate_trees(const SentenceQuery& q, int max_nodes) {
  std::vector<RewritingTree> out;
  for_each_tree(q, max_nodes, [&](const RewritingTree& t) {
    out.push_back(t);
    return true;
  });
  return out;
}

// independent Def-5 revalidation, used by tests
inline bool validate_tree(const RewritingTree& t, const Sid& sid, const std::string& rootPred) {
  if (!t.has({})) return false;
  if (sid.rules[t.rule_at({})].head != rootPred) return false;
  for (auto& [w, ri] : t.label) {
    const Rule& r = sid.rules[ri];
    auto [binders, matrix] = strip_exists(r.body);
    int i = 0;
    for (auto* a : atoms_of(*matrix)) {
      if (a->kind != ClKind::Predicate) continue;
      ++i;
      Index c = index_child(w, i);
      if (!t.has(c)) return false;
      if (sid.rules[t.rule_at(c)].head != a->name) return false;
    }
    // no extra children
    for (auto& [w2, r2] : t.label) {
      if (w2.size() != w.size() + 1 || !index_is_prefix(w, w2)) continue;
      if (w2.back() > i) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Canonical stores: each variable of the characteristic formula denotes the
// unique node whose rule carries its component atom.

struct CanonicalStore {
  // (node, local variable of the rule labeling that node) -> absolute node
  std::map<std::pair<Index, std::string>, Index> at;

  const Index& value(const Index& node, const std::string& var) const {
    auto it = at.find({node, var});
    if (it == at.end())
      throw NormalFormViolation("canonical store has no entry for variable '" + var +
                                "' at node " + index_to_string(node));
    return it->second;
  }
};

namespace detail {

struct StoreBuilder {
  const Sid& sid;
  const RewritingTree& tree;
  std::map<std::pair<Index, std::string>, Index> rel;  // subtree-relative values

  const Index& relative(const Index& w, const std::string& x) {
    auto key = std::make_pair(w, x);
    auto it = rel.find(key);
    if (it != rel.end()) return it->second;
    const Rule& r = sid.rules[tree.rule_at(w)];
    NormalRule nv = normal_view(r, tree.rule_at(w));
    if (nv.component && nv.component->vars[0] == x)
      return rel.emplace(key, Index{}).first->second;
    int i = 0;
    for (auto* p : nv.predicates) {
      ++i;
      for (size_t j = 0; j < p->vars.size(); ++j) {
        if (p->vars[j] != x) continue;
        Index child = index_child(w, i);
        if (!tree.has(child))
          throw NormalFormViolation("tree is missing child " + index_to_string(child));
        const Rule& cr = sid.rules[tree.rule_at(child)];
        if (j >= cr.params.size())
          throw NormalFormViolation("arity mismatch at node " + index_to_string(child));
        Index v = index_concat({i}, relative(child, cr.params[j]));
        return rel.emplace(key, std::move(v)).first->second;
      }
    }
    throw NormalFormViolation("variable '" + x + "' at node " + index_to_string(w) +
                              " occurs in no component or predicate atom");
  }
};

}  // namespace detail

inline CanonicalStore canonical_store(const RewritingTree& t, const AnalyzedSpec& as) {
  detail::StoreBuilder b{as.spec.sid, t, {}};
  CanonicalStore st;
  for (auto& [w, ri] : t.label) {
    const Rule& r = as.spec.sid.rules[ri];
    for (auto& x : rule_vars(r)) st.at[{w, x}] = index_concat(w, b.relative(w, x));
  }
  return st;
}

// ---------------------------------------------------------------------------
// Characteristic formulae: predicate-free, existentials annotated with their
// introduction node (x^w). Parameter passing induces alias classes; a class
// is printed under its outermost introduction.

struct AnnotatedVar {
  Index node;
  std::string local;
};

inline std::string annotated_name(const Index& node, const std::string& local) {
  return local + "^" + index_to_string(node);
}

inline AnnotatedVar parse_annotated(const std::string& name) {
  auto p = name.rfind('^');
  if (p == std::string::npos) throw std::runtime_error("not an annotated variable: " + name);
  return {index_from_string(name.substr(p + 1)), name.substr(0, p)};
}

struct CharFormula {
  ClFormula formula;                              // prenex, flattened star matrix
  std::map<std::string, Index> value;             // annotated name -> canonical node
  // every occurrence's representative: (node, local) -> annotated name
  std::map<std::pair<Index, std::string>, std::string> rep;
};

namespace detail {

struct AliasClasses {
  std::map<std::pair<Index, std::string>, std::pair<Index, std::string>> parent;

  std::pair<Index, std::string> find(std::pair<Index, std::string> k) {
    auto it = parent.find(k);
    if (it == parent.end()) return k;
    auto r = find(it->second);
    parent[k] = r;
    return r;
  }
  void unite(std::pair<Index, std::string> a, std::pair<Index, std::string> b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[b] = a;  // keep the first argument as root
  }
};

}  // namespace detail

inline CharFormula characteristic_formula(const RewritingTree& t, const AnalyzedSpec& as) {
  const Sid& sid = as.spec.sid;
  detail::AliasClasses cls;

  // unite parameter-passing pairs, walking nodes root-down so class roots
  // stay at the outermost introduction
  std::vector<Index> bfs;
  for (auto& [w, ri] : t.label) bfs.push_back(w);
  std::sort(bfs.begin(), bfs.end(), [](const Index& a, const Index& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  for (auto& w : bfs) {
    const Rule& r = sid.rules[t.rule_at(w)];
    NormalRule nv = normal_view(r, t.rule_at(w));
    int i = 0;
    for (auto* p : nv.predicates) {
      ++i;
      Index child = index_child(w, i);
      const Rule& cr = sid.rules[t.rule_at(child)];
      for (size_t j = 0; j < p->vars.size(); ++j)
        cls.unite({w, p->vars[j]}, {child, cr.params[j]});
    }
  }

  CanonicalStore st = canonical_store(t, as);
  CharFormula out;

  // name each class after its root occurrence; root-rule params stay plain
  auto name_of = [&](const Index& w, const std::string& x) {
    auto r = cls.find({w, x});
    const Rule& rr = sid.rules[t.rule_at(r.first)];
    bool is_param = std::find(rr.params.begin(), rr.params.end(), r.second) != rr.params.end();
    std::string nm = (r.first.empty() && is_param) ? r.second : annotated_name(r.first, r.second);
    out.rep[{w, x}] = nm;
    out.value[nm] = st.value(r.first, r.second);
    return nm;
  };

  std::vector<std::string> binders;
  std::set<std::string> bound_seen;
  std::vector<ClFormula> atoms;
  auto walk = [&](const Index& w, auto&& self) -> void {
    const Rule& r = sid.rules[t.rule_at(w)];
    auto [bs, matrix] = strip_exists(r.body);
    for (auto& b : bs) {
      std::string nm = name_of(w, b);
      if (nm.find('^') != std::string::npos && bound_seen.insert(nm).second)
        binders.push_back(nm);
    }
    int child = 0;
    for (auto* a : atoms_of(*matrix)) {
      if (a->kind == ClKind::Predicate) {
        ++child;
        self(index_child(w, child), self);
      } else if (a->kind == ClKind::Component) {
        atoms.push_back(ClFormula::component(a->name, a->state, name_of(w, a->vars[0])));
      } else if (a->kind == ClKind::Interaction) {
        std::vector<std::string> vs;
        for (auto& v : a->vars) vs.push_back(name_of(w, v));
        atoms.push_back(ClFormula::interaction(a->name, vs));
      }
    }
  };
  walk(Index{}, walk);

  ClFormula body = ClFormula::star_all(std::move(atoms));
  for (auto it = binders.rbegin(); it != binders.rend(); ++it)
    body = ClFormula::exists(*it, std::move(body));
  out.formula = std::move(body);
  return out;
}

// the unique node whose rule carries the component atom of this variable's
// alias class (independent cross-check against the canonical store)
inline Index unique_component_node(const RewritingTree& t, const AnalyzedSpec& as,
                                   const std::string& annotated) {
  AnnotatedVar av = parse_annotated(annotated);
  CharFormula cf = characteristic_formula(t, as);
  auto it = cf.rep.find({av.node, av.local});
  if (it == cf.rep.end())
    throw NormalFormViolation("no such variable occurrence: " + annotated);
  const std::string& name = it->second;
  std::vector<Index> hits;
  for (auto& [w, ri] : t.label) {
    NormalRule nv = normal_view(as.spec.sid.rules[ri], ri);
    if (nv.component && cf.rep.at({w, nv.component->vars[0]}) == name) hits.push_back(w);
  }
  if (hits.size() != 1)
    throw NormalFormViolation("variable '" + annotated + "' occurs in " +
                              std::to_string(hits.size()) + " component atoms");
  return hits[0];
}

// ---------------------------------------------------------------------------
// Canonical models

inline Configuration canonical_model(const RewritingTree& t, const AnalyzedSpec& as) {
  CanonicalStore st = canonical_store(t, as);
  Configuration c;
  for (auto& ct : as.spec.signature.components) c.architecture.components[ct.name];
  for (auto& it : as.spec.signature.interactions) c.architecture.interactions[it.name];
  for (auto& [w, ri] : t.label) {
    NormalRule nv = normal_view(as.spec.sid.rules[ri], ri);
    if (nv.component) {
      c.architecture.components[nv.component->name].insert(w);
      c.marking.insert({*nv.component->state, w});
    }
    for (auto* in : nv.interactions) {
      std::vector<Index> tup;
      for (auto& v : in->vars) tup.push_back(st.value(w, v));
      c.architecture.interactions[in->name].insert(tup);
    }
  }
  return c;
}

// components contributed by a tree = nodes whose rule carries a component atom
inline int component_count(const RewritingTree& t, const Sid& sid) {
  int n = 0;
  for (auto& [w, ri] : t.label)
    if (normal_view(sid.rules[ri], ri).component) ++n;
  return n;
}

}  // namespace clv
