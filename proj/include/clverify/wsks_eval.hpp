#pragma once

#include <cassert>
#include <memory>
#include <unordered_map>

#include "clverify/rewriting.hpp"
#include "clverify/wsks.hpp"

namespace clv {

// ---------------------------------------------------------------------------
// Bounded evaluation domain: a finite, prefix-closed set of nodes. First- and
// second-order quantifiers range over this set and its subsets. For the
// formulae built here this is exact whenever the universe covers the tree
// nodes, because every set is constrained beneath the union of the R-sets.

struct Universe {
  std::vector<Index> nodes;  // sorted, prefix-closed, contains eps
  std::map<Index, int> ord;
  int kappa = 2;

  static Universe of(const std::set<Index>& ns, int kappa) {
    std::set<Index> closed;
    closed.insert(Index{});
    for (auto& u : ns) {
      Index p;
      closed.insert(p);
      for (int d : u) {
        p.push_back(d);
        closed.insert(p);
      }
    }
    Universe U;
    U.kappa = kappa;
    U.nodes.assign(closed.begin(), closed.end());
    for (int i = 0; i < (int)U.nodes.size(); ++i) U.ord[U.nodes[i]] = i;
    return U;
  }
  static Universe from_tree(const RewritingTree& t, int kappa) {
    std::set<Index> ns;
    for (auto& [w, r] : t.label) ns.insert(w);
    return of(ns, kappa);
  }
  int find(const Index& u) const {
    auto it = ord.find(u);
    return it == ord.end() ? -1 : it->second;
  }
  size_t size() const { return nodes.size(); }
};

struct EvalCaps {
  int max_universe = 20;            // guard on second-order subset search
  size_t step_budget = 400000000;   // circuit evaluation steps
  size_t max_circuit = 4000000;     // grounded circuit nodes
};

struct WsksUnboundVariable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UniverseCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UniverseMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Grounded circuits

namespace wdetail {

struct Circuit {
  enum Op : uint8_t { False, True, Bit, NotOp, AndOp, OrOp, ExistsQ, ForallQ };
  struct Node {
    Op op = False;
    int a = -1;                // NotOp / quantifier child
    int bit = -1;
    std::vector<int> kids;     // AndOp / OrOp
    std::vector<int> block;    // quantifier bits
    std::vector<int> support;  // free bits, sorted
  };
  std::vector<Node> nodes;
  int nbits = 0;
  std::vector<int> bit_ord;  // universe ordinal per bit, for block interleaving
  std::map<std::vector<int>, int> cons;
  size_t max_nodes = 4000000;

  Circuit() {
    nodes.push_back({False});
    nodes.push_back({True});
  }
  int intern(std::vector<int> key, Node n) {
    auto it = cons.find(key);
    if (it != cons.end()) return it->second;
    if (nodes.size() >= max_nodes)
      throw UniverseCapExceeded("grounded circuit exceeds the size cap");
    nodes.push_back(std::move(n));
    cons.emplace(std::move(key), (int)nodes.size() - 1);
    return (int)nodes.size() - 1;
  }
  static std::vector<int> merge_support(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  }
  int mk_bit(int b) {
    Node n;
    n.op = Bit;
    n.bit = b;
    n.support = {b};
    return intern({Bit, b}, n);
  }
  int mk_not(int a) {
    if (a == 0) return 1;
    if (a == 1) return 0;
    if (nodes[a].op == NotOp) return nodes[a].a;
    Node n;
    n.op = NotOp;
    n.a = a;
    n.support = nodes[a].support;
    return intern({NotOp, a}, n);
  }
  int mk_nary(Op op, std::vector<int> kids) {
    int absorber = (op == AndOp) ? 0 : 1;
    int neutral = 1 - absorber;
    std::vector<int> flat;
    for (int k : kids) {
      if (k == absorber) return absorber;
      if (k == neutral) continue;
      if (nodes[k].op == op)
        flat.insert(flat.end(), nodes[k].kids.begin(), nodes[k].kids.end());
      else
        flat.push_back(k);
    }
    std::sort(flat.begin(), flat.end());
    flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
    if (flat.empty()) return neutral;
    if (flat.size() == 1) return flat[0];
    std::vector<int> key{op};
    key.insert(key.end(), flat.begin(), flat.end());
    Node n;
    n.op = op;
    for (int k : flat) n.support = merge_support(n.support, nodes[k].support);
    n.kids = std::move(flat);
    return intern(std::move(key), std::move(n));
  }
  int mk_and(std::vector<int> kids) { return mk_nary(AndOp, std::move(kids)); }
  int mk_or(std::vector<int> kids) { return mk_nary(OrOp, std::move(kids)); }
  int mk_quant(bool exists, std::vector<int> block, int child) {
    if (child <= 1 || block.empty()) return child;
    // fuse nested quantifiers of the same polarity and interleave the block
    // node-major, so the solver's partial assignments prune per tree node
    Op want = exists ? ExistsQ : ForallQ;
    if (nodes[child].op == want) {
      block.insert(block.end(), nodes[child].block.begin(), nodes[child].block.end());
      child = nodes[child].a;
    }
    std::sort(block.begin(), block.end(), [&](int a, int b) {
      return std::pair(bit_ord[a], a) < std::pair(bit_ord[b], b);
    });
    std::vector<int> key{want, child};
    key.insert(key.end(), block.begin(), block.end());
    Node n;
    n.op = want;
    n.a = child;
    {
      std::vector<int> sorted_block = block;
      std::sort(sorted_block.begin(), sorted_block.end());
      std::vector<int> sup;
      std::set_difference(nodes[child].support.begin(), nodes[child].support.end(),
                          sorted_block.begin(), sorted_block.end(), std::back_inserter(sup));
      n.support = std::move(sup);
    }
    n.block = std::move(block);
    return intern(std::move(key), std::move(n));
  }

};

struct Solver;

struct Grounder {
  const Universe& U;
  const EvalCaps& caps;
  Circuit c;
  std::shared_ptr<void> closed_solver;  // lazily created Solver for closed subcircuits
  // free-variable sets per formula node, for the contextual-closedness check
  std::map<const WsksFormula*, std::pair<std::vector<std::string>, std::vector<std::string>>>
      freevar_cache;
  // results of scratch-solved closed subformulae: (node, fo values) -> truth
  std::map<std::pair<const WsksFormula*, std::vector<int>>, bool> closed_memo;
  const WsksFormula* scratch_root = nullptr;  // do not re-shortcut the node being solved
  std::map<std::string, std::vector<int>> fo;  // var -> stack of universe ordinals
  struct SoBind {
    const std::set<Index>* cst = nullptr;
    int bit0 = -1;
  };
  std::map<std::string, std::vector<SoBind>> so;

  Grounder(const Universe& u, const EvalCaps& cp) : U(u), caps(cp) { c.max_nodes = cp.max_circuit; }

  Index term_value(const WTerm& t) {
    Index base;
    if (t.var) {
      auto it = fo.find(*t.var);
      if (it == fo.end() || it->second.empty())
        throw WsksUnboundVariable("unbound first-order variable '" + *t.var + "'");
      base = U.nodes[it->second.back()];
    }
    for (int d : t.path) base.push_back(d);
    return base;
  }

  int alloc_block() {
    if ((int)U.size() > caps.max_universe)
      throw UniverseCapExceeded("universe of " + std::to_string(U.size()) +
                                " nodes exceeds the second-order search cap of " +
                                std::to_string(caps.max_universe));
    int b0 = c.nbits;
    c.nbits += (int)U.size();
    for (int o = 0; o < (int)U.size(); ++o) c.bit_ord.push_back(o);
    return b0;
  }

  // counting circuit: at least n of the given bits are set
  int at_least(const std::vector<int>& bitnodes, int n) {
    if (n <= 0) return 1;
    if (n > (int)bitnodes.size()) return 0;
    // dp[k] = "at least k among the bits seen so far"
    std::vector<int> dp(n + 1);
    dp[0] = 1;
    for (int k = 1; k <= n; ++k) dp[k] = 0;
    for (int b : bitnodes) {
      for (int k = n; k >= 1; --k)
        dp[k] = c.mk_or({dp[k], c.mk_and({b, dp[k - 1]})});
    }
    return dp[n];
  }

  std::vector<int> set_bits(const std::string& name) {
    auto it = so.find(name);
    if (it == so.end() || it->second.empty())
      throw WsksUnboundVariable("unbound set variable '" + name + "'");
    const SoBind& b = it->second.back();
    std::vector<int> out;
    if (b.cst) {
      for (int o = 0; o < (int)U.size(); ++o)
        out.push_back(b.cst->count(U.nodes[o]) ? 1 : 0);
    } else {
      for (int o = 0; o < (int)U.size(); ++o) out.push_back(c.mk_bit(b.bit0 + o));
    }
    return out;
  }

  int fold_closed(int q);                  // defined after the solver
  int solve_scratch(const WsksFormula& f);  // defined after the solver

  // a subformula whose free set variables are all constant-bound grounds to
  // a closed circuit; solve it in a scratch grounder and keep only the value
  bool contextually_closed(const WsksFormula& f) {
    auto it = freevar_cache.find(&f);
    if (it == freevar_cache.end()) {
      auto fo_free = free_first_order_vars(f);
      auto so_free = free_set_vars(f);
      it = freevar_cache
               .emplace(&f, std::make_pair(std::vector<std::string>(fo_free.begin(), fo_free.end()),
                                           std::vector<std::string>(so_free.begin(), so_free.end())))
               .first;
    }
    for (auto& v : it->second.first) {
      auto jt = fo.find(v);
      if (jt == fo.end() || jt->second.empty()) return false;
    }
    for (auto& v : it->second.second) {
      auto jt = so.find(v);
      if (jt == so.end() || jt->second.empty() || !jt->second.back().cst) return false;
    }
    return true;
  }

  int ground(const WsksFormula& f) {
    switch (f.kind) {
      case WK::TermEq:
        return term_value(f.terms[0]) == term_value(f.terms[1]) ? 1 : 0;
      case WK::Member: {
        Index u = term_value(f.terms[0]);
        auto it = so.find(f.var);
        if (it == so.end() || it->second.empty())
          throw WsksUnboundVariable("unbound set variable '" + f.var + "'");
        const SoBind& b = it->second.back();
        if (b.cst) return b.cst->count(u) ? 1 : 0;
        int o = U.find(u);
        return o < 0 ? 0 : c.mk_bit(b.bit0 + o);
      }
      case WK::And: {
        std::vector<int> ks;
        for (auto& k : f.kids) {
          int g = ground(k);
          if (g == 0) return 0;
          ks.push_back(g);
        }
        return c.mk_and(std::move(ks));
      }
      case WK::Or: {
        std::vector<int> ks;
        for (auto& k : f.kids) {
          int g = ground(k);
          if (g == 1) return 1;
          ks.push_back(g);
        }
        return c.mk_or(std::move(ks));
      }
      case WK::Not: return c.mk_not(ground(f.kids[0]));
      case WK::Implies: {
        int a = ground(f.kids[0]);
        if (a == 0) return 1;
        return c.mk_or({c.mk_not(a), ground(f.kids[1])});
      }
      case WK::Iff: {
        int a = ground(f.kids[0]);
        int b = ground(f.kids[1]);
        return c.mk_or({c.mk_and({a, b}), c.mk_and({c.mk_not(a), c.mk_not(b)})});
      }
      case WK::ExistsFO:
      case WK::ForallFO: {
        bool ex = f.kind == WK::ExistsFO;
        std::vector<int> ks;
        auto& stack = fo[f.var];
        for (int o = 0; o < (int)U.size(); ++o) {
          stack.push_back(o);
          int g = ground(f.kids[0]);
          stack.pop_back();
          if (ex && g == 1) return 1;
          if (!ex && g == 0) return 0;
          ks.push_back(g);
        }
        return ex ? c.mk_or(std::move(ks)) : c.mk_and(std::move(ks));
      }
      case WK::ExistsSO:
      case WK::ForallSO: {
        if (&f != scratch_root && contextually_closed(f)) return solve_scratch(f);
        SoBind b;
        b.bit0 = alloc_block();
        so[f.var].push_back(b);
        int child = ground(f.kids[0]);
        so[f.var].pop_back();
        std::vector<int> block;
        for (int o = 0; o < (int)U.size(); ++o) block.push_back(b.bit0 + o);
        int q = c.mk_quant(f.kind == WK::ExistsSO, std::move(block), child);
        if (q > 1 && c.nodes[q].support.empty()) return fold_closed(q);
        return q;
      }
      case WK::SetEnumEq: {
        std::vector<Index> vals;
        for (auto& t : f.terms) vals.push_back(term_value(t));
        auto it = so.find(f.var);
        if (it == so.end() || it->second.empty())
          throw WsksUnboundVariable("unbound set variable '" + f.var + "'");
        const SoBind& b = it->second.back();
        for (auto& v : vals)
          if (U.find(v) < 0) return 0;  // no subset of the universe matches
        if (b.cst) {
          std::set<Index> want(vals.begin(), vals.end());
          return *b.cst == want ? 1 : 0;
        }
        std::vector<int> ks;
        for (int o = 0; o < (int)U.size(); ++o) {
          bool in = std::find(vals.begin(), vals.end(), U.nodes[o]) != vals.end();
          int bit = c.mk_bit(b.bit0 + o);
          ks.push_back(in ? bit : c.mk_not(bit));
        }
        return c.mk_and(std::move(ks));
      }
      case WK::CardGeq: return at_least(set_bits(f.var), f.n);
      case WK::CardEq:
        return c.mk_and(
            {at_least(set_bits(f.var), f.n), c.mk_not(at_least(set_bits(f.var), f.n + 1))});
    }
    return 0;
  }
};

struct Solver {
  Circuit& c;
  const EvalCaps& caps;
  std::vector<int8_t> asg;
  std::vector<int8_t> cache;
  std::vector<uint32_t> stamp;
  uint32_t gen = 0;
  size_t steps = 0;
  std::unordered_map<std::string, bool> qmemo;

  Solver(Circuit& cc, const EvalCaps& cp) : c(cc), caps(cp) { sync(); }

  // the circuit may grow between evaluations (build-time constant folding)
  void sync() {
    asg.resize(c.nbits, -1);
    cache.resize(c.nodes.size(), -1);
    stamp.resize(c.nodes.size(), 0);
  }

  int8_t eval3(int n) {
    ++gen;
    return rec(n);
  }

  int8_t rec(int n) {
    if (stamp[n] == gen) return cache[n];
    if (++steps > caps.step_budget)
      throw UniverseCapExceeded("evaluation step budget exhausted");
    const Circuit::Node& nd = c.nodes[n];
    int8_t r = -1;
    switch (nd.op) {
      case Circuit::False: r = 0; break;
      case Circuit::True: r = 1; break;
      case Circuit::Bit: r = asg[nd.bit]; break;
      case Circuit::NotOp: {
        int8_t a = rec(nd.a);
        r = (a < 0) ? int8_t(-1) : int8_t(1 - a);
        break;
      }
      case Circuit::AndOp:
      case Circuit::OrOp: {
        int absorber = nd.op == Circuit::AndOp ? 0 : 1;
        bool unknown = false;
        r = (int8_t)(1 - absorber);
        for (int k : nd.kids) {
          int8_t a = rec(k);
          if (a == absorber) {
            r = (int8_t)absorber;
            unknown = false;
            break;
          }
          if (a < 0) unknown = true;
        }
        if (r != absorber && unknown) r = -1;
        break;
      }
      case Circuit::ExistsQ:
      case Circuit::ForallQ: {
        bool ready = true;
        for (int b : nd.support)
          if (asg[b] < 0) { ready = false; break; }
        if (!ready) {
          r = -1;
          break;
        }
        r = solve_quant(n) ? 1 : 0;
        break;
      }
    }
    stamp[n] = gen;
    cache[n] = r;
    return r;
  }

  bool solve_quant(int n) {
    const Circuit::Node& nd = c.nodes[n];
    std::string key;
    key.reserve(nd.support.size() + 8);
    key.append(reinterpret_cast<const char*>(&n), sizeof n);
    for (int b : nd.support) key.push_back((char)('0' + asg[b]));
    auto it = qmemo.find(key);
    if (it != qmemo.end()) return it->second;
    bool res = dfs(nd.block, 0, nd.a, nd.op == Circuit::ExistsQ);
    qmemo.emplace(std::move(key), res);
    return res;
  }

  bool dfs(const std::vector<int>& bits, size_t i, int child, bool exists) {
    int8_t e = eval3(child);
    if (e >= 0) return e == 1;
    assert(i < bits.size());
    for (int v = 0; v <= 1; ++v) {
      asg[bits[i]] = (int8_t)v;
      bool r = dfs(bits, i + 1, child, exists);
      asg[bits[i]] = -1;
      if (exists && r) return true;
      if (!exists && !r) return false;
    }
    return !exists;
  }
};

inline int Grounder::fold_closed(int q) {
  if (!closed_solver) closed_solver = std::make_shared<Solver>(c, caps);
  Solver* s = static_cast<Solver*>(closed_solver.get());
  s->sync();
  return s->eval3(q) == 1 ? 1 : 0;
}

inline int Grounder::solve_scratch(const WsksFormula& f) {
  std::vector<int> key_env;
  for (auto& v : freevar_cache.at(&f).first) key_env.push_back(fo.at(v).back());
  auto key = std::make_pair(&f, key_env);
  auto it = closed_memo.find(key);
  if (it != closed_memo.end()) return it->second ? 1 : 0;
  Grounder sub(U, caps);
  sub.scratch_root = &f;
  for (auto& v : freevar_cache.at(&f).first) sub.fo[v].push_back(fo.at(v).back());
  for (auto& v : freevar_cache.at(&f).second) sub.so[v].push_back(so.at(v).back());
  int root = sub.ground(f);
  bool value;
  if (root <= 1) {
    value = root == 1;
  } else {
    Solver s(sub.c, caps);
    value = s.eval3(root) == 1;
  }
  closed_memo.emplace(std::move(key), value);
  return value ? 1 : 0;
}

}  // namespace wdetail

// ---------------------------------------------------------------------------
// Public evaluation entry points

inline void check_valuation(const Valuation& nu, const Universe& U) {
  for (auto& [v, u] : nu.fo)
    if (U.find(u) < 0)
      throw UniverseMismatch("valuation of '" + v + "' lies outside the universe");
  for (auto& [v, s] : nu.so)
    for (auto& u : s)
      if (U.find(u) < 0)
        throw UniverseMismatch("valuation of '" + v + "' is not covered by the universe");
}

inline bool eval(const WsksFormula& f, const Valuation& nu, const Universe& U,
                 const EvalCaps& caps = {}) {
  check_valuation(nu, U);
  wdetail::Grounder g(U, caps);
  for (auto& [v, u] : nu.fo) g.fo[v].push_back(U.find(u));
  for (auto& [v, s] : nu.so) {
    wdetail::Grounder::SoBind b;
    b.cst = &s;
    g.so[v].push_back(b);
  }
  int root = g.ground(f);
  if (root <= 1) return root == 1;
  wdetail::Solver s(g.c, caps);
  int8_t r = s.eval3(root);
  assert(r >= 0);
  return r == 1;
}

// exhaustive search for a satisfying assignment of the formula's free
// variables within the universe; `fixed` pins part of the valuation
inline std::optional<Valuation> bounded_sat(const WsksFormula& f, const Universe& U,
                                            const EvalCaps& caps = {}, const Valuation& fixed = {},
                                            std::vector<Valuation>* all = nullptr) {
  check_valuation(fixed, U);
  std::vector<std::string> fo_free, so_free;
  for (auto& v : free_first_order_vars(f))
    if (!fixed.fo.count(v)) fo_free.push_back(v);
  for (auto& v : free_set_vars(f))
    if (!fixed.so.count(v)) so_free.push_back(v);

  std::vector<int> fo_choice(fo_free.size(), 0);
  for (;;) {
    wdetail::Grounder g(U, caps);
    for (auto& [v, u] : fixed.fo) g.fo[v].push_back(U.find(u));
    for (auto& [v, s] : fixed.so) {
      wdetail::Grounder::SoBind b;
      b.cst = &s;
      g.so[v].push_back(b);
    }
    for (size_t i = 0; i < fo_free.size(); ++i) g.fo[fo_free[i]].push_back(fo_choice[i]);
    std::map<std::string, int> so_base;
    for (auto& v : so_free) {
      wdetail::Grounder::SoBind b;
      b.bit0 = g.alloc_block();
      so_base[v] = b.bit0;
      g.so[v].push_back(b);
    }
    int root = g.ground(f);
    if (root != 0) {
      wdetail::Solver s(g.c, caps);
      std::vector<int> bits;
      for (auto& [v, b0] : so_base)
        for (int o = 0; o < (int)U.size(); ++o) bits.push_back(b0 + o);

      auto extract = [&]() {
        Valuation out = fixed;
        for (size_t i = 0; i < fo_free.size(); ++i) out.fo[fo_free[i]] = U.nodes[fo_choice[i]];
        for (auto& [v, b0] : so_base) {
          auto& set = out.so[v];
          for (int o = 0; o < (int)U.size(); ++o)
            if (s.asg[b0 + o] == 1) set.insert(U.nodes[o]);
        }
        return out;
      };

      // depth-first over the free bits, zeros first; in enumeration mode every
      // full assignment is visited, otherwise the least witness is returned
      std::optional<Valuation> found;
      auto go = [&](size_t i, auto&& self) -> bool {  // true = stop
        int8_t e = s.eval3(root);
        if (e == 0) return false;
        if (e == 1 && !all) {
          for (size_t k = i; k < bits.size(); ++k) s.asg[bits[k]] = 0;
          found = extract();
          for (size_t k = i; k < bits.size(); ++k) s.asg[bits[k]] = -1;
          return true;
        }
        if (i == bits.size()) {
          if (e == 1) {
            if (all) {
              all->push_back(extract());
              return false;
            }
            found = extract();
            return true;
          }
          return false;
        }
        for (int v = 0; v <= 1; ++v) {
          s.asg[bits[i]] = (int8_t)v;
          bool stop = self(i + 1, self);
          s.asg[bits[i]] = -1;
          if (stop) return true;
        }
        return false;
      };
      go(0, go);
      if (found && !all) return found;
    }
    // next first-order combination
    size_t i = fo_choice.size();
    bool done = true;
    while (i > 0) {
      --i;
      if (++fo_choice[i] < (int)U.size()) {
        done = false;
        break;
      }
      fo_choice[i] = 0;
    }
    if (done || fo_choice.empty()) break;
  }
  return std::nullopt;
}

inline std::vector<Valuation> bounded_sat_all(const WsksFormula& f, const Universe& U,
                                              const EvalCaps& caps = {},
                                              const Valuation& fixed = {}) {
  std::vector<Valuation> all;
  bounded_sat(f, U, caps, fixed, &all);
  return all;
}

}  // namespace clv
