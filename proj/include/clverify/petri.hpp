#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "clverify/model.hpp"

namespace clv {

// ---------------------------------------------------------------------------
// Compact bitset markings for search

struct Bits {
  std::vector<uint64_t> w;
  int n = 0;

  explicit Bits(int bits = 0) : w((bits + 63) / 64, 0), n(bits) {}
  bool get(int i) const { return (w[i >> 6] >> (i & 63)) & 1; }
  void set(int i, bool v = true) {
    if (v) w[i >> 6] |= 1ull << (i & 63);
    else w[i >> 6] &= ~(1ull << (i & 63));
  }
  bool operator==(const Bits& o) const = default;
  bool subset_of(const Bits& o) const {
    for (size_t k = 0; k < w.size(); ++k)
      if (w[k] & ~o.w[k]) return false;
    return true;
  }
  bool intersects(const Bits& o) const {
    for (size_t k = 0; k < w.size(); ++k)
      if (w[k] & o.w[k]) return true;
    return false;
  }
  int count() const {
    int c = 0;
    for (auto x : w) c += __builtin_popcountll(x);
    return c;
  }
  int count_and(const Bits& o) const {
    int c = 0;
    for (size_t k = 0; k < w.size(); ++k) c += __builtin_popcountll(w[k] & o.w[k]);
    return c;
  }
  Bits minus(const Bits& o) const {
    Bits r = *this;
    for (size_t k = 0; k < w.size(); ++k) r.w[k] &= ~o.w[k];
    return r;
  }
  Bits plus(const Bits& o) const {
    Bits r = *this;
    for (size_t k = 0; k < w.size(); ++k) r.w[k] |= o.w[k];
    return r;
  }
  Bits complement() const {
    Bits r(n);
    for (size_t k = 0; k < w.size(); ++k) r.w[k] = ~w[k];
    if (n & 63) r.w.back() &= (1ull << (n & 63)) - 1;
    return r;
  }
};

struct BitsHash {
  size_t operator()(const Bits& b) const {
    size_t h = 1469598103934665603ull;
    for (auto x : b.w) {
      h ^= x;
      h *= 1099511628211ull;
    }
    return h;
  }
};

// ---------------------------------------------------------------------------
// Nets (operational semantics of a system)

struct NetTransition {
  std::string interaction;
  std::vector<Index> tuple;
  std::vector<ComponentType::Transition> sync;  // synchronizing transitions, one per position
  Bits pre, post;

  std::string to_string() const {
    std::string s = interaction + "[";
    for (size_t i = 0; i < tuple.size(); ++i) s += (i ? "," : "") + index_to_string(tuple[i]);
    s += "]";
    return s;
  }
};

struct PetriNet {
  std::vector<Place> places;  // sorted by (state, index)
  std::map<Place, int> place_id;
  std::vector<NetTransition> transitions;

  int id_of(const Place& p) const {
    auto it = place_id.find(p);
    return it == place_id.end() ? -1 : it->second;
  }
  Bits to_bits(const Marking& m) const {
    Bits b((int)places.size());
    for (auto& p : m) {
      int id = id_of(p);
      if (id < 0) throw std::runtime_error("marking place " + p.state + "[" +
                                           index_to_string(p.index) + "] not in net");
      b.set(id);
    }
    return b;
  }
  Marking to_marking(const Bits& b) const {
    Marking m;
    for (int i = 0; i < (int)places.size(); ++i)
      if (b.get(i)) m.insert(places[i]);
    return m;
  }
};

// Places {q[u]}, one transition per interaction instance and synchronizing
// component-transition tuple, subject to the pairwise-distinct-components
// side condition.
inline PetriNet build_net(const Signature& sig, const Architecture& arch) {
  PetriNet net;
  for (auto& [cname, set] : arch.components) {
    const ComponentType* c = sig.component(cname);
    if (!c) throw std::runtime_error("unknown component type '" + cname + "'");
    for (auto& u : set)
      for (auto& q : c->states) net.places.push_back({q, u});
  }
  std::sort(net.places.begin(), net.places.end());
  net.places.erase(std::unique(net.places.begin(), net.places.end()), net.places.end());
  for (int i = 0; i < (int)net.places.size(); ++i) net.place_id[net.places[i]] = i;

  for (auto& it : sig.interactions) {
    auto& tuples = arch.of_interaction(it.name);
    std::vector<std::vector<ComponentType::Transition>> per_port;
    for (auto& [ct, p] : it.ports) per_port.push_back(sig.transitions_of_port(p));
    for (auto& tup : tuples) {
      // distinctness: i != j => u_i != u_j or comp(p_i) != comp(p_j)
      bool ok = true;
      for (size_t i = 0; i < tup.size() && ok; ++i)
        for (size_t j = i + 1; j < tup.size() && ok; ++j)
          if (tup[i] == tup[j] && it.ports[i].first == it.ports[j].first) ok = false;
      if (!ok) continue;
      // all endpoints must have their places present (loose interactions never fire)
      // product over synchronizing component transitions, declared order
      std::vector<size_t> choice(tup.size(), 0);
      bool any_empty = false;
      for (auto& v : per_port)
        if (v.empty()) any_empty = true;
      if (any_empty || tup.empty()) continue;
      for (;;) {
        NetTransition t;
        t.interaction = it.name;
        t.tuple = tup;
        t.pre = Bits((int)net.places.size());
        t.post = Bits((int)net.places.size());
        bool resolvable = true;
        for (size_t i = 0; i < tup.size(); ++i) {
          const auto& ct = per_port[i][choice[i]];
          t.sync.push_back(ct);
          int pid = net.id_of({ct.from, tup[i]});
          int qid = net.id_of({ct.to, tup[i]});
          if (pid < 0 || qid < 0) { resolvable = false; break; }
          t.pre.set(pid);
          t.post.set(qid);
        }
        if (resolvable) net.transitions.push_back(std::move(t));
        size_t i = tup.size();
        bool done = true;
        while (i > 0) {
          --i;
          if (++choice[i] < per_port[i].size()) { done = false; break; }
          choice[i] = 0;
        }
        if (done) break;
      }
    }
  }
  return net;
}

struct NotEnabled : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool transition_enabled(const PetriNet& net, const Bits& m, int t) {
  return net.transitions[t].pre.subset_of(m);
}

inline std::vector<int> enabled(const PetriNet& net, const Bits& m) {
  std::vector<int> out;
  for (int t = 0; t < (int)net.transitions.size(); ++t)
    if (transition_enabled(net, m, t)) out.push_back(t);
  return out;
}

inline Bits fire(const PetriNet& net, const Bits& m, int t) {
  if (!transition_enabled(net, m, t))
    throw NotEnabled("transition " + net.transitions[t].to_string() + " is not enabled");
  return m.minus(net.transitions[t].pre).plus(net.transitions[t].post);
}

inline bool is_deadlock(const PetriNet& net, const Bits& m) {
  for (int t = 0; t < (int)net.transitions.size(); ++t)
    if (transition_enabled(net, m, t)) return false;
  return true;
}

// exactly one marked state per component instance
inline bool is_precise(const Signature& sig, const Architecture& arch, const Marking& m) {
  for (auto& [cname, set] : arch.components) {
    const ComponentType* c = sig.component(cname);
    if (!c) return false;
    for (auto& u : set) {
      int hits = 0;
      for (auto& q : c->states)
        if (m.count({q, u})) ++hits;
      if (hits != 1) return false;
    }
  }
  // no stray tokens outside the architecture's places
  for (auto& p : m) {
    const ComponentType* c = sig.owner_of_state(p.state);
    if (!c || !arch.of_component(c->name).count(p.index)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Reachability (BFS, capped)

struct ReachResult {
  std::vector<Bits> markings;               // BFS discovery order, [0] = m0
  std::vector<std::pair<int, int>> parent;  // (predecessor state, transition), -1 for m0
  bool exhausted = false;                   // cap hit before closure

  std::vector<int> path_to(int idx) const {
    std::vector<int> ts;
    while (idx >= 0 && parent[idx].first >= 0) {
      ts.push_back(parent[idx].second);
      idx = parent[idx].first;
    }
    std::reverse(ts.begin(), ts.end());
    return ts;
  }
};

inline ReachResult reach_set(const PetriNet& net, const Bits& m0, size_t cap = 1000000) {
  ReachResult r;
  std::unordered_map<Bits, int, BitsHash> seen;
  r.markings.push_back(m0);
  r.parent.push_back({-1, -1});
  seen[m0] = 0;
  for (size_t head = 0; head < r.markings.size(); ++head) {
    Bits cur = r.markings[head];
    for (int t = 0; t < (int)net.transitions.size(); ++t) {
      if (!transition_enabled(net, cur, t)) continue;
      Bits nxt = fire(net, cur, t);
      if (seen.count(nxt)) continue;
      if (r.markings.size() >= cap) {
        r.exhausted = true;
        return r;
      }
      seen[nxt] = (int)r.markings.size();
      r.markings.push_back(nxt);
      r.parent.push_back({(int)head, t});
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Structural invariants: traps and mutexes

// largest trap contained in `allowed` (greatest-fixpoint deletion)
inline Bits max_trap_within(const PetriNet& net, const Bits& allowed) {
  Bits trap = allowed;
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& t : net.transitions) {
      if (trap.intersects(t.pre) && !trap.intersects(t.post)) {
        // no pre-place of t may stay
        Bits nxt = trap.minus(t.pre);
        if (!(nxt == trap)) {
          trap = nxt;
          changed = true;
        }
      }
    }
  }
  return trap;
}

// refutes membership in the trap invariant: a trap inside S \ m that is
// initially marked witnesses the violation
inline std::optional<Bits> violates_trap_invariant(const PetriNet& net, const Bits& m0,
                                                   const Bits& m) {
  Bits t = max_trap_within(net, m.complement());
  if (t.intersects(m0)) return t;
  return std::nullopt;
}

struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// all mutexes (|s & m0| = 1 and |s & pre(t)| = |s & post(t)| <= 1 for all t),
// by DFS over place inclusion with count pruning
inline std::vector<Bits> enumerate_mutexes(const PetriNet& net, const Bits& m0,
                                           int place_cap = 24) {
  int P = (int)net.places.size();
  if (P > place_cap)
    throw CapExceeded("mutex enumeration needs |places| <= " + std::to_string(place_cap) +
                      ", net has " + std::to_string(P));
  std::vector<Bits> out;
  int T = (int)net.transitions.size();
  std::vector<int> pre_cnt(T, 0), post_cnt(T, 0);
  int m0_cnt = 0;
  Bits cur(P);

  std::function<void(int)> go = [&](int i) {
    if (i == P) {
      if (m0_cnt != 1) return;
      for (int t = 0; t < T; ++t)
        if (pre_cnt[t] != post_cnt[t]) return;
      out.push_back(cur);
      return;
    }
    // exclude place i
    go(i + 1);
    // include place i
    bool ok = true;
    if (m0.get(i) && m0_cnt + 1 > 1) ok = false;
    std::vector<int> touched;
    if (ok) {
      for (int t = 0; t < T && ok; ++t) {
        if (net.transitions[t].pre.get(i)) {
          if (++pre_cnt[t] > 1) ok = false;
          touched.push_back(t * 2);
        }
        if (net.transitions[t].post.get(i)) {
          if (++post_cnt[t] > 1) ok = false;
          touched.push_back(t * 2 + 1);
        }
      }
      if (ok) {
        if (m0.get(i)) ++m0_cnt;
        cur.set(i, true);
        go(i + 1);
        cur.set(i, false);
        if (m0.get(i)) --m0_cnt;
      }
      for (int x : touched)
        (x & 1) ? --post_cnt[x / 2] : --pre_cnt[x / 2];
    }
  };
  go(0);
  std::sort(out.begin(), out.end(), [](const Bits& a, const Bits& b) { return a.w < b.w; });
  return out;
}

struct InvariantOptions {
  bool use_mutexes = true;
  int mutex_place_cap = 24;
};

struct InvariantCheck {
  bool member = true;
  std::string refutation;  // empty when member
};

// membership in the trap-and-mutex invariant of (net, m0)
inline InvariantCheck in_invariants(const PetriNet& net, const Bits& m0, const Bits& m,
                                    const InvariantOptions& opts = {},
                                    const std::vector<Bits>* mutexes = nullptr) {
  if (m0.count() == 0) return {true, {}};  // empty initial marking: no traps, no mutexes
  if (auto t = violates_trap_invariant(net, m0, m)) {
    std::string s = "unmarked initially-marked trap {";
    bool first = true;
    for (int i = 0; i < (int)net.places.size(); ++i)
      if (t->get(i)) {
        s += (first ? "" : ",") + net.places[i].state + "[" +
             index_to_string(net.places[i].index) + "]";
        first = false;
      }
    return {false, s + "}"};
  }
  if (opts.use_mutexes) {
    std::vector<Bits> local;
    if (!mutexes) {
      local = enumerate_mutexes(net, m0, opts.mutex_place_cap);
      mutexes = &local;
    }
    for (auto& mx : *mutexes)
      if (mx.count_and(m) != 1) return {false, "mutex not hit exactly once"};
  }
  return {true, {}};
}

}  // namespace clv
