#pragma once

#include <atomic>
#include <thread>

#include "clverify/cl_models.hpp"
#include "clverify/model_json.hpp"
#include "clverify/petri.hpp"
#include "json.hpp"

namespace clv {

enum class Answer { Yes, No, Inconclusive };

inline const char* answer_name(Answer a) {
  switch (a) {
    case Answer::Yes: return "yes";
    case Answer::No: return "no";
    default: return "inconclusive";
  }
}

struct CheckCaps {
  size_t bfs_cap = 1000000;
  size_t precise_cap = 1000000;  // cap on the per-instance precise-marking product
  int mutex_place_cap = 24;
  int jobs = 1;
};

struct InstanceResult {
  int tree_id = 0;
  RewritingTree tree;
  Answer answer = Answer::No;
  nlohmann::json witness;
  std::string note;
};

struct Verdict {
  std::string query, sentence, mode;
  int max_nodes = 0;
  Answer summary = Answer::No;
  std::vector<InstanceResult> instances;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema"] = "clverify/1";
    j["query"] = query;
    j["sentence"] = sentence;
    j["maxNodes"] = max_nodes;
    j["mode"] = mode;
    j["summary"] = answer_name(summary);
    j["boundedNo"] = "a summary 'no' covers only instances with trees of at most maxNodes nodes";
    j["instances"] = nlohmann::json::array();
    for (auto& i : instances) {
      nlohmann::json ji;
      ji["tree"] = tree_to_json(i.tree);
      ji["answer"] = answer_name(i.answer);
      if (!i.witness.is_null()) ji["witness"] = i.witness;
      if (!i.note.empty()) ji["note"] = i.note;
      j["instances"].push_back(ji);
    }
    return j;
  }

  static nlohmann::json tree_to_json(const RewritingTree& t) {
    nlohmann::json nodes = nlohmann::json::object();
    for (auto& [w, ri] : t.label) nodes[index_to_string(w)] = ri + 1;
    return nlohmann::json{{"nodes", nodes}};
  }
};

namespace detail {

inline void parallel_for(int jobs, size_t n, const std::function<void(size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> ws;
  int k = std::min<size_t>(jobs, n);
  for (int w = 0; w < k; ++w)
    ws.emplace_back([&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  for (auto& w : ws) w.join();
}

inline nlohmann::json marking_json(const PetriNet& net, const Bits& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (auto& p : net.to_marking(m)) arr.push_back({p.state, index_to_string(p.index)});
  return arr;
}

inline nlohmann::json firing_json(const PetriNet& net, const std::vector<int>& path) {
  nlohmann::json arr = nlohmann::json::array();
  for (int t : path) arr.push_back(net.transitions[t].to_string());
  return arr;
}

// iterate precise markings of an architecture (product of per-component state
// choices); returns false when the visitor stops early
inline bool for_each_precise(const Signature& sig, const Architecture& arch,
                             const PetriNet& net, size_t cap, bool& capped,
                             const std::function<bool(const Bits&)>& fn) {
  struct Slot {
    std::vector<int> place_ids;
    size_t choice = 0;
  };
  std::vector<Slot> slots;
  double product = 1;
  for (auto& [cname, set] : arch.components) {
    const ComponentType* c = sig.component(cname);
    for (auto& u : set) {
      Slot s;
      for (auto& q : c->states) s.place_ids.push_back(net.id_of({q, u}));
      slots.push_back(s);
      product *= (double)c->states.size();
      if (product > (double)cap) {
        capped = true;
        return true;
      }
    }
  }
  Bits m((int)net.places.size());
  for (auto& s : slots) m.set(s.place_ids[0]);
  for (;;) {
    if (!fn(m)) return false;
    size_t i = slots.size();
    bool done = true;
    while (i > 0) {
      --i;
      m.set(slots[i].place_ids[slots[i].choice], false);
      if (++slots[i].choice < slots[i].place_ids.size()) {
        m.set(slots[i].place_ids[slots[i].choice]);
        done = false;
        break;
      }
      slots[i].choice = 0;
      m.set(slots[i].place_ids[0]);
    }
    if (done || slots.empty()) return true;
  }
}

struct NetInstance {
  PetriNet net;
  Bits m0{0};
  Configuration canon;
};

inline NetInstance instantiate(const RewritingTree& t, const AnalyzedSpec& as) {
  NetInstance ni;
  ni.canon = canonical_model(t, as);
  ni.net = build_net(as.spec.signature, ni.canon.architecture);
  ni.m0 = ni.net.to_bits(ni.canon.marking);
  return ni;
}

// mutexes with cap fallback: nullopt means traps-only
inline std::optional<std::vector<Bits>> try_mutexes(const PetriNet& net, const Bits& m0,
                                                    int place_cap) {
  try {
    return enumerate_mutexes(net, m0, place_cap);
  } catch (const CapExceeded&) {
    return std::nullopt;
  }
}

}  // namespace detail

struct UnknownState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// deadlock: is some deadlocked marking reachable (exact) / inside the
// trap-and-mutex invariant (invariant mode, sound over-approximation)?

inline Verdict check_deadlock_bounded(const SentenceQuery& q, int max_nodes,
                                      const std::string& mode, const CheckCaps& caps = {}) {
  require_tight(q);
  Verdict v;
  v.query = "deadlock";
  v.sentence = q.pred;
  v.mode = mode;
  v.max_nodes = max_nodes;
  auto trees = enumerate_trees(q, max_nodes);
  v.instances.resize(trees.size());
  detail::parallel_for(caps.jobs, trees.size(), [&](size_t i) {
    InstanceResult& r = v.instances[i];
    r.tree_id = (int)i;
    r.tree = trees[i];
    auto ni = detail::instantiate(trees[i], q.analyzed);
    if (mode == "exact") {
      auto reach = reach_set(ni.net, ni.m0, caps.bfs_cap);
      r.answer = Answer::No;
      for (size_t s = 0; s < reach.markings.size(); ++s) {
        if (is_deadlock(ni.net, reach.markings[s])) {
          r.answer = Answer::Yes;
          r.witness = {{"marking", detail::marking_json(ni.net, reach.markings[s])},
                       {"firing", detail::firing_json(ni.net, reach.path_to((int)s))}};
          break;
        }
      }
      if (r.answer == Answer::No && reach.exhausted) {
        r.answer = Answer::Inconclusive;
        r.note = "reachability cap exhausted";
      }
    } else {
      auto mux = detail::try_mutexes(ni.net, ni.m0, caps.mutex_place_cap);
      InvariantOptions opts;
      opts.use_mutexes = mux.has_value();
      if (!mux) r.note = "mutex enumeration capped out; traps only";
      bool capped = false;
      r.answer = Answer::No;
      detail::for_each_precise(
          q.analyzed.spec.signature, ni.canon.architecture, ni.net, caps.precise_cap, capped,
          [&](const Bits& m) {
            if (!is_deadlock(ni.net, m)) return true;
            if (!in_invariants(ni.net, ni.m0, m, opts, mux ? &*mux : nullptr).member)
              return true;
            r.answer = Answer::Yes;
            r.witness = {{"marking", detail::marking_json(ni.net, m)}};
            return false;
          });
      if (capped && r.answer == Answer::No) {
        r.answer = Answer::Inconclusive;
        r.note = "precise-marking product cap exhausted";
      }
    }
  });
  v.summary = Answer::No;
  for (auto& r : v.instances)
    if (r.answer == Answer::Yes) v.summary = Answer::Yes;
  if (v.summary == Answer::No)
    for (auto& r : v.instances)
      if (r.answer == Answer::Inconclusive) v.summary = Answer::Inconclusive;
  return v;
}

// ---------------------------------------------------------------------------
// reach: is some marking containing the requested states (with
// multiplicities, pairwise-distinct places) reachable / invariant-consistent?

inline Verdict check_reach_bounded(const SentenceQuery& q, const std::vector<std::string>& states,
                                   int max_nodes, const std::string& mode,
                                   const CheckCaps& caps = {}) {
  require_tight(q);
  std::map<std::string, int> multiplicity;
  for (auto& s : states) {
    if (!q.analyzed.spec.signature.owner_of_state(s))
      throw UnknownState("unknown state '" + s + "'");
    ++multiplicity[s];
  }
  auto satisfies = [&](const PetriNet& net, const Bits& m) {
    for (auto& [state, k] : multiplicity) {
      int have = 0;
      for (int i = 0; i < (int)net.places.size(); ++i)
        if (m.get(i) && net.places[i].state == state) ++have;
      if (have < k) return false;
    }
    return true;
  };
  Verdict v;
  v.query = "reach";
  v.sentence = q.pred;
  v.mode = mode;
  v.max_nodes = max_nodes;
  auto trees = enumerate_trees(q, max_nodes);
  v.instances.resize(trees.size());
  detail::parallel_for(caps.jobs, trees.size(), [&](size_t i) {
    InstanceResult& r = v.instances[i];
    r.tree_id = (int)i;
    r.tree = trees[i];
    auto ni = detail::instantiate(trees[i], q.analyzed);
    if (mode == "exact") {
      auto reach = reach_set(ni.net, ni.m0, caps.bfs_cap);
      r.answer = Answer::No;
      for (size_t s = 0; s < reach.markings.size(); ++s) {
        if (satisfies(ni.net, reach.markings[s])) {
          r.answer = Answer::Yes;
          r.witness = {{"marking", detail::marking_json(ni.net, reach.markings[s])},
                       {"firing", detail::firing_json(ni.net, reach.path_to((int)s))}};
          break;
        }
      }
      if (r.answer == Answer::No && reach.exhausted) {
        r.answer = Answer::Inconclusive;
        r.note = "reachability cap exhausted";
      }
    } else {
      auto mux = detail::try_mutexes(ni.net, ni.m0, caps.mutex_place_cap);
      InvariantOptions opts;
      opts.use_mutexes = mux.has_value();
      if (!mux) r.note = "mutex enumeration capped out; traps only";
      bool capped = false;
      r.answer = Answer::No;
      detail::for_each_precise(
          q.analyzed.spec.signature, ni.canon.architecture, ni.net, caps.precise_cap, capped,
          [&](const Bits& m) {
            if (!satisfies(ni.net, m)) return true;
            if (!in_invariants(ni.net, ni.m0, m, opts, mux ? &*mux : nullptr).member)
              return true;
            r.answer = Answer::Yes;
            r.witness = {{"marking", detail::marking_json(ni.net, m)}};
            return false;
          });
      if (capped && r.answer == Answer::No) {
        r.answer = Answer::Inconclusive;
        r.note = "precise-marking product cap exhausted";
      }
    }
  });
  v.summary = Answer::No;
  for (auto& r : v.instances)
    if (r.answer == Answer::Yes) v.summary = Answer::Yes;
  if (v.summary == Answer::No)
    for (auto& r : v.instances)
      if (r.answer == Answer::Inconclusive) v.summary = Answer::Inconclusive;
  return v;
}

// ---------------------------------------------------------------------------
// safe: from every instance of phi, does every reachable marking still
// satisfy psi? inductive: one-step variant with psi = phi.

inline Verdict check_safe_bounded(const SentenceQuery& qphi, const SentenceQuery& qpsi,
                                  int max_nodes, const CheckCaps& caps = {},
                                  bool one_step = false) {
  require_tight(qphi);
  require_tight(qpsi);
  Verdict v;
  v.query = one_step ? "inductive" : "safe";
  v.sentence = qphi.pred + (one_step ? "" : "," + qpsi.pred);
  v.mode = "exact";
  v.max_nodes = max_nodes;
  auto trees = enumerate_trees(qphi, max_nodes);
  v.instances.resize(trees.size());
  detail::parallel_for(caps.jobs, trees.size(), [&](size_t i) {
    InstanceResult& r = v.instances[i];
    r.tree_id = (int)i;
    r.tree = trees[i];
    auto ni = detail::instantiate(trees[i], qphi.analyzed);
    std::vector<Bits> to_check;
    bool capped = false;
    if (one_step) {
      for (int t : enabled(ni.net, ni.m0)) to_check.push_back(fire(ni.net, ni.m0, t));
    } else {
      auto reach = reach_set(ni.net, ni.m0, caps.bfs_cap);
      capped = reach.exhausted;
      to_check = reach.markings;
    }
    r.answer = Answer::Yes;
    for (auto& m : to_check) {
      Configuration c{ni.canon.architecture, ni.net.to_marking(m)};
      auto mr = models(c, qpsi, max_nodes);
      if (mr.verdict == ModelsResult::Verdict::Yes) continue;
      if (mr.verdict == ModelsResult::Verdict::BoundExhausted) {
        r.answer = Answer::Inconclusive;
        r.note = "satisfaction check exhausted its tree bound";
      } else {
        r.answer = Answer::No;
        r.witness = {{"marking", detail::marking_json(ni.net, m)}};
      }
      break;
    }
    if (r.answer == Answer::Yes && capped) {
      r.answer = Answer::Inconclusive;
      r.note = "reachability cap exhausted";
    }
  });
  v.summary = Answer::Yes;
  for (auto& r : v.instances)
    if (r.answer == Answer::No) v.summary = Answer::No;
  if (v.summary == Answer::Yes)
    for (auto& r : v.instances)
      if (r.answer == Answer::Inconclusive) v.summary = Answer::Inconclusive;
  return v;
}

inline Verdict check_inductive_bounded(const SentenceQuery& qphi, int max_nodes,
                                       const CheckCaps& caps = {}) {
  return check_safe_bounded(qphi, qphi, max_nodes, caps, true);
}

}  // namespace clv
