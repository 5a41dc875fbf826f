#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "clverify/index.hpp"

namespace clv {

// ---------------------------------------------------------------------------
// Signatures and behaviors

struct ComponentType {
  struct Transition {
    std::string from, port, to;
    auto operator<=>(const Transition&) const = default;
  };
  std::string name;
  std::vector<std::string> ports;
  std::vector<std::string> states;
  std::vector<Transition> transitions;

  bool has_port(const std::string& p) const {
    return std::find(ports.begin(), ports.end(), p) != ports.end();
  }
  bool has_state(const std::string& q) const {
    return std::find(states.begin(), states.end(), q) != states.end();
  }
};

struct InteractionType {
  std::string name;
  // ordered tuple of qualified ports
  std::vector<std::pair<std::string, std::string>> ports;  // (componentType, port)
  size_t arity() const { return ports.size(); }
};

struct Signature {
  std::vector<ComponentType> components;
  std::vector<InteractionType> interactions;

  const ComponentType* component(const std::string& n) const {
    for (auto& c : components)
      if (c.name == n) return &c;
    return nullptr;
  }
  const InteractionType* interaction(const std::string& n) const {
    for (auto& i : interactions)
      if (i.name == n) return &i;
    return nullptr;
  }
  // Each port belongs to the interface of exactly one component type.
  const ComponentType* owner_of_port(const std::string& p) const {
    for (auto& c : components)
      if (c.has_port(p)) return &c;
    return nullptr;
  }
  // State sets are pairwise disjoint, so states resolve uniquely too.
  const ComponentType* owner_of_state(const std::string& q) const {
    for (auto& c : components)
      if (c.has_state(q)) return &c;
    return nullptr;
  }
  // Component type owning position k of interaction type I.
  const ComponentType* position_type(const InteractionType& it, size_t k) const {
    return component(it.ports[k].first);
  }
  std::vector<ComponentType::Transition> transitions_of_port(const std::string& p) const {
    std::vector<ComponentType::Transition> r;
    if (const ComponentType* c = owner_of_port(p))
      for (auto& t : c->transitions)
        if (t.port == p) r.push_back(t);
    return r;
  }
};

struct ValidationIssue {
  std::string where;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  std::vector<ValidationIssue> warnings;
  bool ok() const { return issues.empty(); }
  void error(const std::string& where, const std::string& msg) { issues.push_back({where, msg}); }
  void warn(const std::string& where, const std::string& msg) { warnings.push_back({where, msg}); }
  std::string to_string() const {
    std::ostringstream os;
    for (auto& i : issues) os << "error: " << i.where << ": " << i.message << "\n";
    for (auto& w : warnings) os << "warning: " << w.where << ": " << w.message << "\n";
    return os.str();
  }
};

inline ValidationReport validate_signature(const Signature& sig) {
  ValidationReport rep;
  std::map<std::string, std::string> port_owner;   // port -> component type
  std::map<std::string, std::string> state_owner;  // state -> component type
  std::set<std::string> type_names;
  for (auto& c : sig.components) {
    if (!type_names.insert(c.name).second)
      rep.error("component " + c.name, "duplicate component type name");
    for (auto& p : c.ports) {
      auto [it, fresh] = port_owner.emplace(p, c.name);
      if (!fresh)
        rep.error("component " + c.name,
                  "port '" + p + "' already declared by component type '" + it->second + "'");
    }
    for (auto& q : c.states) {
      auto [it, fresh] = state_owner.emplace(q, c.name);
      if (!fresh)
        rep.error("component " + c.name,
                  "state '" + q + "' already declared by component type '" + it->second + "'");
    }
    std::set<std::string> used_ports;
    for (auto& t : c.transitions) {
      if (!c.has_state(t.from))
        rep.error("component " + c.name, "transition from undeclared state '" + t.from + "'");
      if (!c.has_state(t.to))
        rep.error("component " + c.name, "transition to undeclared state '" + t.to + "'");
      if (!c.has_port(t.port))
        rep.error("component " + c.name, "transition over undeclared port '" + t.port + "'");
      used_ports.insert(t.port);
    }
    for (auto& p : c.ports)
      if (!used_ports.count(p))
        rep.warn("component " + c.name, "port '" + p + "' labels no transition");
  }
  for (auto& i : sig.interactions) {
    if (!type_names.insert(i.name).second)
      rep.error("interaction " + i.name, "name clashes with another declaration");
    if (i.ports.empty()) rep.error("interaction " + i.name, "empty port tuple");
    for (auto& [ct, p] : i.ports) {
      const ComponentType* c = sig.component(ct);
      if (!c)
        rep.error("interaction " + i.name, "unknown component type '" + ct + "'");
      else if (!c->has_port(p))
        rep.error("interaction " + i.name,
                  "component type '" + ct + "' has no port '" + p + "'");
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Architectures, markings, configurations

struct Architecture {
  std::map<std::string, std::set<Index>> components;
  std::map<std::string, std::set<std::vector<Index>>> interactions;

  bool operator==(const Architecture& o) const = default;

  const std::set<Index>& of_component(const std::string& c) const {
    static const std::set<Index> empty;
    auto it = components.find(c);
    return it == components.end() ? empty : it->second;
  }
  const std::set<std::vector<Index>>& of_interaction(const std::string& i) const {
    static const std::set<std::vector<Index>> empty;
    auto it = interactions.find(i);
    return it == interactions.end() ? empty : it->second;
  }
  bool empty() const {
    for (auto& [k, v] : components)
      if (!v.empty()) return false;
    for (auto& [k, v] : interactions)
      if (!v.empty()) return false;
    return true;
  }
};

struct Place {
  std::string state;
  Index index;
  auto operator<=>(const Place&) const = default;
};

using Marking = std::set<Place>;

struct Configuration {
  Architecture architecture;
  Marking marking;
  bool operator==(const Configuration& o) const = default;
};

struct DisjointnessError : std::runtime_error {
  std::string type;
  std::string element;
  DisjointnessError(const std::string& t, const std::string& e)
      : std::runtime_error("composition undefined: '" + t + "' instance " + e +
                           " occurs on both sides"),
        type(t), element(e) {}
};

inline Configuration compose(const Configuration& c1, const Configuration& c2) {
  Configuration r = c1;
  for (auto& [t, set2] : c2.architecture.components) {
    auto& set1 = r.architecture.components[t];
    for (auto& u : set2) {
      if (!set1.insert(u).second) throw DisjointnessError(t, index_to_string(u));
    }
  }
  for (auto& [t, set2] : c2.architecture.interactions) {
    auto& set1 = r.architecture.interactions[t];
    for (auto& tup : set2) {
      std::string shown = "(";
      for (size_t i = 0; i < tup.size(); ++i)
        shown += (i ? "," : "") + index_to_string(tup[i]);
      shown += ")";
      if (!set1.insert(tup).second) throw DisjointnessError(t, shown);
    }
  }
  for (auto& p : c2.marking) r.marking.insert(p);
  return r;
}

// ---------------------------------------------------------------------------
// Tightness (Def: every interaction endpoint attaches to a present component)

struct TightnessWitness {
  std::string interaction;
  std::vector<Index> tuple;
  size_t position = 0;
};

struct TightnessResult {
  bool tight = true;
  std::optional<TightnessWitness> witness;
};

inline TightnessResult is_tight_architecture(const Architecture& a, const Signature& sig) {
  for (auto& [iname, tuples] : a.interactions) {
    const InteractionType* it = sig.interaction(iname);
    if (!it) return {false, TightnessWitness{iname, {}, 0}};
    for (auto& tup : tuples) {
      for (size_t k = 0; k < tup.size(); ++k) {
        const ComponentType* c = sig.position_type(*it, k);
        if (!c || !a.of_component(c->name).count(tup[k]))
          return {false, TightnessWitness{iname, tup, k}};
      }
    }
  }
  return {true, std::nullopt};
}

// ---------------------------------------------------------------------------
// Typed renamings and symmetry

struct TypedRenaming {
  // one finite bijection per component type, extended identically elsewhere
  std::map<std::string, std::map<Index, Index>> per_type;

  Index apply(const std::string& type, const Index& u) const {
    auto it = per_type.find(type);
    if (it == per_type.end()) return u;
    auto jt = it->second.find(u);
    return jt == it->second.end() ? u : jt->second;
  }
  TypedRenaming inverse() const {
    TypedRenaming r;
    for (auto& [t, f] : per_type)
      for (auto& [a, b] : f) r.per_type[t][b] = a;
    return r;
  }
  bool injective() const {
    for (auto& [t, f] : per_type) {
      std::set<Index> image;
      for (auto& [a, b] : f)
        if (!image.insert(b).second) return false;
    }
    return true;
  }
};

struct TightnessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Renames per component type; interaction tuple positions follow the type of
// the port at that position, markings follow the unique type owning the state.
inline Configuration rename_indices(const Configuration& c, const TypedRenaming& f,
                                    const Signature& sig) {
  Configuration r;
  for (auto& [t, set] : c.architecture.components) {
    auto& out = r.architecture.components[t];
    for (auto& u : set) out.insert(f.apply(t, u));
  }
  for (auto& [iname, tuples] : c.architecture.interactions) {
    const InteractionType* it = sig.interaction(iname);
    if (!it) throw TightnessError("unknown interaction type '" + iname + "'");
    auto& out = r.architecture.interactions[iname];
    for (auto& tup : tuples) {
      std::vector<Index> nt(tup.size());
      for (size_t k = 0; k < tup.size(); ++k) {
        const ComponentType* ct = sig.position_type(*it, k);
        if (!ct)
          throw TightnessError("interaction '" + iname + "' position " + std::to_string(k + 1) +
                               " resolves to no component type");
        if (!c.architecture.of_component(ct->name).count(tup[k]))
          throw TightnessError("architecture not tight: " + iname + " endpoint " +
                               index_to_string(tup[k]) + " missing from " + ct->name);
        nt[k] = f.apply(ct->name, tup[k]);
      }
      out.insert(nt);
    }
  }
  for (auto& p : c.marking) {
    const ComponentType* ct = sig.owner_of_state(p.state);
    if (!ct) throw TightnessError("marking state '" + p.state + "' belongs to no component type");
    r.marking.insert({p.state, f.apply(ct->name, p.index)});
  }
  return r;
}

namespace detail {

struct SymSearch {
  const Signature& sig;
  const Configuration &c1, &c2;
  std::vector<std::string> types;
  std::map<std::string, std::map<Index, Index>> assign;  // partial per-type map
  std::map<std::string, std::set<Index>> used;           // image per type

  SymSearch(const Signature& s, const Configuration& a, const Configuration& b)
      : sig(s), c1(a), c2(b) {}

  // state of an instance in a configuration, empty if unmarked
  static std::string state_of(const Configuration& c, const Signature& sig,
                              const std::string& type, const Index& u) {
    const ComponentType* ct = sig.component(type);
    if (!ct) return {};
    for (auto& q : ct->states)
      if (c.marking.count({q, u})) return q;
    return {};
  }

  // degree signature: per (interaction, position) incidence count, plus state
  static std::string signature_of(const Configuration& c, const Signature& sig,
                                  const std::string& type, const Index& u) {
    std::ostringstream os;
    os << state_of(c, sig, type, u) << '|';
    for (auto& it : sig.interactions) {
      for (size_t k = 0; k < it.arity(); ++k) {
        const ComponentType* ct = sig.position_type(it, k);
        if (!ct || ct->name != type) continue;
        int n = 0;
        for (auto& tup : c.architecture.of_interaction(it.name))
          if (tup[k] == u) ++n;
        os << it.name << ':' << k << '=' << n << ';';
      }
    }
    return os.str();
  }

  bool consistent() const {
    // every fully-assigned interaction tuple of c1 must map into c2, and the
    // mapped tuples must cover c2 exactly once each (checked at completion)
    for (auto& it : sig.interactions) {
      auto& t1 = c1.architecture.of_interaction(it.name);
      auto& t2 = c2.architecture.of_interaction(it.name);
      for (auto& tup : t1) {
        std::vector<Index> mapped(tup.size());
        bool complete = true;
        for (size_t k = 0; k < tup.size() && complete; ++k) {
          const ComponentType* ct = sig.position_type(it, k);
          auto at = assign.find(ct->name);
          if (at == assign.end()) { complete = false; break; }
          auto ut = at->second.find(tup[k]);
          if (ut == at->second.end()) { complete = false; break; }
          mapped[k] = ut->second;
        }
        if (complete && !t2.count(mapped)) return false;
      }
    }
    return true;
  }

  // flat worklist of (type, index) pairs to assign, one entry per c1 instance
  std::vector<std::pair<std::string, Index>> work;

  bool solve(size_t wi, const std::map<std::string, std::vector<Index>>& dom2) {
    if (wi == work.size()) return consistent();
    const auto& [t, u] = work[wi];
    std::string sig1 = signature_of(c1, sig, t, u);
    for (auto& v : dom2.at(t)) {
      if (used[t].count(v)) continue;
      if (signature_of(c2, sig, t, v) != sig1) continue;
      assign[t][u] = v;
      used[t].insert(v);
      if (consistent() && solve(wi + 1, dom2)) return true;
      assign[t].erase(u);
      used[t].erase(v);
    }
    return false;
  }
};

}  // namespace detail

// Backtracking search for a tuple of per-type bijections mapping c1 onto c2.
inline std::optional<TypedRenaming> find_symmetry(const Configuration& c1,
                                                  const Configuration& c2,
                                                  const Signature& sig) {
  // fast path: per-type cardinalities must agree
  std::map<std::string, std::vector<Index>> dom1, dom2;
  for (auto& c : sig.components) {
    auto& s1 = c1.architecture.of_component(c.name);
    auto& s2 = c2.architecture.of_component(c.name);
    if (s1.size() != s2.size()) return std::nullopt;
    dom1[c.name] = {s1.begin(), s1.end()};
    dom2[c.name] = {s2.begin(), s2.end()};
  }
  for (auto& it : sig.interactions)
    if (c1.architecture.of_interaction(it.name).size() !=
        c2.architecture.of_interaction(it.name).size())
      return std::nullopt;
  if (c1.marking.size() != c2.marking.size()) return std::nullopt;

  detail::SymSearch s(sig, c1, c2);
  for (auto& c : sig.components) {
    s.types.push_back(c.name);
    for (auto& u : dom1.at(c.name)) s.work.push_back({c.name, u});
  }
  if (!s.solve(0, dom2)) return std::nullopt;
  TypedRenaming f;
  f.per_type = s.assign;
  // witness check: the renaming must actually map c1 to c2
  if (!(rename_indices(c1, f, sig) == c2)) return std::nullopt;
  return f;
}

}  // namespace clv
