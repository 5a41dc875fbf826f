#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "clverify/model.hpp"

namespace clv {

// ---------------------------------------------------------------------------
// Configuration Logic formulae

enum class ClKind { Emp, Component, Interaction, Predicate, Star, Exists };

struct ClFormula {
  ClKind kind = ClKind::Emp;
  std::string name;                // component/interaction/predicate name; Exists: bound var
  std::optional<std::string> state;  // Component only; nullopt = stateless C(x)
  std::vector<std::string> vars;   // atom arguments
  std::vector<ClFormula> kids;     // Star: 2, Exists: 1

  bool operator==(const ClFormula&) const = default;

  static ClFormula emp() { return {}; }
  static ClFormula component(std::string type, std::optional<std::string> st, std::string var) {
    ClFormula f;
    f.kind = ClKind::Component;
    f.name = std::move(type);
    f.state = std::move(st);
    f.vars = {std::move(var)};
    return f;
  }
  static ClFormula interaction(std::string type, std::vector<std::string> args) {
    ClFormula f;
    f.kind = ClKind::Interaction;
    f.name = std::move(type);
    f.vars = std::move(args);
    return f;
  }
  static ClFormula predicate(std::string name, std::vector<std::string> args) {
    ClFormula f;
    f.kind = ClKind::Predicate;
    f.name = std::move(name);
    f.vars = std::move(args);
    return f;
  }
  static ClFormula star(ClFormula a, ClFormula b) {
    ClFormula f;
    f.kind = ClKind::Star;
    f.kids = {std::move(a), std::move(b)};
    return f;
  }
  static ClFormula exists(std::string var, ClFormula body) {
    ClFormula f;
    f.kind = ClKind::Exists;
    f.name = std::move(var);
    f.kids = {std::move(body)};
    return f;
  }
  static ClFormula star_all(std::vector<ClFormula> parts) {
    if (parts.empty()) return emp();
    ClFormula f = std::move(parts[0]);
    for (size_t i = 1; i < parts.size(); ++i) f = star(std::move(f), std::move(parts[i]));
    return f;
  }
};

// strips the quantifier prefix: returns (bound vars in binder order, matrix)
inline std::pair<std::vector<std::string>, const ClFormula*> strip_exists(const ClFormula& f) {
  std::vector<std::string> vars;
  const ClFormula* cur = &f;
  while (cur->kind == ClKind::Exists) {
    vars.push_back(cur->name);
    cur = &cur->kids[0];
  }
  return {vars, cur};
}

// atoms of a star-matrix, left to right
inline void collect_atoms(const ClFormula& f, std::vector<const ClFormula*>& out) {
  if (f.kind == ClKind::Star) {
    collect_atoms(f.kids[0], out);
    collect_atoms(f.kids[1], out);
  } else if (f.kind != ClKind::Emp) {
    out.push_back(&f);
  }
}

inline std::vector<const ClFormula*> atoms_of(const ClFormula& matrix) {
  std::vector<const ClFormula*> out;
  collect_atoms(matrix, out);
  return out;
}

inline void free_vars_into(const ClFormula& f, std::set<std::string>& bound,
                           std::set<std::string>& out) {
  switch (f.kind) {
    case ClKind::Emp: break;
    case ClKind::Component:
    case ClKind::Interaction:
    case ClKind::Predicate:
      for (auto& v : f.vars)
        if (!bound.count(v)) out.insert(v);
      break;
    case ClKind::Star:
      free_vars_into(f.kids[0], bound, out);
      free_vars_into(f.kids[1], bound, out);
      break;
    case ClKind::Exists: {
      bool fresh = bound.insert(f.name).second;
      free_vars_into(f.kids[0], bound, out);
      if (fresh) bound.erase(f.name);
      break;
    }
  }
}

inline std::set<std::string> free_vars(const ClFormula& f) {
  std::set<std::string> bound, out;
  free_vars_into(f, bound, out);
  return out;
}

inline int npred(const ClFormula& f) {
  switch (f.kind) {
    case ClKind::Predicate: return 1;
    case ClKind::Star: return npred(f.kids[0]) + npred(f.kids[1]);
    case ClKind::Exists: return npred(f.kids[0]);
    default: return 0;
  }
}

// capture-free variable substitution (callers guarantee freshness)
inline void substitute(ClFormula& f, const std::map<std::string, std::string>& sub) {
  switch (f.kind) {
    case ClKind::Component:
    case ClKind::Interaction:
    case ClKind::Predicate:
      for (auto& v : f.vars) {
        auto it = sub.find(v);
        if (it != sub.end()) v = it->second;
      }
      break;
    case ClKind::Star:
      substitute(f.kids[0], sub);
      substitute(f.kids[1], sub);
      break;
    case ClKind::Exists: {
      auto it = sub.find(f.name);
      if (it != sub.end()) f.name = it->second;
      substitute(f.kids[0], sub);
      break;
    }
    default: break;
  }
}

inline std::string print_formula(const ClFormula& f) {
  switch (f.kind) {
    case ClKind::Emp: return "emp";
    case ClKind::Component:
      return f.name + (f.state ? "@" + *f.state : "") + "(" + f.vars[0] + ")";
    case ClKind::Interaction:
    case ClKind::Predicate: {
      std::string s = f.name + "(";
      for (size_t i = 0; i < f.vars.size(); ++i) s += (i ? ", " : "") + f.vars[i];
      return s + ")";
    }
    case ClKind::Star:
      return print_formula(f.kids[0]) + " * " + print_formula(f.kids[1]);
    case ClKind::Exists: {
      // fold a run of binders into one 'exists'
      std::string s = "exists";
      const ClFormula* cur = &f;
      while (cur->kind == ClKind::Exists) {
        s += " " + cur->name;
        cur = &cur->kids[0];
      }
      return s + " . " + print_formula(*cur);
    }
  }
  return "";
}

// ---------------------------------------------------------------------------
// Rules, SIDs, specs

struct SourcePos {
  int line = 0, col = 0;
  bool operator==(const SourcePos&) const { return true; }  // positions are not identity
};

struct Rule {
  std::string head;
  std::vector<std::string> params;
  ClFormula body;
  SourcePos pos;
  bool operator==(const Rule& o) const {
    return head == o.head && params == o.params && body == o.body;
  }
};

struct Sid {
  std::vector<Rule> rules;

  // kappa: max predicate-atom count over rule bodies, at least 1
  int kappa() const {
    int k = 1;
    for (auto& r : rules) k = std::max(k, npred(r.body));
    return k;
  }
  std::vector<int> rules_of(const std::string& pred) const {
    std::vector<int> out;
    for (size_t i = 0; i < rules.size(); ++i)
      if (rules[i].head == pred) out.push_back((int)i);
    return out;
  }
  bool operator==(const Sid& o) const = default;
};

struct Spec {
  Signature signature;
  Sid sid;
  std::map<std::string, int> predicate_arity;          // declared via rule heads
  std::map<std::string, ClFormula> named_sentences;    // zero-arity predicates, as atoms

  bool operator==(const Spec& o) const {
    return signature.components.size() == o.signature.components.size() && sid == o.sid;
  }
};

inline std::string print_rule(const Rule& r) {
  std::string s = r.head + "(";
  for (size_t i = 0; i < r.params.size(); ++i) s += (i ? ", " : "") + r.params[i];
  return s + ") <= " + print_formula(r.body) + ";";
}

inline std::string print_spec(const Spec& sp) {
  std::ostringstream os;
  for (auto& c : sp.signature.components) {
    os << "component " << c.name << " {\n  ports:";
    for (size_t i = 0; i < c.ports.size(); ++i) os << (i ? "," : "") << " " << c.ports[i];
    os << ";\n  states:";
    for (size_t i = 0; i < c.states.size(); ++i) os << (i ? "," : "") << " " << c.states[i];
    os << ";\n";
    for (auto& t : c.transitions)
      os << "  " << t.from << " -" << t.port << "-> " << t.to << ";\n";
    os << "}\n";
  }
  for (auto& it : sp.signature.interactions) {
    os << "interaction " << it.name << " = (";
    for (size_t i = 0; i < it.ports.size(); ++i)
      os << (i ? ", " : "") << it.ports[i].first << "." << it.ports[i].second;
    os << ");\n";
  }
  for (auto& r : sp.sid.rules) os << print_rule(r) << "\n";
  return os.str();
}

}  // namespace clv
