#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "clverify/index.hpp"

namespace clv {

// ---------------------------------------------------------------------------
// Terms: eps | x | tau.i, flattened as an optional variable plus a direction
// path.

struct WTerm {
  std::optional<std::string> var;  // nullopt = the root constant
  std::vector<int> path;

  static WTerm eps() { return {}; }
  static WTerm v(std::string name) {
    WTerm t;
    t.var = std::move(name);
    return t;
  }
  WTerm child(int d) const {
    WTerm t = *this;
    t.path.push_back(d);
    return t;
  }
  bool operator==(const WTerm&) const = default;
  std::string to_string() const {
    std::string s = var ? *var : "eps";
    for (int d : path) s += "." + std::to_string(d);
    return s;
  }
};

// ---------------------------------------------------------------------------
// Formulae. Core: TermEq, Member, And, Not, ExistsFO, ExistsSO. The rest are
// sugar nodes kept in the tree and expanded on demand.

enum class WK {
  TermEq, Member, And, Not, ExistsFO, ExistsSO,      // core
  Or, Implies, Iff, ForallFO, ForallSO,              // boolean / quantifier sugar
  SetEnumEq,                                         // X = {t1, ..., tn}
  CardGeq, CardEq                                    // |X| >= n, |X| = n
};

struct WsksFormula {
  WK kind = WK::And;
  std::string var;               // quantified variable; set variable for Member/SetEnumEq/Card*
  std::vector<WTerm> terms;      // TermEq: 2; Member: 1; SetEnumEq: the enumeration
  int n = 0;                     // Card*
  std::vector<WsksFormula> kids;

  bool operator==(const WsksFormula&) const = default;

  static WsksFormula tru() { return {}; }                       // empty conjunction
  static WsksFormula fls() { WsksFormula f; f.kind = WK::Or; return f; }
  static WsksFormula term_eq(WTerm a, WTerm b) {
    WsksFormula f;
    f.kind = WK::TermEq;
    f.terms = {std::move(a), std::move(b)};
    return f;
  }
  static WsksFormula member(std::string setvar, WTerm t) {
    WsksFormula f;
    f.kind = WK::Member;
    f.var = std::move(setvar);
    f.terms = {std::move(t)};
    return f;
  }
  static WsksFormula conj(std::vector<WsksFormula> kids) {
    WsksFormula f;
    f.kind = WK::And;
    f.kids = std::move(kids);
    return f;
  }
  static WsksFormula disj(std::vector<WsksFormula> kids) {
    WsksFormula f;
    f.kind = WK::Or;
    f.kids = std::move(kids);
    return f;
  }
  static WsksFormula neg(WsksFormula a) {
    WsksFormula f;
    f.kind = WK::Not;
    f.kids = {std::move(a)};
    return f;
  }
  static WsksFormula implies(WsksFormula a, WsksFormula b) {
    WsksFormula f;
    f.kind = WK::Implies;
    f.kids = {std::move(a), std::move(b)};
    return f;
  }
  static WsksFormula iff(WsksFormula a, WsksFormula b) {
    WsksFormula f;
    f.kind = WK::Iff;
    f.kids = {std::move(a), std::move(b)};
    return f;
  }
  static WsksFormula quant(WK k, std::string v, WsksFormula body) {
    WsksFormula f;
    f.kind = k;
    f.var = std::move(v);
    f.kids = {std::move(body)};
    return f;
  }
  static WsksFormula exists1(std::string v, WsksFormula b) { return quant(WK::ExistsFO, std::move(v), std::move(b)); }
  static WsksFormula forall1(std::string v, WsksFormula b) { return quant(WK::ForallFO, std::move(v), std::move(b)); }
  static WsksFormula exists2(std::string v, WsksFormula b) { return quant(WK::ExistsSO, std::move(v), std::move(b)); }
  static WsksFormula forall2(std::string v, WsksFormula b) { return quant(WK::ForallSO, std::move(v), std::move(b)); }
  static WsksFormula set_enum_eq(std::string setvar, std::vector<WTerm> ts) {
    WsksFormula f;
    f.kind = WK::SetEnumEq;
    f.var = std::move(setvar);
    f.terms = std::move(ts);
    return f;
  }
  static WsksFormula card_geq(std::string setvar, int n) {
    WsksFormula f;
    f.kind = WK::CardGeq;
    f.var = std::move(setvar);
    f.n = n;
    return f;
  }
  static WsksFormula card_eq(std::string setvar, int n) {
    WsksFormula f;
    f.kind = WK::CardEq;
    f.var = std::move(setvar);
    f.n = n;
    return f;
  }
};

// ---------------------------------------------------------------------------
// Sugar expansion into the core fragment (fresh names are deterministic)

namespace detail {
inline WsksFormula expand_sugar_rec(const WsksFormula& f, int& fresh) {
  using F = WsksFormula;
  auto expand_kids = [&](const WsksFormula& g) {
    std::vector<F> ks;
    for (auto& k : g.kids) ks.push_back(expand_sugar_rec(k, fresh));
    return ks;
  };
  switch (f.kind) {
    case WK::TermEq:
    case WK::Member: return f;
    case WK::And: return F::conj(expand_kids(f));
    case WK::Not: return F::neg(expand_sugar_rec(f.kids[0], fresh));
    case WK::ExistsFO:
    case WK::ExistsSO: return F::quant(f.kind, f.var, expand_sugar_rec(f.kids[0], fresh));
    case WK::Or: {
      // v A_i  ==  not (and not A_i)
      std::vector<F> ks;
      for (auto& k : expand_kids(f)) ks.push_back(F::neg(std::move(k)));
      return F::neg(F::conj(std::move(ks)));
    }
    case WK::Implies:
      return expand_sugar_rec(F::neg(F::conj({f.kids[0], F::neg(f.kids[1])})), fresh);
    case WK::Iff:
      return expand_sugar_rec(
          F::conj({F::implies(f.kids[0], f.kids[1]), F::implies(f.kids[1], f.kids[0])}), fresh);
    case WK::ForallFO:
      return F::neg(F::exists1(f.var, F::neg(expand_sugar_rec(f.kids[0], fresh))));
    case WK::ForallSO:
      return F::neg(F::exists2(f.var, F::neg(expand_sugar_rec(f.kids[0], fresh))));
    case WK::SetEnumEq: {
      // forall x . X(x) <-> (x = t1 or ... or x = tn)
      std::string x = "__s" + std::to_string(++fresh);
      std::vector<F> eqs;
      for (auto& t : f.terms) eqs.push_back(F::term_eq(WTerm::v(x), t));
      return expand_sugar_rec(
          F::forall1(x, F::iff(F::member(f.var, WTerm::v(x)), F::disj(std::move(eqs)))), fresh);
    }
    case WK::CardGeq: {
      // exists y1..yn, pairwise distinct, all in X
      std::vector<std::string> ys;
      for (int i = 0; i < f.n; ++i) ys.push_back("__c" + std::to_string(++fresh));
      std::vector<F> body;
      for (size_t i = 0; i < ys.size(); ++i)
        for (size_t j = i + 1; j < ys.size(); ++j)
          body.push_back(F::neg(F::term_eq(WTerm::v(ys[i]), WTerm::v(ys[j]))));
      for (auto& y : ys) body.push_back(F::member(f.var, WTerm::v(y)));
      F g = F::conj(std::move(body));
      for (auto it = ys.rbegin(); it != ys.rend(); ++it) g = F::exists1(*it, std::move(g));
      return g;
    }
    case WK::CardEq:
      return expand_sugar_rec(
          F::conj({F::card_geq(f.var, f.n), F::neg(F::card_geq(f.var, f.n + 1))}), fresh);
  }
  return f;
}
}  // namespace detail

inline WsksFormula expand_sugar(const WsksFormula& f) {
  int fresh = 0;
  return detail::expand_sugar_rec(f, fresh);
}

// ---------------------------------------------------------------------------
// Canonical s-expression dump (stable across runs, for goldens and diffs)

inline void sexpr_rec(const WsksFormula& f, std::ostream& os) {
  auto kids = [&](const char* head) {
    os << "(" << head;
    for (auto& k : f.kids) {
      os << " ";
      sexpr_rec(k, os);
    }
    os << ")";
  };
  switch (f.kind) {
    case WK::TermEq: os << "(= " << f.terms[0].to_string() << " " << f.terms[1].to_string() << ")"; return;
    case WK::Member: os << "(in " << f.var << " " << f.terms[0].to_string() << ")"; return;
    case WK::And: kids("and"); return;
    case WK::Or: kids("or"); return;
    case WK::Not: kids("not"); return;
    case WK::Implies: kids("->"); return;
    case WK::Iff: kids("<->"); return;
    case WK::ExistsFO: os << "(ex1 " << f.var << " "; sexpr_rec(f.kids[0], os); os << ")"; return;
    case WK::ForallFO: os << "(all1 " << f.var << " "; sexpr_rec(f.kids[0], os); os << ")"; return;
    case WK::ExistsSO: os << "(ex2 " << f.var << " "; sexpr_rec(f.kids[0], os); os << ")"; return;
    case WK::ForallSO: os << "(all2 " << f.var << " "; sexpr_rec(f.kids[0], os); os << ")"; return;
    case WK::SetEnumEq:
      os << "(seteq " << f.var;
      for (auto& t : f.terms) os << " " << t.to_string();
      os << ")";
      return;
    case WK::CardGeq: os << "(card>= " << f.var << " " << f.n << ")"; return;
    case WK::CardEq: os << "(card= " << f.var << " " << f.n << ")"; return;
  }
}

inline std::string sexpr(const WsksFormula& f) {
  std::ostringstream os;
  sexpr_rec(f, os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Valuations

struct Valuation {
  std::map<std::string, Index> fo;
  std::map<std::string, std::set<Index>> so;
};

inline std::set<std::string> free_set_vars(const WsksFormula& f) {
  std::set<std::string> bound, out;
  auto rec = [&](const WsksFormula& g, auto&& self) -> void {
    switch (g.kind) {
      case WK::Member:
      case WK::SetEnumEq:
      case WK::CardGeq:
      case WK::CardEq:
        if (!bound.count(g.var)) out.insert(g.var);
        break;
      case WK::ExistsSO:
      case WK::ForallSO: {
        bool fresh = bound.insert(g.var).second;
        self(g.kids[0], self);
        if (fresh) bound.erase(g.var);
        return;
      }
      default: break;
    }
    for (auto& k : g.kids) self(k, self);
  };
  rec(f, rec);
  return out;
}

inline std::set<std::string> free_first_order_vars(const WsksFormula& f) {
  std::set<std::string> bound, out;
  auto scan_term = [&](const WTerm& t) {
    if (t.var && !bound.count(*t.var)) out.insert(*t.var);
  };
  auto rec = [&](const WsksFormula& g, auto&& self) -> void {
    for (auto& t : g.terms) scan_term(t);
    if (g.kind == WK::ExistsFO || g.kind == WK::ForallFO) {
      bool fresh = bound.insert(g.var).second;
      self(g.kids[0], self);
      if (fresh) bound.erase(g.var);
      return;
    }
    for (auto& k : g.kids) self(k, self);
  };
  rec(f, rec);
  return out;
}

}  // namespace clv
