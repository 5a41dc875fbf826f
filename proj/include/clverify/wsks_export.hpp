#pragma once

#include "clverify/wsks.hpp"

namespace clv {

// Text export targeting the MONA-family ws2s grammar. The emitter is a pure
// text generator; kappa <= 2 maps tree successors natively (direction d to
// .0/.1), larger arities use the first-child/next-sibling binary encoding
// (child d = .0 followed by d-1 times .1). The empty path has no literal in
// the target grammar, so formulae are closed under one first-order variable
// vroot constrained to be the unique predecessor-free position.

namespace exdetail {

struct Emitter {
  int kappa;
  bool fcns;
  int fresh = 0;
  std::ostringstream os;

  std::string fresh_var(const char* stem) { return std::string(stem) + std::to_string(++fresh); }

  std::string term(const WTerm& t) {
    std::string s = t.var ? *t.var : "vroot";
    for (int d : t.path) {
      if (fcns) {
        s += ".0";
        for (int k = 1; k < d; ++k) s += ".1";
      } else {
        s += "." + std::to_string(d - 1);
      }
    }
    return s;
  }

  void emit(const WsksFormula& f) {
    using K = WK;
    switch (f.kind) {
      case K::TermEq:
        os << "(" << term(f.terms[0]) << " = " << term(f.terms[1]) << ")";
        return;
      case K::Member:
        os << "(" << term(f.terms[0]) << " in " << f.var << ")";
        return;
      case K::And:
      case K::Or: {
        const char* op = f.kind == K::And ? " & " : " | ";
        if (f.kids.empty()) {
          os << (f.kind == K::And ? "true" : "false");
          return;
        }
        os << "(";
        for (size_t i = 0; i < f.kids.size(); ++i) {
          if (i) os << op;
          emit(f.kids[i]);
        }
        os << ")";
        return;
      }
      case K::Not:
        os << "~";
        emit(f.kids[0]);
        return;
      case K::Implies:
        os << "(";
        emit(f.kids[0]);
        os << " => ";
        emit(f.kids[1]);
        os << ")";
        return;
      case K::Iff:
        os << "(";
        emit(f.kids[0]);
        os << " <=> ";
        emit(f.kids[1]);
        os << ")";
        return;
      case K::ExistsFO:
      case K::ForallFO:
      case K::ExistsSO:
      case K::ForallSO: {
        const char* q = f.kind == K::ExistsFO   ? "ex1"
                        : f.kind == K::ForallFO ? "all1"
                        : f.kind == K::ExistsSO ? "ex2"
                                                : "all2";
        os << "(" << q << " " << f.var << ": ";
        emit(f.kids[0]);
        os << ")";
        return;
      }
      case K::SetEnumEq: {
        std::string x = fresh_var("q");
        os << "(all1 " << x << ": (" << x << " in " << f.var << " <=> ";
        if (f.terms.empty()) {
          os << "false";
        } else {
          os << "(";
          for (size_t i = 0; i < f.terms.size(); ++i) {
            if (i) os << " | ";
            os << x << " = " << term(f.terms[i]);
          }
          os << ")";
        }
        os << "))";
        return;
      }
      case K::CardGeq: {
        if (f.n == 0) {
          os << "true";
          return;
        }
        std::vector<std::string> ys;
        for (int i = 0; i < f.n; ++i) ys.push_back(fresh_var("c"));
        os << "(";
        for (auto& y : ys) os << "ex1 " << y << ": ";
        os << "(";
        bool first = true;
        for (size_t i = 0; i < ys.size(); ++i)
          for (size_t j = i + 1; j < ys.size(); ++j) {
            if (!first) os << " & ";
            os << "~(" << ys[i] << " = " << ys[j] << ")";
            first = false;
          }
        for (auto& y : ys) {
          if (!first) os << " & ";
          os << y << " in " << f.var;
          first = false;
        }
        os << "))";
        return;
      }
      case K::CardEq: {
        emit(WsksFormula::conj({WsksFormula::card_geq(f.var, f.n),
                                WsksFormula::neg(WsksFormula::card_geq(f.var, f.n + 1))}));
        return;
      }
    }
  }
};

}  // namespace exdetail

inline std::string export_solver(const WsksFormula& f, int kappa,
                                 const std::string& comment = "") {
  exdetail::Emitter em;
  em.kappa = kappa;
  em.fcns = kappa > 2;
  std::ostringstream out;
  out << "ws2s;\n";
  out << "# generated by clverify; kappa = " << kappa << "\n";
  if (em.fcns)
    out << "# kappa > 2: first-child/next-sibling encoding, child d = .0 then (d-1) x .1\n";
  else
    out << "# native binary successors: direction d maps to ." << "0/.1\n";
  out << "# vroot stands for the empty path (the unique predecessor-free position)\n";
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "pred isroot(var1 x) = ~(ex1 y: (y.0 = x | y.1 = x));\n";

  auto so = free_set_vars(f);
  auto fo = free_first_order_vars(f);
  if (!so.empty()) {
    out << "var2";
    bool first = true;
    for (auto& v : so) {
      out << (first ? " " : ", ") << v;
      first = false;
    }
    out << ";\n";
  }
  if (!fo.empty()) {
    out << "var1";
    bool first = true;
    for (auto& v : fo) {
      out << (first ? " " : ", ") << v;
      first = false;
    }
    out << ";\n";
  }
  em.os << "(ex1 vroot: (isroot(vroot) & ";
  em.emit(f);
  em.os << "))";
  out << em.os.str() << ";\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// A parser for the emitted subset, used as the grammar check in tests.

namespace exdetail {

struct GrammarCheck {
  const std::string& s;
  size_t i = 0;
  explicit GrammarCheck(const std::string& text) : s(text) {}

  void ws() {
    while (i < s.size()) {
      if (isspace((unsigned char)s[i])) { ++i; continue; }
      if (s[i] == '#') {
        while (i < s.size() && s[i] != '\n') ++i;
        continue;
      }
      break;
    }
  }
  bool lit(const std::string& t) {
    ws();
    if (s.compare(i, t.size(), t) == 0) {
      i += t.size();
      return true;
    }
    return false;
  }
  bool ident() {
    ws();
    size_t start = i;
    while (i < s.size() && (isalnum((unsigned char)s[i]) || s[i] == '_')) ++i;
    return i > start;
  }
  bool term() {
    if (!ident()) return false;
    while (i < s.size() && s[i] == '.') {
      ++i;
      size_t start = i;
      while (i < s.size() && isdigit((unsigned char)s[i])) ++i;
      if (i == start) return false;
    }
    return true;
  }
  bool formula() {
    ws();
    if (lit("true") || lit("false")) return true;
    if (lit("~")) return formula();
    if (lit("ex1") || lit("all1") || lit("ex2") || lit("all2")) {
      if (!ident()) return false;
      if (!lit(":")) return false;
      return formula();
    }
    if (lit("isroot(")) {
      if (!term()) return false;
      return lit(")");
    }
    if (lit("(")) {
      // either a parenthesized formula chain or an atomic term relation
      size_t save = i;
      if (formula()) {
        while (lit("&") || lit("|") || lit("=>") || lit("<=>")) {
          if (!formula()) return false;
        }
        return lit(")");
      }
      i = save;
      if (!term()) return false;
      if (lit("=")) {
        if (!term()) return false;
      } else if (lit("in")) {
        if (!ident()) return false;
      } else {
        return false;
      }
      return lit(")");
    }
    // bare atomic relation
    size_t save = i;
    if (term()) {
      if (lit("=")) return term();
      if (lit("in")) return ident();
    }
    i = save;
    return false;
  }
  bool file() {
    if (!lit("ws2s") || !lit(";")) return false;
    ws();
    for (;;) {
      if (lit("pred")) {
        if (!ident() || !lit("(") || !lit("var1") || !ident() || !lit(")") || !lit("=")) return false;
        if (!formula() || !lit(";")) return false;
        continue;
      }
      if (lit("var2") || lit("var1")) {
        if (!ident()) return false;
        while (lit(","))
          if (!ident()) return false;
        if (!lit(";")) return false;
        continue;
      }
      break;
    }
    if (!formula() || !lit(";")) return false;
    ws();
    return i == s.size();
  }
};

}  // namespace exdetail

inline bool export_grammar_ok(const std::string& text) {
  exdetail::GrammarCheck g(text);
  return g.file();
}

}  // namespace clv
